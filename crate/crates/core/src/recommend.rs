//! Item-item collaborative filtering over binary bookmarks, padded with
//! TF-IDF content recommendations when collaborative evidence runs short.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{Dataset, PaperId, PersonId};
use crate::textsim::TfIdfModel;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum RecommendError {
    #[error("unknown paper id \"{0}\"")]
    UnknownPaper(PaperId),
    #[error("number of recommendations must be at least 1")]
    ZeroLength,
}

/// Binary attendee × paper matrix, stored both row- and column-wise.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RatingsMatrix {
    rows: BTreeMap<PersonId, BTreeSet<PaperId>>,
    columns: BTreeMap<PaperId, BTreeSet<PersonId>>,
}

impl RatingsMatrix {
    /// Every corpus paper gets a (possibly empty) column; attendees with no
    /// bookmarks get no row.
    pub fn new<'a>(
        papers: impl IntoIterator<Item = &'a PaperId>,
        bookmarks: impl IntoIterator<Item = (&'a PersonId, &'a BTreeSet<PaperId>)>,
    ) -> Result<Self, RecommendError> {
        let mut m = RatingsMatrix {
            rows: BTreeMap::new(),
            columns: papers.into_iter().map(|p| (p.clone(), BTreeSet::new())).collect(),
        };
        for (person, set) in bookmarks {
            for p in set {
                m.insert(person, p)?;
            }
        }
        Ok(m)
    }

    pub fn from_dataset(dataset: &Dataset) -> Self {
        let ids = dataset.paper_ids();
        Self::new(
            ids.iter(),
            dataset.bookmarks.iter().map(|b| (&b.attendee_id, &b.paper_ids)),
        )
        .expect("validated dataset bookmarks reference corpus papers")
    }

    pub fn insert(&mut self, person: &PersonId, paper: &PaperId) -> Result<(), RecommendError> {
        let col = self
            .columns
            .get_mut(paper)
            .ok_or_else(|| RecommendError::UnknownPaper(paper.clone()))?;
        col.insert(person.clone());
        self.rows.entry(person.clone()).or_default().insert(paper.clone());
        Ok(())
    }

    pub fn bookmarks(&self, person: &PersonId) -> Option<&BTreeSet<PaperId>> {
        self.rows.get(person)
    }

    pub fn column(&self, paper: &PaperId) -> Option<&BTreeSet<PersonId>> {
        self.columns.get(paper)
    }

    pub fn papers(&self) -> impl Iterator<Item = &PaperId> {
        self.columns.keys()
    }

    pub fn attendees(&self) -> impl Iterator<Item = &PersonId> {
        self.rows.keys()
    }

    /// Bookmark count per paper, including zeros.
    pub fn popularity(&self) -> BTreeMap<&PaperId, usize> {
        self.columns.iter().map(|(p, c)| (p, c.len())).collect()
    }

    fn column_or_err(&self, p: &PaperId) -> Result<&BTreeSet<PersonId>, RecommendError> {
        self.columns
            .get(p)
            .ok_or_else(|| RecommendError::UnknownPaper(p.clone()))
    }
}

/// Cosine of two binary bookmark columns; zero when either is empty.
pub fn item_similarity(ratings: &RatingsMatrix, p: &PaperId, q: &PaperId) -> Result<f64, RecommendError> {
    let a = ratings.column_or_err(p)?;
    let b = ratings.column_or_err(q)?;
    if a.is_empty() || b.is_empty() {
        return Ok(0.0);
    }
    let co = a.intersection(b).count() as f64;
    Ok(co / ((a.len() * b.len()) as f64).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    Collaborative,
    Content,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub paper_id: PaperId,
    pub score: f64,
    pub basis: Basis,
}

fn ranked(mut scored: Vec<(PaperId, f64)>) -> Vec<(PaperId, f64)> {
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    scored
}

/// Up to `k` papers for `user`: positive collaborative scores first, then
/// content padding. Unknown users are cold and get global popularity.
pub fn recommend(
    ratings: &RatingsMatrix,
    tfidf: &TfIdfModel,
    user: &PersonId,
    k: usize,
) -> Result<Vec<Recommendation>, RecommendError> {
    if k == 0 {
        return Err(RecommendError::ZeroLength);
    }
    let empty = BTreeSet::new();
    let mine = ratings.bookmarks(user).unwrap_or(&empty);

    if mine.is_empty() {
        let by_popularity = ranked(
            ratings
                .popularity()
                .into_iter()
                .map(|(p, n)| (p.clone(), n as f64))
                .collect(),
        );
        return Ok(by_popularity
            .into_iter()
            .take(k)
            .map(|(paper_id, score)| Recommendation {
                paper_id,
                score,
                basis: Basis::Content,
            })
            .collect());
    }

    // Co-occurrence counts between each of my papers and every other paper,
    // gathered through the attendees who bookmarked my papers.
    let mut scores: BTreeMap<&PaperId, f64> = BTreeMap::new();
    for j in mine {
        let col_j = ratings.column_or_err(j)?;
        let mut co: BTreeMap<&PaperId, usize> = BTreeMap::new();
        for person in col_j {
            for i in ratings.rows.get(person).into_iter().flatten() {
                if !mine.contains(i) {
                    *co.entry(i).or_default() += 1;
                }
            }
        }
        for (i, c) in co {
            let col_i = ratings.column_or_err(i)?;
            *scores.entry(i).or_default() += c as f64 / ((col_i.len() * col_j.len()) as f64).sqrt();
        }
    }
    let collaborative = ranked(
        scores
            .into_iter()
            .filter(|(_, s)| *s > 0.0)
            .map(|(p, s)| (p.clone(), s))
            .collect(),
    );

    let mut out: Vec<Recommendation> = collaborative
        .into_iter()
        .take(k)
        .map(|(paper_id, score)| Recommendation {
            paper_id,
            score,
            basis: Basis::Collaborative,
        })
        .collect();

    if out.len() < k {
        let taken: BTreeSet<PaperId> = out.iter().map(|r| r.paper_id.clone()).collect();
        let mut content = Vec::new();
        for i in ratings.papers() {
            if mine.contains(i) || taken.contains(i) {
                continue;
            }
            let mut best = 0.0f64;
            for j in mine {
                // Papers missing from the text model contribute nothing.
                if let Ok(c) = tfidf.cosine(i, j) {
                    best = best.max(c);
                }
            }
            content.push((i.clone(), best));
        }
        out.extend(ranked(content).into_iter().take(k - out.len()).map(|(paper_id, score)| {
            Recommendation {
                paper_id,
                score,
                basis: Basis::Content,
            }
        }));
    }
    Ok(out)
}
