//! Preference sets, co-preference affinity matrices, popularity, the
//! participation/coverage summary, and the author-vs-attendee comparison.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::corpus::{AuthorResponse, Dataset, PaperId, PersonId};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum AffinityError {
    #[error("corpus size must be at least 1")]
    EmptyCorpus,
    #[error("blend weights must be non-negative and not all zero")]
    InvalidWeights,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreferenceSource {
    AuthorInterest,
    AttendeeBookmark,
}

/// Per-person "want to see" sets from one source.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreferenceSets {
    pub source: PreferenceSource,
    pub sets: BTreeMap<PersonId, BTreeSet<PaperId>>,
}

impl PreferenceSets {
    pub fn new(source: PreferenceSource) -> Self {
        PreferenceSets {
            source,
            sets: BTreeMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }
}

/// Author interest sets are merged across all of an author's responses,
/// so each person contributes once. Bookmarks map through unchanged.
pub fn extract_preferences(dataset: &Dataset, source: PreferenceSource) -> PreferenceSets {
    let mut prefs = PreferenceSets::new(source);
    match source {
        PreferenceSource::AuthorInterest => {
            for r in &dataset.author_responses {
                if r.interest.is_empty() {
                    continue;
                }
                prefs
                    .sets
                    .entry(r.author_id.clone())
                    .or_default()
                    .extend(r.interest.iter().cloned());
            }
        }
        PreferenceSource::AttendeeBookmark => {
            for b in &dataset.bookmarks {
                if b.paper_ids.is_empty() {
                    continue;
                }
                prefs
                    .sets
                    .entry(b.attendee_id.clone())
                    .or_default()
                    .extend(b.paper_ids.iter().cloned());
            }
        }
    }
    prefs
}

/// Unordered pair of distinct papers, stored with `lo < hi`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PaperPair {
    pub lo: PaperId,
    pub hi: PaperId,
}

impl PaperPair {
    /// `None` for a self-pair.
    pub fn new(a: &PaperId, b: &PaperId) -> Option<Self> {
        match a.cmp(b) {
            std::cmp::Ordering::Less => Some(PaperPair {
                lo: a.clone(),
                hi: b.clone(),
            }),
            std::cmp::Ordering::Greater => Some(PaperPair {
                lo: b.clone(),
                hi: a.clone(),
            }),
            std::cmp::Ordering::Equal => None,
        }
    }
}

impl fmt::Display for PaperPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{}}}", self.lo, self.hi)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AffinitySource {
    AuthorInterest,
    AttendeeBookmark,
    Blended,
}

impl From<PreferenceSource> for AffinitySource {
    fn from(s: PreferenceSource) -> Self {
        match s {
            PreferenceSource::AuthorInterest => AffinitySource::AuthorInterest,
            PreferenceSource::AttendeeBookmark => AffinitySource::AttendeeBookmark,
        }
    }
}

/// Sparse symmetric pair weights. Absent pairs weigh zero; stored values
/// are always positive.
#[derive(Clone, Debug, PartialEq)]
pub struct AffinityMatrix {
    pub source: AffinitySource,
    counts: BTreeMap<PaperPair, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub p: PaperId,
    pub q: PaperId,
    pub count: f64,
}

impl AffinityMatrix {
    pub fn empty(source: AffinitySource) -> Self {
        AffinityMatrix {
            source,
            counts: BTreeMap::new(),
        }
    }

    pub fn get(&self, p: &PaperId, q: &PaperId) -> f64 {
        PaperPair::new(p, q)
            .and_then(|k| self.counts.get(&k).copied())
            .unwrap_or(0.0)
    }

    pub fn get_pair(&self, pair: &PaperPair) -> f64 {
        self.counts.get(pair).copied().unwrap_or(0.0)
    }

    /// Adds `w` to the pair weight; self-pairs and non-positive totals are
    /// not stored.
    pub fn add(&mut self, p: &PaperId, q: &PaperId, w: f64) {
        if let Some(key) = PaperPair::new(p, q) {
            let entry = self.counts.entry(key.clone()).or_insert(0.0);
            *entry += w;
            if *entry <= 0.0 {
                self.counts.remove(&key);
            }
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&PaperPair, f64)> {
        self.counts.iter().map(|(k, &v)| (k, v))
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.counts.values().sum()
    }

    pub fn to_records(&self) -> Vec<PairRecord> {
        self.iter()
            .map(|(k, count)| PairRecord {
                p: k.lo.clone(),
                q: k.hi.clone(),
                count,
            })
            .collect()
    }

    pub fn from_records(source: AffinitySource, records: &[PairRecord]) -> Self {
        let mut m = AffinityMatrix::empty(source);
        for r in records {
            m.add(&r.p, &r.q, r.count);
        }
        m
    }
}

/// count{p,q} = number of persons whose set holds both papers.
pub fn build_affinity(prefs: &PreferenceSets) -> AffinityMatrix {
    let mut m = AffinityMatrix::empty(prefs.source.into());
    for set in prefs.sets.values() {
        let papers: Vec<&PaperId> = set.iter().collect();
        for (i, p) in papers.iter().enumerate() {
            for q in &papers[i + 1..] {
                m.add(p, q, 1.0);
            }
        }
    }
    m
}

/// Number of persons whose set contains each paper. Unmarked papers are
/// absent.
pub fn popularity(prefs: &PreferenceSets) -> BTreeMap<PaperId, u64> {
    let mut out: BTreeMap<PaperId, u64> = BTreeMap::new();
    for set in prefs.sets.values() {
        for p in set {
            *out.entry(p.clone()).or_default() += 1;
        }
    }
    out
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub median: u64,
    /// Population standard deviation.
    pub stddev: f64,
    pub min: u64,
    pub max: u64,
}

impl Summary {
    /// Median is the lower middle element for even counts.
    pub fn of(values: &[u64]) -> Summary {
        if values.is_empty() {
            return Summary::default();
        }
        let mut sorted = values.to_vec();
        sorted.sort_unstable();
        let n = sorted.len() as f64;
        let mean = sorted.iter().sum::<u64>() as f64 / n;
        let var = sorted
            .iter()
            .map(|&v| (v as f64 - mean).powi(2))
            .sum::<f64>()
            / n;
        Summary {
            mean,
            median: sorted[(sorted.len() - 1) / 2],
            stddev: var.sqrt(),
            min: sorted[0],
            max: sorted[sorted.len() - 1],
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ParticipationStats {
    pub n_participants: usize,
    pub n_unique_papers_marked: usize,
    pub n_preferences: usize,
    pub per_participant: Summary,
    /// Over marked papers only.
    pub per_paper: Summary,
    pub coverage_fraction: f64,
    /// Set when the preference sets were empty; all figures are zero.
    pub empty: bool,
}

pub fn participation_stats(
    prefs: &PreferenceSets,
    corpus_size: usize,
) -> Result<ParticipationStats, AffinityError> {
    if corpus_size == 0 {
        return Err(AffinityError::EmptyCorpus);
    }
    if prefs.is_empty() {
        return Ok(ParticipationStats {
            empty: true,
            ..Default::default()
        });
    }
    let sizes: Vec<u64> = prefs.sets.values().map(|s| s.len() as u64).collect();
    let per_paper: Vec<u64> = popularity(prefs).into_values().collect();
    Ok(ParticipationStats {
        n_participants: prefs.len(),
        n_unique_papers_marked: per_paper.len(),
        n_preferences: sizes.iter().sum::<u64>() as usize,
        per_participant: Summary::of(&sizes),
        per_paper: Summary::of(&per_paper),
        coverage_fraction: per_paper.len() as f64 / corpus_size as f64,
        empty: false,
    })
}

/// Plain-text two-column participation table.
pub fn render_stats_table(author: &ParticipationStats, attendee: &ParticipationStats) -> String {
    fn summary(s: &Summary) -> String {
        format!(
            "mean: {:.2} median: {} std-dev: {:.2} min: {} max: {}",
            s.mean, s.median, s.stddev, s.min, s.max
        )
    }
    let rows: [(&str, String, String); 5] = [
        (
            "# of participants",
            author.n_participants.to_string(),
            attendee.n_participants.to_string(),
        ),
        (
            "# unique papers marked",
            format!(
                "{} ({:.2}% of all the papers)",
                author.n_unique_papers_marked,
                author.coverage_fraction * 100.0
            ),
            format!(
                "{} ({:.2}% of all the papers)",
                attendee.n_unique_papers_marked,
                attendee.coverage_fraction * 100.0
            ),
        ),
        (
            "# preferences marked",
            author.n_preferences.to_string(),
            attendee.n_preferences.to_string(),
        ),
        (
            "# preferences per participant",
            summary(&author.per_participant),
            summary(&attendee.per_participant),
        ),
        (
            "# of participants' preferences per paper",
            summary(&author.per_paper),
            summary(&attendee.per_paper),
        ),
    ];
    let w0 = rows.iter().map(|r| r.0.len()).max().unwrap_or(0).max("Metric".len());
    let w1 = rows.iter().map(|r| r.1.len()).max().unwrap_or(0).max("Author-Sourcing".len());
    let mut out = String::new();
    let _ = writeln!(out, "{:<w0$} | {:<w1$} | Attendee-Sourcing", "Metric", "Author-Sourcing");
    let _ = writeln!(out, "{}", "-".repeat(w0 + w1 + 24));
    for (label, a, b) in rows {
        let _ = writeln!(out, "{label:<w0$} | {a:<w1$} | {b}");
    }
    out
}

/// Strictness thresholds for the source comparison. All tests are `>`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub strong_author: f64,
    pub strong_attendee: f64,
    pub big_difference: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            strong_author: 5.0,
            strong_attendee: 10.0,
            big_difference: 10.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairDiff {
    pub pair: PaperPair,
    pub attendee: f64,
    pub author: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffinityComparison {
    pub thresholds: Thresholds,
    /// Attendee affinity zero, author affinity strong.
    pub superset_violations: Vec<PairDiff>,
    /// Attendee affinity weak (at most the attendee threshold), author strong.
    pub weak_vs_strong: Vec<PairDiff>,
    /// Author affinity zero, attendee affinity strong.
    pub zero_vs_strong: Vec<PairDiff>,
    pub big_difference: Vec<PairDiff>,
}

impl AffinityComparison {
    pub fn is_empty(&self) -> bool {
        self.superset_violations.is_empty()
            && self.weak_vs_strong.is_empty()
            && self.zero_vs_strong.is_empty()
            && self.big_difference.is_empty()
    }
}

pub fn compare_sources(
    attendee: &AffinityMatrix,
    author: &AffinityMatrix,
    thresholds: Thresholds,
) -> AffinityComparison {
    let pairs: BTreeSet<&PaperPair> = attendee.counts.keys().chain(author.counts.keys()).collect();
    let mut cmp = AffinityComparison {
        thresholds,
        superset_violations: vec![],
        weak_vs_strong: vec![],
        zero_vs_strong: vec![],
        big_difference: vec![],
    };
    for pair in pairs {
        let att = attendee.get_pair(pair);
        let auth = author.get_pair(pair);
        let diff = || PairDiff {
            pair: pair.clone(),
            attendee: att,
            author: auth,
        };
        let author_strong = auth > thresholds.strong_author;
        if att == 0.0 && author_strong {
            cmp.superset_violations.push(diff());
        }
        if att <= thresholds.strong_attendee && author_strong {
            cmp.weak_vs_strong.push(diff());
        }
        if auth == 0.0 && att > thresholds.strong_attendee {
            cmp.zero_vs_strong.push(diff());
        }
        if (att - auth).abs() > thresholds.big_difference {
            cmp.big_difference.push(diff());
        }
    }
    cmp
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlendWeights {
    pub attendee: f64,
    pub interest: f64,
    pub relevance: f64,
}

impl Default for BlendWeights {
    fn default() -> Self {
        BlendWeights {
            attendee: 1.0,
            interest: 1.0,
            relevance: 2.0,
        }
    }
}

/// Relevance marks as a pair matrix: each response adds the level it gave
/// paper q to the pair {anchor, q}.
pub fn relevance_matrix(responses: &[AuthorResponse]) -> AffinityMatrix {
    let mut m = AffinityMatrix::empty(AffinitySource::AuthorInterest);
    for r in responses {
        for (q, &level) in &r.relevance {
            if level > 0 {
                m.add(&r.anchor_paper_id, q, f64::from(level));
            }
        }
    }
    m
}

pub fn blend_affinity(
    attendee: &AffinityMatrix,
    author_interest: &AffinityMatrix,
    relevance_marks: &[AuthorResponse],
    weights: BlendWeights,
) -> Result<AffinityMatrix, AffinityError> {
    let ws = [weights.attendee, weights.interest, weights.relevance];
    if ws.iter().any(|w| w.is_nan() || *w < 0.0) || ws.iter().all(|&w| w == 0.0) {
        return Err(AffinityError::InvalidWeights);
    }
    let relevance = relevance_matrix(relevance_marks);
    let mut out = AffinityMatrix::empty(AffinitySource::Blended);
    for (m, w) in [(attendee, ws[0]), (author_interest, ws[1]), (&relevance, ws[2])] {
        if w == 0.0 {
            continue;
        }
        for (pair, v) in m.iter() {
            *out.counts.entry(pair.clone()).or_insert(0.0) += w * v;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sets(source: PreferenceSource, raw: &[&[&str]]) -> PreferenceSets {
        let mut prefs = PreferenceSets::new(source);
        for (i, set) in raw.iter().enumerate() {
            prefs.sets.insert(
                PersonId::new(format!("u{i}")),
                set.iter().map(|&p| p.into()).collect(),
            );
        }
        prefs
    }

    fn fixture() -> PreferenceSets {
        sets(
            PreferenceSource::AttendeeBookmark,
            &[&["p1", "p2", "p3"], &["p1", "p2"], &["p2", "p3"]],
        )
    }

    #[test]
    fn fixture_affinity_matches_hand_enumeration() {
        let m = build_affinity(&fixture());
        assert_eq!(m.len(), 3);
        assert_eq!(m.get(&"p1".into(), &"p2".into()), 2.0);
        assert_eq!(m.get(&"p3".into(), &"p2".into()), 2.0);
        assert_eq!(m.get(&"p1".into(), &"p3".into()), 1.0);
        assert_eq!(m.get(&"p1".into(), &"p1".into()), 0.0);
    }

    #[test]
    fn empty_prefs_give_empty_matrix() {
        let m = build_affinity(&PreferenceSets::new(PreferenceSource::AuthorInterest));
        assert!(m.is_empty());
    }

    #[test]
    fn one_person_contributes_k_choose_2() {
        let prefs = sets(PreferenceSource::AttendeeBookmark, &[&["a", "b", "c", "d", "e"]]);
        assert_eq!(build_affinity(&prefs).total(), 10.0);
    }

    #[test]
    fn popularity_counts() {
        let pop = popularity(&fixture());
        assert_eq!(pop[&PaperId::from("p2")], 3);
        assert_eq!(pop.get(&PaperId::from("p4")), None);
        let all = sets(PreferenceSource::AttendeeBookmark, &[&["p"], &["p", "q"], &["p"]]);
        assert_eq!(popularity(&all)[&PaperId::from("p")], 3);
    }

    #[test]
    fn stats_on_fixture() {
        let s = participation_stats(&fixture(), 4).unwrap();
        assert_eq!(s.n_participants, 3);
        assert_eq!(s.n_preferences, 7);
        assert_eq!(s.n_unique_papers_marked, 3);
        assert_eq!(s.coverage_fraction, 0.75);
        // per-paper counts p1:2, p2:3, p3:2
        assert_eq!(s.per_paper.min, 2);
        assert_eq!(s.per_paper.max, 3);
        assert_eq!(s.per_paper.median, 2);
        assert!((s.per_paper.mean - 7.0 / 3.0).abs() < 1e-12);
        // participant sizes 3,2,2
        assert_eq!(s.per_participant.median, 2);
    }

    #[test]
    fn single_participant_stats() {
        let prefs = sets(PreferenceSource::AttendeeBookmark, &[&["a", "b", "c", "d"]]);
        let s = participation_stats(&prefs, 10).unwrap();
        assert_eq!(s.per_participant.mean, 4.0);
        assert_eq!(s.per_participant.median, 4);
        assert_eq!(s.per_participant.stddev, 0.0);
    }

    #[test]
    fn median_is_lower_middle_and_stddev_population() {
        let s = Summary::of(&[1, 2, 3, 4]);
        assert_eq!(s.median, 2);
        assert!((s.stddev - 1.25f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn empty_prefs_give_flagged_zero_stats() {
        let s = participation_stats(&PreferenceSets::new(PreferenceSource::AuthorInterest), 3).unwrap();
        assert!(s.empty);
        assert_eq!(s.n_preferences, 0);
        assert_eq!(
            participation_stats(&fixture(), 0).unwrap_err(),
            AffinityError::EmptyCorpus
        );
    }

    #[test]
    fn superset_violation_is_detected() {
        let mut author = AffinityMatrix::empty(AffinitySource::AuthorInterest);
        author.add(&"p1".into(), &"p2".into(), 6.0);
        let attendee = AffinityMatrix::empty(AffinitySource::AttendeeBookmark);
        let cmp = compare_sources(&attendee, &author, Thresholds::default());
        assert_eq!(cmp.superset_violations.len(), 1);
        assert_eq!(cmp.superset_violations[0].pair, PaperPair::new(&"p1".into(), &"p2".into()).unwrap());
        assert_eq!(cmp.weak_vs_strong.len(), 1);
        assert!(cmp.zero_vs_strong.is_empty());
        assert!(cmp.big_difference.is_empty());
    }

    #[test]
    fn identical_matrices_compare_empty() {
        let m = build_affinity(&fixture());
        assert!(compare_sources(&m, &m, Thresholds::default()).is_empty());
    }

    #[test]
    fn blend_projections() {
        let att = build_affinity(&fixture());
        let none = AffinityMatrix::empty(AffinitySource::AuthorInterest);
        let w = BlendWeights {
            attendee: 1.0,
            interest: 0.0,
            relevance: 0.0,
        };
        let b = blend_affinity(&att, &none, &[], w).unwrap();
        assert_eq!(b.counts, att.counts);

        let resp = AuthorResponse {
            author_id: "a".into(),
            anchor_paper_id: "p1".into(),
            relevance: [("p2".into(), 2)].into(),
            interest: Default::default(),
        };
        let w = BlendWeights {
            attendee: 0.0,
            interest: 0.0,
            relevance: 1.0,
        };
        let b = blend_affinity(&att, &none, &[resp], w).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b.get(&"p2".into(), &"p1".into()), 2.0);
    }

    #[test]
    fn blend_rejects_bad_weights() {
        let m = AffinityMatrix::empty(AffinitySource::AttendeeBookmark);
        let zero = BlendWeights {
            attendee: 0.0,
            interest: 0.0,
            relevance: 0.0,
        };
        assert_eq!(blend_affinity(&m, &m, &[], zero), Err(AffinityError::InvalidWeights));
        let neg = BlendWeights {
            attendee: -1.0,
            ..BlendWeights::default()
        };
        assert_eq!(blend_affinity(&m, &m, &[], neg), Err(AffinityError::InvalidWeights));
    }
}
