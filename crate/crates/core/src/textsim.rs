//! TF-IDF document vectors over title, abstract and keywords, cosine
//! similarity, and the ranked candidate lists shown to authors.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::corpus::{Dataset, Paper, PaperId};

/// Default length of an author's candidate list.
pub const DEFAULT_CANDIDATES: usize = 20;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum TextSimError {
    #[error("cannot build a TF-IDF model from an empty corpus")]
    EmptyCorpus,
    #[error("unknown paper id \"{0}\"")]
    UnknownPaper(PaperId),
    #[error("candidate list length must be at least 1")]
    ZeroLength,
}

/// Sparse L2-normalized vector, entries sorted by term index.
pub type SparseVector = Vec<(usize, f64)>;

#[derive(Clone, Debug)]
pub struct TfIdfModel {
    vocabulary: BTreeMap<String, usize>,
    vectors: BTreeMap<PaperId, SparseVector>,
    corpus_size: usize,
}

/// Lowercases and splits on runs of non-alphanumeric characters, keeping
/// tokens of two or more characters.
pub fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| t.chars().count() >= 2)
        .map(str::to_lowercase)
}

fn document_terms(paper: &Paper) -> Vec<String> {
    let mut terms: Vec<String> = tokenize(&paper.title)
        .chain(tokenize(&paper.abstract_text))
        .collect();
    for kw in &paper.keywords {
        terms.extend(tokenize(kw));
    }
    if terms.is_empty() {
        // Tokenless documents get a private term so they still have a
        // unit vector; '#' never survives tokenization, so no collisions.
        terms.push(format!("#{}", paper.id));
    }
    terms
}

pub fn build_tfidf(papers: &[Paper]) -> Result<TfIdfModel, TextSimError> {
    if papers.is_empty() {
        return Err(TextSimError::EmptyCorpus);
    }
    let mut vocabulary: BTreeMap<String, usize> = BTreeMap::new();
    let mut doc_freq: Vec<usize> = Vec::new();
    let mut counts: Vec<(PaperId, BTreeMap<usize, usize>)> = Vec::with_capacity(papers.len());

    for paper in papers {
        let mut tf: BTreeMap<usize, usize> = BTreeMap::new();
        for term in document_terms(paper) {
            let next = vocabulary.len();
            let idx = *vocabulary.entry(term).or_insert(next);
            if idx == doc_freq.len() {
                doc_freq.push(0);
            }
            *tf.entry(idx).or_default() += 1;
        }
        for &idx in tf.keys() {
            doc_freq[idx] += 1;
        }
        counts.push((paper.id.clone(), tf));
    }

    let n = papers.len() as f64;
    let idf: Vec<f64> = doc_freq
        .iter()
        .map(|&df| ((1.0 + n) / (1.0 + df as f64)).ln() + 1.0)
        .collect();

    let vectors = counts
        .into_iter()
        .map(|(id, tf)| {
            let mut v: SparseVector = tf
                .into_iter()
                .map(|(idx, count)| (idx, count as f64 * idf[idx]))
                .collect();
            let norm = v.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
            for (_, w) in &mut v {
                *w /= norm;
            }
            (id, v)
        })
        .collect();

    Ok(TfIdfModel {
        vocabulary,
        vectors,
        corpus_size: papers.len(),
    })
}

impl TfIdfModel {
    pub fn corpus_size(&self) -> usize {
        self.corpus_size
    }

    pub fn vocabulary(&self) -> &BTreeMap<String, usize> {
        &self.vocabulary
    }

    pub fn vector(&self, id: &PaperId) -> Option<&SparseVector> {
        self.vectors.get(id)
    }

    pub fn paper_ids(&self) -> impl Iterator<Item = &PaperId> {
        self.vectors.keys()
    }

    pub fn cosine(&self, p: &PaperId, q: &PaperId) -> Result<f64, TextSimError> {
        let a = self.vectors.get(p).ok_or_else(|| TextSimError::UnknownPaper(p.clone()))?;
        let b = self.vectors.get(q).ok_or_else(|| TextSimError::UnknownPaper(q.clone()))?;
        Ok(sparse_dot(a, b))
    }
}

pub fn cosine(model: &TfIdfModel, p: &PaperId, q: &PaperId) -> Result<f64, TextSimError> {
    model.cosine(p, q)
}

fn sparse_dot(a: &SparseVector, b: &SparseVector) -> f64 {
    let (mut i, mut j, mut dot) = (0, 0, 0.0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                dot += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    dot
}

/// The `k` papers most similar to `anchor`. Papers sharing the anchor's
/// committee group come first; within each tier order is by descending
/// cosine, then ascending id.
pub fn candidate_list(
    model: &TfIdfModel,
    dataset: &Dataset,
    anchor: &PaperId,
    k: usize,
) -> Result<Vec<PaperId>, TextSimError> {
    if k == 0 {
        return Err(TextSimError::ZeroLength);
    }
    if !dataset.has_paper(anchor) {
        return Err(TextSimError::UnknownPaper(anchor.clone()));
    }
    let anchor_group = dataset.group_of(anchor);
    let mut ranked: Vec<(bool, f64, &PaperId)> = Vec::with_capacity(dataset.papers.len());
    for paper in &dataset.papers {
        if &paper.id == anchor {
            continue;
        }
        let same_group = anchor_group.is_some() && dataset.group_of(&paper.id) == anchor_group;
        ranked.push((same_group, model.cosine(anchor, &paper.id)?, &paper.id));
    }
    ranked.sort_by(|a, b| {
        b.0.cmp(&a.0)
            .then_with(|| b.1.total_cmp(&a.1))
            .then_with(|| a.2.cmp(b.2))
    });
    Ok(ranked.into_iter().take(k).map(|(_, _, id)| id.clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Award;

    pub(crate) fn doc(id: &str, title: &str) -> Paper {
        Paper {
            id: id.into(),
            title: title.into(),
            abstract_text: String::new(),
            keywords: vec![],
            author_ids: vec!["a".into()],
            award: Award::None,
        }
    }

    fn corpus(papers: Vec<Paper>) -> Dataset {
        Dataset::assemble(papers, Default::default(), vec![], vec![], None)
    }

    #[test]
    fn tokenizer_rules() {
        let toks: Vec<String> = tokenize("Free-space I/O: 3D gestures, a x2").collect();
        assert_eq!(toks, vec!["free", "space", "3d", "gestures", "x2"]);
    }

    #[test]
    fn single_paper_vector_is_unit() {
        let m = build_tfidf(&[doc("p1", "gesture keyboard gesture")]).unwrap();
        let v = m.vector(&"p1".into()).unwrap();
        let norm: f64 = v.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tokenless_paper_still_has_unit_vector() {
        let m = build_tfidf(&[doc("p1", "A"), doc("p2", "B")]).unwrap();
        assert!((m.cosine(&"p1".into(), &"p1".into()).unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(m.cosine(&"p1".into(), &"p2".into()).unwrap(), 0.0);
    }

    #[test]
    fn empty_corpus_is_rejected() {
        assert_eq!(build_tfidf(&[]).unwrap_err(), TextSimError::EmptyCorpus);
    }

    #[test]
    fn unknown_paper_is_rejected() {
        let m = build_tfidf(&[doc("p1", "gesture")]).unwrap();
        assert_eq!(
            m.cosine(&"p1".into(), &"zz".into()).unwrap_err(),
            TextSimError::UnknownPaper("zz".into())
        );
    }

    #[test]
    fn two_paper_corpus_truncates() {
        let papers = vec![doc("p1", "gesture"), doc("p2", "keyboard")];
        let m = build_tfidf(&papers).unwrap();
        let list = candidate_list(&m, &corpus(papers), &"p1".into(), 20).unwrap();
        assert_eq!(list, vec![PaperId::from("p2")]);
    }

    #[test]
    fn group_members_come_first() {
        let papers = vec![
            doc("p", "gesture keyboard typing"),
            doc("q", "network routing"),
            doc("r", "gesture keyboard input"),
        ];
        let m = build_tfidf(&papers).unwrap();
        let mut d = corpus(papers);
        d.committee_groups = Some(
            [("p".into(), "g1".to_string()), ("q".into(), "g1".to_string())].into(),
        );
        let list = candidate_list(&m, &d, &"p".into(), 20).unwrap();
        assert_eq!(list, vec![PaperId::from("q"), PaperId::from("r")]);
    }

    #[test]
    fn zero_k_is_rejected() {
        let papers = vec![doc("p1", "gesture")];
        let m = build_tfidf(&papers).unwrap();
        assert_eq!(
            candidate_list(&m, &corpus(papers), &"p1".into(), 0).unwrap_err(),
            TextSimError::ZeroLength
        );
    }
}
