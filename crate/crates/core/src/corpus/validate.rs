use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use super::{Dataset, PaperId, PersonId, MAX_RELEVANCE};

/// Smallest session size used by the default sessionizer configuration;
/// committee groups below it draw a warning.
const MIN_GROUP_SIZE: usize = 4;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "finding", rename_all = "snake_case")]
pub enum Finding {
    NoPapers,
    DuplicateId { kind: &'static str, id: String },
    EmptyTitle { paper: PaperId },
    NoAuthors { paper: PaperId },
    UnknownReference { kind: &'static str, id: String, context: String },
    AuthorFlagMismatch { person: PersonId },
    NonPositiveCapacity { room: String },
    AnchorNotAuthored { author: PersonId, anchor: PaperId },
    AnchorRatesItself { author: PersonId, anchor: PaperId },
    RelevanceOutOfRange { author: PersonId, paper: PaperId, level: u8 },
    EmptyBookmarkSet { attendee: PersonId },
    UncoveredPaper { paper: PaperId },
    SmallGroup { group: String, size: usize },
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Finding::NoPapers => write!(f, "dataset has zero papers"),
            Finding::DuplicateId { kind, id } => write!(f, "duplicate {kind} id \"{id}\""),
            Finding::EmptyTitle { paper } => write!(f, "paper \"{paper}\" has an empty title"),
            Finding::NoAuthors { paper } => write!(f, "paper \"{paper}\" has no authors"),
            Finding::UnknownReference { kind, id, context } => {
                write!(f, "unknown {kind} id \"{id}\" ({context})")
            }
            Finding::AuthorFlagMismatch { person } => {
                write!(f, "person \"{person}\" has an is_author flag inconsistent with the papers")
            }
            Finding::NonPositiveCapacity { room } => write!(f, "room \"{room}\" has zero capacity"),
            Finding::AnchorNotAuthored { author, anchor } => {
                write!(f, "response anchor \"{anchor}\" is not authored by \"{author}\"")
            }
            Finding::AnchorRatesItself { author, anchor } => {
                write!(f, "response by \"{author}\" rates its own anchor \"{anchor}\"")
            }
            Finding::RelevanceOutOfRange { author, paper, level } => write!(
                f,
                "response by \"{author}\" gives \"{paper}\" relevance {level} (max {MAX_RELEVANCE})"
            ),
            Finding::EmptyBookmarkSet { attendee } => {
                write!(f, "empty bookmark set for \"{attendee}\" (dropped)")
            }
            Finding::UncoveredPaper { paper } => {
                write!(f, "uncovered paper \"{paper}\": no preference from either source")
            }
            Finding::SmallGroup { group, size } => write!(
                f,
                "committee group \"{group}\" has {size} paper(s), fewer than a minimum session"
            ),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub errors: Vec<Finding>,
    pub warnings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }
}

/// Checks every dataset invariant. Errors are empty exactly when the
/// dataset is well formed; warnings flag data-quality issues.
pub fn validate_dataset(d: &Dataset) -> ValidationReport {
    let mut errors = Vec::new();
    let mut warnings = Vec::new();

    if d.papers.is_empty() {
        errors.push(Finding::NoPapers);
    }

    let mut paper_ids: BTreeSet<&PaperId> = BTreeSet::new();
    for paper in &d.papers {
        if !paper_ids.insert(&paper.id) {
            errors.push(Finding::DuplicateId {
                kind: "paper",
                id: paper.id.to_string(),
            });
        }
        if paper.title.trim().is_empty() {
            errors.push(Finding::EmptyTitle {
                paper: paper.id.clone(),
            });
        }
        if paper.author_ids.is_empty() {
            errors.push(Finding::NoAuthors {
                paper: paper.id.clone(),
            });
        }
    }

    let mut person_ids: BTreeSet<&PersonId> = BTreeSet::new();
    for person in &d.persons {
        if !person_ids.insert(&person.id) {
            errors.push(Finding::DuplicateId {
                kind: "person",
                id: person.id.to_string(),
            });
        }
    }
    let authored = d.papers_by_author();
    for person in &d.persons {
        if person.is_author != authored.contains_key(&person.id) {
            errors.push(Finding::AuthorFlagMismatch {
                person: person.id.clone(),
            });
        }
    }
    let person_ref = |id: &PersonId, context: String, errors: &mut Vec<Finding>| {
        if !person_ids.contains(id) {
            errors.push(Finding::UnknownReference {
                kind: "person",
                id: id.to_string(),
                context,
            });
        }
    };
    for paper in &d.papers {
        for a in &paper.author_ids {
            person_ref(a, format!("author of paper \"{}\"", paper.id), &mut errors);
        }
    }
    for r in &d.author_responses {
        person_ref(&r.author_id, "response author".into(), &mut errors);
    }
    for b in &d.bookmarks {
        person_ref(&b.attendee_id, "bookmark attendee".into(), &mut errors);
    }

    let mut seen = BTreeSet::new();
    for slot in &d.venue.slots {
        if !seen.insert(slot.id.as_str()) {
            errors.push(Finding::DuplicateId {
                kind: "slot",
                id: slot.id.to_string(),
            });
        }
    }
    let mut seen = BTreeSet::new();
    for room in &d.venue.rooms {
        if !seen.insert(room.id.as_str()) {
            errors.push(Finding::DuplicateId {
                kind: "room",
                id: room.id.to_string(),
            });
        }
        if room.capacity == 0 {
            errors.push(Finding::NonPositiveCapacity {
                room: room.id.to_string(),
            });
        }
    }

    let paper_ref = |id: &PaperId, context: String, errors: &mut Vec<Finding>| {
        if !paper_ids.contains(id) {
            errors.push(Finding::UnknownReference {
                kind: "paper",
                id: id.to_string(),
                context,
            });
        }
    };

    for r in &d.author_responses {
        let ctx = || format!("response by \"{}\" for \"{}\"", r.author_id, r.anchor_paper_id);
        if !paper_ids.contains(&r.anchor_paper_id) {
            paper_ref(&r.anchor_paper_id, ctx(), &mut errors);
        } else if !authored
            .get(&r.author_id)
            .is_some_and(|ps| ps.contains(&r.anchor_paper_id))
        {
            errors.push(Finding::AnchorNotAuthored {
                author: r.author_id.clone(),
                anchor: r.anchor_paper_id.clone(),
            });
        }
        if r.relevance.contains_key(&r.anchor_paper_id) {
            errors.push(Finding::AnchorRatesItself {
                author: r.author_id.clone(),
                anchor: r.anchor_paper_id.clone(),
            });
        }
        for (pid, &level) in &r.relevance {
            paper_ref(pid, ctx(), &mut errors);
            if level > MAX_RELEVANCE {
                errors.push(Finding::RelevanceOutOfRange {
                    author: r.author_id.clone(),
                    paper: pid.clone(),
                    level,
                });
            }
        }
        for pid in &r.interest {
            paper_ref(pid, ctx(), &mut errors);
        }
    }

    for b in &d.bookmarks {
        if b.paper_ids.is_empty() {
            warnings.push(Finding::EmptyBookmarkSet {
                attendee: b.attendee_id.clone(),
            });
        }
        for pid in &b.paper_ids {
            paper_ref(pid, format!("bookmark of \"{}\"", b.attendee_id), &mut errors);
        }
    }

    if let Some(groups) = &d.committee_groups {
        let mut sizes: BTreeMap<&str, usize> = BTreeMap::new();
        for (pid, label) in groups {
            paper_ref(pid, format!("committee group \"{label}\""), &mut errors);
            *sizes.entry(label.as_str()).or_default() += 1;
        }
        for (group, size) in sizes {
            if size < MIN_GROUP_SIZE {
                warnings.push(Finding::SmallGroup {
                    group: group.to_owned(),
                    size,
                });
            }
        }
    }

    let mut covered: BTreeSet<&PaperId> = BTreeSet::new();
    for r in &d.author_responses {
        covered.extend(r.interest.iter());
    }
    for b in &d.bookmarks {
        covered.extend(b.paper_ids.iter());
    }
    for paper in &d.papers {
        if !covered.contains(&paper.id) {
            warnings.push(Finding::UncoveredPaper {
                paper: paper.id.clone(),
            });
        }
    }

    ValidationReport { errors, warnings }
}
