//! Conference data model: papers, people, the room/slot grid, and the two
//! community preference sources (author responses and attendee bookmarks).

mod io;
mod validate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

pub use io::{load_dataset, load_dataset_dir, save_dataset_dir, DataPaths};
pub use validate::{validate_dataset, Finding, ValidationReport};

macro_rules! id_newtype {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                Self(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }
    };
}

id_newtype!(
    /// Opaque paper identifier.
    PaperId
);
id_newtype!(
    /// Opaque person identifier, shared between authors and attendees.
    PersonId
);
id_newtype!(SlotId);
id_newtype!(RoomId);
id_newtype!(
    /// Session identifier assigned by the sessionizer.
    SessionId
);

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Award {
    #[default]
    None,
    HonorableMention,
    BestPaper,
}

impl Award {
    pub fn as_str(self) -> &'static str {
        match self {
            Award::None => "none",
            Award::HonorableMention => "honorable_mention",
            Award::BestPaper => "best_paper",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "" | "none" => Some(Award::None),
            "honorable_mention" => Some(Award::HonorableMention),
            "best_paper" => Some(Award::BestPaper),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Paper {
    pub id: PaperId,
    pub title: String,
    #[serde(rename = "abstract", default)]
    pub abstract_text: String,
    #[serde(default)]
    pub keywords: Vec<String>,
    #[serde(rename = "authors")]
    pub author_ids: Vec<PersonId>,
    #[serde(default)]
    pub award: Award,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Person {
    pub id: PersonId,
    pub display_name: Option<String>,
    pub is_author: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeSlot {
    pub id: SlotId,
    pub day: u32,
    /// Minute of day.
    pub start: u32,
    /// Minutes.
    pub duration: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Room {
    pub id: RoomId,
    pub capacity: u32,
}

/// The room/timeslot grid. A slot is one time block shared by all rooms.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Venue {
    pub slots: Vec<TimeSlot>,
    pub rooms: Vec<Room>,
}

impl Venue {
    pub fn cell_count(&self) -> usize {
        self.slots.len() * self.rooms.len()
    }

    pub fn slot_index(&self, id: &SlotId) -> Option<usize> {
        self.slots.iter().position(|s| &s.id == id)
    }

    pub fn room(&self, id: &RoomId) -> Option<&Room> {
        self.rooms.iter().find(|r| &r.id == id)
    }
}

/// Relevance scale used by author responses: 0 unrelated, 1 relevant,
/// 2 highly relevant.
pub const MAX_RELEVANCE: u8 = 2;

/// One author's answers for one of their papers (the anchor).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuthorResponse {
    #[serde(rename = "author")]
    pub author_id: PersonId,
    #[serde(rename = "anchor")]
    pub anchor_paper_id: PaperId,
    #[serde(default)]
    pub relevance: BTreeMap<PaperId, u8>,
    #[serde(default)]
    pub interest: BTreeSet<PaperId>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BookmarkSet {
    #[serde(rename = "attendee")]
    pub attendee_id: PersonId,
    #[serde(rename = "papers")]
    pub paper_ids: BTreeSet<PaperId>,
}

/// The full conference corpus. Immutable after load.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dataset {
    pub papers: Vec<Paper>,
    pub persons: Vec<Person>,
    pub venue: Venue,
    pub author_responses: Vec<AuthorResponse>,
    pub bookmarks: Vec<BookmarkSet>,
    pub committee_groups: Option<BTreeMap<PaperId, String>>,
}

impl Dataset {
    /// Builds a dataset, deriving the person table from every id that
    /// appears as an author, respondent or attendee.
    pub fn assemble(
        papers: Vec<Paper>,
        venue: Venue,
        author_responses: Vec<AuthorResponse>,
        bookmarks: Vec<BookmarkSet>,
        committee_groups: Option<BTreeMap<PaperId, String>>,
    ) -> Self {
        let persons = derive_persons(&papers, &author_responses, &bookmarks);
        Dataset {
            papers,
            persons,
            venue,
            author_responses,
            bookmarks,
            committee_groups,
        }
    }

    pub fn paper(&self, id: &PaperId) -> Option<&Paper> {
        self.papers.iter().find(|p| &p.id == id)
    }

    pub fn paper_ids(&self) -> Vec<PaperId> {
        self.papers.iter().map(|p| p.id.clone()).collect()
    }

    pub fn has_paper(&self, id: &PaperId) -> bool {
        self.papers.iter().any(|p| &p.id == id)
    }

    pub fn person(&self, id: &PersonId) -> Option<&Person> {
        self.persons.iter().find(|p| &p.id == id)
    }

    pub fn group_of(&self, id: &PaperId) -> Option<&str> {
        self.committee_groups
            .as_ref()
            .and_then(|g| g.get(id))
            .map(String::as_str)
    }

    /// Map from author to the papers they wrote.
    pub fn papers_by_author(&self) -> BTreeMap<PersonId, BTreeSet<PaperId>> {
        let mut out: BTreeMap<PersonId, BTreeSet<PaperId>> = BTreeMap::new();
        for paper in &self.papers {
            for author in &paper.author_ids {
                out.entry(author.clone()).or_default().insert(paper.id.clone());
            }
        }
        out
    }
}

pub(crate) fn derive_persons(
    papers: &[Paper],
    responses: &[AuthorResponse],
    bookmarks: &[BookmarkSet],
) -> Vec<Person> {
    let authors: BTreeSet<&PersonId> = papers.iter().flat_map(|p| p.author_ids.iter()).collect();
    let mut ids: BTreeSet<&PersonId> = authors.clone();
    ids.extend(responses.iter().map(|r| &r.author_id));
    ids.extend(bookmarks.iter().map(|b| &b.attendee_id));
    ids.into_iter()
        .map(|id| Person {
            id: id.clone(),
            display_name: None,
            is_author: authors.contains(id),
        })
        .collect()
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("dataset has zero papers")]
    NoPapers,
    #[error("unknown {kind} id \"{id}\" ({context})")]
    Reference {
        kind: &'static str,
        id: String,
        context: String,
    },
    #[error("duplicate {kind} id \"{id}\"")]
    Duplicate { kind: &'static str, id: String },
    #[error("invalid dataset: {0}")]
    Invalid(String),
}
