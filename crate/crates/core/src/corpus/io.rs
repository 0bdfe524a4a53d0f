use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{
    validate_dataset, Award, AuthorResponse, BookmarkSet, CorpusError, Dataset, Finding, Paper,
    PaperId, PersonId, Venue,
};
use crate::records;

/// Locations of the five input files.
#[derive(Clone, Debug)]
pub struct DataPaths {
    pub papers: PathBuf,
    pub responses: PathBuf,
    pub bookmarks: PathBuf,
    pub venue: PathBuf,
    pub groups: Option<PathBuf>,
}

impl DataPaths {
    /// Conventional layout of a data directory: `papers.jsonl` (or
    /// `papers.csv`), `responses.jsonl`, `bookmarks.jsonl`, `venue.jsonl`
    /// and an optional `groups.jsonl`.
    pub fn in_dir(dir: &Path) -> Self {
        let jsonl = dir.join("papers.jsonl");
        let csv = dir.join("papers.csv");
        let papers = if !jsonl.exists() && csv.exists() { csv } else { jsonl };
        let groups = dir.join("groups.jsonl");
        DataPaths {
            papers,
            responses: dir.join("responses.jsonl"),
            bookmarks: dir.join("bookmarks.jsonl"),
            venue: dir.join("venue.jsonl"),
            groups: groups.exists().then_some(groups),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct GroupRecord {
    paper: PaperId,
    group: String,
}

/// Loads and cross-validates a dataset. Empty bookmark sets are dropped
/// with a logged warning; any invariant violation is an error.
pub fn load_dataset(paths: &DataPaths) -> Result<Dataset, CorpusError> {
    let papers = load_papers(&paths.papers)?;
    if papers.is_empty() {
        return Err(CorpusError::NoPapers);
    }
    let responses: Vec<AuthorResponse> = read_records(&paths.responses)?;
    let mut bookmarks: Vec<BookmarkSet> = read_records(&paths.bookmarks)?;
    let before = bookmarks.len();
    bookmarks.retain(|b| !b.paper_ids.is_empty());
    if bookmarks.len() != before {
        log::warn!(
            "dropped {} empty bookmark set(s) from {}",
            before - bookmarks.len(),
            paths.bookmarks.display()
        );
    }
    let venue = load_venue(&paths.venue)?;
    let groups = match &paths.groups {
        Some(path) => {
            let mut map = BTreeMap::new();
            for (line, rec) in read_numbered::<GroupRecord>(path)? {
                if map.insert(rec.paper.clone(), rec.group).is_some() {
                    return Err(CorpusError::Parse {
                        path: path.display().to_string(),
                        line,
                        message: format!("paper \"{}\" assigned to more than one group", rec.paper),
                    });
                }
            }
            Some(map)
        }
        None => None,
    };

    let dataset = Dataset::assemble(papers, venue, responses, bookmarks, groups);
    let report = validate_dataset(&dataset);
    match report.errors.into_iter().next() {
        None => Ok(dataset),
        Some(finding) => Err(finding_to_error(finding)),
    }
}

pub fn load_dataset_dir(dir: &Path) -> Result<Dataset, CorpusError> {
    load_dataset(&DataPaths::in_dir(dir))
}

/// Writes a dataset in the conventional directory layout. Loading the
/// directory back yields an equal dataset.
pub fn save_dataset_dir(dataset: &Dataset, dir: &Path) -> Result<(), CorpusError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    write_records(&dir.join("papers.jsonl"), &dataset.papers)?;
    write_records(&dir.join("responses.jsonl"), &dataset.author_responses)?;
    write_records(&dir.join("bookmarks.jsonl"), &dataset.bookmarks)?;
    write_records(&dir.join("venue.jsonl"), std::slice::from_ref(&dataset.venue))?;
    let groups_path = dir.join("groups.jsonl");
    match &dataset.committee_groups {
        Some(groups) => {
            let recs: Vec<GroupRecord> = groups
                .iter()
                .map(|(paper, group)| GroupRecord {
                    paper: paper.clone(),
                    group: group.clone(),
                })
                .collect();
            write_records(&groups_path, &recs)?;
        }
        None => {
            if groups_path.exists() {
                fs::remove_file(&groups_path).map_err(|e| io_err(&groups_path, e))?;
            }
        }
    }
    Ok(())
}

fn finding_to_error(finding: Finding) -> CorpusError {
    match finding {
        Finding::NoPapers => CorpusError::NoPapers,
        Finding::DuplicateId { kind, id } => CorpusError::Duplicate { kind, id },
        Finding::UnknownReference { kind, id, context } => CorpusError::Reference { kind, id, context },
        other => CorpusError::Invalid(other.to_string()),
    }
}

fn io_err(path: &Path, source: std::io::Error) -> CorpusError {
    CorpusError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn load_papers(path: &Path) -> Result<Vec<Paper>, CorpusError> {
    if path.extension().is_some_and(|e| e == "csv") {
        load_papers_csv(path)
    } else {
        read_records(path)
    }
}

fn load_venue(path: &Path) -> Result<Venue, CorpusError> {
    let mut venues = read_numbered::<Venue>(path)?;
    match venues.len() {
        1 => Ok(venues.pop().unwrap().1),
        n => Err(CorpusError::Parse {
            path: path.display().to_string(),
            line: venues.get(1).map_or(1, |(l, _)| *l),
            message: format!("expected exactly one venue record, found {n}"),
        }),
    }
}

fn load_papers_csv(path: &Path) -> Result<Vec<Paper>, CorpusError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let split = |s: &str| -> Vec<String> {
        s.split(';')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::to_owned)
            .collect()
    };
    let mut papers = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| csv_err(path, e))?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        let parse_err = |message: String| CorpusError::Parse {
            path: path.display().to_string(),
            line,
            message,
        };
        if row.len() != 6 {
            return Err(parse_err(format!("expected 6 columns, found {}", row.len())));
        }
        let award = Award::parse(&row[5]).ok_or_else(|| parse_err(format!("unknown award \"{}\"", &row[5])))?;
        papers.push(Paper {
            id: PaperId::new(&row[0]),
            title: row[1].to_owned(),
            abstract_text: row[2].to_owned(),
            keywords: split(&row[3]),
            author_ids: split(&row[4]).into_iter().map(PersonId).collect(),
            award,
        });
    }
    Ok(papers)
}

fn csv_err(path: &Path, e: csv::Error) -> CorpusError {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(source) => io_err(path, source),
        kind => CorpusError::Parse {
            path: path.display().to_string(),
            line,
            message: format!("{kind:?}"),
        },
    }
}

fn read_records<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, CorpusError> {
    Ok(read_numbered(path)?.into_iter().map(|(_, r)| r).collect())
}

fn read_numbered<T: DeserializeOwned>(path: &Path) -> Result<Vec<(usize, T)>, CorpusError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    records::parse_lines(&text).map_err(|(line, message)| CorpusError::Parse {
        path: path.display().to_string(),
        line,
        message,
    })
}

fn write_records<T: Serialize>(path: &Path, items: &[T]) -> Result<(), CorpusError> {
    let file = fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut out = BufWriter::new(file);
    records::write_lines(&mut out, items).map_err(|e| io_err(path, e))?;
    out.flush().map_err(|e| io_err(path, e))
}
