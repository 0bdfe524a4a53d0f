//! Seeded synthetic conferences for demos and randomized tests.
//!
//! Papers are drawn from a handful of topics, each with its own vocabulary;
//! authors and attendees mostly stay within one topic, so text similarity,
//! interest and bookmarks all carry the same cluster structure.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::affinity::{PreferenceSets, PreferenceSource};
use crate::corpus::{
    Award, AuthorResponse, BookmarkSet, Dataset, Paper, PaperId, PersonId, Room, RoomId, SessionId, SlotId, TimeSlot,
    Venue,
};
use crate::scheduler::{Cell, Schedule};
use crate::sessionizer::{Session, Sessionization};

const TOPICS: &[&[&str]] = &[
    &["touch", "gesture", "mobile", "finger", "tablet", "swipe", "screen"],
    &["privacy", "security", "password", "trust", "tracking", "consent", "data"],
    &["health", "patient", "clinical", "wellbeing", "sleep", "fitness", "care"],
    &["crowd", "worker", "microtask", "platform", "labor", "quality", "feedback"],
    &["visualization", "chart", "dashboard", "exploration", "analytics", "graph", "encoding"],
    &["game", "play", "player", "motivation", "challenge", "reward", "immersion"],
    &["accessibility", "blind", "screenreader", "caption", "deaf", "assistive", "tactile"],
    &["education", "learning", "student", "classroom", "teacher", "course", "tutor"],
];

const FILLER: &[&str] = &["study", "design", "system", "users", "evaluation", "interface", "people"];

#[derive(Clone, Debug)]
pub struct SynthConfig {
    pub papers: usize,
    pub topics: usize,
    pub authors: usize,
    pub attendees: usize,
    pub max_bookmarks: usize,
    pub slots: usize,
    pub rooms: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            papers: 40,
            topics: 4,
            authors: 30,
            attendees: 60,
            max_bookmarks: 8,
            slots: 3,
            rooms: 3,
            seed: 0,
        }
    }
}

fn id(prefix: &str, i: usize, n: usize) -> String {
    let width = n.to_string().len();
    format!("{prefix}{:0width$}", i + 1)
}

fn words(rng: &mut ChaCha8Rng, topic: usize, n: usize) -> String {
    let vocab = TOPICS[topic % TOPICS.len()];
    (0..n)
        .map(|_| {
            if rng.gen_bool(0.25) {
                *FILLER.choose(rng).expect("filler")
            } else {
                *vocab.choose(rng).expect("vocab")
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Mostly same-topic draw of up to `k` distinct papers.
fn pick(rng: &mut ChaCha8Rng, by_topic: &[Vec<usize>], all: usize, home: usize, k: usize, exclude: Option<usize>) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    let mut tries = 0;
    while out.len() < k && tries < 20 * k {
        tries += 1;
        let p = if rng.gen_bool(0.8) && !by_topic[home].is_empty() {
            *by_topic[home].choose(rng).expect("nonempty")
        } else {
            rng.gen_range(0..all)
        };
        if Some(p) != exclude {
            out.insert(p);
        }
    }
    out
}

/// A complete, valid dataset.
pub fn synth_dataset(config: &SynthConfig) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = config.papers.max(1);
    let topics = config.topics.clamp(1, TOPICS.len());
    let authors = config.authors.max(1);

    let topic_of: Vec<usize> = (0..n).map(|i| i % topics).collect();
    let mut by_topic = vec![Vec::new(); topics];
    for (i, &t) in topic_of.iter().enumerate() {
        by_topic[t].push(i);
    }
    let author_topic: Vec<usize> = (0..authors).map(|_| rng.gen_range(0..topics)).collect();
    let paper_ids: Vec<PaperId> = (0..n).map(|i| PaperId::new(id("p", i, n))).collect();
    let author_ids: Vec<PersonId> = (0..authors).map(|i| PersonId::new(id("a", i, authors))).collect();

    let mut authored: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut papers = Vec::with_capacity(n);
    for i in 0..n {
        let t = topic_of[i];
        let same: Vec<usize> = (0..authors).filter(|&a| author_topic[a] == t).collect();
        let pool = if same.is_empty() { (0..authors).collect() } else { same };
        let count = rng.gen_range(1..=3).min(pool.len());
        let chosen: Vec<usize> = pool.choose_multiple(&mut rng, count).copied().collect();
        for &a in &chosen {
            authored.entry(a).or_default().push(i);
        }
        let award = match rng.gen_range(0..20) {
            0 => Award::BestPaper,
            1 | 2 => Award::HonorableMention,
            _ => Award::None,
        };
        papers.push(Paper {
            id: paper_ids[i].clone(),
            title: words(&mut rng, t, 4),
            abstract_text: words(&mut rng, t, 20),
            keywords: words(&mut rng, t, 3).split(' ').map(str::to_owned).collect(),
            author_ids: chosen.iter().map(|&a| author_ids[a].clone()).collect(),
            award,
        });
    }

    let mut responses = Vec::new();
    for (&a, own) in &authored {
        let anchor = own[0];
        let rated = pick(&mut rng, &by_topic, n, topic_of[anchor], 6.min(n - 1), Some(anchor));
        let mut relevance = BTreeMap::new();
        let mut interest = BTreeSet::new();
        for &p in &rated {
            let level = if topic_of[p] == topic_of[anchor] { rng.gen_range(1..=2) } else { rng.gen_range(0..=1) };
            relevance.insert(paper_ids[p].clone(), level);
            if rng.gen_bool(if level == 2 { 0.7 } else { 0.2 }) {
                interest.insert(paper_ids[p].clone());
            }
        }
        responses.push(AuthorResponse {
            author_id: author_ids[a].clone(),
            anchor_paper_id: paper_ids[anchor].clone(),
            relevance,
            interest,
        });
    }

    let mut bookmarks = Vec::new();
    for u in 0..config.attendees {
        let home = rng.gen_range(0..topics);
        let k = rng.gen_range(1..=config.max_bookmarks.max(1));
        let set = pick(&mut rng, &by_topic, n, home, k.min(n), None);
        bookmarks.push(BookmarkSet {
            attendee_id: PersonId::new(id("u", u, config.attendees)),
            paper_ids: set.into_iter().map(|p| paper_ids[p].clone()).collect(),
        });
    }

    let venue = Venue {
        slots: (0..config.slots.max(1))
            .map(|i| TimeSlot {
                id: SlotId::new(id("t", i, config.slots.max(1))),
                day: (i / 4) as u32,
                start: 540 + 90 * (i % 4) as u32,
                duration: 80,
            })
            .collect(),
        rooms: (0..config.rooms.max(1))
            .map(|i| Room {
                id: RoomId::new(id("r", i, config.rooms.max(1))),
                capacity: rng.gen_range(10..=60),
            })
            .collect(),
    };

    let groups = (0..n).map(|i| (paper_ids[i].clone(), format!("g{}", topic_of[i] + 1))).collect();
    Dataset::assemble(papers, venue, responses, bookmarks, Some(groups))
}

/// Independent uniform preference sets over papers `p01..`; empty sets are
/// left out, matching what extraction produces.
pub fn random_preferences(
    rng: &mut impl Rng,
    persons: usize,
    papers: usize,
    max_set: usize,
    source: PreferenceSource,
) -> PreferenceSets {
    let ids: Vec<PaperId> = (0..papers).map(|i| PaperId::new(id("p", i, papers))).collect();
    let mut prefs = PreferenceSets::new(source);
    for u in 0..persons {
        let k = rng.gen_range(0..=max_set.min(papers));
        let set: BTreeSet<PaperId> = ids.choose_multiple(rng, k).cloned().collect();
        if !set.is_empty() {
            prefs.sets.insert(PersonId::new(id("u", u, persons)), set);
        }
    }
    prefs
}

/// A small scheduling problem: sessions of consecutive papers, random
/// single authors drawn from a shared pool, and attendee preferences.
#[derive(Clone, Debug)]
pub struct ScheduleInstance {
    pub dataset: Dataset,
    pub sessionization: Sessionization,
    pub prefs: PreferenceSets,
}

#[derive(Clone, Copy, Debug)]
pub struct InstanceShape {
    pub sessions: usize,
    pub papers_per_session: usize,
    pub slots: usize,
    pub rooms: usize,
    pub persons: usize,
    pub max_set: usize,
    /// Size of the author pool; smaller pools mean more shared authors.
    pub authors: usize,
}

pub fn schedule_instance(rng: &mut impl Rng, shape: InstanceShape) -> ScheduleInstance {
    let n = shape.sessions * shape.papers_per_session;
    let prefs = random_preferences(rng, shape.persons, n, shape.max_set, PreferenceSource::AttendeeBookmark);
    let paper_ids: Vec<PaperId> = (0..n).map(|i| PaperId::new(id("p", i, n))).collect();
    let authors = shape.authors.max(1);
    let papers = paper_ids
        .iter()
        .map(|p| Paper {
            id: p.clone(),
            title: format!("paper {p}"),
            abstract_text: String::new(),
            keywords: vec![],
            author_ids: vec![PersonId::new(id("a", rng.gen_range(0..authors), authors))],
            award: Award::None,
        })
        .collect();
    let bookmarks = prefs
        .sets
        .iter()
        .map(|(u, set)| BookmarkSet {
            attendee_id: u.clone(),
            paper_ids: set.clone(),
        })
        .collect();
    let venue = Venue {
        slots: (0..shape.slots)
            .map(|i| TimeSlot {
                id: SlotId::new(id("t", i, shape.slots)),
                day: 0,
                start: 540 + 90 * i as u32,
                duration: 80,
            })
            .collect(),
        rooms: (0..shape.rooms)
            .map(|i| Room {
                id: RoomId::new(id("r", i, shape.rooms)),
                capacity: rng.gen_range(1..=shape.persons.max(1) as u32),
            })
            .collect(),
    };
    let sessions = paper_ids
        .chunks(shape.papers_per_session.max(1))
        .enumerate()
        .map(|(i, chunk)| Session {
            id: SessionId::new(id("S", i, shape.sessions)),
            paper_ids: chunk.iter().cloned().collect(),
            coherence: 0.0,
        })
        .collect();
    ScheduleInstance {
        dataset: Dataset::assemble(papers, venue, vec![], bookmarks, None),
        sessionization: Sessionization {
            sessions,
            objective: 0.0,
            warnings: vec![],
        },
        prefs,
    }
}

/// Uniformly random injective placement of every session into a cell.
/// Panics if there are more sessions than cells.
pub fn random_schedule(rng: &mut impl Rng, sessionization: &Sessionization, venue: &Venue) -> Schedule {
    let mut cells: Vec<Cell> = venue
        .slots
        .iter()
        .flat_map(|t| {
            venue.rooms.iter().map(move |r| Cell {
                slot: t.id.clone(),
                room: r.id.clone(),
            })
        })
        .collect();
    assert!(cells.len() >= sessionization.sessions.len(), "more sessions than cells");
    cells.shuffle(rng);
    Schedule {
        assignment: sessionization.sessions.iter().map(|s| s.id.clone()).zip(cells).collect(),
        ..Default::default()
    }
}
