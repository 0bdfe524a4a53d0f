//! Placing sessions into (timeslot, room) cells.
//!
//! Conflicts are counted in person-pair units: a person who wants papers p
//! and q contributes one conflict when p and q run in different sessions of
//! the same slot. Summing affinity over cross-session pairs of each slot
//! gives the same number, which is what the search optimizes.

mod moves;
mod search;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::affinity::{build_affinity, AffinityMatrix, PaperPair, PreferenceSets};
use crate::corpus::{Dataset, PaperId, PersonId, RoomId, SessionId, SlotId, Venue};
use crate::sessionizer::Sessionization;

pub use moves::{apply_move, evaluate_move, violations, MoveContext, MoveDelta, Violation};
pub use search::{optimize_schedule, optimize_schedule_from, schedule_exact, EXACT_MAX_SESSIONS, EXACT_MAX_SLOTS};

/// Penalty per author clash once the hard constraint has been relaxed.
pub const AUTHOR_CLASH_PENALTY: f64 = 1000.0;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ScheduleError {
    #[error("unknown session id \"{0}\"")]
    UnknownSession(SessionId),
    #[error("unknown paper id \"{0}\"")]
    UnknownPaper(PaperId),
    #[error("unknown slot id \"{0}\"")]
    UnknownSlot(SlotId),
    #[error("paper \"{0}\" is not scheduled")]
    PaperNotScheduled(PaperId),
    #[error("slot \"{slot}\" holds {sessions} sessions but the venue has {rooms} rooms")]
    SlotOverPacked { slot: SlotId, sessions: usize, rooms: usize },
    #[error("{sessions} sessions do not fit in {cells} venue cells")]
    InsufficientCells { sessions: usize, cells: usize },
    #[error("exact scheduling supports at most {max_sessions} sessions and {max_slots} slots")]
    TooLarge { max_sessions: usize, max_slots: usize },
    #[error("invalid schedule config: {0}")]
    InvalidConfig(String),
    #[error("session \"{0}\" is not scheduled")]
    SessionNotScheduled(SessionId),
    #[error("move rejected: {0}")]
    InfeasibleMove(String),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub slot: SlotId,
    pub room: RoomId,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ScheduleMetrics {
    pub conflict_count: f64,
    pub author_clashes: usize,
    pub room_overflow: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub assignment: BTreeMap<SessionId, Cell>,
    pub metrics: ScheduleMetrics,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleConfig {
    pub restarts: usize,
    pub seed: u64,
    /// Cap on accepted moves per restart.
    pub max_iterations: usize,
    pub hard_author_constraint: bool,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        ScheduleConfig {
            restarts: 20,
            seed: 0,
            max_iterations: 100_000,
            hard_author_constraint: true,
        }
    }
}

/// What conflicts are counted against.
#[derive(Clone, Copy, Debug)]
pub enum ConflictBasis<'a> {
    Preferences(&'a PreferenceSets),
    Affinity(&'a AffinityMatrix),
}

impl ConflictBasis<'_> {
    pub fn to_affinity(&self) -> std::borrow::Cow<'_, AffinityMatrix> {
        match self {
            ConflictBasis::Preferences(p) => std::borrow::Cow::Owned(build_affinity(p)),
            ConflictBasis::Affinity(a) => std::borrow::Cow::Borrowed(*a),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AuthorClash {
    pub author: PersonId,
    pub slot: SlotId,
    pub sessions: Vec<SessionId>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    pub session_id: SessionId,
    pub slot_id: SlotId,
    pub room_id: RoomId,
}

impl Schedule {
    pub fn slot_of(&self, session: &SessionId) -> Option<&SlotId> {
        self.assignment.get(session).map(|c| &c.slot)
    }

    /// Session → slot projection.
    pub fn slot_assignment(&self) -> BTreeMap<SessionId, SlotId> {
        self.assignment
            .iter()
            .map(|(s, c)| (s.clone(), c.slot.clone()))
            .collect()
    }

    pub fn sessions_in_slot(&self, slot: &SlotId) -> Vec<&SessionId> {
        self.assignment
            .iter()
            .filter(|(_, c)| &c.slot == slot)
            .map(|(s, _)| s)
            .collect()
    }

    pub fn to_records(&self) -> Vec<CellRecord> {
        self.assignment
            .iter()
            .map(|(s, c)| CellRecord {
                session_id: s.clone(),
                slot_id: c.slot.clone(),
                room_id: c.room.clone(),
            })
            .collect()
    }

    /// Checks injectivity, venue membership, and that every session of
    /// `sessionization` is placed.
    pub fn check(&self, sessionization: &Sessionization, venue: &Venue) -> Result<(), ScheduleError> {
        let mut used = BTreeSet::new();
        for (sid, cell) in &self.assignment {
            if sessionization.session(sid).is_none() {
                return Err(ScheduleError::UnknownSession(sid.clone()));
            }
            if venue.slot_index(&cell.slot).is_none() {
                return Err(ScheduleError::UnknownSlot(cell.slot.clone()));
            }
            if venue.room(&cell.room).is_none() || !used.insert(cell) {
                let sessions = self.sessions_in_slot(&cell.slot).len();
                return Err(ScheduleError::SlotOverPacked {
                    slot: cell.slot.clone(),
                    sessions,
                    rooms: venue.rooms.len(),
                });
            }
        }
        for s in &sessionization.sessions {
            if !self.assignment.contains_key(&s.id) {
                return Err(ScheduleError::SessionNotScheduled(s.id.clone()));
            }
        }
        Ok(())
    }

    /// Plain-text slots × rooms grid.
    pub fn render_grid(&self, venue: &Venue) -> String {
        let mut out = String::new();
        let mut by_cell: BTreeMap<(&SlotId, &RoomId), &SessionId> = BTreeMap::new();
        for (s, c) in &self.assignment {
            by_cell.insert((&c.slot, &c.room), s);
        }
        let width = venue
            .rooms
            .iter()
            .map(|r| r.id.as_str().len() + r.capacity.to_string().len() + 3)
            .chain(self.assignment.keys().map(|s| s.as_str().len()))
            .max()
            .unwrap_or(4)
            .max(4);
        let slot_w = venue.slots.iter().map(|s| s.id.as_str().len()).max().unwrap_or(4).max(4);
        let _ = write!(out, "{:<slot_w$}", "slot");
        for r in &venue.rooms {
            let _ = write!(out, " | {:<width$}", format!("{} ({})", r.id, r.capacity));
        }
        out.push('\n');
        for slot in &venue.slots {
            let _ = write!(out, "{:<slot_w$}", slot.id.as_str());
            for r in &venue.rooms {
                let cell = by_cell.get(&(&slot.id, &r.id)).map_or("-", |s| s.as_str());
                let _ = write!(out, " | {cell:<width$}");
            }
            out.push('\n');
        }
        out
    }
}

/// Seat demand per session: distinct persons whose set touches the session.
pub fn session_popularity(sessionization: &Sessionization, prefs: &PreferenceSets) -> BTreeMap<SessionId, u64> {
    let membership = sessionization.membership();
    let mut seen: BTreeMap<SessionId, BTreeSet<&PersonId>> = sessionization
        .sessions
        .iter()
        .map(|s| (s.id.clone(), BTreeSet::new()))
        .collect();
    for (person, set) in &prefs.sets {
        for p in set {
            if let Some(&sid) = membership.get(p) {
                seen.get_mut(sid).expect("membership covers sessions").insert(person);
            }
        }
    }
    seen.into_iter().map(|(s, people)| (s, people.len() as u64)).collect()
}

fn paper_slots<'a>(
    schedule: &'a Schedule,
    sessionization: &'a Sessionization,
) -> BTreeMap<&'a PaperId, (&'a SessionId, &'a SlotId)> {
    let mut out = BTreeMap::new();
    for s in &sessionization.sessions {
        if let Some(cell) = schedule.assignment.get(&s.id) {
            for p in &s.paper_ids {
                out.insert(p, (&s.id, &cell.slot));
            }
        }
    }
    out
}

/// Person-pair conflicts counted directly from preference sets.
pub fn conflict_count(
    schedule: &Schedule,
    sessionization: &Sessionization,
    prefs: &PreferenceSets,
) -> Result<u64, ScheduleError> {
    let placed = paper_slots(schedule, sessionization);
    let mut total = 0u64;
    for set in prefs.sets.values() {
        let located: Vec<(&SessionId, &SlotId)> = set
            .iter()
            .map(|p| placed.get(p).copied().ok_or_else(|| ScheduleError::PaperNotScheduled(p.clone())))
            .collect::<Result<_, _>>()?;
        for (i, (s1, t1)) in located.iter().enumerate() {
            for (s2, t2) in &located[i + 1..] {
                if t1 == t2 && s1 != s2 {
                    total += 1;
                }
            }
        }
    }
    Ok(total)
}

/// Conflict weight per slot: affinity summed over cross-session pairs
/// running in that slot. Unscheduled sessions contribute nothing.
pub fn slot_conflicts(
    schedule: &Schedule,
    sessionization: &Sessionization,
    affinity: &AffinityMatrix,
) -> BTreeMap<SlotId, f64> {
    let mut by_slot: BTreeMap<&SlotId, Vec<&BTreeSet<PaperId>>> = BTreeMap::new();
    for s in &sessionization.sessions {
        if let Some(cell) = schedule.assignment.get(&s.id) {
            by_slot.entry(&cell.slot).or_default().push(&s.paper_ids);
        }
    }
    by_slot
        .into_iter()
        .map(|(slot, sessions)| {
            let mut sum = 0.0;
            for (i, a) in sessions.iter().enumerate() {
                for b in &sessions[i + 1..] {
                    for p in a.iter() {
                        for q in b.iter() {
                            sum += affinity.get(p, q);
                        }
                    }
                }
            }
            (slot.clone(), sum)
        })
        .collect()
}

pub fn conflict_count_from_affinity(
    schedule: &Schedule,
    sessionization: &Sessionization,
    affinity: &AffinityMatrix,
) -> f64 {
    slot_conflicts(schedule, sessionization, affinity).values().sum()
}

/// The `limit` heaviest conflicting paper pairs (same slot, different
/// sessions), heaviest first.
pub fn top_conflicting_pairs(
    schedule: &Schedule,
    sessionization: &Sessionization,
    affinity: &AffinityMatrix,
    limit: usize,
) -> Vec<(PaperPair, SlotId, f64)> {
    let placed = paper_slots(schedule, sessionization);
    let mut pairs: Vec<(PaperPair, SlotId, f64)> = affinity
        .iter()
        .filter_map(|(pair, w)| {
            let (s1, t1) = placed.get(&pair.lo)?;
            let (s2, t2) = placed.get(&pair.hi)?;
            (t1 == t2 && s1 != s2).then(|| (pair.clone(), (*t1).clone(), w))
        })
        .collect();
    pairs.sort_by(|a, b| b.2.total_cmp(&a.2).then_with(|| a.0.cmp(&b.0)));
    pairs.truncate(limit);
    pairs
}

/// Every (author, slot) where the author's papers run in two or more
/// sessions of the slot.
pub fn author_clashes(schedule: &Schedule, sessionization: &Sessionization, dataset: &Dataset) -> Vec<AuthorClash> {
    let placed = paper_slots(schedule, sessionization);
    let mut seen: BTreeMap<(&PersonId, &SlotId), BTreeSet<&SessionId>> = BTreeMap::new();
    for paper in &dataset.papers {
        if let Some((sid, slot)) = placed.get(&paper.id) {
            for a in &paper.author_ids {
                seen.entry((a, slot)).or_default().insert(sid);
            }
        }
    }
    seen.into_iter()
        .filter(|(_, sessions)| sessions.len() >= 2)
        .map(|((author, slot), sessions)| AuthorClash {
            author: author.clone(),
            slot: slot.clone(),
            sessions: sessions.into_iter().cloned().collect(),
        })
        .collect()
}

pub fn room_overflow(schedule: &Schedule, popularity: &BTreeMap<SessionId, u64>, venue: &Venue) -> u64 {
    schedule
        .assignment
        .iter()
        .map(|(s, c)| {
            let demand = popularity.get(s).copied().unwrap_or(0);
            let cap = venue.room(&c.room).map_or(0, |r| u64::from(r.capacity));
            demand.saturating_sub(cap)
        })
        .sum()
}

/// Within each slot, the most popular session gets the largest room. Ties
/// go to the smaller id on both sides.
pub fn assign_rooms(
    slot_assignment: &BTreeMap<SessionId, SlotId>,
    session_popularity: &BTreeMap<SessionId, u64>,
    venue: &Venue,
) -> Result<Schedule, ScheduleError> {
    let mut rooms: Vec<_> = venue.rooms.iter().collect();
    rooms.sort_by(|a, b| b.capacity.cmp(&a.capacity).then_with(|| a.id.cmp(&b.id)));

    let mut by_slot: BTreeMap<&SlotId, Vec<&SessionId>> = BTreeMap::new();
    for (s, slot) in slot_assignment {
        if venue.slot_index(slot).is_none() {
            return Err(ScheduleError::UnknownSlot(slot.clone()));
        }
        by_slot.entry(slot).or_default().push(s);
    }
    let pop = |s: &SessionId| session_popularity.get(s).copied().unwrap_or(0);
    let mut schedule = Schedule::default();
    for (slot, mut sessions) in by_slot {
        if sessions.len() > rooms.len() {
            return Err(ScheduleError::SlotOverPacked {
                slot: slot.clone(),
                sessions: sessions.len(),
                rooms: rooms.len(),
            });
        }
        sessions.sort_by(|a, b| pop(b).cmp(&pop(a)).then_with(|| a.cmp(b)));
        for (s, room) in sessions.into_iter().zip(&rooms) {
            schedule.assignment.insert(
                s.clone(),
                Cell {
                    slot: slot.clone(),
                    room: room.id.clone(),
                },
            );
        }
    }
    schedule.metrics.room_overflow = room_overflow(&schedule, session_popularity, venue);
    Ok(schedule)
}

/// Recomputes every metric of `schedule`.
pub fn measure(
    schedule: &Schedule,
    sessionization: &Sessionization,
    dataset: &Dataset,
    affinity: &AffinityMatrix,
    popularity: &BTreeMap<SessionId, u64>,
) -> ScheduleMetrics {
    ScheduleMetrics {
        conflict_count: conflict_count_from_affinity(schedule, sessionization, affinity),
        author_clashes: author_clashes(schedule, sessionization, dataset).len(),
        room_overflow: room_overflow(schedule, popularity, &dataset.venue),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affinity::{PreferenceSource, PreferenceSets};
    use crate::corpus::{Room, TimeSlot};
    use crate::sessionizer::Session;

    pub(super) fn venue(slots: usize, caps: &[u32]) -> Venue {
        Venue {
            slots: (1..=slots)
                .map(|i| TimeSlot {
                    id: SlotId::new(format!("t{i}")),
                    day: 0,
                    start: 540 + 90 * i as u32,
                    duration: 80,
                })
                .collect(),
            rooms: caps
                .iter()
                .enumerate()
                .map(|(i, &c)| Room {
                    id: RoomId::new(format!("r{}", i + 1)),
                    capacity: c,
                })
                .collect(),
        }
    }

    fn sessionization(groups: &[&[&str]]) -> Sessionization {
        Sessionization {
            sessions: groups
                .iter()
                .enumerate()
                .map(|(i, g)| Session {
                    id: SessionId::new(format!("S{}", i + 1)),
                    paper_ids: g.iter().map(|&p| p.into()).collect(),
                    coherence: 0.0,
                })
                .collect(),
            objective: 0.0,
            warnings: vec![],
        }
    }

    fn place(cells: &[(&str, &str, &str)]) -> Schedule {
        Schedule {
            assignment: cells
                .iter()
                .map(|&(s, t, r)| {
                    (
                        SessionId::from(s),
                        Cell {
                            slot: t.into(),
                            room: r.into(),
                        },
                    )
                })
                .collect(),
            ..Default::default()
        }
    }

    fn prefs(sets: &[&[&str]]) -> PreferenceSets {
        let mut p = PreferenceSets::new(PreferenceSource::AttendeeBookmark);
        for (i, s) in sets.iter().enumerate() {
            p.sets.insert(PersonId::new(format!("u{i}")), s.iter().map(|&x| x.into()).collect());
        }
        p
    }

    #[test]
    fn one_slot_cross_session_pair_is_one_conflict() {
        let sz = sessionization(&[&["p1", "p2"], &["p3", "p4"]]);
        let sched = place(&[("S1", "t1", "r1"), ("S2", "t1", "r2")]);
        let pr = prefs(&[&["p1", "p3"]]);
        assert_eq!(conflict_count(&sched, &sz, &pr).unwrap(), 1);
        assert_eq!(conflict_count_from_affinity(&sched, &sz, &build_affinity(&pr)), 1.0);
        let same = prefs(&[&["p1", "p2"]]);
        assert_eq!(conflict_count(&sched, &sz, &same).unwrap(), 0);
        assert_eq!(conflict_count(&sched, &sz, &prefs(&[])).unwrap(), 0);
    }

    #[test]
    fn three_person_fixture_both_formulas_agree() {
        // Slot t1: S1 {p1,p2} vs S2 {p3,p4}; slot t2: S3 {p5,p6}.
        // u0 {p1,p3,p5}: (p1,p3) -> 1
        // u1 {p1,p2,p4}: (p1,p4),(p2,p4) -> 2
        // u2 {p3,p4,p5,p6}: none cross-session in one slot -> 0
        let sz = sessionization(&[&["p1", "p2"], &["p3", "p4"], &["p5", "p6"]]);
        let sched = place(&[("S1", "t1", "r1"), ("S2", "t1", "r2"), ("S3", "t2", "r1")]);
        let pr = prefs(&[&["p1", "p3", "p5"], &["p1", "p2", "p4"], &["p3", "p4", "p5", "p6"]]);
        assert_eq!(conflict_count(&sched, &sz, &pr).unwrap(), 3);
        assert_eq!(conflict_count_from_affinity(&sched, &sz, &build_affinity(&pr)), 3.0);
    }

    #[test]
    fn single_room_venue_has_no_conflicts() {
        let sz = sessionization(&[&["p1"], &["p2"]]);
        let sched = place(&[("S1", "t1", "r1"), ("S2", "t2", "r1")]);
        let pr = prefs(&[&["p1", "p2"]]);
        assert_eq!(conflict_count_from_affinity(&sched, &sz, &build_affinity(&pr)), 0.0);
        assert_eq!(conflict_count_from_affinity(&sched, &sz, &AffinityMatrix::empty(crate::affinity::AffinitySource::Blended)), 0.0);
    }

    #[test]
    fn unscheduled_paper_is_an_error() {
        let sz = sessionization(&[&["p1"]]);
        let sched = place(&[("S1", "t1", "r1")]);
        assert_eq!(
            conflict_count(&sched, &sz, &prefs(&[&["p1", "p9"]])),
            Err(ScheduleError::PaperNotScheduled("p9".into()))
        );
    }

    #[test]
    fn popular_session_gets_big_room() {
        let v = venue(1, &[20, 50]);
        let slots: BTreeMap<SessionId, SlotId> = [("S1".into(), "t1".into()), ("S2".into(), "t1".into())].into();
        let pop: BTreeMap<SessionId, u64> = [("S1".into(), 10), ("S2".into(), 30)].into();
        let s = assign_rooms(&slots, &pop, &v).unwrap();
        assert_eq!(s.assignment[&SessionId::from("S2")].room.as_str(), "r2");
        assert_eq!(s.metrics.room_overflow, 0);

        let tie: BTreeMap<SessionId, u64> = [("S1".into(), 10), ("S2".into(), 10)].into();
        let s = assign_rooms(&slots, &tie, &v).unwrap();
        assert_eq!(s.assignment[&SessionId::from("S1")].room.as_str(), "r2");
    }

    #[test]
    fn overflow_is_excess_demand() {
        let v = venue(1, &[50, 20]);
        let slots: BTreeMap<SessionId, SlotId> = [("S1".into(), "t1".into())].into();
        let pop: BTreeMap<SessionId, u64> = [("S1".into(), 60)].into();
        assert_eq!(assign_rooms(&slots, &pop, &v).unwrap().metrics.room_overflow, 10);
    }

    #[test]
    fn overpacked_slot_is_rejected() {
        let v = venue(1, &[50]);
        let slots: BTreeMap<SessionId, SlotId> = [("S1".into(), "t1".into()), ("S2".into(), "t1".into())].into();
        assert!(matches!(
            assign_rooms(&slots, &BTreeMap::new(), &v),
            Err(ScheduleError::SlotOverPacked { sessions: 2, rooms: 1, .. })
        ));
    }

    #[test]
    fn session_popularity_counts_distinct_people() {
        let sz = sessionization(&[&["p1", "p2"], &["p3"]]);
        let pr = prefs(&[&["p1", "p2"], &["p2", "p3"], &["p3"]]);
        let pop = session_popularity(&sz, &pr);
        assert_eq!(pop[&SessionId::from("S1")], 2);
        assert_eq!(pop[&SessionId::from("S2")], 2);
    }

    #[test]
    fn grid_lists_every_cell() {
        let v = venue(2, &[50, 20]);
        let sched = place(&[("S1", "t1", "r1"), ("S2", "t2", "r2")]);
        let grid = sched.render_grid(&v);
        assert_eq!(grid.lines().count(), 3);
        assert!(grid.contains("S1") && grid.contains("S2") && grid.contains('-'));
    }
}
