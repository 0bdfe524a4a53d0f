//! Single-paper edits to a scheduled program and their consequences.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{assign_rooms, author_clashes, measure, session_popularity, Schedule, ScheduleError};
use crate::affinity::{AffinityMatrix, PreferenceSets};
use crate::corpus::{Dataset, PaperId, PersonId, SessionId, SlotId};
use crate::sessionizer::Sessionization;

/// Everything a move needs besides the program itself.
#[derive(Clone, Copy, Debug)]
pub struct MoveContext<'a> {
    pub dataset: &'a Dataset,
    /// Affinity used for both coherence and conflicts.
    pub affinity: &'a AffinityMatrix,
    /// Preferences behind session popularity (room demand).
    pub prefs: &'a PreferenceSets,
    pub min_size: usize,
    pub max_size: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    AuthorClash { author: PersonId, slot: SlotId },
    Undersized { session: SessionId, size: usize },
    RoomOverflow { session: SessionId, excess: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MoveDelta {
    pub feasible: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub delta_conflicts: f64,
    pub delta_coherence: f64,
    /// Violations present after the move but not before.
    pub new_violations: Vec<Violation>,
}

impl MoveDelta {
    fn rejected(reason: String) -> Self {
        MoveDelta {
            feasible: false,
            reason: Some(reason),
            delta_conflicts: 0.0,
            delta_coherence: 0.0,
            new_violations: vec![],
        }
    }
}

/// Author clashes, sessions below `min_size`, and rooms too small for
/// their session's demand.
pub fn violations(ctx: &MoveContext<'_>, sessionization: &Sessionization, schedule: &Schedule) -> Vec<Violation> {
    let mut out: BTreeSet<Violation> = author_clashes(schedule, sessionization, ctx.dataset)
        .into_iter()
        .map(|c| Violation::AuthorClash {
            author: c.author,
            slot: c.slot,
        })
        .collect();
    for s in &sessionization.sessions {
        if s.paper_ids.len() < ctx.min_size {
            out.insert(Violation::Undersized {
                session: s.id.clone(),
                size: s.paper_ids.len(),
            });
        }
    }
    let demand = session_popularity(sessionization, ctx.prefs);
    for (sid, cell) in &schedule.assignment {
        let need = demand.get(sid).copied().unwrap_or(0);
        let cap = ctx.dataset.venue.room(&cell.room).map_or(0, |r| u64::from(r.capacity));
        if need > cap {
            out.insert(Violation::RoomOverflow {
                session: sid.clone(),
                excess: need - cap,
            });
        }
    }
    out.into_iter().collect()
}

struct Located<'a> {
    source: &'a SessionId,
    source_size: usize,
    target_size: usize,
}

fn locate<'a>(
    sessionization: &'a Sessionization,
    paper: &PaperId,
    target: &SessionId,
) -> Result<Located<'a>, ScheduleError> {
    let source = sessionization
        .session_of(paper)
        .ok_or_else(|| ScheduleError::UnknownPaper(paper.clone()))?;
    let tgt = sessionization
        .session(target)
        .ok_or_else(|| ScheduleError::UnknownSession(target.clone()))?;
    Ok(Located {
        source: &source.id,
        source_size: source.paper_ids.len(),
        target_size: tgt.paper_ids.len(),
    })
}

fn rejection(ctx: &MoveContext<'_>, at: &Located<'_>, paper: &PaperId, target: &SessionId) -> Option<String> {
    if at.source == target {
        Some(format!("paper \"{paper}\" is already in session \"{target}\""))
    } else if at.target_size >= ctx.max_size {
        Some(format!("session \"{target}\" already holds {} papers", at.target_size))
    } else if at.source_size <= 1 {
        Some(format!("moving \"{paper}\" would leave session \"{}\" empty", at.source))
    } else {
        None
    }
}

/// Read-only what-if for moving `paper` into session `target`.
pub fn evaluate_move(
    ctx: &MoveContext<'_>,
    sessionization: &Sessionization,
    schedule: &Schedule,
    paper: &PaperId,
    target: &SessionId,
) -> Result<MoveDelta, ScheduleError> {
    let at = locate(sessionization, paper, target)?;
    if let Some(reason) = rejection(ctx, &at, paper, target) {
        return Ok(MoveDelta::rejected(reason));
    }
    let slot = |s: &SessionId| {
        schedule
            .slot_of(s)
            .ok_or_else(|| ScheduleError::SessionNotScheduled(s.clone()))
    };
    let src_slot = slot(at.source)?;
    let tgt_slot = slot(target)?;

    let mut delta_coherence = 0.0;
    let mut delta_conflicts = 0.0;
    for s in &sessionization.sessions {
        let s_slot = slot(&s.id)?;
        for q in s.paper_ids.iter().filter(|q| *q != paper) {
            let a = ctx.affinity.get(paper, q);
            if a == 0.0 {
                continue;
            }
            if &s.id == at.source {
                delta_coherence -= a;
            } else if &s.id == target {
                delta_coherence += a;
            }
            if s_slot == src_slot && &s.id != at.source {
                delta_conflicts -= a;
            }
            if s_slot == tgt_slot && &s.id != target {
                delta_conflicts += a;
            }
        }
    }

    let before: BTreeSet<Violation> = violations(ctx, sessionization, schedule).into_iter().collect();
    let (moved_sz, moved_schedule) = apply_unchecked(ctx, sessionization, schedule, paper, target)?;
    let new_violations = violations(ctx, &moved_sz, &moved_schedule)
        .into_iter()
        .filter(|v| !before.contains(v))
        .collect();
    Ok(MoveDelta {
        feasible: true,
        reason: None,
        delta_conflicts,
        delta_coherence,
        new_violations,
    })
}

/// Moves `paper` into `target`, keeps every session in its slot, and
/// reassigns rooms within slots for the new demand.
pub fn apply_move(
    ctx: &MoveContext<'_>,
    sessionization: &Sessionization,
    schedule: &Schedule,
    paper: &PaperId,
    target: &SessionId,
) -> Result<(Sessionization, Schedule), ScheduleError> {
    let at = locate(sessionization, paper, target)?;
    if let Some(reason) = rejection(ctx, &at, paper, target) {
        return Err(ScheduleError::InfeasibleMove(reason));
    }
    apply_unchecked(ctx, sessionization, schedule, paper, target)
}

fn apply_unchecked(
    ctx: &MoveContext<'_>,
    sessionization: &Sessionization,
    schedule: &Schedule,
    paper: &PaperId,
    target: &SessionId,
) -> Result<(Sessionization, Schedule), ScheduleError> {
    let mut sz = sessionization.clone();
    sz.move_paper(paper, target, ctx.affinity)
        .map_err(|_| ScheduleError::UnknownPaper(paper.clone()))?;
    let popularity = session_popularity(&sz, ctx.prefs);
    let slots: BTreeMap<SessionId, SlotId> = schedule.slot_assignment();
    let mut out = assign_rooms(&slots, &popularity, &ctx.dataset.venue)?;
    out.metrics = measure(&out, &sz, ctx.dataset, ctx.affinity, &popularity);
    out.warnings = schedule.warnings.clone();
    Ok((sz, out))
}

#[cfg(test)]
mod tests {
    use super::super::tests::venue;
    use super::*;
    use crate::affinity::{build_affinity, PreferenceSource};
    use crate::corpus::{Award, Paper};

    struct Fixture {
        dataset: Dataset,
        prefs: PreferenceSets,
        affinity: AffinityMatrix,
        sz: Sessionization,
        schedule: Schedule,
    }

    fn fixture() -> Fixture {
        // S1 {p1,p2} and S2 {p3,p4} share t1; S3 {p5,p6} runs in t2.
        // p1 and p5 share author x.
        let papers = ["p1", "p2", "p3", "p4", "p5", "p6"]
            .iter()
            .map(|&p| Paper {
                id: p.into(),
                title: p.to_owned(),
                abstract_text: String::new(),
                keywords: vec![],
                author_ids: vec![if p == "p1" || p == "p5" { "x".into() } else { PersonId::new(format!("a{p}")) }],
                award: Award::None,
            })
            .collect();
        let dataset = Dataset::assemble(papers, venue(2, &[3, 1]), vec![], vec![], None);
        let mut prefs = PreferenceSets::new(PreferenceSource::AttendeeBookmark);
        for (u, set) in [("u1", &["p1", "p3"][..]), ("u2", &["p1", "p5"]), ("u3", &["p2", "p3", "p6"])] {
            prefs.sets.insert(u.into(), set.iter().map(|&p| p.into()).collect());
        }
        let affinity = build_affinity(&prefs);
        let groups = vec![
            ["p1", "p2"].iter().map(|&p| p.into()).collect(),
            ["p3", "p4"].iter().map(|&p| p.into()).collect(),
            ["p5", "p6"].iter().map(|&p| p.into()).collect(),
        ];
        let sz = Sessionization::from_groups(groups, &affinity, &BTreeMap::new(), 0.0);
        let pop = session_popularity(&sz, &prefs);
        let slots = [("S1".into(), "t1".into()), ("S2".into(), "t1".into()), ("S3".into(), "t2".into())].into();
        let mut schedule = assign_rooms(&slots, &pop, &dataset.venue).unwrap();
        schedule.metrics = measure(&schedule, &sz, &dataset, &affinity, &pop);
        Fixture {
            dataset,
            prefs,
            affinity,
            sz,
            schedule,
        }
    }

    fn ctx(f: &Fixture) -> MoveContext<'_> {
        MoveContext {
            dataset: &f.dataset,
            affinity: &f.affinity,
            prefs: &f.prefs,
            min_size: 2,
            max_size: 3,
        }
    }

    #[test]
    fn delta_matches_applied_metrics() {
        let f = fixture();
        let c = ctx(&f);
        let d = evaluate_move(&c, &f.sz, &f.schedule, &"p1".into(), &"S2".into()).unwrap();
        assert!(d.feasible);
        let (sz, sched) = apply_move(&c, &f.sz, &f.schedule, &"p1".into(), &"S2".into()).unwrap();
        assert_eq!(sched.metrics.conflict_count - f.schedule.metrics.conflict_count, d.delta_conflicts);
        assert_eq!(sz.total_coherence() - f.sz.total_coherence(), d.delta_coherence);
        // p1 joins p3 (u1) and leaves p2 (nobody).
        assert_eq!(d.delta_coherence, 1.0);
        assert!(d.new_violations.contains(&Violation::Undersized {
            session: "S1".into(),
            size: 1
        }));
    }

    #[test]
    fn moving_into_other_slot_can_create_author_clash() {
        let f = fixture();
        let c = ctx(&f);
        // p5 joining S2 runs both papers of x in t1.
        let d = evaluate_move(&c, &f.sz, &f.schedule, &"p2".into(), &"S3".into()).unwrap();
        assert!(d.feasible);
        assert_eq!(d.delta_coherence, 1.0);
        let d = evaluate_move(&c, &f.sz, &f.schedule, &"p5".into(), &"S2".into()).unwrap();
        assert!(d.new_violations.contains(&Violation::AuthorClash {
            author: "x".into(),
            slot: "t1".into()
        }));
    }

    #[test]
    fn infeasible_moves_are_reported_not_applied() {
        let f = fixture();
        let mut c = ctx(&f);
        let same = evaluate_move(&c, &f.sz, &f.schedule, &"p1".into(), &"S1".into()).unwrap();
        assert!(!same.feasible);
        assert_eq!(same.delta_conflicts, 0.0);
        c.max_size = 2;
        let full = evaluate_move(&c, &f.sz, &f.schedule, &"p1".into(), &"S2".into()).unwrap();
        assert!(!full.feasible);
        assert!(matches!(
            apply_move(&c, &f.sz, &f.schedule, &"p1".into(), &"S2".into()),
            Err(ScheduleError::InfeasibleMove(_))
        ));
    }

    #[test]
    fn unknown_ids_error() {
        let f = fixture();
        let c = ctx(&f);
        assert_eq!(
            evaluate_move(&c, &f.sz, &f.schedule, &"zz".into(), &"S2".into()).unwrap_err(),
            ScheduleError::UnknownPaper("zz".into())
        );
        assert_eq!(
            evaluate_move(&c, &f.sz, &f.schedule, &"p1".into(), &"S9".into()).unwrap_err(),
            ScheduleError::UnknownSession("S9".into())
        );
    }

    #[test]
    fn small_room_overflow_is_a_violation() {
        let f = fixture();
        let c = ctx(&f);
        let v = violations(&c, &f.sz, &f.schedule);
        // S1 and S2 each have demand 2 and 2; rooms hold 3 and 1.
        assert!(v.iter().any(|v| matches!(v, Violation::RoomOverflow { excess: 1, .. })));
    }
}
