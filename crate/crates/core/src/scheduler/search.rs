use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{
    assign_rooms, measure, ConflictBasis, Schedule, ScheduleConfig, ScheduleError, AUTHOR_CLASH_PENALTY,
};
use crate::corpus::{Dataset, PersonId, SessionId, SlotId};
use crate::sessionizer::Sessionization;

pub const EXACT_MAX_SESSIONS: usize = 8;
pub const EXACT_MAX_SLOTS: usize = 4;

/// Node budget for the feasibility search under the hard author constraint.
const FEASIBILITY_BUDGET: usize = 200_000;

const EPS: f64 = 1e-9;

/// Dense slot-assignment problem over sessions in ascending id order.
struct SlotProblem {
    sessions: Vec<SessionId>,
    slots: usize,
    capacity: usize,
    /// Cross-session affinity, k × k.
    weight: Vec<f64>,
    /// Distinct author indices per session.
    authors: Vec<Vec<usize>>,
    /// Whether two sessions share an author, k × k.
    share_author: Vec<bool>,
    hard: bool,
}

impl SlotProblem {
    fn new(
        sessionization: &Sessionization,
        dataset: &Dataset,
        basis: ConflictBasis<'_>,
        hard: bool,
    ) -> Result<Self, ScheduleError> {
        let venue = &dataset.venue;
        let k = sessionization.sessions.len();
        let cells = venue.cell_count();
        if k > cells {
            return Err(ScheduleError::InsufficientCells { sessions: k, cells });
        }
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| sessionization.sessions[a].id.cmp(&sessionization.sessions[b].id));
        let sessions: Vec<SessionId> = order.iter().map(|&i| sessionization.sessions[i].id.clone()).collect();

        let affinity = basis.to_affinity();
        let mut paper_session = BTreeMap::new();
        for (idx, &i) in order.iter().enumerate() {
            for p in &sessionization.sessions[i].paper_ids {
                paper_session.insert(p, idx);
            }
        }
        let mut weight = vec![0.0; k * k];
        for (pair, w) in affinity.iter() {
            if let (Some(&a), Some(&b)) = (paper_session.get(&pair.lo), paper_session.get(&pair.hi)) {
                if a != b {
                    weight[a * k + b] += w;
                    weight[b * k + a] += w;
                }
            }
        }

        let mut author_index: BTreeMap<&PersonId, usize> = BTreeMap::new();
        let mut authors: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); k];
        for paper in &dataset.papers {
            if let Some(&s) = paper_session.get(&paper.id) {
                for a in &paper.author_ids {
                    let next = author_index.len();
                    let ai = *author_index.entry(a).or_insert(next);
                    authors[s].insert(ai);
                }
            }
        }
        let mut share_author = vec![false; k * k];
        for a in 0..k {
            for b in a + 1..k {
                if !authors[a].is_disjoint(&authors[b]) {
                    share_author[a * k + b] = true;
                    share_author[b * k + a] = true;
                }
            }
        }
        Ok(SlotProblem {
            sessions,
            slots: venue.slots.len(),
            capacity: venue.rooms.len(),
            weight,
            authors: authors.into_iter().map(|s| s.into_iter().collect()).collect(),
            share_author,
            hard,
        })
    }

    fn k(&self) -> usize {
        self.sessions.len()
    }

    fn clashes(&self, members: &[usize]) -> usize {
        let mut all: Vec<usize> = members.iter().flat_map(|&s| self.authors[s].iter().copied()).collect();
        all.sort_unstable();
        let mut count = 0;
        let mut i = 0;
        while i < all.len() {
            let mut j = i + 1;
            while j < all.len() && all[j] == all[i] {
                j += 1;
            }
            if j - i >= 2 {
                count += 1;
            }
            i = j;
        }
        count
    }

    /// Conflict weight of one slot plus the clash penalty. Under the hard
    /// constraint clashes never arise from moves, only from a seeded start.
    fn slot_cost(&self, members: &[usize]) -> f64 {
        let k = self.k();
        let mut sum = 0.0;
        for (i, &a) in members.iter().enumerate() {
            for &b in &members[i + 1..] {
                sum += self.weight[a * k + b];
            }
        }
        sum + AUTHOR_CLASH_PENALTY * self.clashes(members) as f64
    }

    fn fits(&self, s: usize, members: &[usize], except: Option<usize>) -> bool {
        !self.hard
            || members
                .iter()
                .filter(|&&m| Some(m) != except && m != s)
                .all(|&m| !self.share_author[s * self.k() + m])
    }

    fn members(&self, slot_of: &[usize]) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.slots];
        for (s, &t) in slot_of.iter().enumerate() {
            out[t].push(s);
        }
        out
    }

    fn cost(&self, slot_of: &[usize]) -> f64 {
        self.members(slot_of).iter().map(|m| self.slot_cost(m)).sum()
    }

    /// Depth-first search for any assignment that respects capacity and,
    /// under the hard constraint, author separation.
    fn find_feasible(&self, slot_order: &[usize], budget: &mut usize) -> Option<Vec<usize>> {
        let k = self.k();
        let mut order: Vec<usize> = (0..k).collect();
        let degree = |s: usize| (0..k).filter(|&m| self.share_author[s * k + m]).count();
        order.sort_by_key(|&s| std::cmp::Reverse(degree(s)));
        let mut slot_of = vec![usize::MAX; k];
        let mut members = vec![Vec::new(); self.slots];
        if self.dfs_feasible(&order, 0, slot_order, &mut slot_of, &mut members, budget) {
            Some(slot_of)
        } else {
            None
        }
    }

    fn dfs_feasible(
        &self,
        order: &[usize],
        depth: usize,
        slot_order: &[usize],
        slot_of: &mut [usize],
        members: &mut [Vec<usize>],
        budget: &mut usize,
    ) -> bool {
        if depth == order.len() {
            return true;
        }
        if *budget == 0 {
            return false;
        }
        *budget -= 1;
        let s = order[depth];
        for &t in slot_order {
            if members[t].len() < self.capacity && self.fits(s, &members[t], None) {
                members[t].push(s);
                slot_of[s] = t;
                if self.dfs_feasible(order, depth + 1, slot_order, slot_of, members, budget) {
                    return true;
                }
                members[t].pop();
            }
        }
        false
    }

    fn random_start(&self, rng: &mut ChaCha8Rng) -> Vec<usize> {
        let k = self.k();
        let mut order: Vec<usize> = (0..k).collect();
        order.shuffle(rng);
        let mut slot_of = vec![usize::MAX; k];
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); self.slots];
        for &s in &order {
            let open: Vec<usize> = (0..self.slots)
                .filter(|&t| members[t].len() < self.capacity && self.fits(s, &members[t], None))
                .collect();
            if open.is_empty() {
                let mut slot_order: Vec<usize> = (0..self.slots).collect();
                slot_order.shuffle(rng);
                let mut budget = FEASIBILITY_BUDGET;
                if let Some(found) = self.find_feasible(&slot_order, &mut budget) {
                    return found;
                }
                // Only reachable when hard separation is infeasible, which
                // the caller rules out before searching.
                unreachable!("feasibility was established before the search");
            }
            let t = open[rng.gen_range(0..open.len())];
            members[t].push(s);
            slot_of[s] = t;
        }
        slot_of
    }

    /// First-improvement descent over relocations and swaps.
    fn descend(&self, slot_of: &mut [usize], rng: &mut ChaCha8Rng, max_moves: usize) {
        let k = self.k();
        let mut members = self.members(slot_of);
        let mut order: Vec<usize> = (0..k).collect();
        order.shuffle(rng);
        let mut slot_order: Vec<usize> = (0..self.slots).collect();
        slot_order.shuffle(rng);
        let mut moves = 0;
        loop {
            let mut improved = false;
            for &s in &order {
                for &u in &slot_order {
                    let t = slot_of[s];
                    if u == t || members[u].len() >= self.capacity || !self.fits(s, &members[u], None) {
                        continue;
                    }
                    let src: Vec<usize> = members[t].iter().copied().filter(|&m| m != s).collect();
                    let mut dst = members[u].clone();
                    dst.push(s);
                    let before = self.slot_cost(&members[t]) + self.slot_cost(&members[u]);
                    let after = self.slot_cost(&src) + self.slot_cost(&dst);
                    if after < before - EPS {
                        members[t] = src;
                        members[u] = dst;
                        slot_of[s] = u;
                        improved = true;
                        moves += 1;
                    }
                }
                for &s2 in &order {
                    let (t, u) = (slot_of[s], slot_of[s2]);
                    if t == u || !self.fits(s, &members[u], Some(s2)) || !self.fits(s2, &members[t], Some(s)) {
                        continue;
                    }
                    let a: Vec<usize> = members[t].iter().map(|&m| if m == s { s2 } else { m }).collect();
                    let b: Vec<usize> = members[u].iter().map(|&m| if m == s2 { s } else { m }).collect();
                    let before = self.slot_cost(&members[t]) + self.slot_cost(&members[u]);
                    let after = self.slot_cost(&a) + self.slot_cost(&b);
                    if after < before - EPS {
                        members[t] = a;
                        members[u] = b;
                        slot_of[s] = u;
                        slot_of[s2] = t;
                        improved = true;
                        moves += 1;
                    }
                }
                if moves >= max_moves {
                    return;
                }
            }
            if !improved {
                return;
            }
        }
    }

    fn to_slot_assignment(&self, slot_of: &[usize], dataset: &Dataset) -> BTreeMap<SessionId, SlotId> {
        slot_of
            .iter()
            .enumerate()
            .map(|(s, &t)| (self.sessions[s].clone(), dataset.venue.slots[t].id.clone()))
            .collect()
    }
}

fn better(a: (f64, &[usize]), b: (f64, &[usize])) -> bool {
    let tol = EPS * a.0.abs().max(b.0.abs()).max(1.0);
    if a.0 < b.0 - tol {
        true
    } else if a.0 > b.0 + tol {
        false
    } else {
        a.1 < b.1
    }
}

/// Builds the problem, relaxing the hard author constraint with a warning
/// when no separated assignment exists.
fn prepare(
    sessionization: &Sessionization,
    dataset: &Dataset,
    basis: ConflictBasis<'_>,
    hard: bool,
) -> Result<(SlotProblem, Vec<String>), ScheduleError> {
    let mut problem = SlotProblem::new(sessionization, dataset, basis, hard)?;
    let mut warnings = Vec::new();
    if problem.hard {
        let slot_order: Vec<usize> = (0..problem.slots).collect();
        let mut budget = FEASIBILITY_BUDGET;
        if problem.find_feasible(&slot_order, &mut budget).is_none() {
            let msg = if budget == 0 {
                "no author-separated assignment found within the search budget; \
                 author clashes relaxed to a penalty of 1000 each"
            } else {
                "author separation is infeasible for this venue; \
                 author clashes relaxed to a penalty of 1000 each"
            };
            log::warn!("{msg}");
            warnings.push(msg.to_owned());
            problem.hard = false;
        }
    }
    Ok((problem, warnings))
}

fn finish(
    problem: &SlotProblem,
    slot_of: &[usize],
    sessionization: &Sessionization,
    dataset: &Dataset,
    basis: ConflictBasis<'_>,
    popularity: &BTreeMap<SessionId, u64>,
    warnings: Vec<String>,
) -> Result<Schedule, ScheduleError> {
    let slots = problem.to_slot_assignment(slot_of, dataset);
    let mut schedule = assign_rooms(&slots, popularity, &dataset.venue)?;
    schedule.metrics = measure(&schedule, sessionization, dataset, &basis.to_affinity(), popularity);
    schedule.warnings = warnings;
    Ok(schedule)
}

fn check_config(config: &ScheduleConfig) -> Result<(), ScheduleError> {
    if config.restarts == 0 {
        return Err(ScheduleError::InvalidConfig("restarts must be at least 1".into()));
    }
    Ok(())
}

/// Multi-restart local search over slot assignments; rooms are then
/// assigned per slot by popularity.
pub fn optimize_schedule(
    sessionization: &Sessionization,
    dataset: &Dataset,
    basis: ConflictBasis<'_>,
    popularity: &BTreeMap<SessionId, u64>,
    config: &ScheduleConfig,
) -> Result<Schedule, ScheduleError> {
    run(sessionization, dataset, basis, popularity, config, None)
}

/// Like [`optimize_schedule`], with the first restart descending from the
/// slots of `initial`.
pub fn optimize_schedule_from(
    initial: &Schedule,
    sessionization: &Sessionization,
    dataset: &Dataset,
    basis: ConflictBasis<'_>,
    popularity: &BTreeMap<SessionId, u64>,
    config: &ScheduleConfig,
) -> Result<Schedule, ScheduleError> {
    run(sessionization, dataset, basis, popularity, config, Some(initial))
}

fn run(
    sessionization: &Sessionization,
    dataset: &Dataset,
    basis: ConflictBasis<'_>,
    popularity: &BTreeMap<SessionId, u64>,
    config: &ScheduleConfig,
    initial: Option<&Schedule>,
) -> Result<Schedule, ScheduleError> {
    check_config(config)?;
    let (problem, warnings) = prepare(sessionization, dataset, basis, config.hard_author_constraint)?;
    let seeded: Option<Vec<usize>> = match initial {
        Some(schedule) => Some(
            problem
                .sessions
                .iter()
                .map(|s| {
                    let cell = schedule
                        .assignment
                        .get(s)
                        .ok_or_else(|| ScheduleError::SessionNotScheduled(s.clone()))?;
                    dataset
                        .venue
                        .slot_index(&cell.slot)
                        .ok_or_else(|| ScheduleError::UnknownSlot(cell.slot.clone()))
                })
                .collect::<Result<_, _>>()?,
        ),
        None => None,
    };

    let results: Vec<(f64, Vec<usize>)> = (0..config.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(r as u64);
            let mut slot_of = match (&seeded, r) {
                (Some(start), 0) => start.clone(),
                _ => problem.random_start(&mut rng),
            };
            problem.descend(&mut slot_of, &mut rng, config.max_iterations);
            (problem.cost(&slot_of), slot_of)
        })
        .collect();

    let mut best: Option<(f64, Vec<usize>)> = None;
    for (cost, slot_of) in results {
        if best.as_ref().is_none_or(|(bc, bs)| better((cost, &slot_of), (*bc, bs))) {
            best = Some((cost, slot_of));
        }
    }
    let (_, slot_of) = best.expect("restarts >= 1");
    finish(&problem, &slot_of, sessionization, dataset, basis, popularity, warnings)
}

/// Exhaustive minimum over all slot assignments of small instances. Ties
/// go to the lexicographically smallest assignment (sessions by id, slots
/// in venue order).
pub fn schedule_exact(
    sessionization: &Sessionization,
    dataset: &Dataset,
    basis: ConflictBasis<'_>,
    popularity: &BTreeMap<SessionId, u64>,
    hard_author_constraint: bool,
) -> Result<Schedule, ScheduleError> {
    if sessionization.sessions.len() > EXACT_MAX_SESSIONS || dataset.venue.slots.len() > EXACT_MAX_SLOTS {
        return Err(ScheduleError::TooLarge {
            max_sessions: EXACT_MAX_SESSIONS,
            max_slots: EXACT_MAX_SLOTS,
        });
    }
    let (problem, warnings) = prepare(sessionization, dataset, basis, hard_author_constraint)?;
    let k = problem.k();
    let mut slot_of = vec![0; k];
    let mut members = vec![Vec::new(); problem.slots];
    let mut best: Option<(f64, Vec<usize>)> = None;
    enumerate(&problem, 0, &mut slot_of, &mut members, &mut best);
    let (_, slot_of) = best.expect("feasibility established by prepare");
    finish(&problem, &slot_of, sessionization, dataset, basis, popularity, warnings)
}

fn enumerate(
    problem: &SlotProblem,
    s: usize,
    slot_of: &mut [usize],
    members: &mut [Vec<usize>],
    best: &mut Option<(f64, Vec<usize>)>,
) {
    if s == problem.k() {
        let cost: f64 = members.iter().map(|m| problem.slot_cost(m)).sum();
        if best.as_ref().is_none_or(|(bc, bs)| better((cost, slot_of), (*bc, bs))) {
            *best = Some((cost, slot_of.to_vec()));
        }
        return;
    }
    for t in 0..problem.slots {
        if members[t].len() < problem.capacity && problem.fits(s, &members[t], None) {
            members[t].push(s);
            slot_of[s] = t;
            enumerate(problem, s + 1, slot_of, members, best);
            members[t].pop();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::tests::venue;
    use super::super::{author_clashes, conflict_count_from_affinity};
    use super::*;
    use crate::affinity::{AffinityMatrix, AffinitySource};
    use crate::corpus::{Award, Paper, PaperId};
    use crate::sessionizer::Session;

    fn dataset(groups: &[(&str, &[&str])], authors: &[(&str, &str)], slots: usize, caps: &[u32]) -> (Dataset, Sessionization) {
        let author_of: BTreeMap<&str, &str> = authors.iter().copied().collect();
        let mut papers = Vec::new();
        let mut sessions = Vec::new();
        for (sid, ps) in groups {
            for p in *ps {
                papers.push(Paper {
                    id: (*p).into(),
                    title: format!("paper {p}"),
                    abstract_text: String::new(),
                    keywords: vec![],
                    author_ids: vec![author_of.get(p).copied().unwrap_or(*p).into()],
                    award: Award::None,
                });
            }
            sessions.push(Session {
                id: (*sid).into(),
                paper_ids: ps.iter().map(|&p| p.into()).collect(),
                coherence: 0.0,
            });
        }
        let d = Dataset::assemble(papers, venue(slots, caps), vec![], vec![], None);
        let s = Sessionization {
            sessions,
            objective: 0.0,
            warnings: vec![],
        };
        (d, s)
    }

    fn aff(pairs: &[(&str, &str, f64)]) -> AffinityMatrix {
        let mut m = AffinityMatrix::empty(AffinitySource::Blended);
        for &(p, q, w) in pairs {
            m.add(&PaperId::from(p), &PaperId::from(q), w);
        }
        m
    }

    #[test]
    fn separable_sessions_get_distinct_slots() {
        let (d, s) = dataset(&[("S1", &["a"]), ("S2", &["b"])], &[], 2, &[10, 10]);
        let m = aff(&[("a", "b", 3.0)]);
        let exact = schedule_exact(&s, &d, ConflictBasis::Affinity(&m), &BTreeMap::new(), true).unwrap();
        assert_eq!(exact.metrics.conflict_count, 0.0);
        assert_ne!(exact.slot_of(&"S1".into()), exact.slot_of(&"S2".into()));
        let heur = optimize_schedule(&s, &d, ConflictBasis::Affinity(&m), &BTreeMap::new(), &ScheduleConfig::default()).unwrap();
        assert_eq!(heur.metrics.conflict_count, 0.0);
    }

    #[test]
    fn one_slot_forces_full_cross_affinity() {
        let (d, s) = dataset(&[("S1", &["a", "c"]), ("S2", &["b"])], &[], 1, &[10, 10]);
        let m = aff(&[("a", "b", 3.0), ("c", "b", 2.0), ("a", "c", 7.0)]);
        let exact = schedule_exact(&s, &d, ConflictBasis::Affinity(&m), &BTreeMap::new(), true).unwrap();
        assert_eq!(exact.metrics.conflict_count, 5.0);
    }

    #[test]
    fn single_slot_search_equals_room_assignment() {
        let (d, s) = dataset(&[("S1", &["a"]), ("S2", &["b"]), ("S3", &["c"])], &[], 1, &[10, 30, 20]);
        let m = aff(&[("a", "b", 1.0)]);
        let pop: BTreeMap<SessionId, u64> = [("S1".into(), 5), ("S2".into(), 25), ("S3".into(), 15)].into();
        let heur = optimize_schedule(&s, &d, ConflictBasis::Affinity(&m), &pop, &ScheduleConfig::default()).unwrap();
        let direct = assign_rooms(&heur.slot_assignment(), &pop, &d.venue).unwrap();
        assert_eq!(heur.assignment, direct.assignment);
        assert_eq!(heur.assignment[&SessionId::from("S2")].room.as_str(), "r2");
    }

    #[test]
    fn too_many_sessions_for_cells() {
        let (d, s) = dataset(&[("S1", &["a"]), ("S2", &["b"]), ("S3", &["c"])], &[], 1, &[10, 10]);
        let m = aff(&[]);
        assert_eq!(
            optimize_schedule(&s, &d, ConflictBasis::Affinity(&m), &BTreeMap::new(), &ScheduleConfig::default()).unwrap_err(),
            ScheduleError::InsufficientCells { sessions: 3, cells: 2 }
        );
    }

    #[test]
    fn shared_author_is_separated_even_against_affinity() {
        // S1 and S2 share author x; affinity pushes S1 with S3 apart, but
        // separating the author is mandatory.
        let (d, s) = dataset(
            &[("S1", &["a"]), ("S2", &["b"]), ("S3", &["c"]), ("S4", &["e"])],
            &[("a", "x"), ("b", "x")],
            2,
            &[10, 10],
        );
        let m = aff(&[("a", "c", 5.0), ("b", "e", 5.0), ("a", "e", 1.0)]);
        let heur = optimize_schedule(&s, &d, ConflictBasis::Affinity(&m), &BTreeMap::new(), &ScheduleConfig::default()).unwrap();
        assert!(author_clashes(&heur, &s, &d).is_empty());
        let exact = schedule_exact(&s, &d, ConflictBasis::Affinity(&m), &BTreeMap::new(), true).unwrap();
        assert!(author_clashes(&exact, &s, &d).is_empty());
        assert_eq!(heur.metrics.conflict_count, exact.metrics.conflict_count);
        assert_eq!(exact.metrics.conflict_count, conflict_count_from_affinity(&exact, &s, &m));
    }

    #[test]
    fn infeasible_author_separation_is_relaxed_with_warning() {
        // Three sessions by the same author, two slots.
        let (d, s) = dataset(
            &[("S1", &["a"]), ("S2", &["b"]), ("S3", &["c"])],
            &[("a", "x"), ("b", "x"), ("c", "x")],
            2,
            &[10, 10],
        );
        let m = aff(&[]);
        let heur = optimize_schedule(&s, &d, ConflictBasis::Affinity(&m), &BTreeMap::new(), &ScheduleConfig::default()).unwrap();
        assert_eq!(heur.warnings.len(), 1);
        assert_eq!(heur.metrics.author_clashes, 1);
        let exact = schedule_exact(&s, &d, ConflictBasis::Affinity(&m), &BTreeMap::new(), true).unwrap();
        assert_eq!(exact.metrics.author_clashes, 1);
    }

    #[test]
    fn exact_rejects_large_instances() {
        let groups: Vec<(String, Vec<String>)> = (0..9).map(|i| (format!("S{i}"), vec![format!("p{i}")])).collect();
        let refs: Vec<(&str, Vec<&str>)> = groups.iter().map(|(s, ps)| (s.as_str(), ps.iter().map(String::as_str).collect())).collect();
        let refs2: Vec<(&str, &[&str])> = refs.iter().map(|(s, ps)| (*s, ps.as_slice())).collect();
        let (d, s) = dataset(&refs2, &[], 3, &[1, 1, 1]);
        let m = aff(&[]);
        assert!(matches!(
            schedule_exact(&s, &d, ConflictBasis::Affinity(&m), &BTreeMap::new(), true),
            Err(ScheduleError::TooLarge { .. })
        ));
    }

    #[test]
    fn seeded_reoptimization_never_worsens() {
        let (d, s) = dataset(
            &[("S1", &["a"]), ("S2", &["b"]), ("S3", &["c"]), ("S4", &["e"])],
            &[],
            2,
            &[10, 10],
        );
        let m = aff(&[("a", "b", 4.0), ("c", "e", 4.0), ("a", "c", 1.0)]);
        let start = assign_rooms(
            &[("S1".into(), "t1".into()), ("S2".into(), "t1".into()), ("S3".into(), "t2".into()), ("S4".into(), "t2".into())].into(),
            &BTreeMap::new(),
            &d.venue,
        )
        .unwrap();
        let config = ScheduleConfig {
            restarts: 1,
            ..Default::default()
        };
        let out = optimize_schedule_from(&start, &s, &d, ConflictBasis::Affinity(&m), &BTreeMap::new(), &config).unwrap();
        assert!(out.metrics.conflict_count <= 8.0);
        assert_eq!(out.metrics.conflict_count, 0.0);
    }
}
