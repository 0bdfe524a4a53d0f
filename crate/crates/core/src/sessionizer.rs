//! Partitioning papers into size-bounded sessions that maximize internal
//! affinity, optionally penalizing uneven session popularity.
//!
//! The heuristic is greedy pair seeding followed by relocation/swap local
//! search, repeated over seeded restarts. [`sessionize_exact`] enumerates
//! every feasible partition of small instances and serves as its oracle.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::affinity::AffinityMatrix;
use crate::corpus::{Dataset, PaperId, SessionId};

/// Largest instance [`sessionize_exact`] accepts.
pub const EXACT_MAX_PAPERS: usize = 12;

const EPS: f64 = 1e-9;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum SessionError {
    #[error("no papers to sessionize")]
    Empty,
    #[error("invalid session config: {0}")]
    InvalidConfig(String),
    #[error("exact sessionization supports at most {max} papers, got {n}")]
    TooLarge { n: usize, max: usize },
    #[error("duplicate paper id \"{0}\"")]
    DuplicatePaper(PaperId),
    #[error("unknown paper id \"{0}\"")]
    UnknownPaper(PaperId),
    #[error("unknown session id \"{0}\"")]
    UnknownSession(SessionId),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub min_size: usize,
    pub max_size: usize,
    /// Weight of the session-popularity variance penalty.
    pub balance_weight: f64,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            min_size: 4,
            max_size: 5,
            balance_weight: 0.0,
            restarts: 20,
            seed: 0,
        }
    }
}

impl SessionConfig {
    pub fn validate(&self) -> Result<(), SessionError> {
        if self.min_size == 0 || self.min_size > self.max_size {
            return Err(SessionError::InvalidConfig(format!(
                "need 1 <= min_size <= max_size, got {}..{}",
                self.min_size, self.max_size
            )));
        }
        if self.restarts == 0 {
            return Err(SessionError::InvalidConfig("restarts must be at least 1".into()));
        }
        if self.balance_weight.is_nan() || self.balance_weight < 0.0 {
            return Err(SessionError::InvalidConfig("balance_weight must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub id: SessionId,
    pub paper_ids: BTreeSet<PaperId>,
    pub coherence: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub session_id: SessionId,
    pub papers: Vec<PaperId>,
    pub coherence: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sessionization {
    pub sessions: Vec<Session>,
    pub objective: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Sum of pair affinities inside a set of papers.
pub fn coherence<'a>(papers: impl IntoIterator<Item = &'a PaperId>, affinity: &AffinityMatrix) -> f64 {
    let papers: Vec<&PaperId> = papers.into_iter().collect();
    let mut total = 0.0;
    for (i, p) in papers.iter().enumerate() {
        for q in &papers[i + 1..] {
            total += affinity.get(p, q);
        }
    }
    total
}

/// Session popularity used by the balance penalty: the sum of its papers'
/// popularity counts.
pub fn session_weight(session: &Session, popularity: &BTreeMap<PaperId, u64>) -> f64 {
    session
        .paper_ids
        .iter()
        .map(|p| popularity.get(p).copied().unwrap_or(0) as f64)
        .sum()
}

fn population_variance(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n
}

/// Σ coherence − β·variance(session popularity), recomputed from scratch.
pub fn objective(sessions: &[Session], popularity: &BTreeMap<PaperId, u64>, beta: f64) -> f64 {
    let coh: f64 = sessions.iter().map(|s| s.coherence).sum();
    if beta == 0.0 {
        return coh;
    }
    let weights: Vec<f64> = sessions.iter().map(|s| session_weight(s, popularity)).collect();
    coh - beta * population_variance(&weights)
}

impl Sessionization {
    /// Numbers sessions `S1..Sk` in the given order and scores them.
    pub fn from_groups(
        groups: Vec<BTreeSet<PaperId>>,
        affinity: &AffinityMatrix,
        popularity: &BTreeMap<PaperId, u64>,
        beta: f64,
    ) -> Self {
        let width = groups.len().to_string().len();
        let sessions: Vec<Session> = groups
            .into_iter()
            .enumerate()
            .map(|(i, paper_ids)| Session {
                id: SessionId::new(format!("S{:0width$}", i + 1)),
                coherence: coherence(&paper_ids, affinity),
                paper_ids,
            })
            .collect();
        let objective = objective(&sessions, popularity, beta);
        Sessionization {
            sessions,
            objective,
            warnings: vec![],
        }
    }

    pub fn session(&self, id: &SessionId) -> Option<&Session> {
        self.sessions.iter().find(|s| &s.id == id)
    }

    pub fn session_of(&self, paper: &PaperId) -> Option<&Session> {
        self.sessions.iter().find(|s| s.paper_ids.contains(paper))
    }

    pub fn paper_count(&self) -> usize {
        self.sessions.iter().map(|s| s.paper_ids.len()).sum()
    }

    pub fn total_coherence(&self) -> f64 {
        self.sessions.iter().map(|s| s.coherence).sum()
    }

    /// Paper → session lookup.
    pub fn membership(&self) -> BTreeMap<&PaperId, &SessionId> {
        self.sessions
            .iter()
            .flat_map(|s| s.paper_ids.iter().map(move |p| (p, &s.id)))
            .collect()
    }

    /// Sessions as sorted paper lists, sorted; independent of session ids.
    pub fn canonical(&self) -> Vec<Vec<PaperId>> {
        let mut groups: Vec<Vec<PaperId>> = self
            .sessions
            .iter()
            .map(|s| s.paper_ids.iter().cloned().collect())
            .collect();
        groups.sort();
        groups
    }

    /// Recomputes every coherence and the objective.
    pub fn rescore(&mut self, affinity: &AffinityMatrix, popularity: &BTreeMap<PaperId, u64>, beta: f64) {
        for s in &mut self.sessions {
            s.coherence = coherence(&s.paper_ids, affinity);
        }
        self.objective = objective(&self.sessions, popularity, beta);
    }

    /// Moves `paper` into `target`, keeping session ids. Coherence is
    /// rescored; callers that use a balance penalty should [`rescore`].
    ///
    /// [`rescore`]: Sessionization::rescore
    pub fn move_paper(
        &mut self,
        paper: &PaperId,
        target: &SessionId,
        affinity: &AffinityMatrix,
    ) -> Result<(), SessionError> {
        let ti = self
            .sessions
            .iter()
            .position(|s| &s.id == target)
            .ok_or_else(|| SessionError::UnknownSession(target.clone()))?;
        let si = self
            .sessions
            .iter()
            .position(|s| s.paper_ids.contains(paper))
            .ok_or_else(|| SessionError::UnknownPaper(paper.clone()))?;
        if si == ti {
            return Ok(());
        }
        self.sessions[si].paper_ids.remove(paper);
        self.sessions[ti].paper_ids.insert(paper.clone());
        for i in [si, ti] {
            self.sessions[i].coherence = coherence(&self.sessions[i].paper_ids, affinity);
        }
        self.objective = self.total_coherence();
        Ok(())
    }

    pub fn to_records(&self) -> Vec<SessionRecord> {
        self.sessions
            .iter()
            .map(|s| SessionRecord {
                session_id: s.id.clone(),
                papers: s.paper_ids.iter().cloned().collect(),
                coherence: s.coherence,
            })
            .collect()
    }

    /// Rebuilds from records, rescoring against `affinity`.
    pub fn from_records(
        records: Vec<SessionRecord>,
        affinity: &AffinityMatrix,
        popularity: &BTreeMap<PaperId, u64>,
        beta: f64,
    ) -> Result<Self, SessionError> {
        let mut seen = BTreeSet::new();
        let mut sessions = Vec::with_capacity(records.len());
        for r in records {
            for p in &r.papers {
                if !seen.insert(p.clone()) {
                    return Err(SessionError::DuplicatePaper(p.clone()));
                }
            }
            sessions.push(Session {
                id: r.session_id,
                paper_ids: r.papers.into_iter().collect(),
                coherence: 0.0,
            });
        }
        let mut out = Sessionization {
            sessions,
            objective: 0.0,
            warnings: vec![],
        };
        out.rescore(affinity, popularity, beta);
        Ok(out)
    }
}

/// Which session sizes a partition may use.
#[derive(Clone, Copy, Debug)]
struct SizeRule {
    min: usize,
    max: usize,
    /// Number of sessions allowed below `min` (0 or 1).
    undersized: usize,
}

impl SizeRule {
    fn new(n: usize, min: usize, max: usize) -> Self {
        let feasible = n.div_ceil(max) * min <= n;
        SizeRule {
            min,
            max,
            undersized: usize::from(!feasible),
        }
    }

    fn is_valid(&self, sizes: impl IntoIterator<Item = usize>) -> bool {
        let mut under = 0;
        for s in sizes {
            if s == 0 || s > self.max {
                return false;
            }
            if s < self.min {
                under += 1;
            }
        }
        under <= self.undersized
    }
}

/// Dense view of the instance; papers are indexed in ascending id order.
struct Instance {
    ids: Vec<PaperId>,
    aff: Vec<f64>,
    pop: Vec<f64>,
    beta: f64,
}

impl Instance {
    fn new(
        papers: &[PaperId],
        affinity: &AffinityMatrix,
        popularity: &BTreeMap<PaperId, u64>,
        beta: f64,
    ) -> Result<Self, SessionError> {
        let mut ids = papers.to_vec();
        ids.sort();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(SessionError::DuplicatePaper(w[0].clone()));
        }
        let n = ids.len();
        let index: BTreeMap<&PaperId, usize> = ids.iter().enumerate().map(|(i, p)| (p, i)).collect();
        let mut aff = vec![0.0; n * n];
        for (pair, w) in affinity.iter() {
            if let (Some(&i), Some(&j)) = (index.get(&pair.lo), index.get(&pair.hi)) {
                aff[i * n + j] = w;
                aff[j * n + i] = w;
            }
        }
        let pop = ids
            .iter()
            .map(|p| popularity.get(p).copied().unwrap_or(0) as f64)
            .collect();
        Ok(Instance { ids, aff, pop, beta })
    }

    fn n(&self) -> usize {
        self.ids.len()
    }

    #[inline]
    fn a(&self, i: usize, j: usize) -> f64 {
        self.aff[i * self.n() + j]
    }

    fn objective(&self, groups: &[Vec<usize>]) -> f64 {
        let mut coh = 0.0;
        let mut weights = Vec::with_capacity(groups.len());
        for g in groups {
            for (x, &i) in g.iter().enumerate() {
                for &j in &g[x + 1..] {
                    coh += self.a(i, j);
                }
            }
            weights.push(g.iter().map(|&i| self.pop[i]).sum::<f64>());
        }
        if self.beta == 0.0 {
            coh
        } else {
            coh - self.beta * population_variance(&weights)
        }
    }
}

fn canonicalize(mut groups: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    groups.retain(|g| !g.is_empty());
    for g in &mut groups {
        g.sort_unstable();
    }
    groups.sort();
    groups
}

/// Larger objective wins; near-equal objectives fall back to the
/// lexicographically smaller representation.
fn better(a: (f64, &[Vec<usize>]), b: (f64, &[Vec<usize>])) -> bool {
    let tol = EPS * a.0.abs().max(b.0.abs()).max(1.0);
    if a.0 > b.0 + tol {
        true
    } else if b.0 > a.0 + tol {
        false
    } else {
        a.1.cmp(b.1) == Ordering::Less
    }
}

/// Mutable partition with per-paper affinity-to-session sums.
struct State<'a> {
    inst: &'a Instance,
    rule: SizeRule,
    of: Vec<usize>,
    sizes: Vec<usize>,
    /// gain[p * m + s] = Σ affinity from p to members of s.
    gain: Vec<f64>,
    weight: Vec<f64>,
    m: usize,
}

impl<'a> State<'a> {
    fn new(inst: &'a Instance, rule: SizeRule, groups: &[Vec<usize>]) -> Self {
        let n = inst.n();
        let m = groups.len();
        let mut of = vec![0; n];
        let mut sizes = vec![0; m];
        let mut weight = vec![0.0; m];
        for (s, g) in groups.iter().enumerate() {
            for &p in g {
                of[p] = s;
                sizes[s] += 1;
                weight[s] += inst.pop[p];
            }
        }
        let mut gain = vec![0.0; n * m];
        for p in 0..n {
            for q in 0..n {
                if p != q {
                    gain[p * m + of[q]] += inst.a(p, q);
                }
            }
        }
        State {
            inst,
            rule,
            of,
            sizes,
            gain,
            weight,
            m,
        }
    }

    fn groups(&self) -> Vec<Vec<usize>> {
        let mut g = vec![Vec::new(); self.m];
        for (p, &s) in self.of.iter().enumerate() {
            g[s].push(p);
        }
        g
    }

    #[inline]
    fn g(&self, p: usize, s: usize) -> f64 {
        self.gain[p * self.m + s]
    }

    /// Change in −β·variance when session weights shift by the given deltas.
    fn balance_delta(&self, changes: &[(usize, f64)]) -> f64 {
        let beta = self.inst.beta;
        if beta == 0.0 {
            return 0.0;
        }
        let before = population_variance(&self.weight);
        let mut after = self.weight.clone();
        for &(s, d) in changes {
            after[s] += d;
        }
        -beta * (population_variance(&after) - before)
    }

    fn sizes_ok_after(&self, changes: &[(usize, isize)]) -> bool {
        let mut sizes = self.sizes.clone();
        for &(s, d) in changes {
            sizes[s] = (sizes[s] as isize + d) as usize;
        }
        self.rule.is_valid(sizes)
    }

    fn relocate_delta(&self, p: usize, t: usize) -> Option<f64> {
        let s = self.of[p];
        if s == t || !self.sizes_ok_after(&[(s, -1), (t, 1)]) {
            return None;
        }
        let w = self.inst.pop[p];
        Some(self.g(p, t) - self.g(p, s) + self.balance_delta(&[(s, -w), (t, w)]))
    }

    fn swap_delta(&self, p: usize, q: usize) -> Option<f64> {
        let (s, t) = (self.of[p], self.of[q]);
        if s == t {
            return None;
        }
        let apq = self.inst.a(p, q);
        let coh = self.g(p, t) - apq - self.g(p, s) + self.g(q, s) - apq - self.g(q, t);
        let dw = self.inst.pop[q] - self.inst.pop[p];
        Some(coh + self.balance_delta(&[(s, dw), (t, -dw)]))
    }

    fn relocate(&mut self, p: usize, t: usize) {
        let s = self.of[p];
        let n = self.inst.n();
        for x in 0..n {
            let a = self.inst.a(x, p);
            self.gain[x * self.m + s] -= a;
            self.gain[x * self.m + t] += a;
        }
        self.of[p] = t;
        self.sizes[s] -= 1;
        self.sizes[t] += 1;
        self.weight[s] -= self.inst.pop[p];
        self.weight[t] += self.inst.pop[p];
    }

    /// First-improvement relocation/swap descent in `order`, repeated until
    /// a full pass finds nothing.
    fn improve(&mut self, order: &[usize], session_order: &[usize]) {
        loop {
            let mut improved = false;
            for &p in order {
                for &t in session_order {
                    if let Some(d) = self.relocate_delta(p, t) {
                        if d > EPS {
                            self.relocate(p, t);
                            improved = true;
                        }
                    }
                }
                for &q in order {
                    if q == p {
                        continue;
                    }
                    if let Some(d) = self.swap_delta(p, q) {
                        if d > EPS {
                            let (s, t) = (self.of[p], self.of[q]);
                            self.relocate(p, t);
                            self.relocate(q, s);
                            improved = true;
                        }
                    }
                }
            }
            if !improved {
                break;
            }
        }
    }
}

/// Greedy construction: seed each session with the strongest unassigned
/// pair and grow it by best marginal coherence. `rank` breaks ties.
fn greedy_groups(inst: &Instance, rule: SizeRule, rank: &[usize]) -> Vec<Vec<usize>> {
    let n = inst.n();
    let mut by_rank: Vec<usize> = (0..n).collect();
    by_rank.sort_by_key(|&i| rank[i]);
    let mut assigned = vec![false; n];
    let mut remaining = n;
    let mut groups: Vec<Vec<usize>> = Vec::new();

    while remaining > 0 {
        let mut group = Vec::new();
        if remaining == 1 || rule.max == 1 {
            let p = by_rank.iter().copied().find(|&p| !assigned[p]).unwrap();
            group.push(p);
        } else {
            let mut best: Option<(usize, usize, f64)> = None;
            for (x, &p) in by_rank.iter().enumerate() {
                if assigned[p] {
                    continue;
                }
                for &q in &by_rank[x + 1..] {
                    if assigned[q] {
                        continue;
                    }
                    let a = inst.a(p, q);
                    if best.is_none_or(|(_, _, b)| a > b) {
                        best = Some((p, q, a));
                    }
                }
            }
            let (p, q, _) = best.unwrap();
            group.push(p);
            group.push(q);
        }
        for &p in &group {
            assigned[p] = true;
        }
        remaining -= group.len();

        while group.len() < rule.max && remaining > 0 {
            let mut best: Option<(usize, f64)> = None;
            for &c in &by_rank {
                if assigned[c] {
                    continue;
                }
                let g: f64 = group.iter().map(|&x| inst.a(c, x)).sum();
                if best.is_none_or(|(_, b)| g > b) {
                    best = Some((c, g));
                }
            }
            let (c, g) = best.unwrap();
            if group.len() >= rule.min && g <= 0.0 {
                break;
            }
            assigned[c] = true;
            remaining -= 1;
            group.push(c);
        }
        groups.push(group);
    }
    repair(inst, rule, groups, rank)
}

/// Restores size feasibility after greedy construction by merging or
/// topping up undersized sessions, dissolving one when nothing else works.
fn repair(inst: &Instance, rule: SizeRule, mut groups: Vec<Vec<usize>>, rank: &[usize]) -> Vec<Vec<usize>> {
    let gain_to = |p: usize, g: &[usize]| -> f64 { g.iter().filter(|&&x| x != p).map(|&x| inst.a(p, x)).sum() };
    loop {
        let mut under: Vec<usize> = (0..groups.len()).filter(|&i| groups[i].len() < rule.min).collect();
        if under.len() <= rule.undersized {
            return groups;
        }
        under.sort_by_key(|&i| (groups[i].len(), i));
        if under.len() >= 2 {
            let (a, b) = (under[0], under[1]);
            // Fill the second-smallest from the smallest.
            if groups[a].len() + groups[b].len() <= rule.max {
                let moved = std::mem::take(&mut groups[a]);
                groups[b].extend(moved);
                groups.remove(a);
            } else {
                while groups[b].len() < rule.min {
                    let pick = *groups[a]
                        .iter()
                        .max_by(|&&x, &&y| {
                            gain_to(x, &groups[b])
                                .total_cmp(&gain_to(y, &groups[b]))
                                .then(rank[y].cmp(&rank[x]))
                        })
                        .unwrap();
                    groups[a].retain(|&x| x != pick);
                    groups[b].push(pick);
                }
            }
            continue;
        }
        let s = under[0];
        let donor = (0..groups.len())
            .filter(|&t| t != s && groups[t].len() > rule.min)
            .flat_map(|t| groups[t].iter().map(move |&p| (t, p)))
            .max_by(|&(t1, p1), &(t2, p2)| {
                let v1 = gain_to(p1, &groups[s]) - gain_to(p1, &groups[t1]);
                let v2 = gain_to(p2, &groups[s]) - gain_to(p2, &groups[t2]);
                v1.total_cmp(&v2).then(rank[p2].cmp(&rank[p1]))
            });
        if let Some((t, p)) = donor {
            groups[t].retain(|&x| x != p);
            groups[s].push(p);
            continue;
        }
        let orphans = groups.remove(s);
        for p in orphans {
            let target = (0..groups.len())
                .filter(|&t| groups[t].len() < rule.max)
                .max_by(|&t1, &t2| gain_to(p, &groups[t1]).total_cmp(&gain_to(p, &groups[t2])).then(t2.cmp(&t1)));
            match target {
                Some(t) => groups[t].push(p),
                // Unreachable for feasible sizes; keep the paper rather than lose it.
                None => groups.push(vec![p]),
            }
        }
    }
}

fn size_warning(n: usize, config: &SessionConfig, rule: SizeRule) -> Vec<String> {
    if rule.undersized == 0 {
        vec![]
    } else {
        vec![format!(
            "{n} paper(s) cannot be split into sessions of {}..{}; one session is undersized",
            config.min_size, config.max_size
        )]
    }
}

fn run_restart(inst: &Instance, rule: SizeRule, seed: u64, restart: usize) -> (f64, Vec<Vec<usize>>) {
    let n = inst.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(restart as u64);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut rank = vec![0; n];
    for (r, &p) in order.iter().enumerate() {
        rank[p] = r;
    }
    // Odd restarts start from a random partition so that restarts differ
    // even when the greedy construction has no ties to break.
    let groups = if restart.is_multiple_of(2) {
        greedy_groups(inst, rule, &rank)
    } else {
        let chunks = order.chunks(rule.max).map(<[usize]>::to_vec).collect();
        repair(inst, rule, chunks, &rank)
    };
    let mut state = State::new(inst, rule, &groups);
    let mut session_order: Vec<usize> = (0..state.m).collect();
    session_order.shuffle(&mut rng);
    state.improve(&order, &session_order);
    let groups = canonicalize(state.groups());
    (inst.objective(&groups), groups)
}

fn finish(inst: &Instance, groups: Vec<Vec<usize>>, affinity: &AffinityMatrix, popularity: &BTreeMap<PaperId, u64>, warnings: Vec<String>) -> Sessionization {
    let groups: Vec<BTreeSet<PaperId>> = groups
        .into_iter()
        .map(|g| g.into_iter().map(|i| inst.ids[i].clone()).collect())
        .collect();
    let mut out = Sessionization::from_groups(groups, affinity, popularity, inst.beta);
    out.warnings = warnings;
    out
}

/// Heuristic sessionization of an explicit paper list.
pub fn sessionize_papers(
    papers: &[PaperId],
    affinity: &AffinityMatrix,
    popularity: &BTreeMap<PaperId, u64>,
    config: &SessionConfig,
) -> Result<Sessionization, SessionError> {
    config.validate()?;
    if papers.is_empty() {
        return Err(SessionError::Empty);
    }
    let inst = Instance::new(papers, affinity, popularity, config.balance_weight)?;
    let rule = SizeRule::new(inst.n(), config.min_size, config.max_size);
    let warnings = size_warning(inst.n(), config, rule);
    for w in &warnings {
        log::warn!("{w}");
    }

    let results: Vec<(f64, Vec<Vec<usize>>)> = (0..config.restarts)
        .into_par_iter()
        .map(|r| run_restart(&inst, rule, config.seed, r))
        .collect();
    let mut best: Option<(f64, Vec<Vec<usize>>)> = None;
    for (obj, groups) in results {
        if best.as_ref().is_none_or(|(b, bg)| better((obj, &groups), (*b, bg))) {
            best = Some((obj, groups));
        }
    }
    let (_, groups) = best.expect("restarts >= 1");
    Ok(finish(&inst, groups, affinity, popularity, warnings))
}

pub fn sessionize(
    dataset: &Dataset,
    affinity: &AffinityMatrix,
    popularity: &BTreeMap<PaperId, u64>,
    config: &SessionConfig,
) -> Result<Sessionization, SessionError> {
    sessionize_papers(&dataset.paper_ids(), affinity, popularity, config)
}

/// Exhaustive optimum over all feasible partitions (at most
/// [`EXACT_MAX_PAPERS`] papers).
pub fn sessionize_exact_papers(
    papers: &[PaperId],
    affinity: &AffinityMatrix,
    popularity: &BTreeMap<PaperId, u64>,
    config: &SessionConfig,
) -> Result<Sessionization, SessionError> {
    config.validate()?;
    if papers.is_empty() {
        return Err(SessionError::Empty);
    }
    if papers.len() > EXACT_MAX_PAPERS {
        return Err(SessionError::TooLarge {
            n: papers.len(),
            max: EXACT_MAX_PAPERS,
        });
    }
    let inst = Instance::new(papers, affinity, popularity, config.balance_weight)?;
    let rule = SizeRule::new(inst.n(), config.min_size, config.max_size);
    let mut search = Exhaustive {
        inst: &inst,
        rule,
        groups: Vec::new(),
        best: None,
    };
    search.descend(0);
    let (_, groups) = search.best.expect("a feasible partition always exists");
    let warnings = size_warning(inst.n(), config, rule);
    Ok(finish(&inst, groups, affinity, popularity, warnings))
}

pub fn sessionize_exact(
    dataset: &Dataset,
    affinity: &AffinityMatrix,
    popularity: &BTreeMap<PaperId, u64>,
    config: &SessionConfig,
) -> Result<Sessionization, SessionError> {
    sessionize_exact_papers(&dataset.paper_ids(), affinity, popularity, config)
}

struct Exhaustive<'a> {
    inst: &'a Instance,
    rule: SizeRule,
    groups: Vec<Vec<usize>>,
    best: Option<(f64, Vec<Vec<usize>>)>,
}

impl Exhaustive<'_> {
    /// Restricted-growth enumeration: paper `p` joins an existing block or
    /// opens a new one, so blocks stay ordered by their smallest member.
    fn descend(&mut self, p: usize) {
        let n = self.inst.n();
        let remaining = n - p;
        let mut deficits: Vec<usize> = self
            .groups
            .iter()
            .map(|g| self.rule.min.saturating_sub(g.len()))
            .collect();
        deficits.sort_unstable();
        let forgiven = deficits.iter().rev().take(self.rule.undersized).sum::<usize>();
        if deficits.iter().sum::<usize>() - forgiven > remaining {
            return;
        }
        if p == n {
            if !self.rule.is_valid(self.groups.iter().map(Vec::len)) {
                return;
            }
            let obj = self.inst.objective(&self.groups);
            if self.best.as_ref().is_none_or(|(b, bg)| better((obj, &self.groups), (*b, bg))) {
                self.best = Some((obj, self.groups.clone()));
            }
            return;
        }
        for b in 0..self.groups.len() {
            if self.groups[b].len() < self.rule.max {
                self.groups[b].push(p);
                self.descend(p + 1);
                self.groups[b].pop();
            }
        }
        self.groups.push(vec![p]);
        self.descend(p + 1);
        self.groups.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affinity::AffinitySource;

    fn ids(n: usize) -> Vec<PaperId> {
        (1..=n).map(|i| PaperId::new(format!("p{i}"))).collect()
    }

    fn cliques() -> AffinityMatrix {
        let mut m = AffinityMatrix::empty(AffinitySource::AttendeeBookmark);
        let p = ids(8);
        for block in [&p[..4], &p[4..]] {
            for i in 0..4 {
                for j in i + 1..4 {
                    m.add(&block[i], &block[j], 3.0);
                }
            }
        }
        m
    }

    fn cfg(min: usize, max: usize) -> SessionConfig {
        SessionConfig {
            min_size: min,
            max_size: max,
            ..Default::default()
        }
    }

    #[test]
    fn coherence_examples() {
        let mut m = AffinityMatrix::empty(AffinitySource::AttendeeBookmark);
        m.add(&"p1".into(), &"p2".into(), 2.0);
        m.add(&"p2".into(), &"p3".into(), 2.0);
        m.add(&"p1".into(), &"p3".into(), 1.0);
        assert_eq!(coherence(&ids(3), &m), 5.0);
        assert_eq!(coherence(&ids(1), &m), 0.0);
        assert_eq!(coherence(&[PaperId::from("x"), PaperId::from("y")], &m), 0.0);
    }

    #[test]
    fn four_papers_one_session() {
        let m = cliques();
        let s = sessionize_papers(&ids(4), &m, &BTreeMap::new(), &cfg(4, 4)).unwrap();
        assert_eq!(s.sessions.len(), 1);
        assert_eq!(s.sessions[0].paper_ids.len(), 4);
        let e = sessionize_exact_papers(&ids(4), &m, &BTreeMap::new(), &cfg(4, 4)).unwrap();
        assert_eq!(e.canonical(), s.canonical());
    }

    #[test]
    fn two_cliques_become_sessions() {
        let m = cliques();
        let p = ids(8);
        let expected = vec![p[..4].to_vec(), p[4..].to_vec()];
        let s = sessionize_papers(&p, &m, &BTreeMap::new(), &cfg(4, 4)).unwrap();
        assert_eq!(s.canonical(), expected);
        assert_eq!(s.objective, 36.0);
        let e = sessionize_exact_papers(&p, &m, &BTreeMap::new(), &cfg(4, 4)).unwrap();
        assert_eq!(e.canonical(), expected);
    }

    #[test]
    fn tiny_corpus_gives_one_undersized_session() {
        let m = cliques();
        let s = sessionize_papers(&ids(3), &m, &BTreeMap::new(), &SessionConfig::default()).unwrap();
        assert_eq!(s.sessions.len(), 1);
        assert_eq!(s.warnings.len(), 1);
    }

    #[test]
    fn infeasible_count_allows_one_undersized() {
        // 7 papers cannot be split into 4..5.
        let m = cliques();
        let s = sessionize_papers(&ids(7), &m, &BTreeMap::new(), &SessionConfig::default()).unwrap();
        let under = s.sessions.iter().filter(|x| x.paper_ids.len() < 4).count();
        assert_eq!(under, 1);
        assert_eq!(s.paper_count(), 7);
        let e = sessionize_exact_papers(&ids(7), &m, &BTreeMap::new(), &SessionConfig::default()).unwrap();
        assert!(e.objective >= s.objective - 1e-9);
    }

    #[test]
    fn feasible_counts_never_undersized() {
        let m = AffinityMatrix::empty(AffinitySource::AttendeeBookmark);
        for n in [4, 5, 8, 9, 10, 12, 13, 23, 41] {
            let s = sessionize_papers(&ids(n), &m, &BTreeMap::new(), &SessionConfig::default()).unwrap();
            assert!(
                s.sessions.iter().all(|x| (4..=5).contains(&x.paper_ids.len())),
                "n={n}: {:?}",
                s.canonical()
            );
            assert_eq!(s.paper_count(), n);
        }
    }

    #[test]
    fn exact_rejects_large_instances() {
        let m = AffinityMatrix::empty(AffinitySource::AttendeeBookmark);
        assert_eq!(
            sessionize_exact_papers(&ids(13), &m, &BTreeMap::new(), &SessionConfig::default()).unwrap_err(),
            SessionError::TooLarge { n: 13, max: 12 }
        );
    }

    #[test]
    fn invalid_config_is_rejected() {
        let m = AffinityMatrix::empty(AffinitySource::AttendeeBookmark);
        assert!(matches!(
            sessionize_papers(&ids(4), &m, &BTreeMap::new(), &cfg(5, 4)),
            Err(SessionError::InvalidConfig(_))
        ));
        let zero = SessionConfig {
            restarts: 0,
            ..Default::default()
        };
        assert!(sessionize_papers(&ids(4), &m, &BTreeMap::new(), &zero).is_err());
    }

    #[test]
    fn balance_penalty_spreads_popular_papers() {
        // No affinity at all: only the balance term matters.
        let m = AffinityMatrix::empty(AffinitySource::AttendeeBookmark);
        let p = ids(8);
        let pop: BTreeMap<PaperId, u64> = p
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), if i < 4 { 10 } else { 0 }))
            .collect();
        let config = SessionConfig {
            min_size: 4,
            max_size: 4,
            balance_weight: 1.0,
            ..Default::default()
        };
        let s = sessionize_papers(&p, &m, &pop, &config).unwrap();
        for session in &s.sessions {
            assert_eq!(session_weight(session, &pop), 20.0);
        }
        assert_eq!(s.objective, 0.0);
    }

    #[test]
    fn move_paper_keeps_ids_and_rescores() {
        let m = cliques();
        let p = ids(8);
        let mut s = sessionize_papers(&p, &m, &BTreeMap::new(), &cfg(4, 5)).unwrap();
        let target = s.session_of(&p[4]).unwrap().id.clone();
        s.move_paper(&p[0], &target, &m).unwrap();
        assert_eq!(s.session_of(&p[0]).unwrap().id, target);
        assert_eq!(s.objective, 9.0 + 18.0);
        assert_eq!(
            s.move_paper(&p[0], &SessionId::from("nope"), &m),
            Err(SessionError::UnknownSession("nope".into()))
        );
    }
}
