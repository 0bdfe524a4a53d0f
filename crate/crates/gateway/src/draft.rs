//! The mutable schedule draft: pipeline inputs, the current program, an
//! undo stack of full snapshots and a revision counter.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use confsched_core::affinity::{
    blend_affinity, build_affinity, compare_sources, extract_preferences, popularity, AffinityComparison,
    AffinityError, AffinityMatrix, BlendWeights, PreferenceSets, PreferenceSource, Thresholds,
};
use confsched_core::corpus::{CorpusError, Dataset, PaperId, RoomId, SessionId, SlotId};
use confsched_core::recommend::{RatingsMatrix, RecommendError};
use confsched_core::scheduler::{
    apply_move, assign_rooms, conflict_count_from_affinity, evaluate_move, measure, optimize_schedule,
    optimize_schedule_from, session_popularity, slot_conflicts, top_conflicting_pairs, ConflictBasis, MoveContext,
    MoveDelta, Schedule, ScheduleConfig, ScheduleError, ScheduleMetrics,
};
use confsched_core::sessionizer::{sessionize, SessionConfig, SessionError, Sessionization};
use confsched_core::textsim::{build_tfidf, TextSimError, TfIdfModel};
use serde::{Deserialize, Serialize};

/// Number of pairs listed in a view's top conflicts.
pub const TOP_CONFLICTS: usize = 10;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Affinity(#[from] AffinityError),
    #[error(transparent)]
    Text(#[from] TextSimError),
    #[error(transparent)]
    Recommend(#[from] RecommendError),
    #[error(transparent)]
    Session(#[from] SessionError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error("draft file {path}: {message}")]
    Draft { path: String, message: String },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub weights: BlendWeights,
    pub thresholds: Thresholds,
    pub session: SessionConfig,
    pub schedule: ScheduleConfig,
}

/// Everything derived from the dataset that never changes while a draft
/// is edited.
pub struct Inputs {
    pub dataset: Dataset,
    pub settings: Settings,
    pub attendee_prefs: PreferenceSets,
    pub author_prefs: PreferenceSets,
    pub attendee: AffinityMatrix,
    pub author: AffinityMatrix,
    pub blended: AffinityMatrix,
    pub comparison: AffinityComparison,
    pub ratings: RatingsMatrix,
    pub tfidf: TfIdfModel,
}

impl Inputs {
    pub fn build(dataset: Dataset, settings: Settings) -> Result<Self, PipelineError> {
        let attendee_prefs = extract_preferences(&dataset, PreferenceSource::AttendeeBookmark);
        let author_prefs = extract_preferences(&dataset, PreferenceSource::AuthorInterest);
        let attendee = build_affinity(&attendee_prefs);
        let author = build_affinity(&author_prefs);
        let blended = blend_affinity(&attendee, &author, &dataset.author_responses, settings.weights)?;
        let comparison = compare_sources(&attendee, &author, settings.thresholds);
        let ratings = RatingsMatrix::from_dataset(&dataset);
        let tfidf = build_tfidf(&dataset.papers)?;
        Ok(Inputs {
            dataset,
            settings,
            attendee_prefs,
            author_prefs,
            attendee,
            author,
            blended,
            comparison,
            ratings,
            tfidf,
        })
    }

    pub fn sessionize(&self) -> Result<Sessionization, PipelineError> {
        let pop = popularity(&self.attendee_prefs);
        Ok(sessionize(&self.dataset, &self.blended, &pop, &self.settings.session)?)
    }

    pub fn schedule(&self, sessionization: &Sessionization) -> Result<Schedule, PipelineError> {
        let spop = session_popularity(sessionization, &self.attendee_prefs);
        Ok(optimize_schedule(
            sessionization,
            &self.dataset,
            ConflictBasis::Affinity(&self.blended),
            &spop,
            &self.settings.schedule,
        )?)
    }

    fn move_context(&self) -> MoveContext<'_> {
        MoveContext {
            dataset: &self.dataset,
            affinity: &self.blended,
            prefs: &self.attendee_prefs,
            min_size: self.settings.session.min_size,
            max_size: self.settings.session.max_size,
        }
    }
}

/// The editable part of a draft.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DraftContent {
    pub sessionization: Sessionization,
    pub schedule: Schedule,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MutationOp {
    MovePaper { paper: PaperId, target: SessionId },
    SwapSessions { a: SessionId, b: SessionId },
    SwapSlots { a: SlotId, b: SlotId },
    Reoptimize,
    Undo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mutation {
    pub expected_revision: u64,
    #[serde(flatten)]
    pub op: MutationOp,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MutationOutcome {
    pub revision: u64,
    pub metrics: ScheduleMetrics,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum MutationError {
    #[error("expected revision {expected} but the draft is at {current}")]
    RevisionConflict { expected: u64, current: u64 },
    #[error("{0}")]
    Rejected(String),
    #[error("nothing to undo")]
    NothingToUndo,
    #[error("could not persist draft: {0}")]
    Persist(String),
}

impl From<ScheduleError> for MutationError {
    fn from(e: ScheduleError) -> Self {
        MutationError::Rejected(e.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub id: SessionId,
    pub papers: Vec<PaperId>,
    pub coherence: f64,
    pub popularity: u64,
    pub slot: Option<SlotId>,
    pub room: Option<RoomId>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoomView {
    pub id: RoomId,
    pub capacity: u32,
}

/// Slot-major grid: `cells[i][j]` is the session in slot `i`, room `j`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridView {
    pub slots: Vec<SlotId>,
    pub rooms: Vec<RoomView>,
    pub cells: Vec<Vec<Option<SessionId>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlotHeat {
    pub slot: SlotId,
    pub conflicts: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConflictPair {
    pub p: PaperId,
    pub q: PaperId,
    pub slot: SlotId,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceConflicts {
    pub attendee: f64,
    pub author_interest: f64,
    pub blended: f64,
}

/// Immutable, self-consistent picture of one revision.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct View {
    pub revision: u64,
    pub sessions: Vec<SessionView>,
    pub grid: GridView,
    pub slot_heat: Vec<SlotHeat>,
    pub metrics: ScheduleMetrics,
    pub conflicts_by_source: SourceConflicts,
    pub top_conflicts: Vec<ConflictPair>,
    pub warnings: Vec<String>,
}

/// What readers see: the view plus the content it was rendered from.
#[derive(Clone, Debug)]
pub struct Published {
    pub view: View,
    pub content: DraftContent,
}

#[derive(Serialize, Deserialize)]
struct DraftFile {
    revision: u64,
    content: DraftContent,
    undo: Vec<DraftContent>,
}

pub struct Draft {
    inputs: Arc<Inputs>,
    content: DraftContent,
    undo: Vec<DraftContent>,
    revision: u64,
    persist_to: Option<PathBuf>,
}

impl Draft {
    /// Sessionizes and schedules from scratch at revision 0.
    pub fn new(inputs: Arc<Inputs>) -> Result<Self, PipelineError> {
        let sessionization = inputs.sessionize()?;
        let schedule = inputs.schedule(&sessionization)?;
        Ok(Draft {
            inputs,
            content: DraftContent {
                sessionization,
                schedule,
            },
            undo: Vec::new(),
            revision: 0,
            persist_to: None,
        })
    }

    /// Resumes from `path` when it exists, otherwise starts fresh; either
    /// way every later mutation is written back to `path`.
    pub fn open(inputs: Arc<Inputs>, path: &Path) -> Result<Self, PipelineError> {
        let draft_err = |message: String| PipelineError::Draft {
            path: path.display().to_string(),
            message,
        };
        let mut draft = if path.exists() {
            let text = fs::read_to_string(path).map_err(|e| draft_err(e.to_string()))?;
            let file: DraftFile = serde_json::from_str(&text).map_err(|e| draft_err(e.to_string()))?;
            file.content
                .schedule
                .check(&file.content.sessionization, &inputs.dataset.venue)
                .map_err(|e| draft_err(e.to_string()))?;
            Draft {
                inputs,
                content: file.content,
                undo: file.undo,
                revision: file.revision,
                persist_to: None,
            }
        } else {
            Draft::new(inputs)?
        };
        draft.persist_to = Some(path.to_path_buf());
        draft.persist(&draft.content, &draft.undo, draft.revision).map_err(|e| draft_err(e.to_string()))?;
        Ok(draft)
    }

    pub fn revision(&self) -> u64 {
        self.revision
    }

    pub fn content(&self) -> &DraftContent {
        &self.content
    }

    pub fn inputs(&self) -> &Arc<Inputs> {
        &self.inputs
    }

    pub fn undo_depth(&self) -> usize {
        self.undo.len()
    }

    /// Applies `m` atomically: either the draft moves to the next revision
    /// with the new content persisted, or nothing changes.
    pub fn apply(&mut self, m: &Mutation) -> Result<MutationOutcome, MutationError> {
        if m.expected_revision != self.revision {
            return Err(MutationError::RevisionConflict {
                expected: m.expected_revision,
                current: self.revision,
            });
        }
        let (content, undo) = match &m.op {
            MutationOp::Undo => {
                let mut undo = self.undo.clone();
                let prev = undo.pop().ok_or(MutationError::NothingToUndo)?;
                (prev, undo)
            }
            op => {
                let next = self.edit(op)?;
                let mut undo = self.undo.clone();
                undo.push(self.content.clone());
                (next, undo)
            }
        };
        let revision = self.revision + 1;
        self.persist(&content, &undo, revision)
            .map_err(|e| MutationError::Persist(e.to_string()))?;
        self.content = content;
        self.undo = undo;
        self.revision = revision;
        Ok(MutationOutcome {
            revision,
            metrics: self.content.schedule.metrics.clone(),
        })
    }

    fn edit(&self, op: &MutationOp) -> Result<DraftContent, MutationError> {
        let inputs = &self.inputs;
        let sz = &self.content.sessionization;
        let current = &self.content.schedule;
        match op {
            MutationOp::MovePaper { paper, target } => {
                let (sessionization, schedule) = apply_move(&inputs.move_context(), sz, current, paper, target)?;
                Ok(DraftContent {
                    sessionization,
                    schedule,
                })
            }
            MutationOp::SwapSessions { a, b } => {
                let mut slots = current.slot_assignment();
                let ta = slots.get(a).cloned().ok_or_else(|| ScheduleError::UnknownSession(a.clone()))?;
                let tb = slots.get(b).cloned().ok_or_else(|| ScheduleError::UnknownSession(b.clone()))?;
                slots.insert(a.clone(), tb);
                slots.insert(b.clone(), ta);
                self.reroom(slots)
            }
            MutationOp::SwapSlots { a, b } => {
                let venue = &inputs.dataset.venue;
                for t in [a, b] {
                    if venue.slot_index(t).is_none() {
                        return Err(ScheduleError::UnknownSlot(t.clone()).into());
                    }
                }
                let slots = current
                    .slot_assignment()
                    .into_iter()
                    .map(|(s, t)| {
                        let t = if &t == a {
                            b.clone()
                        } else if &t == b {
                            a.clone()
                        } else {
                            t
                        };
                        (s, t)
                    })
                    .collect();
                self.reroom(slots)
            }
            MutationOp::Reoptimize => {
                let spop = session_popularity(sz, &inputs.attendee_prefs);
                let schedule = optimize_schedule_from(
                    current,
                    sz,
                    &inputs.dataset,
                    ConflictBasis::Affinity(&inputs.blended),
                    &spop,
                    &inputs.settings.schedule,
                )?;
                Ok(DraftContent {
                    sessionization: sz.clone(),
                    schedule,
                })
            }
            MutationOp::Undo => unreachable!("undo is handled by apply"),
        }
    }

    fn reroom(&self, slots: std::collections::BTreeMap<SessionId, SlotId>) -> Result<DraftContent, MutationError> {
        let inputs = &self.inputs;
        let sz = &self.content.sessionization;
        let spop = session_popularity(sz, &inputs.attendee_prefs);
        let mut schedule = assign_rooms(&slots, &spop, &inputs.dataset.venue)?;
        schedule.metrics = measure(&schedule, sz, &inputs.dataset, &inputs.blended, &spop);
        schedule.warnings = self.content.schedule.warnings.clone();
        Ok(DraftContent {
            sessionization: sz.clone(),
            schedule,
        })
    }

    /// Read-only preview of moving `paper` into `target`.
    pub fn whatif(&self, paper: &PaperId, target: &SessionId) -> Result<MoveDelta, ScheduleError> {
        whatif(&self.inputs, &self.content, paper, target)
    }

    pub fn snapshot(&self) -> View {
        render_view(&self.inputs, &self.content, self.revision)
    }

    pub fn publish(&self) -> Published {
        Published {
            view: self.snapshot(),
            content: self.content.clone(),
        }
    }

    fn persist(&self, content: &DraftContent, undo: &[DraftContent], revision: u64) -> std::io::Result<()> {
        let Some(path) = &self.persist_to else {
            return Ok(());
        };
        #[derive(Serialize)]
        struct Borrowed<'a> {
            revision: u64,
            content: &'a DraftContent,
            undo: &'a [DraftContent],
        }
        let json = serde_json::to_vec(&Borrowed {
            revision,
            content,
            undo,
        })?;
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, json)?;
        fs::rename(&tmp, path)
    }
}

pub fn whatif(
    inputs: &Inputs,
    content: &DraftContent,
    paper: &PaperId,
    target: &SessionId,
) -> Result<MoveDelta, ScheduleError> {
    evaluate_move(&inputs.move_context(), &content.sessionization, &content.schedule, paper, target)
}

pub fn render_view(inputs: &Inputs, content: &DraftContent, revision: u64) -> View {
    let venue = &inputs.dataset.venue;
    let sz = &content.sessionization;
    let schedule = &content.schedule;
    let spop = session_popularity(sz, &inputs.attendee_prefs);

    let sessions = sz
        .sessions
        .iter()
        .map(|s| {
            let cell = schedule.assignment.get(&s.id);
            SessionView {
                id: s.id.clone(),
                papers: s.paper_ids.iter().cloned().collect(),
                coherence: s.coherence,
                popularity: spop.get(&s.id).copied().unwrap_or(0),
                slot: cell.map(|c| c.slot.clone()),
                room: cell.map(|c| c.room.clone()),
            }
        })
        .collect();

    let mut cells = vec![vec![None; venue.rooms.len()]; venue.slots.len()];
    for (sid, cell) in &schedule.assignment {
        let i = venue.slot_index(&cell.slot);
        let j = venue.rooms.iter().position(|r| r.id == cell.room);
        if let (Some(i), Some(j)) = (i, j) {
            cells[i][j] = Some(sid.clone());
        }
    }
    let grid = GridView {
        slots: venue.slots.iter().map(|t| t.id.clone()).collect(),
        rooms: venue
            .rooms
            .iter()
            .map(|r| RoomView {
                id: r.id.clone(),
                capacity: r.capacity,
            })
            .collect(),
        cells,
    };

    let heat = slot_conflicts(schedule, sz, &inputs.blended);
    let slot_heat = venue
        .slots
        .iter()
        .map(|t| SlotHeat {
            slot: t.id.clone(),
            conflicts: heat.get(&t.id).copied().unwrap_or(0.0),
        })
        .collect();

    let top_conflicts = top_conflicting_pairs(schedule, sz, &inputs.blended, TOP_CONFLICTS)
        .into_iter()
        .map(|(pair, slot, weight)| ConflictPair {
            p: pair.lo,
            q: pair.hi,
            slot,
            weight,
        })
        .collect();

    let mut warnings = sz.warnings.clone();
    warnings.extend(schedule.warnings.iter().cloned());
    View {
        revision,
        sessions,
        grid,
        slot_heat,
        metrics: schedule.metrics.clone(),
        conflicts_by_source: SourceConflicts {
            attendee: conflict_count_from_affinity(schedule, sz, &inputs.attendee),
            author_interest: conflict_count_from_affinity(schedule, sz, &inputs.author),
            blended: conflict_count_from_affinity(schedule, sz, &inputs.blended),
        },
        top_conflicts,
        warnings,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use confsched_core::synth::{synth_dataset, SynthConfig};

    fn draft() -> Draft {
        let d = synth_dataset(&SynthConfig {
            papers: 16,
            slots: 2,
            rooms: 2,
            ..Default::default()
        });
        let settings = Settings {
            session: SessionConfig {
                restarts: 4,
                ..Default::default()
            },
            schedule: ScheduleConfig {
                restarts: 4,
                ..Default::default()
            },
            ..Default::default()
        };
        Draft::new(Arc::new(Inputs::build(d, settings).unwrap())).unwrap()
    }

    #[test]
    fn fresh_draft_is_revision_zero() {
        let d = draft();
        let v = d.snapshot();
        assert_eq!(v.revision, 0);
        assert_eq!(v.metrics, d.content().schedule.metrics);
        let total: f64 = v.slot_heat.iter().map(|h| h.conflicts).sum();
        assert_eq!(total, v.metrics.conflict_count);
    }

    #[test]
    fn undo_on_fresh_draft_is_rejected() {
        let mut d = draft();
        let err = d
            .apply(&Mutation {
                expected_revision: 0,
                op: MutationOp::Undo,
            })
            .unwrap_err();
        assert_eq!(err, MutationError::NothingToUndo);
        assert_eq!(d.revision(), 0);
    }

    #[test]
    fn swap_slots_twice_is_identity_on_assignment() {
        let mut d = draft();
        let before = d.content().clone();
        for rev in 0..2 {
            d.apply(&Mutation {
                expected_revision: rev,
                op: MutationOp::SwapSlots {
                    a: "t1".into(),
                    b: "t2".into(),
                },
            })
            .unwrap();
        }
        assert_eq!(d.content().schedule.assignment, before.schedule.assignment);
        assert_eq!(d.revision(), 2);
        assert_eq!(d.undo_depth(), 2);
    }

    #[test]
    fn mutation_json_shape() {
        let m: Mutation =
            serde_json::from_str(r#"{"kind":"move_paper","paper":"p01","target":"S2","expected_revision":4}"#).unwrap();
        assert_eq!(m.expected_revision, 4);
        assert_eq!(
            m.op,
            MutationOp::MovePaper {
                paper: "p01".into(),
                target: "S2".into()
            }
        );
        let r: Mutation = serde_json::from_str(r#"{"kind":"reoptimize","expected_revision":0}"#).unwrap();
        assert_eq!(r.op, MutationOp::Reoptimize);
    }
}
