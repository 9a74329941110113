//! Turn-by-turn grounding state machine.
//!
//! Provider content is first held as a pending contribution. An explicit or
//! implicit acceptance commits it (together with whatever the accepting turn
//! itself states) into the grounded knowledge; a clarification leaves it
//! pending and discards the clarifying turn's own content.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::assessment::{absorb, AssessmentOutcome, GraphOp, Verdict};
use crate::dialogue::{Annotation, Dialogue, GroundingLabel, Role, Turn};
use crate::knowledge::{GroundedKnowledge, MergeError};

pub type SourceError = Box<dyn std::error::Error + Send + Sync>;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PendingContribution {
    pub facts: GroundedKnowledge,
    pub presented_at: usize,
    pub presenter: Role,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistoryEntry {
    pub turn: usize,
    pub label: GroundingLabel,
    pub outcomes: Vec<AssessmentOutcome>,
    pub ops: Vec<GraphOp>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct GroundingState {
    pub grounded: GroundedKnowledge,
    pub pending: Option<PendingContribution>,
    pub history: Vec<HistoryEntry>,
}

impl GroundingState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn pending_facts(&self) -> Option<&GroundedKnowledge> {
        self.pending.as_ref().map(|p| &p.facts)
    }
}

/// Add presented facts to the pending contribution. Facts that conflict with
/// or refine something already pending replace it.
pub fn present(
    state: &GroundingState,
    facts: &GroundedKnowledge,
    turn: &Turn,
) -> Result<GroundingState, MergeError> {
    if facts.is_empty() {
        return Ok(state.clone());
    }
    let merged = match state.pending_facts() {
        Some(held) => absorb(held, facts)?.0,
        None => facts.clone(),
    };
    let mut next = state.clone();
    next.pending = Some(PendingContribution {
        facts: merged,
        presented_at: turn.index,
        presenter: turn.role,
    });
    Ok(next)
}

/// Apply the grounding act observed at `turn`.
pub fn observe_label(
    state: &GroundingState,
    label: GroundingLabel,
    turn: &Turn,
    turn_facts: &GroundedKnowledge,
) -> Result<GroundingState, MergeError> {
    let mut next = state.clone();
    let mut entry = HistoryEntry {
        turn: turn.index,
        label,
        outcomes: Vec::new(),
        ops: Vec::new(),
    };
    if label.is_commit() {
        let delta = match state.pending_facts() {
            Some(held) => absorb(held, turn_facts)?.0,
            None => turn_facts.clone(),
        };
        let (grounded, outcomes, ops) = absorb(&state.grounded, &delta)?;
        next.grounded = grounded;
        next.pending = None;
        entry.outcomes = outcomes;
        entry.ops = ops;
    }
    next.history.push(entry);
    Ok(next)
}

pub trait TurnLabeler {
    fn label(&mut self, dialogue: &Dialogue, turn: &Turn) -> Result<GroundingLabel, SourceError>;
}

pub trait TurnExtractor {
    /// Knowledge stated at `turn`; `grounded` is the common ground so far.
    fn extract(
        &mut self,
        dialogue: &Dialogue,
        turn: &Turn,
        grounded: &GroundedKnowledge,
    ) -> Result<GroundedKnowledge, SourceError>;
}

impl<F> TurnLabeler for F
where
    F: FnMut(&Dialogue, &Turn) -> Result<GroundingLabel, SourceError>,
{
    fn label(&mut self, dialogue: &Dialogue, turn: &Turn) -> Result<GroundingLabel, SourceError> {
        self(dialogue, turn)
    }
}

impl<F> TurnExtractor for F
where
    F: FnMut(&Dialogue, &Turn, &GroundedKnowledge) -> Result<GroundedKnowledge, SourceError>,
{
    fn extract(
        &mut self,
        dialogue: &Dialogue,
        turn: &Turn,
        grounded: &GroundedKnowledge,
    ) -> Result<GroundedKnowledge, SourceError> {
        self(dialogue, turn, grounded)
    }
}

/// Labels and knowledge replayed from an annotation file (gold or
/// predicted). Unannotated turns get `NoEvent` and no knowledge.
#[derive(Debug, Clone)]
pub struct AnnotationSource {
    by_turn: BTreeMap<usize, Annotation>,
}

impl AnnotationSource {
    pub fn new(annotations: &[Annotation]) -> Self {
        Self {
            by_turn: annotations.iter().map(|a| (a.turn_index, a.clone())).collect(),
        }
    }
}

impl TurnLabeler for AnnotationSource {
    fn label(&mut self, _: &Dialogue, turn: &Turn) -> Result<GroundingLabel, SourceError> {
        Ok(self
            .by_turn
            .get(&turn.index)
            .map_or(GroundingLabel::NoEvent, |a| a.label))
    }
}

impl TurnExtractor for AnnotationSource {
    fn extract(
        &mut self,
        _: &Dialogue,
        turn: &Turn,
        _: &GroundedKnowledge,
    ) -> Result<GroundedKnowledge, SourceError> {
        Ok(self
            .by_turn
            .get(&turn.index)
            .and_then(|a| a.knowledge.clone())
            .unwrap_or_default())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TurnTrace {
    pub turn: usize,
    pub label: GroundingLabel,
    pub facts: GroundedKnowledge,
    pub ops: Vec<GraphOp>,
    pub grounded_after: GroundedKnowledge,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pending_after: Option<GroundedKnowledge>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

/// Run a whole dialogue through the engine.
pub fn process_dialogue(
    dialogue: &Dialogue,
    labeler: &mut dyn TurnLabeler,
    extractor: &mut dyn TurnExtractor,
) -> (GroundingState, Vec<TurnTrace>) {
    let mut state = GroundingState::new();
    let mut trace = Vec::with_capacity(dialogue.turns.len());
    for turn in &dialogue.turns {
        let mut warning = None;
        let step = labeler
            .label(dialogue, turn)
            .map_err(|e| format!("labeling failed: {e}"))
            .and_then(|label| {
                extractor
                    .extract(dialogue, turn, &state.grounded)
                    .map(|facts| (label, facts))
                    .map_err(|e| format!("extraction failed: {e}"))
            });
        let (label, facts) = step.unwrap_or_else(|w| {
            warning = Some(w);
            (GroundingLabel::NoEvent, GroundedKnowledge::default())
        });

        let before = state.history.len();
        let advance = || -> Result<GroundingState, MergeError> {
            let mut next = state.clone();
            if label == GroundingLabel::NoEvent && turn.role == Role::Provider {
                next = present(&next, &facts, turn)?;
            }
            let own = if label == GroundingLabel::NoEvent {
                GroundedKnowledge::default()
            } else {
                facts.clone()
            };
            observe_label(&next, label, turn, &own)
        };
        match advance() {
            Ok(next) => state = next,
            Err(e) => {
                log::warn!("dialogue {} turn {}: {e}", dialogue.id, turn.index);
                warning = Some(format!("merge failed: {e}"));
                state.history.push(HistoryEntry {
                    turn: turn.index,
                    label: GroundingLabel::NoEvent,
                    outcomes: Vec::new(),
                    ops: Vec::new(),
                });
            }
        }
        let entry = &state.history[before];
        trace.push(TurnTrace {
            turn: turn.index,
            label: entry.label,
            facts: if warning.is_some() { GroundedKnowledge::default() } else { facts },
            ops: entry.ops.clone(),
            grounded_after: state.grounded.clone(),
            pending_after: state.pending_facts().cloned(),
            warning,
        });
    }
    (state, trace)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FeedbackAct {
    ExplicitAck,
    ImplicitContinue,
    ClarifyConflict,
}

impl FeedbackAct {
    pub fn rendered(self) -> &'static str {
        match self {
            FeedbackAct::ExplicitAck => "Thanks, got it.",
            FeedbackAct::ImplicitContinue => "What else can you tell me about the dataset?",
            FeedbackAct::ClarifyConflict => {
                "That is different from what I understood before. Could you clarify?"
            }
        }
    }
}

impl fmt::Display for FeedbackAct {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.rendered())
    }
}

/// Pick the kind of listener response for the latest assessment.
pub fn choose_feedback(outcomes: &[AssessmentOutcome]) -> FeedbackAct {
    if outcomes.iter().any(|o| o.verdict == Verdict::Conflict) {
        FeedbackAct::ClarifyConflict
    } else if outcomes.iter().any(|o| o.verdict == Verdict::Novel) {
        FeedbackAct::ImplicitContinue
    } else {
        FeedbackAct::ExplicitAck
    }
}
