//! Tracking of conversational grounding in information-seeking dialogues
//! about tabular datasets.

pub mod assessment;
pub mod dialogue;
pub mod engine;
pub mod eval;
pub mod knowledge;
pub mod llm;

pub use assessment::{absorb, assess, plan_ops, AssessmentOutcome, GraphOp, GraphOpKind, Verdict};
pub use dialogue::{Annotation, Dialogue, GroundingLabel, Role, Turn};
pub use engine::{observe_label, present, process_dialogue, GroundingState};
pub use knowledge::{canonicalize, knowledge_equivalent, GroundedKnowledge};
