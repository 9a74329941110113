use crate::assessment::absorb;
use crate::dialogue::{AnnotationRecord, Dialogue, GroundingLabel, Turn};
use crate::knowledge::GroundedKnowledge;

use super::prompts::{
    build_classification_prompt, build_extraction_prompt, build_incremental_extraction_prompt,
};
use super::{parse_knowledge_json, parse_label, ChatClient, CompletionRequest, LlmError};

/// Labels and extracts knowledge for dialogue turns through a chat model.
pub struct Annotator<'a> {
    client: &'a ChatClient,
    model: String,
    incremental: bool,
}

/// Predictions for one dialogue. `failures` holds request errors (cache
/// misses, transport, API); unparseable model output is recorded on the
/// record itself instead.
#[derive(Debug, Default)]
pub struct DialogueAnnotation {
    pub records: Vec<AnnotationRecord>,
    pub failures: Vec<LlmError>,
}

impl<'a> Annotator<'a> {
    pub fn new(client: &'a ChatClient, model: impl Into<String>) -> Self {
        Self {
            client,
            model: model.into(),
            incremental: false,
        }
    }

    /// Send the grounded knowledge plus only the turns since the previous
    /// annotated turn to the extractor, instead of the full history.
    pub fn incremental(mut self, on: bool) -> Self {
        self.incremental = on;
        self
    }

    pub fn classification_request(&self, history: &[Turn]) -> CompletionRequest {
        CompletionRequest::new(self.model.clone(), build_classification_prompt(history))
    }

    pub fn extraction_request(
        &self,
        history: &[Turn],
        grounded: &GroundedKnowledge,
        since: usize,
    ) -> CompletionRequest {
        let messages = if self.incremental {
            build_incremental_extraction_prompt(grounded, &history[since.min(history.len())..])
        } else {
            build_extraction_prompt(history)
        };
        CompletionRequest::new(self.model.clone(), messages)
    }

    /// Annotate the given turns of `d` (1-based indices, ascending).
    pub fn annotate_dialogue(&self, d: &Dialogue, turns: &[usize]) -> DialogueAnnotation {
        let mut out = DialogueAnnotation::default();
        let mut grounded = GroundedKnowledge::default();
        let mut since = 0;
        for &index in turns {
            let history = d.history_through(index);
            let mut record = AnnotationRecord {
                dialogue_id: d.id.clone(),
                turn_index: index,
                label: None,
                knowledge: None,
                error: None,
            };
            let mut errors = Vec::new();

            let label = match self.client.complete(&self.classification_request(history)) {
                Ok(r) => match parse_label(&r.text) {
                    Ok(l) => Some(l),
                    Err(e) => {
                        errors.push(e.to_string());
                        None
                    }
                },
                Err(e) => {
                    out.failures.push(e);
                    None
                }
            };
            record.label = label.map(|l| l.as_str().to_owned());

            let req = self.extraction_request(history, &grounded, since);
            match self.client.complete(&req) {
                Ok(r) => match parse_knowledge_json(&r.text) {
                    Ok(k) => {
                        record.knowledge = Some(k.to_value());
                        if self.incremental && label.is_some_and(GroundingLabel::is_commit) {
                            match absorb(&grounded, &k) {
                                Ok((next, _, _)) => grounded = next,
                                Err(e) => errors.push(format!("merge: {e}")),
                            }
                        }
                    }
                    Err(e) => errors.push(e.to_string()),
                },
                Err(e) => out.failures.push(e),
            }
            since = index;
            if !errors.is_empty() {
                record.error = Some(errors.join("; "));
            }
            out.records.push(record);
        }
        out
    }
}
