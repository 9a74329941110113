//! Randomized replays of a dialogue for the clarification guard.

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use serde_json::json;

use grounding::dialogue::{Annotation, Dialogue, GroundingLabel, Role, Turn};
use grounding::engine::{process_dialogue, AnnotationSource, SourceError};
use grounding::knowledge::{canonicalize, terms_equivalent, GroundedKnowledge};

pub const RUNS: u32 = 256;

fn pool() -> Vec<GroundedKnowledge> {
    [
        json!({"row_count": 500}),
        json!({"table_content": "time travel works of fiction"}),
        json!({"table_domain": "media"}),
        json!({"column_name": "title", "description": "title of the work"}),
        json!({"column_name": "year", "min_value": 1895, "max_value": 2020}),
        json!({"column_names": ["year", "title", "author", "short text description"]}),
        json!({"column_names": ["year", "title", "author", "short text description", "category"]}),
        json!({"column_name": "author", "distinct_count": 417}),
    ]
    .iter()
    .map(|v| canonicalize(v).unwrap())
    .collect()
}

fn mentions(k: &GroundedKnowledge, name: &str) -> bool {
    k.column_info.iter().any(|c| terms_equivalent(&c.column_name, name))
}

/// Replay `d` with gold labels while drawing each annotated turn's knowledge
/// from either gold or predictions, and presenting random extra facts at
/// unannotated provider turns. Returns the number of replays checked.
pub fn replay_with_extra_presentations(
    d: &Dialogue,
    gold: &[Annotation],
    predicted: &[Annotation],
) -> Result<u32, String> {
    let pool = pool();
    let n = d.turns.len();
    let strategy = (
        prop::collection::vec(any::<bool>(), n),
        prop::collection::vec(prop::option::of(0..pool.len()), n),
    );
    let mut runner = TestRunner::new(Config {
        cases: RUNS,
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(&strategy, |(use_predicted, extra)| {
            let mut labels = AnnotationSource::new(gold);
            let mut gold_src = AnnotationSource::new(gold);
            let mut pred_src = AnnotationSource::new(predicted);
            let annotated: Vec<usize> = gold.iter().map(|a| a.turn_index).collect();
            let mut extractor = |dl: &Dialogue, t: &Turn, g: &GroundedKnowledge| -> Result<GroundedKnowledge, SourceError> {
                use grounding::engine::TurnExtractor;
                let i = t.index - 1;
                if annotated.contains(&t.index) {
                    if use_predicted[i] {
                        pred_src.extract(dl, t, g)
                    } else {
                        gold_src.extract(dl, t, g)
                    }
                } else if t.role == Role::Provider {
                    Ok(extra[i].map(|k| pool[k].clone()).unwrap_or_default())
                } else {
                    Ok(GroundedKnowledge::default())
                }
            };
            let (_, trace) = process_dialogue(d, &mut labels, &mut extractor);
            for t in trace.iter().filter(|t| t.turn >= 8) {
                prop_assert!(!mentions(&t.grounded_after, "type of work"), "turn {} grounded it", t.turn);
                let pending = t.pending_after.as_ref().is_some_and(|p| mentions(p, "type of work"));
                prop_assert!(!pending, "turn {} holds it pending", t.turn);
            }
            let t11 = &trace[10];
            prop_assert_eq!(t11.label, GroundingLabel::Explicit);
            prop_assert!(mentions(&t11.grounded_after, "category"));
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(RUNS)
}
