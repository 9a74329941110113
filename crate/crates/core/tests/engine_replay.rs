mod common;

use serde_json::json;

use grounding::dialogue::{GroundingLabel, Role, Turn};
use grounding::engine::{observe_label, present, process_dialogue, AnnotationSource, GroundingState};
use grounding::knowledge::{canonicalize, knowledge_equivalent, GroundedKnowledge};

#[test]
fn implicit_question_commits_pending_and_opens_nothing() {
    let content = canonicalize(&json!({"table_content": "time travel works of fiction"})).unwrap();
    let st = present(&GroundingState::new(), &content, &Turn::new(3, Role::Provider, "...")).unwrap();
    let st = observe_label(
        &st,
        GroundingLabel::Implicit,
        &Turn::new(4, Role::Seeker, "How many rows are there in the dataset?"),
        &GroundedKnowledge::default(),
    )
    .unwrap();
    assert!(st.pending.is_none());
    assert!(knowledge_equivalent(&st.grounded, &content));
}

#[test]
fn grounded_changes_only_on_commit() {
    let corpus = common::corpus();
    let gold = common::gold(&corpus);
    for d in &corpus {
        let mut labels = AnnotationSource::new(&gold[&d.id]);
        let mut facts = labels.clone();
        let (state, trace) = process_dialogue(d, &mut labels, &mut facts);
        assert_eq!(state.history.len(), d.turns.len());
        let mut before = GroundedKnowledge::default();
        for t in &trace {
            if !t.label.is_commit() {
                assert_eq!(t.grounded_after, before, "{} turn {}", d.id, t.turn);
            }
            before = t.grounded_after.clone();
        }
        assert!(state.history.windows(2).all(|w| w[0].turn <= w[1].turn));
    }
}

#[test]
fn predicted_self_correction_at_a10() {
    let corpus = common::corpus();
    let d = &corpus[0];
    let four = canonicalize(&json!({"column_names": ["year", "title", "author", "short text description"]})).unwrap();
    let five = canonicalize(&json!({"column_names": ["year", "title", "author", "short text description", "category"]})).unwrap();
    let st = present(&GroundingState::new(), &four, &d.turns[6]).unwrap();
    let st = present(&st, &five, &d.turns[9]).unwrap();
    assert_eq!(st.pending_facts(), Some(&five));
    let st = observe_label(&st, GroundingLabel::Explicit, &d.turns[10], &GroundedKnowledge::default()).unwrap();
    assert_eq!(st.grounded, five);
}
