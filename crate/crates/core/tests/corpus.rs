mod common;

use proptest::prelude::*;

use grounding::dialogue::{load_dialogues, store_dialogues, Dialogue, GroundingLabel, Role, Turn};

#[test]
fn fixture_shapes() {
    let corpus = common::corpus();
    assert_eq!(corpus.len(), 2);
    assert_eq!(corpus[0].turns.len(), 17);
    assert_eq!(corpus[0].domain_tag, "media");
    assert_eq!(corpus[1].turns.len(), 14);
    assert_eq!(corpus[0].turns[11].text, ":blush:");

    use GroundingLabel::*;
    let gold = common::gold(&corpus);
    let shape = |id: &str| -> Vec<(usize, GroundingLabel)> {
        gold[id].iter().map(|a| (a.turn_index, a.label)).collect()
    };
    assert_eq!(
        shape("A"),
        [(2, Explicit), (4, Implicit), (6, Implicit), (8, Clarification), (11, Explicit), (17, Explicit)]
    );
    assert_eq!(shape("B"), [(2, Implicit), (5, Clarification), (7, Explicit), (10, Explicit), (14, Explicit)]);
    assert_eq!(gold.values().map(Vec::len).sum::<usize>(), 11);
}

fn dialogue() -> impl Strategy<Value = Dialogue> {
    (
        "[A-Za-z0-9_-]{1,8}",
        prop::sample::select(&["nutrition", "history", "sports", "media", "geography", "other things"][..]),
        prop::collection::vec((any::<bool>(), "\\PC*[^\\s]\\PC*"), 1..12),
    )
        .prop_map(|(id, domain, turns)| {
            let turns = turns
                .into_iter()
                .enumerate()
                .map(|(i, (seeker, text))| {
                    Turn::new(i + 1, if seeker { Role::Seeker } else { Role::Provider }, text)
                })
                .collect();
            Dialogue::new(id, domain, turns).unwrap()
        })
}

proptest! {
    #[test]
    fn store_then_load_round_trips(corpus in prop::collection::vec(dialogue(), 0..5)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.jsonl");
        store_dialogues(&path, &corpus).unwrap();
        prop_assert_eq!(load_dialogues(&path).unwrap(), corpus);
    }
}
