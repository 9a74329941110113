//! Generators and property checks over grounded knowledge.

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestError, TestRunner};
use serde_json::{json, Map, Value};

use grounding::assessment::{absorb, assess, Verdict};
use grounding::knowledge::{canonicalize, terms_equivalent, GroundedKnowledge};

pub const CASES: u32 = 1000;

const WORDS: &[&str] = &[
    "parks", "fiction", "media", "germany", "films", "novels", "planets", "buildings", "nutrition",
    "sports", "history", "index", "travel", "series",
];

/// Column names, one token each, split into three disjoint groups.
const NAMES: [&[&str]; 3] = [
    &["year", "title", "author", "category"],
    &["area", "state", "height", "summary"],
    &["price", "rating", "country", "genre"],
];

fn phrase() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(WORDS), 1..4).prop_map(|w| w.join(" "))
}

fn column(name: &'static str, rows: u64, name_only: bool) -> impl Strategy<Value = Value> {
    let attrs = (
        prop::option::of(phrase()),
        prop::option::of(prop::collection::vec(prop::sample::select(WORDS), 1..3)),
        prop::option::of(0..=rows),
        prop::option::of((-1000i64..1000, 0i64..1000)),
        any::<bool>(),
    );
    attrs.prop_map(move |(desc, values, distinct, bounds, keep_max)| {
        let mut o = Map::new();
        o.insert("column_name".into(), json!(name));
        if !name_only {
            if let Some(d) = desc {
                o.insert("description".into(), json!(d));
            }
            if let Some(v) = values {
                o.insert("values".into(), json!(v));
            }
            if let Some(d) = distinct {
                o.insert("distinct_count".into(), json!(d));
            }
            if let Some((lo, span)) = bounds {
                o.insert("min_value".into(), json!(lo));
                if keep_max {
                    o.insert("max_value".into(), json!(lo + span));
                }
            }
            if o.len() == 1 {
                o.insert("distinct_count".into(), json!(rows.min(3)));
            }
        }
        Value::Object(o)
    })
}

fn columns(group: usize, rows: u64, allow_name_only: bool) -> impl Strategy<Value = Vec<Value>> {
    let per_column: Vec<_> = NAMES[group]
        .iter()
        .map(move |n| {
            (any::<bool>(), any::<bool>()).prop_flat_map(move |(present, name_only)| {
                let only = allow_name_only && name_only;
                prop::option::weighted(if present { 0.9 } else { 0.3 }, column(n, rows, only))
            })
        })
        .collect();
    per_column.prop_map(|cols| cols.into_iter().flatten().collect())
}

fn knowledge_value(
    domain: bool,
    content: bool,
    column_count: bool,
    rows: Option<u64>,
    group: usize,
    world_rows: u64,
    allow_name_only: bool,
) -> impl Strategy<Value = Value> {
    (
        prop::option::of(phrase()),
        prop::option::of(phrase()),
        prop::option::of(1u64..40),
        columns(group, world_rows, allow_name_only),
    )
        .prop_map(move |(d, c, cc, cols)| {
            let mut o = Map::new();
            if domain {
                if let Some(d) = d {
                    o.insert("table_domain".into(), json!(d));
                }
            }
            if content {
                if let Some(c) = c {
                    o.insert("table_content".into(), json!(c));
                }
            }
            if column_count {
                if let Some(cc) = cc {
                    o.insert("column_count".into(), json!(cc));
                }
            }
            if let Some(r) = rows {
                o.insert("row_count".into(), json!(r));
            }
            if !cols.is_empty() {
                o.insert("column_info".into(), Value::Array(cols));
            }
            Value::Object(o)
        })
}

fn canonical(v: &Value) -> GroundedKnowledge {
    canonicalize(v).expect("generated knowledge is valid")
}

fn knowledge_in(rows: u64) -> impl Strategy<Value = GroundedKnowledge> {
    any::<bool>().prop_flat_map(move |with_rows| {
        let r = with_rows.then_some(rows);
        (
            knowledge_value(true, true, true, r, 0, rows, true),
            columns(1, rows, true),
            columns(2, rows, true),
        )
            .prop_map(|(mut v, more, rest)| {
                let cols = v
                    .as_object_mut()
                    .unwrap()
                    .entry("column_info")
                    .or_insert_with(|| json!([]));
                cols.as_array_mut().unwrap().extend(more.into_iter().chain(rest));
                canonical(&v)
            })
    })
}

/// Any valid knowledge value, drawing columns from every group.
pub fn knowledge() -> impl Strategy<Value = GroundedKnowledge> {
    (0u64..1000).prop_flat_map(knowledge_in)
}

/// Two values describing the same table: any row count either states is
/// the same, and distinct counts never exceed it.
pub fn knowledge_pair() -> impl Strategy<Value = (GroundedKnowledge, GroundedKnowledge)> {
    (0u64..1000).prop_flat_map(|rows| (knowledge_in(rows), knowledge_in(rows)))
}

/// Three values whose fact keys are pairwise disjoint and whose bounds are
/// consistent with one shared row count. Only the first may list name-only
/// columns, since all such columns share the listing key.
pub fn disjoint_triple() -> impl Strategy<Value = (GroundedKnowledge, GroundedKnowledge, GroundedKnowledge)> {
    (0u64..1000).prop_flat_map(|rows| {
        (
            knowledge_value(false, false, true, Some(rows), 0, rows, true),
            knowledge_value(true, false, false, None, 1, rows, false),
            knowledge_value(false, true, false, None, 2, rows, false),
        )
            .prop_map(|(a, b, c)| (canonical(&a), canonical(&b), canonical(&c)))
    })
}

pub fn raw_phrase() -> impl Strategy<Value = String> {
    prop_oneof![
        phrase(),
        prop::collection::vec(
            prop::sample::select(&[
                "the", "of", "Area", "in", "km2", "%", "98", "park's", "name", "short", "text",
                "Year", "(", ")", "-", "data", "information", "ü", "  ",
            ][..]),
            0..6
        )
        .prop_map(|w| w.join(" ")),
        "\\PC{0,24}",
    ]
}

fn runner() -> TestRunner {
    TestRunner::new(Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    })
}

pub type Outcome = Result<(), TestError<String>>;

fn stringify<T: std::fmt::Debug>(r: Result<(), TestError<T>>) -> Outcome {
    r.map_err(|e| match e {
        TestError::Abort(m) => TestError::Abort(m),
        TestError::Fail(m, v) => TestError::Fail(m, format!("{v:#?}")),
    })
}

pub fn canonicalize_idempotent() -> Outcome {
    stringify(runner().run(&knowledge(), |k| {
        let again = canonicalize(&k.to_value()).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(&again, &k);
        let twice = canonicalize(&again.to_value()).unwrap();
        prop_assert_eq!(twice, again);
        Ok(())
    }))
}

pub fn merge_idempotent() -> Outcome {
    stringify(runner().run(&knowledge_pair(), |(kb, delta)| {
        let same = absorb(&kb, &kb).map_err(|e| TestCaseError::fail(e.to_string()))?.0;
        prop_assert_eq!(&same, &kb);
        let once = absorb(&kb, &delta).map_err(|e| TestCaseError::fail(e.to_string()))?.0;
        let twice = absorb(&once, &delta).map_err(|e| TestCaseError::fail(e.to_string()))?.0;
        prop_assert_eq!(twice, once);
        Ok(())
    }))
}

pub fn merge_commutes_on_disjoint_keys() -> Outcome {
    stringify(runner().run(&disjoint_triple(), |(base, a, b)| {
        let step = |kb: &GroundedKnowledge, d: &GroundedKnowledge| {
            absorb(kb, d).map(|r| r.0).map_err(|e| TestCaseError::fail(e.to_string()))
        };
        let ab = step(&step(&base, &a)?, &b)?;
        let ba = step(&step(&base, &b)?, &a)?;
        prop_assert_eq!(&ab, &ba);
        let from_empty_ab = step(&step(&GroundedKnowledge::default(), &a)?, &b)?;
        let from_empty_ba = step(&step(&GroundedKnowledge::default(), &b)?, &a)?;
        prop_assert_eq!(from_empty_ab, from_empty_ba);
        Ok(())
    }))
}

pub fn self_assessment_matches() -> Outcome {
    stringify(runner().run(&knowledge(), |kb| {
        for o in assess(&kb, &kb) {
            prop_assert_eq!(o.verdict, Verdict::Match, "{}", o.fact);
        }
        Ok(())
    }))
}

pub fn delta_absorbed() -> Outcome {
    stringify(runner().run(&knowledge_pair(), |(kb, delta)| {
        let merged = absorb(&kb, &delta).map_err(|e| TestCaseError::fail(e.to_string()))?.0;
        for f in delta.facts() {
            prop_assert!(merged.contains_fact(&f), "merged KB lost {}", f);
        }
        Ok(())
    }))
}

pub fn terms_equivalence_reflexive_symmetric() -> Outcome {
    stringify(runner().run(&(raw_phrase(), raw_phrase()), |(a, b)| {
        prop_assert!(terms_equivalent(&a, &a));
        prop_assert!(terms_equivalent(&b, &b));
        prop_assert_eq!(terms_equivalent(&a, &b), terms_equivalent(&b, &a));
        Ok(())
    }))
}

pub const ALL: &[(&str, fn() -> Outcome)] = &[
    ("canonicalize idempotence", canonicalize_idempotent),
    ("merge idempotence", merge_idempotent),
    ("merge commutativity on disjoint keys", merge_commutes_on_disjoint_keys),
    ("assess(kb, kb) is all Match", self_assessment_matches),
    ("delta absorption", delta_absorbed),
    ("terms_equivalent reflexive and symmetric", terms_equivalence_reflexive_symmetric),
];
