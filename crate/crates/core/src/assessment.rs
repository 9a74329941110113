//! Assessment of incoming knowledge against what is already known.
//!
//! Every incoming fact is classified as a match, a partial match (it adds
//! detail to a known node), a conflict, or novel; [`plan_ops`] turns the
//! verdicts into graph operations that [`crate::knowledge::merge`] applies.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::knowledge::terms::strictly_enriches;
use crate::knowledge::{
    perfect_matching_names, values_equivalent, Fact, FactKey, FactValue, GroundedKnowledge,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Match,
    PartialMatch,
    Conflict,
    Novel,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssessmentOutcome {
    pub fact: Fact,
    pub verdict: Verdict,
    /// Key of the existing node the fact was compared against.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matched_key: Option<FactKey>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GraphOpKind {
    InstantiateNode,
    UpdateNode,
    CreateNode,
    RemoveNode,
}

impl GraphOpKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GraphOpKind::InstantiateNode => "instantiate",
            GraphOpKind::UpdateNode => "update",
            GraphOpKind::CreateNode => "create",
            GraphOpKind::RemoveNode => "remove",
        }
    }
}

impl fmt::Display for GraphOpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for GraphOpKind {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

/// One knowledge-graph mutation. Serializes as an audit record
/// `{"op", "target", "payload"?}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphOp {
    pub op: GraphOpKind,
    pub target: FactKey,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub payload: Option<FactValue>,
}

impl GraphOp {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("graph ops always serialize")
    }
}

/// Classify each fact of `delta` against `kb`. Both must be canonical.
pub fn assess(kb: &GroundedKnowledge, delta: &GroundedKnowledge) -> Vec<AssessmentOutcome> {
    delta
        .facts()
        .into_iter()
        .map(|fact| {
            let (verdict, matched_key) = judge(kb, &fact);
            AssessmentOutcome {
                fact,
                verdict,
                matched_key,
            }
        })
        .collect()
}

fn judge(kb: &GroundedKnowledge, fact: &Fact) -> (Verdict, Option<FactKey>) {
    match (&fact.key, &fact.value) {
        (FactKey::ColumnNames, FactValue::Names(names)) => {
            if kb.column_info.is_empty() {
                return (Verdict::Novel, None);
            }
            // A listing matches either the name-only columns or the whole column set.
            let candidates = [kb.name_only_listing(), kb.full_listing()];
            let pairing = candidates
                .iter()
                .filter(|c| !c.is_empty())
                .find_map(|c| perfect_matching_names(names, c).map(|m| (c, m)));
            let verdict = match pairing {
                Some((held, m)) => {
                    let enriches = names
                        .iter()
                        .zip(&m)
                        .any(|(n, &j)| strictly_enriches(n, &held[j]));
                    if enriches {
                        Verdict::PartialMatch
                    } else {
                        Verdict::Match
                    }
                }
                None => Verdict::Conflict,
            };
            (verdict, Some(FactKey::ColumnNames))
        }
        (FactKey::ColumnField { column, attr }, value) => {
            let Some(col) = kb.column(column) else {
                return (Verdict::Novel, None);
            };
            let matched = FactKey::column_field(col.column_name.clone(), *attr);
            let verdict = match kb.column_attr(&col.column_name, *attr) {
                None => Verdict::PartialMatch,
                Some(held) => text_verdict(value, &held),
            };
            (verdict, Some(matched))
        }
        (key, value) => {
            let held = kb.facts().into_iter().find(|f| &f.key == key);
            match held {
                None => (Verdict::Novel, None),
                Some(h) => (text_verdict(value, &h.value), Some(h.key)),
            }
        }
    }
}

fn text_verdict(incoming: &FactValue, held: &FactValue) -> Verdict {
    if !values_equivalent(incoming, held) {
        return Verdict::Conflict;
    }
    match (incoming, held) {
        (FactValue::Text(i), FactValue::Text(h)) if strictly_enriches(i, h) => Verdict::PartialMatch,
        _ => Verdict::Match,
    }
}

/// Map verdicts to graph operations, preserving incoming fact order.
pub fn plan_ops(outcomes: &[AssessmentOutcome]) -> Vec<GraphOp> {
    let mut ops = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        let existing = o.matched_key.clone().unwrap_or_else(|| o.fact.key.clone());
        match o.verdict {
            Verdict::Match => ops.push(GraphOp {
                op: GraphOpKind::InstantiateNode,
                target: existing,
                payload: None,
            }),
            Verdict::PartialMatch => ops.push(GraphOp {
                op: GraphOpKind::UpdateNode,
                target: existing,
                payload: Some(o.fact.value.clone()),
            }),
            Verdict::Conflict => {
                ops.push(GraphOp {
                    op: GraphOpKind::RemoveNode,
                    target: existing,
                    payload: None,
                });
                ops.push(GraphOp {
                    op: GraphOpKind::CreateNode,
                    target: o.fact.key.clone(),
                    payload: Some(o.fact.value.clone()),
                });
            }
            Verdict::Novel => ops.push(GraphOp {
                op: GraphOpKind::CreateNode,
                target: o.fact.key.clone(),
                payload: Some(o.fact.value.clone()),
            }),
        }
    }
    ops
}

/// Assess, plan and merge `delta` into `kb` in one step.
pub fn absorb(
    kb: &GroundedKnowledge,
    delta: &GroundedKnowledge,
) -> Result<(GroundedKnowledge, Vec<AssessmentOutcome>, Vec<GraphOp>), crate::knowledge::MergeError>
{
    let outcomes = assess(kb, delta);
    let ops = plan_ops(&outcomes);
    let merged = crate::knowledge::merge(kb, &ops)?;
    Ok((merged, outcomes, ops))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knowledge::{canonicalize, ColumnAttr};
    use serde_json::json;

    fn gk(v: serde_json::Value) -> GroundedKnowledge {
        canonicalize(&v).unwrap()
    }

    fn verdicts(kb: serde_json::Value, delta: serde_json::Value) -> Vec<Verdict> {
        assess(&gk(kb), &gk(delta)).iter().map(|o| o.verdict).collect()
    }

    #[test]
    fn identical_count_matches() {
        assert_eq!(verdicts(json!({"row_count": 500}), json!({"row_count": 500})), [Verdict::Match]);
    }

    #[test]
    fn new_attribute_on_known_column_is_partial() {
        let out = assess(
            &gk(json!({"column_names": ["author"]})),
            &gk(json!({"column_name": "author", "distinct_count": 417})),
        );
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].verdict, Verdict::PartialMatch);
        assert_eq!(
            out[0].matched_key,
            Some(FactKey::column_field("author", ColumnAttr::DistinctCount))
        );
    }

    #[test]
    fn corrected_listing_conflicts() {
        assert_eq!(
            verdicts(
                json!({"column_names": ["year", "title", "author", "short text description"]}),
                json!({"column_names": ["year", "title", "author", "short text description", "category"]})
            ),
            [Verdict::Conflict]
        );
    }

    #[test]
    fn empty_kb_is_all_novel() {
        assert!(verdicts(json!({}), json!({"row_count": 3, "table_domain": "x", "column_names": ["a"]}))
            .iter()
            .all(|v| *v == Verdict::Novel));
    }

    #[test]
    fn text_enrichment_is_partial() {
        assert_eq!(
            verdicts(json!({"table_content": "nature parks"}), json!({"table_content": "nature parks in Germany"})),
            [Verdict::PartialMatch]
        );
        assert_eq!(
            verdicts(json!({"table_domain": "geography"}), json!({"table_domain": "Geography"})),
            [Verdict::Match]
        );
        assert_eq!(
            verdicts(json!({"table_domain": "media"}), json!({"table_domain": "sports"})),
            [Verdict::Conflict]
        );
    }

    #[test]
    fn restated_full_listing_matches_after_enrichment() {
        let kb = json!({"column_info": [
            {"column_name": "author", "distinct_count": 417},
            {"column_name": "title"}
        ]});
        assert_eq!(verdicts(kb, json!({"column_names": ["title", "author"]})), [Verdict::Match]);
    }

    #[test]
    fn plan_shapes() {
        let novel = assess(&GroundedKnowledge::default(), &gk(json!({"row_count": 98})));
        let ops = plan_ops(&novel);
        assert_eq!(ops.len(), 1);
        assert_eq!(ops[0].op, GraphOpKind::CreateNode);
        assert_eq!(ops[0].payload, Some(FactValue::Count(98)));

        let matched = assess(&gk(json!({"row_count": 500})), &gk(json!({"row_count": 500})));
        let ops = plan_ops(&matched);
        assert_eq!(ops[0].op, GraphOpKind::InstantiateNode);
        assert_eq!(ops[0].payload, None);

        let conflict = assess(
            &gk(json!({"column_names": ["a", "b"]})),
            &gk(json!({"column_names": ["a", "b", "c"]})),
        );
        let ops = plan_ops(&conflict);
        assert_eq!(
            ops.iter().map(|o| o.op).collect::<Vec<_>>(),
            [GraphOpKind::RemoveNode, GraphOpKind::CreateNode]
        );
    }

    #[test]
    fn op_audit_record() {
        let op = GraphOp {
            op: GraphOpKind::CreateNode,
            target: FactKey::RowCount,
            payload: Some(FactValue::Count(98)),
        };
        assert_eq!(op.to_json(), r#"{"op":"create","target":"row_count","payload":98}"#);
        let op = GraphOp {
            op: GraphOpKind::RemoveNode,
            target: FactKey::ColumnNames,
            payload: None,
        };
        assert_eq!(op.to_json(), r#"{"op":"remove","target":"column_names"}"#);
    }
}
