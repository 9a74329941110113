//! Applying graph operations to committed knowledge.

use std::collections::BTreeSet;

use thiserror::Error;

use super::facts::injective_matching;
use super::terms::{longer_surface, terms_equivalent};
use super::{ColumnAttr, ColumnKnowledge, FactKey, FactValue, GroundedKnowledge, SchemaError};
use crate::assessment::{GraphOp, GraphOpKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MergeError {
    #[error("{op} targets missing fact {target}")]
    MissingFact { op: GraphOpKind, target: String },
    #[error("create targets existing fact {0}")]
    AlreadyPresent(String),
    #[error("{op} on {target} carries no payload")]
    MissingPayload { op: GraphOpKind, target: String },
    #[error("payload for {target} has the wrong type")]
    PayloadType { target: String },
    #[error(transparent)]
    Schema(#[from] SchemaError),
}

/// Which nodes an op sequence wrote, so stale bounds can be dropped.
#[derive(Default)]
struct Written {
    row_count: bool,
    attrs: BTreeSet<(String, ColumnAttr)>,
}

/// Apply `ops` in order to a copy of `kb` and return the canonical result.
///
/// Create adds a node, Update overwrites or enriches it (incoming wins,
/// except that equivalent text keeps the longer surface form), Instantiate
/// only checks presence, Remove deletes. When the new values contradict an
/// untouched bound (`min_value > max_value`, `distinct_count > row_count`)
/// the untouched side is dropped.
pub fn merge(kb: &GroundedKnowledge, ops: &[GraphOp]) -> Result<GroundedKnowledge, MergeError> {
    let mut work = kb.clone();
    let mut written = Written::default();
    for op in ops {
        apply(&mut work, op, &mut written)?;
    }
    reconcile(&mut work, &written);
    Ok(work.into_canonical()?)
}

fn apply(kb: &mut GroundedKnowledge, op: &GraphOp, written: &mut Written) -> Result<(), MergeError> {
    let missing = || MergeError::MissingFact {
        op: op.op,
        target: op.target.to_string(),
    };
    let payload = || {
        op.payload.as_ref().ok_or_else(|| MergeError::MissingPayload {
            op: op.op,
            target: op.target.to_string(),
        })
    };
    let wrong_type = || MergeError::PayloadType {
        target: op.target.to_string(),
    };

    match (&op.target, op.op) {
        (FactKey::ColumnNames, kind) => {
            let has_columns = !kb.column_info.is_empty();
            match kind {
                GraphOpKind::InstantiateNode if has_columns => {}
                GraphOpKind::RemoveNode if has_columns => {
                    kb.column_info.retain(|c| !c.is_name_only());
                }
                GraphOpKind::UpdateNode if has_columns => {
                    let FactValue::Names(names) = payload()? else {
                        return Err(wrong_type());
                    };
                    add_names(kb, names, true);
                }
                GraphOpKind::CreateNode => {
                    if kb.column_info.iter().any(ColumnKnowledge::is_name_only) {
                        return Err(MergeError::AlreadyPresent(op.target.to_string()));
                    }
                    let FactValue::Names(names) = payload()? else {
                        return Err(wrong_type());
                    };
                    add_names(kb, names, false);
                }
                _ => return Err(missing()),
            }
        }
        (FactKey::ColumnField { column, attr }, kind) => {
            let idx = kb.find_column(column);
            let present = idx.is_some_and(|i| attr_is_set(&kb.column_info[i], *attr));
            match kind {
                GraphOpKind::InstantiateNode if present => {}
                GraphOpKind::RemoveNode if present => {
                    clear_attr(&mut kb.column_info[idx.unwrap()], *attr);
                }
                GraphOpKind::UpdateNode if idx.is_some() => {
                    let col = &mut kb.column_info[idx.unwrap()];
                    set_attr(col, *attr, payload()?, true).ok_or_else(wrong_type)?;
                    written.attrs.insert((col.column_name.clone(), *attr));
                }
                GraphOpKind::CreateNode if !present => {
                    let i = idx.unwrap_or_else(|| {
                        kb.column_info.push(ColumnKnowledge::named(column.clone()));
                        kb.column_info.len() - 1
                    });
                    let col = &mut kb.column_info[i];
                    set_attr(col, *attr, payload()?, false).ok_or_else(wrong_type)?;
                    written.attrs.insert((col.column_name.clone(), *attr));
                }
                GraphOpKind::CreateNode => {
                    return Err(MergeError::AlreadyPresent(op.target.to_string()))
                }
                _ => return Err(missing()),
            }
        }
        (key, kind) => {
            let present = match key {
                FactKey::TableDomain => kb.table_domain.is_some(),
                FactKey::TableContent => kb.table_content.is_some(),
                FactKey::RowCount => kb.row_count.is_some(),
                FactKey::ColumnCount => kb.column_count.is_some(),
                _ => unreachable!("column keys handled above"),
            };
            match kind {
                GraphOpKind::InstantiateNode if present => {}
                GraphOpKind::RemoveNode if present => match key {
                    FactKey::TableDomain => kb.table_domain = None,
                    FactKey::TableContent => kb.table_content = None,
                    FactKey::RowCount => kb.row_count = None,
                    _ => kb.column_count = None,
                },
                GraphOpKind::UpdateNode | GraphOpKind::CreateNode => {
                    if kind == GraphOpKind::UpdateNode && !present {
                        return Err(missing());
                    }
                    if kind == GraphOpKind::CreateNode && present {
                        return Err(MergeError::AlreadyPresent(op.target.to_string()));
                    }
                    match (key, payload()?) {
                        (FactKey::TableDomain, FactValue::Text(t)) => {
                            kb.table_domain = Some(pick_text(kb.table_domain.as_deref(), t));
                        }
                        (FactKey::TableContent, FactValue::Text(t)) => {
                            kb.table_content = Some(pick_text(kb.table_content.as_deref(), t));
                        }
                        (FactKey::RowCount, FactValue::Count(n)) => {
                            kb.row_count = Some(*n);
                            written.row_count = true;
                        }
                        (FactKey::ColumnCount, FactValue::Count(n)) => kb.column_count = Some(*n),
                        _ => return Err(wrong_type()),
                    }
                }
                _ => return Err(missing()),
            }
        }
    }
    Ok(())
}

/// Keep the existing text when the incoming one is equivalent but no longer.
fn pick_text(existing: Option<&str>, incoming: &str) -> String {
    match existing {
        Some(e) if terms_equivalent(e, incoming) => longer_surface(e, incoming).to_owned(),
        _ => incoming.to_owned(),
    }
}

fn add_names(kb: &mut GroundedKnowledge, names: &[String], rename: bool) {
    // Pair incoming names with existing columns; unpaired names become new columns.
    let existing = kb.full_listing();
    let mut paired = vec![None; names.len()];
    for (i, name) in names.iter().enumerate() {
        if let Some(j) = kb.find_column(name) {
            if !paired.contains(&Some(j)) {
                paired[i] = Some(j);
            }
        }
    }
    if paired.iter().any(Option::is_none) {
        if let Some(m) = injective_matching(names, &existing, |a, b| terms_equivalent(a, b)) {
            paired = m.into_iter().map(Some).collect();
        }
    }
    for (name, slot) in names.iter().zip(paired) {
        match slot {
            Some(j) if rename => {
                let col = &mut kb.column_info[j];
                col.column_name = longer_surface(&col.column_name, name).to_owned();
            }
            Some(_) => {}
            None => kb.column_info.push(ColumnKnowledge::named(name.clone())),
        }
    }
}

fn attr_is_set(col: &ColumnKnowledge, attr: ColumnAttr) -> bool {
    match attr {
        ColumnAttr::Description => col.description.is_some(),
        ColumnAttr::Values => col.values.is_some(),
        ColumnAttr::DistinctCount => col.distinct_count.is_some(),
        ColumnAttr::MinValue => col.min_value.is_some(),
        ColumnAttr::MaxValue => col.max_value.is_some(),
    }
}

fn clear_attr(col: &mut ColumnKnowledge, attr: ColumnAttr) {
    match attr {
        ColumnAttr::Description => col.description = None,
        ColumnAttr::Values => col.values = None,
        ColumnAttr::DistinctCount => col.distinct_count = None,
        ColumnAttr::MinValue => col.min_value = None,
        ColumnAttr::MaxValue => col.max_value = None,
    }
}

fn set_attr(
    col: &mut ColumnKnowledge,
    attr: ColumnAttr,
    value: &FactValue,
    keep_longer_text: bool,
) -> Option<()> {
    match (attr, value) {
        (ColumnAttr::Description, FactValue::Text(t)) => {
            col.description = Some(if keep_longer_text {
                pick_text(col.description.as_deref(), t)
            } else {
                t.clone()
            });
        }
        (ColumnAttr::Values, FactValue::Scalars(v)) => col.values = Some(v.clone()),
        (ColumnAttr::DistinctCount, FactValue::Count(n)) => col.distinct_count = Some(*n),
        (ColumnAttr::MinValue, FactValue::Number(n)) => col.min_value = Some(*n),
        (ColumnAttr::MaxValue, FactValue::Number(n)) => col.max_value = Some(*n),
        _ => return None,
    }
    Some(())
}

fn reconcile(kb: &mut GroundedKnowledge, written: &Written) {
    let touched = |col: &ColumnKnowledge, attr| {
        written
            .attrs
            .iter()
            .any(|(name, a)| *a == attr && terms_equivalent(name, &col.column_name))
    };
    let rows = kb.row_count;
    let mut drop_rows = false;
    for col in &mut kb.column_info {
        if let (Some(lo), Some(hi)) = (col.min_value, col.max_value) {
            if lo > hi {
                if touched(col, ColumnAttr::MinValue) && !touched(col, ColumnAttr::MaxValue) {
                    col.max_value = None;
                } else if touched(col, ColumnAttr::MaxValue) && !touched(col, ColumnAttr::MinValue)
                {
                    col.min_value = None;
                }
            }
        }
        if let (Some(d), Some(r)) = (col.distinct_count, rows) {
            if d > r {
                if written.row_count {
                    col.distinct_count = None;
                } else if touched(col, ColumnAttr::DistinctCount) {
                    drop_rows = true;
                }
            }
        }
    }
    if drop_rows {
        kb.row_count = None;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::knowledge::{canonicalize, Number};
    use serde_json::json;

    fn gk(v: serde_json::Value) -> GroundedKnowledge {
        canonicalize(&v).unwrap()
    }

    fn op(op: GraphOpKind, target: FactKey, payload: Option<FactValue>) -> GraphOp {
        GraphOp { op, target, payload }
    }

    #[test]
    fn create_into_empty() {
        let out = merge(
            &GroundedKnowledge::default(),
            &[op(GraphOpKind::CreateNode, FactKey::RowCount, Some(FactValue::Count(98)))],
        )
        .unwrap();
        assert_eq!(out, gk(json!({"row_count": 98})));
    }

    #[test]
    fn replace_listing() {
        let kb = gk(json!({"column_names": ["year", "title", "author", "short text description"]}));
        let corrected: Vec<String> = ["year", "title", "author", "short text description", "category"]
            .map(String::from)
            .to_vec();
        let out = merge(
            &kb,
            &[
                op(GraphOpKind::RemoveNode, FactKey::ColumnNames, None),
                op(
                    GraphOpKind::CreateNode,
                    FactKey::ColumnNames,
                    Some(FactValue::Names(corrected.clone())),
                ),
            ],
        )
        .unwrap();
        assert_eq!(out, gk(json!({"column_names": corrected})));
    }

    #[test]
    fn empty_ops_is_identity() {
        let kb = gk(json!({"row_count": 5, "column_names": ["a"]}));
        assert_eq!(merge(&kb, &[]).unwrap(), kb);
    }

    #[test]
    fn missing_targets_are_state_errors() {
        let err = merge(
            &GroundedKnowledge::default(),
            &[op(GraphOpKind::RemoveNode, FactKey::RowCount, None)],
        )
        .unwrap_err();
        assert!(matches!(err, MergeError::MissingFact { .. }));
        let err = merge(
            &GroundedKnowledge::default(),
            &[op(
                GraphOpKind::UpdateNode,
                FactKey::column_field("author", ColumnAttr::DistinctCount),
                Some(FactValue::Count(1)),
            )],
        )
        .unwrap_err();
        assert!(matches!(err, MergeError::MissingFact { .. }));
        let err = merge(
            &gk(json!({"row_count": 1})),
            &[op(GraphOpKind::CreateNode, FactKey::RowCount, Some(FactValue::Count(2)))],
        )
        .unwrap_err();
        assert!(matches!(err, MergeError::AlreadyPresent(_)));
    }

    #[test]
    fn update_enriches_column_entry() {
        let kb = gk(json!({"column_names": ["author", "title"]}));
        let out = merge(
            &kb,
            &[op(
                GraphOpKind::UpdateNode,
                FactKey::column_field("author", ColumnAttr::DistinctCount),
                Some(FactValue::Count(417)),
            )],
        )
        .unwrap();
        assert_eq!(out.column("author").unwrap().distinct_count, Some(417));
        assert!(out.column("title").unwrap().is_name_only());
    }

    #[test]
    fn equivalent_text_keeps_longer_form() {
        let kb = gk(json!({"table_content": "time travel works of fiction"}));
        let out = merge(
            &kb,
            &[op(
                GraphOpKind::UpdateNode,
                FactKey::TableContent,
                Some(FactValue::Text("time travel fiction".into())),
            )],
        )
        .unwrap();
        assert_eq!(out.table_content.as_deref(), Some("time travel works of fiction"));
    }

    #[test]
    fn stale_bound_is_dropped() {
        let kb = gk(json!({"column_name": "year", "min_value": 1950, "max_value": 2000}));
        let out = merge(
            &kb,
            &[
                op(
                    GraphOpKind::RemoveNode,
                    FactKey::column_field("year", ColumnAttr::MaxValue),
                    None,
                ),
                op(
                    GraphOpKind::CreateNode,
                    FactKey::column_field("year", ColumnAttr::MaxValue),
                    Some(FactValue::Number(Number::Int(1900))),
                ),
            ],
        )
        .unwrap();
        let col = out.column("year").unwrap();
        assert_eq!(col.max_value, Some(Number::Int(1900)));
        assert_eq!(col.min_value, None);
    }

    #[test]
    fn row_count_update_drops_excess_distinct() {
        let kb = gk(json!({"row_count": 500, "column_name": "author", "distinct_count": 417}));
        let out = merge(
            &kb,
            &[
                op(GraphOpKind::RemoveNode, FactKey::RowCount, None),
                op(GraphOpKind::CreateNode, FactKey::RowCount, Some(FactValue::Count(98))),
            ],
        )
        .unwrap();
        assert_eq!(out.row_count, Some(98));
        assert_eq!(out.column("author").unwrap().distinct_count, None);
    }
}
