//! Atomic facts and the equivalence judge.
//!
//! A [`GroundedKnowledge`] value decomposes into a flat list of facts. The
//! name-only columns form a single [`FactKey::ColumnNames`] listing; every
//! stated column attribute becomes its own [`FactKey::ColumnField`] fact.

use std::fmt;

use serde::{Serialize, Serializer};

use super::terms::terms_equivalent;
use super::{GroundedKnowledge, Number, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ColumnAttr {
    Description,
    Values,
    DistinctCount,
    MinValue,
    MaxValue,
}

impl ColumnAttr {
    pub const ALL: [ColumnAttr; 5] = [
        ColumnAttr::Description,
        ColumnAttr::Values,
        ColumnAttr::DistinctCount,
        ColumnAttr::MinValue,
        ColumnAttr::MaxValue,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ColumnAttr::Description => "description",
            ColumnAttr::Values => "values",
            ColumnAttr::DistinctCount => "distinct_count",
            ColumnAttr::MinValue => "min_value",
            ColumnAttr::MaxValue => "max_value",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FactKey {
    TableDomain,
    TableContent,
    RowCount,
    ColumnCount,
    /// The listing of columns known by name only.
    ColumnNames,
    ColumnField { column: String, attr: ColumnAttr },
}

impl FactKey {
    pub fn column_field(column: impl Into<String>, attr: ColumnAttr) -> Self {
        FactKey::ColumnField {
            column: column.into(),
            attr,
        }
    }
}

impl fmt::Display for FactKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FactKey::TableDomain => f.write_str("table_domain"),
            FactKey::TableContent => f.write_str("table_content"),
            FactKey::RowCount => f.write_str("row_count"),
            FactKey::ColumnCount => f.write_str("column_count"),
            FactKey::ColumnNames => f.write_str("column_names"),
            FactKey::ColumnField { column, attr } => {
                write!(f, "column_info[{column}].{}", attr.as_str())
            }
        }
    }
}

impl Serialize for FactKey {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum FactValue {
    Text(String),
    Count(u64),
    Number(Number),
    Names(Vec<String>),
    Scalars(Vec<Scalar>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fact {
    pub key: FactKey,
    pub value: FactValue,
}

impl Fact {
    pub fn new(key: FactKey, value: FactValue) -> Self {
        Self { key, value }
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = serde_json::to_string(&self.value).map_err(|_| fmt::Error)?;
        write!(f, "{}={v}", self.key)
    }
}

impl GroundedKnowledge {
    /// Decompose into facts. Column attributes precede the name listing so
    /// that replaying them as graph operations touches attributed columns
    /// before the listing is replaced.
    pub fn facts(&self) -> Vec<Fact> {
        let mut out = Vec::new();
        if let Some(d) = &self.table_domain {
            out.push(Fact::new(FactKey::TableDomain, FactValue::Text(d.clone())));
        }
        if let Some(c) = &self.table_content {
            out.push(Fact::new(FactKey::TableContent, FactValue::Text(c.clone())));
        }
        if let Some(n) = self.row_count {
            out.push(Fact::new(FactKey::RowCount, FactValue::Count(n)));
        }
        if let Some(n) = self.column_count {
            out.push(Fact::new(FactKey::ColumnCount, FactValue::Count(n)));
        }
        for col in &self.column_info {
            let key = |attr| FactKey::column_field(col.column_name.clone(), attr);
            if let Some(d) = &col.description {
                out.push(Fact::new(key(ColumnAttr::Description), FactValue::Text(d.clone())));
            }
            if let Some(v) = &col.values {
                out.push(Fact::new(key(ColumnAttr::Values), FactValue::Scalars(v.clone())));
            }
            if let Some(n) = col.distinct_count {
                out.push(Fact::new(key(ColumnAttr::DistinctCount), FactValue::Count(n)));
            }
            if let Some(n) = col.min_value {
                out.push(Fact::new(key(ColumnAttr::MinValue), FactValue::Number(n)));
            }
            if let Some(n) = col.max_value {
                out.push(Fact::new(key(ColumnAttr::MaxValue), FactValue::Number(n)));
            }
        }
        let listing = self.name_only_listing();
        if !listing.is_empty() {
            out.push(Fact::new(FactKey::ColumnNames, FactValue::Names(listing)));
        }
        out
    }

    pub(crate) fn name_only_listing(&self) -> Vec<String> {
        self.column_info
            .iter()
            .filter(|c| c.is_name_only())
            .map(|c| c.column_name.clone())
            .collect()
    }

    pub(crate) fn full_listing(&self) -> Vec<String> {
        self.column_info.iter().map(|c| c.column_name.clone()).collect()
    }

    /// Current value stored for a column attribute, if the column and the
    /// attribute are both present.
    pub(crate) fn column_attr(&self, column: &str, attr: ColumnAttr) -> Option<FactValue> {
        let col = self.column(column)?;
        match attr {
            ColumnAttr::Description => col.description.clone().map(FactValue::Text),
            ColumnAttr::Values => col.values.clone().map(FactValue::Scalars),
            ColumnAttr::DistinctCount => col.distinct_count.map(FactValue::Count),
            ColumnAttr::MinValue => col.min_value.map(FactValue::Number),
            ColumnAttr::MaxValue => col.max_value.map(FactValue::Number),
        }
    }

    /// Whether this knowledge already holds `fact`, up to equivalence. A name
    /// listing is held when every listed name maps to a distinct column.
    pub fn contains_fact(&self, fact: &Fact) -> bool {
        match (&fact.key, &fact.value) {
            (FactKey::ColumnNames, FactValue::Names(names)) => {
                injective_matching(names, &self.full_listing(), |a, b| terms_equivalent(a, b))
                    .is_some()
            }
            (FactKey::ColumnField { column, attr }, value) => self
                .column_attr(column, *attr)
                .is_some_and(|held| values_equivalent(value, &held)),
            (key, value) => self
                .facts()
                .iter()
                .any(|f| &f.key == key && values_equivalent(value, &f.value)),
        }
    }

    /// Whether every fact of `other` is held by `self`.
    pub fn contains(&self, other: &GroundedKnowledge) -> bool {
        other.facts().iter().all(|f| self.contains_fact(f))
    }
}

/// Keys name the same node: identical variants, with column names compared
/// by phrase equivalence. Domain and content are never interchangeable.
pub fn keys_equivalent(a: &FactKey, b: &FactKey) -> bool {
    match (a, b) {
        (
            FactKey::ColumnField {
                column: ca,
                attr: aa,
            },
            FactKey::ColumnField {
                column: cb,
                attr: ab,
            },
        ) => aa == ab && terms_equivalent(ca, cb),
        (a, b) => a == b,
    }
}

pub fn values_equivalent(a: &FactValue, b: &FactValue) -> bool {
    match (a, b) {
        (FactValue::Text(x), FactValue::Text(y)) => terms_equivalent(x, y),
        (FactValue::Count(x), FactValue::Count(y)) => x == y,
        (FactValue::Number(x), FactValue::Number(y)) => x == y,
        (FactValue::Names(x), FactValue::Names(y)) => {
            perfect_matching(x, y, |p, q| terms_equivalent(p, q)).is_some()
        }
        (FactValue::Scalars(x), FactValue::Scalars(y)) => {
            perfect_matching(x, y, scalars_equivalent).is_some()
        }
        _ => false,
    }
}

fn scalars_equivalent(a: &Scalar, b: &Scalar) -> bool {
    match (a, b) {
        (Scalar::Text(x), Scalar::Text(y)) => terms_equivalent(x, y),
        (Scalar::Number(x), Scalar::Number(y)) => x == y,
        (Scalar::Bool(x), Scalar::Bool(y)) => x == y,
        _ => false,
    }
}

pub fn fact_equivalent(a: &Fact, b: &Fact) -> bool {
    keys_equivalent(&a.key, &b.key) && values_equivalent(&a.value, &b.value)
}

/// Two knowledge values state the same facts: their fact lists admit a
/// one-to-one pairing under [`fact_equivalent`].
pub fn knowledge_equivalent(a: &GroundedKnowledge, b: &GroundedKnowledge) -> bool {
    perfect_matching(&a.facts(), &b.facts(), fact_equivalent).is_some()
}

pub(crate) fn perfect_matching_names(a: &[String], b: &[String]) -> Option<Vec<usize>> {
    perfect_matching(a, b, |x, y| terms_equivalent(x, y))
}

/// One-to-one pairing covering both sides, or `None`. Entry `i` of the
/// result is the index in `right` paired with `left[i]`.
pub(crate) fn perfect_matching<L, R>(
    left: &[L],
    right: &[R],
    eq: impl Fn(&L, &R) -> bool,
) -> Option<Vec<usize>> {
    if left.len() != right.len() {
        return None;
    }
    injective_matching(left, right, eq)
}

/// Pair every element of `left` with a distinct element of `right`
/// (augmenting paths over the compatibility graph).
pub(crate) fn injective_matching<L, R>(
    left: &[L],
    right: &[R],
    eq: impl Fn(&L, &R) -> bool,
) -> Option<Vec<usize>> {
    if left.len() > right.len() {
        return None;
    }
    let adj: Vec<Vec<usize>> = left
        .iter()
        .map(|l| (0..right.len()).filter(|&j| eq(l, &right[j])).collect())
        .collect();
    let mut owner: Vec<Option<usize>> = vec![None; right.len()];

    fn augment(
        i: usize,
        adj: &[Vec<usize>],
        owner: &mut [Option<usize>],
        seen: &mut [bool],
    ) -> bool {
        for &j in &adj[i] {
            if seen[j] {
                continue;
            }
            seen[j] = true;
            if owner[j].is_none_or(|k| augment(k, adj, owner, seen)) {
                owner[j] = Some(i);
                return true;
            }
        }
        false
    }

    for i in 0..left.len() {
        let mut seen = vec![false; right.len()];
        if !augment(i, &adj, &mut owner, &mut seen) {
            return None;
        }
    }
    let mut pairing = vec![0; left.len()];
    for (j, o) in owner.iter().enumerate() {
        if let Some(i) = o {
            pairing[*i] = j;
        }
    }
    Some(pairing)
}
