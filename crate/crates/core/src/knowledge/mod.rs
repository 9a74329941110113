//! Tabular grounded-knowledge schema.
//!
//! [`GroundedKnowledge`] mirrors the JSON structure the extraction prompt asks
//! the model for: table domain and content, row/column counts, and per-column
//! facts. Values are always held in canonical form (see [`canonicalize`]).

mod canonical;
mod facts;
mod merge;
pub mod terms;

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub use canonical::canonicalize;
pub use facts::{
    fact_equivalent, keys_equivalent, knowledge_equivalent, values_equivalent, ColumnAttr, Fact,
    FactKey, FactValue,
};
pub(crate) use facts::perfect_matching_names;
pub use merge::{merge, MergeError};
pub use terms::{normalize_term, terms_equivalent};

/// Raised when raw model output or an annotation does not fit the schema.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SchemaError {
    #[error("unknown key '{0}'")]
    UnknownKey(String),
    #[error("cannot coerce '{field}': {message}")]
    Coercion { field: String, message: String },
    #[error("invalid knowledge: {0}")]
    Invalid(String),
}

/// A numeric column bound. Integral floats are folded into `Int`.
#[derive(Debug, Clone, Copy)]
pub enum Number {
    Int(i64),
    Float(f64),
}

impl Number {
    pub fn as_f64(self) -> f64 {
        match self {
            Number::Int(i) => i as f64,
            Number::Float(f) => f,
        }
    }

    pub(crate) fn normalized(self) -> Self {
        match self {
            Number::Float(f) if f.fract() == 0.0 && f.abs() < 9.0e15 => Number::Int(f as i64),
            other => other,
        }
    }
}

impl PartialEq for Number {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Number::Int(a), Number::Int(b)) => a == b,
            (a, b) => a.as_f64() == b.as_f64(),
        }
    }
}

impl PartialOrd for Number {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Number::Int(a), Number::Int(b)) => a.partial_cmp(b),
            (a, b) => a.as_f64().partial_cmp(&b.as_f64()),
        }
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Int(i) => write!(f, "{i}"),
            Number::Float(x) => write!(f, "{x}"),
        }
    }
}

impl Serialize for Number {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match *self {
            Number::Int(i) => s.serialize_i64(i),
            Number::Float(f) => s.serialize_f64(f),
        }
    }
}

/// One element of a column's `values` list.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Scalar {
    Text(String),
    Number(Number),
    Bool(bool),
}

/// Knowledge about a single column.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColumnKnowledge {
    pub column_name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<Scalar>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distinct_count: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_value: Option<Number>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_value: Option<Number>,
}

impl ColumnKnowledge {
    pub fn named(name: impl Into<String>) -> Self {
        Self {
            column_name: name.into(),
            description: None,
            values: None,
            distinct_count: None,
            min_value: None,
            max_value: None,
        }
    }

    /// A column entry that states nothing beyond its name.
    pub fn is_name_only(&self) -> bool {
        self.description.is_none()
            && self.values.is_none()
            && self.distinct_count.is_none()
            && self.min_value.is_none()
            && self.max_value.is_none()
    }

    /// Overlay `other`'s fields on top of `self`; the longer name survives.
    fn absorb(&mut self, other: ColumnKnowledge) {
        self.column_name = terms::longer_surface(&self.column_name, &other.column_name).to_owned();
        if other.description.is_some() {
            self.description = other.description;
        }
        if other.values.is_some() {
            self.values = other.values;
        }
        if other.distinct_count.is_some() {
            self.distinct_count = other.distinct_count;
        }
        if other.min_value.is_some() {
            self.min_value = other.min_value;
        }
        if other.max_value.is_some() {
            self.max_value = other.max_value;
        }
    }
}

/// The knowledge grounded between seeker and provider about one table.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct GroundedKnowledge {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table_domain: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table_content: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub row_count: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column_count: Option<u64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub column_info: Vec<ColumnKnowledge>,
}

impl<'de> Deserialize<'de> for GroundedKnowledge {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = serde_json::Value::deserialize(d)?;
        canonicalize(&raw).map_err(serde::de::Error::custom)
    }
}

impl GroundedKnowledge {
    pub fn is_empty(&self) -> bool {
        self.table_domain.is_none()
            && self.table_content.is_none()
            && self.row_count.is_none()
            && self.column_count.is_none()
            && self.column_info.is_empty()
    }

    /// First column whose name is equivalent to `name`, preferring an exact
    /// token-set match over a subset match.
    pub fn find_column(&self, name: &str) -> Option<usize> {
        let tokens = normalize_term(name);
        self.column_info
            .iter()
            .position(|c| normalize_term(&c.column_name) == tokens)
            .or_else(|| {
                self.column_info
                    .iter()
                    .position(|c| terms_equivalent(&c.column_name, name))
            })
    }

    pub fn column(&self, name: &str) -> Option<&ColumnKnowledge> {
        self.find_column(name).map(|i| &self.column_info[i])
    }

    pub fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("knowledge always serializes")
    }

    /// Compact JSON in the extraction schema's shape.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("knowledge always serializes")
    }

    /// Bring the value into canonical form: trimmed text, no blank strings,
    /// equivalent columns folded together, columns ordered by name.
    pub fn into_canonical(mut self) -> Result<Self, SchemaError> {
        self.table_domain = clean_text(self.table_domain);
        self.table_content = clean_text(self.table_content);

        let mut columns: Vec<ColumnKnowledge> = Vec::with_capacity(self.column_info.len());
        for mut col in std::mem::take(&mut self.column_info) {
            col.column_name = col.column_name.trim().to_owned();
            if col.column_name.is_empty() {
                return Err(SchemaError::Invalid("empty column_name".into()));
            }
            col.description = clean_text(col.description);
            col.values = col.values.filter(|v| !v.is_empty()).map(|vals| {
                vals.into_iter()
                    .map(|s| match s {
                        Scalar::Number(n) => Scalar::Number(n.normalized()),
                        other => other,
                    })
                    .collect()
            });
            col.min_value = col.min_value.map(Number::normalized);
            col.max_value = col.max_value.map(Number::normalized);
            columns.push(col);
        }
        // Fold equivalent names until none remain; a rename can expose a new pair.
        'fold: loop {
            for i in 0..columns.len() {
                for j in (i + 1)..columns.len() {
                    if terms_equivalent(&columns[i].column_name, &columns[j].column_name) {
                        let later = columns.remove(j);
                        columns[i].absorb(later);
                        continue 'fold;
                    }
                }
            }
            break;
        }
        columns.sort_by(|a, b| {
            a.column_name
                .to_lowercase()
                .cmp(&b.column_name.to_lowercase())
                .then_with(|| a.column_name.cmp(&b.column_name))
        });
        self.column_info = columns;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<(), SchemaError> {
        for col in &self.column_info {
            if let (Some(lo), Some(hi)) = (col.min_value, col.max_value) {
                if lo > hi {
                    return Err(SchemaError::Invalid(format!(
                        "column '{}': min_value {lo} exceeds max_value {hi}",
                        col.column_name
                    )));
                }
            }
            if let (Some(d), Some(rows)) = (col.distinct_count, self.row_count) {
                if d > rows {
                    return Err(SchemaError::Invalid(format!(
                        "column '{}': distinct_count {d} exceeds row_count {rows}",
                        col.column_name
                    )));
                }
            }
        }
        Ok(())
    }

    /// Concatenate `other` onto `self` without judging equivalence; scalars
    /// from `other` win. Used to union parts of one extraction.
    pub(crate) fn overlay(&mut self, other: GroundedKnowledge) {
        if other.table_domain.is_some() {
            self.table_domain = other.table_domain;
        }
        if other.table_content.is_some() {
            self.table_content = other.table_content;
        }
        if other.row_count.is_some() {
            self.row_count = other.row_count;
        }
        if other.column_count.is_some() {
            self.column_count = other.column_count;
        }
        self.column_info.extend(other.column_info);
    }

    /// Union of two canonical values, `other` winning on overlap.
    pub fn union(&self, other: &GroundedKnowledge) -> Result<GroundedKnowledge, SchemaError> {
        let mut out = self.clone();
        out.overlay(other.clone());
        out.into_canonical()
    }
}

fn clean_text(s: Option<String>) -> Option<String> {
    s.map(|t| t.trim().to_owned()).filter(|t| !t.is_empty())
}
