use serde_json::{Map, Value};

use super::{ColumnKnowledge, GroundedKnowledge, Number, Scalar, SchemaError};

const COLUMN_FIELDS: &[&str] = &[
    "description",
    "values",
    "distinct_count",
    "min_value",
    "max_value",
];

/// Turn a parsed key/value tree into canonical [`GroundedKnowledge`].
///
/// Accepts the extraction schema (`column_info`) and the two annotation
/// shorthands: `column_names: [..]` expands to name-only columns, and a
/// top-level `column_name` gathers the top-level column fields into one
/// entry. A top-level array is the union of its elements. Null fields are
/// dropped and numeric strings are coerced.
pub fn canonicalize(raw: &Value) -> Result<GroundedKnowledge, SchemaError> {
    let mut out = GroundedKnowledge::default();
    collect(raw, &mut out)?;
    out.into_canonical()
}

fn collect(raw: &Value, out: &mut GroundedKnowledge) -> Result<(), SchemaError> {
    match raw {
        Value::Null => Ok(()),
        Value::Array(items) => items.iter().try_for_each(|item| collect(item, out)),
        Value::Object(map) => {
            out.overlay(from_object(map)?);
            Ok(())
        }
        other => Err(SchemaError::Coercion {
            field: "<root>".into(),
            message: format!("expected an object, found {}", kind(other)),
        }),
    }
}

fn from_object(map: &Map<String, Value>) -> Result<GroundedKnowledge, SchemaError> {
    let mut gk = GroundedKnowledge::default();
    let mut loose_column: Option<Map<String, Value>> = None;

    for (key, value) in map {
        if value.is_null() {
            continue;
        }
        match key.as_str() {
            "table_domain" => gk.table_domain = Some(text(key, value)?),
            "table_content" => gk.table_content = Some(text(key, value)?),
            "row_count" => gk.row_count = Some(count(key, value)?),
            "column_count" => gk.column_count = Some(count(key, value)?),
            "column_info" => match value {
                Value::Array(cols) => {
                    for col in cols.iter().filter(|c| !c.is_null()) {
                        gk.column_info.push(column(col)?);
                    }
                }
                Value::Object(_) => gk.column_info.push(column(value)?),
                other => {
                    return Err(SchemaError::Coercion {
                        field: key.clone(),
                        message: format!("expected a list of columns, found {}", kind(other)),
                    })
                }
            },
            "column_names" => {
                let names: Vec<Value> = match value {
                    Value::Array(items) => items.clone(),
                    Value::String(_) => vec![value.clone()],
                    other => {
                        return Err(SchemaError::Coercion {
                            field: key.clone(),
                            message: format!("expected a list of names, found {}", kind(other)),
                        })
                    }
                };
                for name in names.iter().filter(|n| !n.is_null()) {
                    gk.column_info
                        .push(ColumnKnowledge::named(text("column_names", name)?));
                }
            }
            "column_name" => {
                loose_column
                    .get_or_insert_with(Map::new)
                    .insert(key.clone(), value.clone());
            }
            k if COLUMN_FIELDS.contains(&k) => {
                loose_column
                    .get_or_insert_with(Map::new)
                    .insert(key.clone(), value.clone());
            }
            _ => return Err(SchemaError::UnknownKey(key.clone())),
        }
    }

    if let Some(fields) = loose_column {
        if !fields.contains_key("column_name") {
            let stray = fields.keys().next().cloned().unwrap_or_default();
            return Err(SchemaError::Invalid(format!(
                "top-level '{stray}' requires a 'column_name'"
            )));
        }
        gk.column_info.push(column(&Value::Object(fields))?);
    }
    Ok(gk)
}

fn column(raw: &Value) -> Result<ColumnKnowledge, SchemaError> {
    let Value::Object(map) = raw else {
        return Err(SchemaError::Coercion {
            field: "column_info".into(),
            message: format!("expected a column object, found {}", kind(raw)),
        });
    };
    let name = match map.get("column_name") {
        Some(v) if !v.is_null() => text("column_name", v)?,
        _ => return Err(SchemaError::Invalid("column entry without 'column_name'".into())),
    };
    let mut col = ColumnKnowledge::named(name);
    for (key, value) in map {
        if value.is_null() {
            continue;
        }
        match key.as_str() {
            "column_name" => {}
            "description" => col.description = Some(text(key, value)?),
            "values" => col.values = Some(scalars(key, value)?),
            "distinct_count" => col.distinct_count = Some(count(key, value)?),
            "min_value" => col.min_value = Some(number(key, value)?),
            "max_value" => col.max_value = Some(number(key, value)?),
            _ => return Err(SchemaError::UnknownKey(key.clone())),
        }
    }
    Ok(col)
}

fn text(field: &str, v: &Value) -> Result<String, SchemaError> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        other => Err(SchemaError::Coercion {
            field: field.into(),
            message: format!("expected text, found {}", kind(other)),
        }),
    }
}

fn count(field: &str, v: &Value) -> Result<u64, SchemaError> {
    let bad = |message: String| SchemaError::Coercion {
        field: field.into(),
        message,
    };
    match number(field, v)? {
        Number::Int(i) if i >= 0 => Ok(i as u64),
        Number::Int(i) => Err(bad(format!("negative count {i}"))),
        Number::Float(f) if f >= 0.0 && f.fract() == 0.0 => Ok(f as u64),
        Number::Float(f) => Err(bad(format!("{f} is not a non-negative integer"))),
    }
}

fn number(field: &str, v: &Value) -> Result<Number, SchemaError> {
    let bad = |message: String| SchemaError::Coercion {
        field: field.into(),
        message,
    };
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(Number::Int(i))
            } else if let Some(f) = n.as_f64() {
                Ok(Number::Float(f).normalized())
            } else {
                Err(bad(format!("{n} out of range")))
            }
        }
        Value::String(s) => {
            let t = s.trim();
            if let Ok(i) = t.parse::<i64>() {
                Ok(Number::Int(i))
            } else {
                match t.parse::<f64>() {
                    Ok(f) if f.is_finite() => Ok(Number::Float(f).normalized()),
                    _ => Err(bad(format!("'{s}' is not numeric"))),
                }
            }
        }
        other => Err(bad(format!("expected a number, found {}", kind(other)))),
    }
}

fn scalars(field: &str, v: &Value) -> Result<Vec<Scalar>, SchemaError> {
    let Value::Array(items) = v else {
        return Err(SchemaError::Coercion {
            field: field.into(),
            message: format!("expected a list, found {}", kind(v)),
        });
    };
    items
        .iter()
        .filter(|x| !x.is_null())
        .map(|x| match x {
            Value::String(s) => Ok(Scalar::Text(s.clone())),
            Value::Bool(b) => Ok(Scalar::Bool(*b)),
            Value::Number(_) => number(field, x).map(Scalar::Number),
            other => Err(SchemaError::Coercion {
                field: field.into(),
                message: format!("list elements must be scalars, found {}", kind(other)),
            }),
        })
        .collect()
}

fn kind(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "a boolean",
        Value::Number(_) => "a number",
        Value::String(_) => "text",
        Value::Array(_) => "a list",
        Value::Object(_) => "an object",
    }
}
