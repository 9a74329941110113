use std::sync::OnceLock;

use regex::Regex;
use serde_json::Value;
use thiserror::Error;

use crate::dialogue::GroundingLabel;
use crate::knowledge::{canonicalize, GroundedKnowledge, SchemaError};

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("no grounding label in model output {0:?}")]
    NoLabel(String),
    #[error("invalid JSON at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error(transparent)]
    Schema(#[from] SchemaError),
}

fn label_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)\b(explicit|implicit|clarification)\b").expect("valid regex"))
}

/// First whole-word grounding label in `raw`, ignoring case.
pub fn parse_label(raw: &str) -> Result<GroundingLabel, ParseError> {
    label_pattern()
        .find(raw)
        .and_then(|m| m.as_str().parse().ok())
        .ok_or_else(|| ParseError::NoLabel(raw.to_owned()))
}

/// Parse the knowledge object a model produced. Tolerates an `Output JSON:`
/// prefix, markdown fences, Python-style quoting and literals, and several
/// top-level objects separated by commas.
pub fn parse_knowledge_json(raw: &str) -> Result<GroundedKnowledge, ParseError> {
    let body = strip_wrapping(raw);
    if body.is_empty() {
        return Ok(GroundedKnowledge::default());
    }
    let json = normalize_quotes(body);
    let value = read_value(&json)?;
    Ok(canonicalize(&value)?)
}

fn strip_wrapping(raw: &str) -> &str {
    let mut s = raw.trim();
    if let Some(rest) = s.strip_prefix("```") {
        // drop the info string (```json) up to the first newline
        s = rest.split_once('\n').map_or("", |(_, body)| body);
        s = s.trim_end().trim_end_matches("```").trim();
    }
    const PREFIX: &str = "output json:";
    if s.len() >= PREFIX.len() && s.is_char_boundary(PREFIX.len()) && s[..PREFIX.len()].eq_ignore_ascii_case(PREFIX) {
        s = s[PREFIX.len()..].trim();
    }
    if let Some(rest) = s.strip_prefix("```") {
        s = rest.split_once('\n').map_or("", |(_, body)| body);
        s = s.trim_end().trim_end_matches("```").trim();
    }
    s
}

fn read_value(json: &str) -> Result<Value, ParseError> {
    let first_err = match serde_json::from_str::<Value>(json) {
        Ok(v) => return Ok(v),
        Err(e) => e,
    };
    if let Ok(v) = serde_json::from_str::<Value>(&format!("[{json}]")) {
        return Ok(v);
    }
    let mut stream = serde_json::Deserializer::from_str(json).into_iter::<Value>();
    if let Some(Ok(v)) = stream.next() {
        log::debug!("ignoring trailing text after offset {}", stream.byte_offset());
        return Ok(v);
    }
    Err(ParseError::Syntax {
        offset: offset_of(json, first_err.line(), first_err.column()),
        message: first_err.to_string(),
    })
}

fn offset_of(text: &str, line: usize, column: usize) -> usize {
    let before: usize = text.split_inclusive('\n').take(line.saturating_sub(1)).map(str::len).sum();
    before + column.saturating_sub(1)
}

/// Rewrite single-quoted strings as JSON strings and Python literals as JSON
/// literals. Double-quoted strings pass through untouched. Inside a
/// single-quoted string an apostrophe only closes it when followed by a
/// structural character, so `'the dataset's content'` survives.
fn normalize_quotes(src: &str) -> String {
    let chars: Vec<char> = src.chars().collect();
    let mut out = String::with_capacity(src.len() + 8);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            '"' => {
                out.push('"');
                i += 1;
                while i < chars.len() {
                    let d = chars[i];
                    out.push(d);
                    i += 1;
                    if d == '\\' && i < chars.len() {
                        out.push(chars[i]);
                        i += 1;
                    } else if d == '"' {
                        break;
                    }
                }
            }
            '\'' => {
                out.push('"');
                i += 1;
                while i < chars.len() {
                    let d = chars[i];
                    i += 1;
                    match d {
                        '\\' if i < chars.len() => {
                            let n = chars[i];
                            i += 1;
                            if n == '\'' {
                                out.push('\'');
                            } else {
                                out.push('\\');
                                out.push(n);
                            }
                        }
                        '\'' if closes(&chars[i..]) => break,
                        '"' => out.push_str("\\\""),
                        _ => out.push(d),
                    }
                }
                out.push('"');
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                out.push_str(match word.as_str() {
                    "None" => "null",
                    "True" => "true",
                    "False" => "false",
                    other => other,
                });
            }
            _ => {
                out.push(c);
                i += 1;
            }
        }
    }
    out
}

fn closes(rest: &[char]) -> bool {
    match rest.iter().find(|c| !c.is_whitespace()) {
        None => true,
        Some(c) => matches!(c, ',' | '}' | ']' | ':'),
    }
}
