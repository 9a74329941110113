//! Dialogues, turns, grounding labels and the line-delimited corpus files.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::knowledge::{canonicalize, GroundedKnowledge};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: {message}")]
    Validation { line: usize, message: String },
    #[error("line {line}: {message}")]
    Reference { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Seeker,
    Provider,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Seeker => "seeker",
            Role::Provider => "provider",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Turn {
    pub index: usize,
    pub role: Role,
    pub text: String,
}

impl Turn {
    pub fn new(index: usize, role: Role, text: impl Into<String>) -> Self {
        Self {
            index,
            role,
            text: text.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dialogue {
    pub id: String,
    #[serde(rename = "domain")]
    pub domain_tag: String,
    pub turns: Vec<Turn>,
}

impl Dialogue {
    /// Build a dialogue, checking that turn indices run 1, 2, 3, ... and
    /// every utterance is non-empty.
    pub fn new(
        id: impl Into<String>,
        domain_tag: impl Into<String>,
        turns: Vec<Turn>,
    ) -> Result<Self, String> {
        let d = Self {
            id: id.into(),
            domain_tag: domain_tag.into(),
            turns,
        };
        d.validate()?;
        Ok(d)
    }

    fn validate(&self) -> Result<(), String> {
        if self.turns.is_empty() {
            return Err(format!("dialogue '{}' has no turns", self.id));
        }
        for (pos, turn) in self.turns.iter().enumerate() {
            let expected = pos + 1;
            if turn.index < expected {
                return Err(format!("duplicate turn index {}", turn.index));
            }
            if turn.index > expected {
                return Err(format!("gap at index {expected}"));
            }
            if turn.text.trim().is_empty() {
                return Err(format!("empty text at turn {}", turn.index));
            }
        }
        Ok(())
    }

    pub fn turn(&self, index: usize) -> Option<&Turn> {
        index
            .checked_sub(1)
            .and_then(|i| self.turns.get(i))
            .filter(|t| t.index == index)
    }

    /// All turns up to and including `index`.
    pub fn history_through(&self, index: usize) -> &[Turn] {
        &self.turns[..index.min(self.turns.len())]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroundingLabel {
    Explicit,
    Implicit,
    Clarification,
    /// A turn not selected for annotation.
    NoEvent,
}

impl GroundingLabel {
    pub const ANNOTATED: [GroundingLabel; 3] = [
        GroundingLabel::Explicit,
        GroundingLabel::Implicit,
        GroundingLabel::Clarification,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GroundingLabel::Explicit => "explicit",
            GroundingLabel::Implicit => "implicit",
            GroundingLabel::Clarification => "clarification",
            GroundingLabel::NoEvent => "none",
        }
    }

    /// One-letter abbreviation used in result tables.
    pub fn short(self) -> &'static str {
        match self {
            GroundingLabel::Explicit => "E",
            GroundingLabel::Implicit => "I",
            GroundingLabel::Clarification => "C",
            GroundingLabel::NoEvent => "-",
        }
    }

    pub fn is_commit(self) -> bool {
        matches!(self, GroundingLabel::Explicit | GroundingLabel::Implicit)
    }
}

impl fmt::Display for GroundingLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Parses one of the three annotation labels, ignoring case and surrounding space.
impl FromStr for GroundingLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_lowercase().as_str() {
            "explicit" => Ok(GroundingLabel::Explicit),
            "implicit" => Ok(GroundingLabel::Implicit),
            "clarification" => Ok(GroundingLabel::Clarification),
            _ => Err(format!("invalid grounding label '{s}'")),
        }
    }
}

impl Serialize for GroundingLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for GroundingLabel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        if s.eq_ignore_ascii_case("none") {
            return Ok(GroundingLabel::NoEvent);
        }
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A labeled turn with the knowledge grounded there. Used for both gold
/// annotations and model predictions.
#[derive(Debug, Clone, PartialEq)]
pub struct Annotation {
    pub turn_index: usize,
    pub label: GroundingLabel,
    /// `None` when the file carries no knowledge for the turn.
    pub knowledge: Option<GroundedKnowledge>,
}

pub type GoldAnnotation = Annotation;

/// Wire shape of one gold or prediction line.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub dialogue_id: String,
    pub turn_index: usize,
    #[serde(default)]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub knowledge: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl AnnotationRecord {
    pub fn from_annotation(dialogue_id: &str, a: &Annotation) -> Self {
        Self {
            dialogue_id: dialogue_id.to_owned(),
            turn_index: a.turn_index,
            label: Some(a.label.as_str().to_owned()),
            knowledge: a.knowledge.as_ref().map(GroundedKnowledge::to_value),
            error: None,
        }
    }
}

pub type AnnotationMap = BTreeMap<String, Vec<Annotation>>;

fn read(path: &Path) -> Result<String, CorpusError> {
    fs::read_to_string(path).map_err(|source| CorpusError::Io {
        path: path.to_owned(),
        source,
    })
}

fn records(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

pub fn parse_dialogues(text: &str) -> Result<Vec<Dialogue>, CorpusError> {
    let mut out = Vec::new();
    for (line, record) in records(text) {
        let d: Dialogue = serde_json::from_str(record).map_err(|e| CorpusError::Parse {
            line,
            message: e.to_string(),
        })?;
        d.validate()
            .map_err(|message| CorpusError::Validation { line, message })?;
        out.push(d);
    }
    Ok(out)
}

/// Load a line-delimited corpus, one dialogue per line, in file order.
pub fn load_dialogues(path: impl AsRef<Path>) -> Result<Vec<Dialogue>, CorpusError> {
    parse_dialogues(&read(path.as_ref())?)
}

pub fn store_dialogues(path: impl AsRef<Path>, dialogues: &[Dialogue]) -> std::io::Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    for d in dialogues {
        serde_json::to_writer(&mut w, d)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

/// Parse gold annotations. Every record must name a known dialogue and turn
/// and carry one of the three labels.
pub fn parse_gold(text: &str, dialogues: &[Dialogue]) -> Result<AnnotationMap, CorpusError> {
    parse_annotations(text, dialogues, true)
}

pub fn load_gold(path: impl AsRef<Path>, dialogues: &[Dialogue]) -> Result<AnnotationMap, CorpusError> {
    parse_gold(&read(path.as_ref())?, dialogues)
}

/// Parse model predictions. Records whose label is null (a failed
/// classification) are skipped; null knowledge is kept as `None`.
pub fn parse_predictions(text: &str, dialogues: &[Dialogue]) -> Result<AnnotationMap, CorpusError> {
    parse_annotations(text, dialogues, false)
}

pub fn load_predictions(
    path: impl AsRef<Path>,
    dialogues: &[Dialogue],
) -> Result<AnnotationMap, CorpusError> {
    parse_predictions(&read(path.as_ref())?, dialogues)
}

fn parse_annotations(
    text: &str,
    dialogues: &[Dialogue],
    strict: bool,
) -> Result<AnnotationMap, CorpusError> {
    let mut out: AnnotationMap = BTreeMap::new();
    for (line, record) in records(text) {
        let rec: AnnotationRecord = serde_json::from_str(record).map_err(|e| CorpusError::Parse {
            line,
            message: e.to_string(),
        })?;
        let dialogue = dialogues.iter().find(|d| d.id == rec.dialogue_id).ok_or_else(|| {
            CorpusError::Reference {
                line,
                message: format!("unknown dialogue id '{}'", rec.dialogue_id),
            }
        })?;
        if dialogue.turn(rec.turn_index).is_none() {
            return Err(CorpusError::Reference {
                line,
                message: format!(
                    "dialogue '{}' has no turn {}",
                    rec.dialogue_id, rec.turn_index
                ),
            });
        }
        let label = match rec.label.as_deref() {
            Some(l) => l
                .parse::<GroundingLabel>()
                .map_err(|message| CorpusError::Validation { line, message })?,
            None if strict => {
                return Err(CorpusError::Validation {
                    line,
                    message: "missing label".into(),
                })
            }
            None => continue,
        };
        let knowledge = match &rec.knowledge {
            Some(v) if !v.is_null() => Some(canonicalize(v).map_err(|e| {
                CorpusError::Validation {
                    line,
                    message: e.to_string(),
                }
            })?),
            _ => None,
        };
        let list = out.entry(rec.dialogue_id.clone()).or_default();
        if list.iter().any(|a| a.turn_index == rec.turn_index) {
            return Err(CorpusError::Validation {
                line,
                message: format!("duplicate annotation for turn {}", rec.turn_index),
            });
        }
        list.push(Annotation {
            turn_index: rec.turn_index,
            label,
            knowledge,
        });
    }
    for list in out.values_mut() {
        list.sort_by_key(|a| a.turn_index);
    }
    Ok(out)
}

pub fn store_annotations(path: impl AsRef<Path>, records: &[AnnotationRecord]) -> std::io::Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}
