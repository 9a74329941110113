//! Scoring of predicted labels and knowledge against gold annotations.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dialogue::{Annotation, AnnotationMap, GroundingLabel};
use crate::knowledge::knowledge_equivalent;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("no prediction for dialogue '{dialogue}' turn {turn}")]
    Coverage { dialogue: String, turn: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KnowledgeVerdict {
    Equivalent,
    NotEquivalent,
    NoGold,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TurnScore {
    pub dialogue_id: String,
    pub turn_index: usize,
    pub gold_label: GroundingLabel,
    pub predicted_label: GroundingLabel,
    pub label_correct: bool,
    pub knowledge_verdict: KnowledgeVerdict,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub correct: u32,
    pub total: u32,
}

impl Tally {
    fn add(&mut self, ok: bool) {
        self.total += 1;
        self.correct += u32::from(ok);
    }

    fn merge(&mut self, other: Tally) {
        self.correct += other.correct;
        self.total += other.total;
    }
}

impl std::fmt::Display for Tally {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.correct, self.total)
    }
}

/// Rows are gold labels and columns predicted labels, both in
/// explicit, implicit, clarification order.
pub type Confusion = [[u32; 3]; 3];

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalReport {
    pub per_turn: Vec<TurnScore>,
    pub confusion: Confusion,
    pub per_label_accuracy: BTreeMap<GroundingLabel, Tally>,
    pub knowledge_accuracy: Tally,
}

fn slot(label: GroundingLabel) -> Option<usize> {
    GroundingLabel::ANNOTATED.iter().position(|l| *l == label)
}

impl EvalReport {
    pub fn label_accuracy(&self) -> Tally {
        let mut t = Tally::default();
        for v in self.per_label_accuracy.values() {
            t.merge(*v);
        }
        t
    }

    pub fn label_tally(&self, label: GroundingLabel) -> Tally {
        self.per_label_accuracy.get(&label).copied().unwrap_or_default()
    }

    /// Combine reports of disjoint dialogue sets.
    pub fn merge(mut self, other: EvalReport) -> EvalReport {
        self.per_turn.extend(other.per_turn);
        self.per_turn
            .sort_by(|a, b| (&a.dialogue_id, a.turn_index).cmp(&(&b.dialogue_id, b.turn_index)));
        for (r, row) in other.confusion.iter().enumerate() {
            for (c, n) in row.iter().enumerate() {
                self.confusion[r][c] += n;
            }
        }
        for (label, t) in other.per_label_accuracy {
            self.per_label_accuracy.entry(label).or_default().merge(t);
        }
        self.knowledge_accuracy.merge(other.knowledge_accuracy);
        self
    }

    /// `explicit 5/6, implicit 1/3, clarification 0/2, knowledge 8/11`
    pub fn summary(&self) -> String {
        let mut parts: Vec<String> = GroundingLabel::ANNOTATED
            .iter()
            .map(|l| format!("{l} {}", self.label_tally(*l)))
            .collect();
        parts.push(format!("knowledge {}", self.knowledge_accuracy));
        parts.join(", ")
    }
}

/// Score every gold-annotated turn. Iteration follows the gold map, so the
/// order of `predictions` does not matter.
pub fn score(gold: &AnnotationMap, predictions: &AnnotationMap) -> Result<EvalReport, EvalError> {
    let mut report = EvalReport::default();
    for label in GroundingLabel::ANNOTATED {
        report.per_label_accuracy.insert(label, Tally::default());
    }
    for (dialogue, annotations) in gold {
        let predicted = predictions.get(dialogue).map(Vec::as_slice).unwrap_or(&[]);
        for g in annotations {
            let p = find(predicted, g.turn_index)
                .filter(|p| slot(p.label).is_some())
                .ok_or_else(|| EvalError::Coverage {
                    dialogue: dialogue.clone(),
                    turn: g.turn_index,
                })?;
            let row = slot(g.label).expect("gold labels are never NoEvent");
            let col = slot(p.label).expect("filtered above");
            report.confusion[row][col] += 1;
            let correct = g.label == p.label;
            report.per_label_accuracy.entry(g.label).or_default().add(correct);
            let verdict = match (&g.knowledge, &p.knowledge) {
                (None, _) => KnowledgeVerdict::NoGold,
                (Some(gk), Some(pk)) if knowledge_equivalent(pk, gk) => KnowledgeVerdict::Equivalent,
                (Some(_), _) => KnowledgeVerdict::NotEquivalent,
            };
            if verdict != KnowledgeVerdict::NoGold {
                report
                    .knowledge_accuracy
                    .add(verdict == KnowledgeVerdict::Equivalent);
            }
            report.per_turn.push(TurnScore {
                dialogue_id: dialogue.clone(),
                turn_index: g.turn_index,
                gold_label: g.label,
                predicted_label: p.label,
                label_correct: correct,
                knowledge_verdict: verdict,
            });
        }
    }
    Ok(report)
}

fn find(list: &[Annotation], turn: usize) -> Option<&Annotation> {
    list.iter().find(|a| a.turn_index == turn)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Markdown,
    Machine,
}

pub fn render_report(r: &EvalReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Machine => serde_json::to_string(r).expect("reports serialize"),
        ReportFormat::Markdown => markdown(r),
    }
}

fn markdown(r: &EvalReport) -> String {
    let mut out = String::new();
    out.push_str("| Dialogue | Turn | Label (pred vs gold) | Knowledge |\n");
    out.push_str("|---|---|---|---|\n");
    if r.per_turn.is_empty() {
        return out;
    }
    for t in &r.per_turn {
        let rel = if t.label_correct { "=" } else { "≠" };
        let knowledge = match t.knowledge_verdict {
            KnowledgeVerdict::Equivalent => "=",
            KnowledgeVerdict::NotEquivalent => "≠",
            KnowledgeVerdict::NoGold => "n/a",
        };
        let _ = writeln!(
            out,
            "| {} | {} | {} {rel} {} | {knowledge} |",
            t.dialogue_id,
            t.turn_index,
            t.predicted_label.short(),
            t.gold_label.short()
        );
    }
    out.push_str("\n| Gold \\ Predicted | E | I | C |\n|---|---|---|---|\n");
    for (label, row) in GroundingLabel::ANNOTATED.iter().zip(&r.confusion) {
        let _ = writeln!(out, "| {} | {} | {} | {} |", label.short(), row[0], row[1], row[2]);
    }
    out.push('\n');
    for label in GroundingLabel::ANNOTATED {
        let _ = writeln!(out, "- {label}: {}", r.label_tally(label));
    }
    let _ = writeln!(out, "- overall labels: {}", r.label_accuracy());
    let _ = writeln!(out, "- knowledge: {}", r.knowledge_accuracy);
    out
}
