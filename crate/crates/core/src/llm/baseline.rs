//! Deterministic keyword baseline for grounding-label classification.

use std::collections::BTreeSet;

use crate::dialogue::{GroundingLabel, Turn};
use crate::knowledge::normalize_term;

const ACKNOWLEDGMENTS: &[&str] = &[
    "ok", "okay", "thanks", "thank you", "great", "fine", "got it", "good to know", "sure",
];

/// Phrases that ask the partner to restate or repair something.
const CLARIFICATION_CUES: &[&str] = &[
    "is there no",
    "isn't there",
    "right?",
    "you mean",
    "understood correctly",
    "how then",
    "what does",
    "what do you mean",
    "does it mean",
    "which one",
    "but what",
];

/// Words every question about a table shares; overlap on these says nothing.
const GENERIC: &[&str] = &[
    "dataset", "datasets", "table", "column", "columns", "row", "rows", "attribute", "attributes",
    "is", "are", "was", "were", "be", "there", "no", "not", "what", "how", "many", "much", "can",
    "could", "would", "i", "you", "me", "my", "your", "it", "its", "this", "that", "these", "then",
    "if", "or", "to", "do", "does", "did", "we", "tell", "know", "want", "wanna", "please", "any",
    "so", "which", "with", "by", "at", "from", "as", "has", "have", "some", "all", "one", "yes",
    "hi", "hello", "also", "other", "there's", "s",
];

fn words(text: &str) -> String {
    let cleaned: String = text
        .to_lowercase()
        .chars()
        .map(|c| if c.is_alphanumeric() || c == '\'' || c == '?' { c } else { ' ' })
        .collect();
    format!(" {} ", cleaned.split_whitespace().collect::<Vec<_>>().join(" "))
}

fn has_phrase(haystack: &str, phrase: &str) -> bool {
    haystack.contains(&format!(" {phrase} "))
        || haystack.contains(&format!(" {phrase}?"))
        || (phrase.ends_with('?') && haystack.contains(&format!(" {phrase}")))
}

fn content_tokens(text: &str) -> BTreeSet<String> {
    normalize_term(text)
        .into_iter()
        .filter(|t| !GENERIC.contains(&t.as_str()))
        .collect()
}

/// Label the last turn of `history` from surface cues alone.
pub fn rule_based_label(history: &[Turn]) -> GroundingLabel {
    let Some((last, earlier)) = history.split_last() else {
        return GroundingLabel::Implicit;
    };
    let text = words(&last.text);
    let question = last.text.contains('?');
    if !question && ACKNOWLEDGMENTS.iter().any(|a| has_phrase(&text, a)) {
        return GroundingLabel::Explicit;
    }
    if question {
        if CLARIFICATION_CUES.iter().any(|c| has_phrase(&text, c)) {
            return GroundingLabel::Clarification;
        }
        let own = content_tokens(&last.text);
        let overlaps = earlier
            .iter()
            .rev()
            .take(2)
            .any(|t| !content_tokens(&t.text).is_disjoint(&own));
        if overlaps {
            return GroundingLabel::Clarification;
        }
    }
    GroundingLabel::Implicit
}
