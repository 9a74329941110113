//! Surface-form normalization for column names and free-text knowledge values.
//!
//! Two phrases are treated as naming the same thing when, after normalization,
//! one token set is a non-empty subset of the other: "area in km2" and "area"
//! both reduce to `{area}`, "year of establishment" contains `{year}`.

use std::collections::BTreeSet;

/// Version tag for the stopword and unit lists below. Bump when either changes.
pub const LEXICON_VERSION: u32 = 1;

/// Function words and generic filler dropped before comparison.
pub const STOPWORDS: &[&str] = &[
    "of",
    "the",
    "a",
    "an",
    "in",
    "on",
    "about",
    "for",
    "and",
    "information",
    "data",
    "short",
    "text",
];

/// Unit tokens dropped before comparison (`%` never survives punctuation stripping).
pub const UNIT_TOKENS: &[&str] = &["km2", "m2", "kg", "m", "km", "%"];

/// Reduce a phrase to its order-insensitive content token set.
pub fn normalize_term(text: &str) -> BTreeSet<String> {
    let lowered: String = text
        .chars()
        .filter(|c| !matches!(c, '\'' | '\u{2019}'))
        .flat_map(char::to_lowercase)
        .map(|c| if c.is_alphanumeric() { c } else { ' ' })
        .collect();

    lowered
        .split_whitespace()
        .filter(|t| !STOPWORDS.contains(t))
        .filter(|t| !UNIT_TOKENS.contains(t))
        .filter(|t| !t.chars().all(|c| c.is_ascii_digit()))
        .map(str::to_owned)
        .collect()
}

/// Subset-based phrase equivalence.
///
/// When both sides normalize to nothing (e.g. "the data") the lowercased,
/// whitespace-collapsed surface forms are compared instead, which keeps the
/// relation reflexive on every input.
pub fn terms_equivalent(a: &str, b: &str) -> bool {
    let ta = normalize_term(a);
    let tb = normalize_term(b);
    match (ta.is_empty(), tb.is_empty()) {
        (true, true) => collapse(a) == collapse(b),
        (false, false) => ta.is_subset(&tb) || tb.is_subset(&ta),
        _ => false,
    }
}

/// True when `incoming` names strictly more content than `existing`
/// while still being equivalent to it.
pub fn strictly_enriches(incoming: &str, existing: &str) -> bool {
    let ti = normalize_term(incoming);
    let te = normalize_term(existing);
    !te.is_empty() && te.is_subset(&ti) && ti.len() > te.len()
}

/// Pick the more informative of two equivalent surface forms. Ties keep `existing`.
pub(crate) fn longer_surface<'a>(existing: &'a str, incoming: &'a str) -> &'a str {
    let ke = (normalize_term(existing).len(), existing.chars().count());
    let ki = (normalize_term(incoming).len(), incoming.chars().count());
    if ki > ke {
        incoming
    } else {
        existing
    }
}

fn collapse(s: &str) -> String {
    s.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn strips_units_and_stopwords() {
        assert_eq!(normalize_term("area in km2"), set(&["area"]));
        assert_eq!(normalize_term(""), BTreeSet::new());
        assert_eq!(
            normalize_term("information about 98 nature parks in Germany"),
            set(&["nature", "parks", "germany"])
        );
        assert_eq!(normalize_term("short text description"), set(&["description"]));
    }

    #[test]
    fn punctuation_and_case() {
        assert_eq!(normalize_term("Geography!"), set(&["geography"]));
        assert_eq!(normalize_term("dataset's content"), set(&["datasets", "content"]));
        assert_eq!(normalize_term("park-name"), set(&["park", "name"]));
    }

    #[test]
    fn equivalence_examples() {
        assert!(terms_equivalent("Geography", "geography"));
        assert!(terms_equivalent("year of establishment", "year"));
        assert!(terms_equivalent("area in km2", "area"));
        assert!(terms_equivalent("German state", "state"));
        assert!(!terms_equivalent("category", "type of work"));
        assert!(!terms_equivalent("media dataset", ""));
    }

    #[test]
    fn empty_token_sets_fall_back_to_surface() {
        assert!(terms_equivalent("the data", "The  data"));
        assert!(!terms_equivalent("the", "a"));
        assert!(terms_equivalent("", ""));
    }

    #[test]
    fn enrichment() {
        assert!(strictly_enriches("year of establishment", "year"));
        assert!(!strictly_enriches("year", "year of establishment"));
        assert!(!strictly_enriches("Geography", "geography"));
        assert_eq!(longer_surface("year", "year of establishment"), "year of establishment");
        assert_eq!(longer_surface("geography", "Geography"), "geography");
    }
}
