#![allow(dead_code)]

use std::path::PathBuf;

use grounding::dialogue::{load_dialogues, load_gold, load_predictions, AnnotationMap, Dialogue};

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(rel)
}

pub fn corpus() -> Vec<Dialogue> {
    load_dialogues(fixture("sample/corpus.jsonl")).expect("corpus fixture loads")
}

pub fn gold(corpus: &[Dialogue]) -> AnnotationMap {
    load_gold(fixture("sample/gold.jsonl"), corpus).expect("gold fixture loads")
}

pub fn predictions(corpus: &[Dialogue]) -> AnnotationMap {
    load_predictions(fixture("sample/predictions.jsonl"), corpus).expect("prediction fixture loads")
}

/// Raw model outputs for the annotated turns, as printed in the results
/// table (single-quoted, Python style).
pub const MODEL_OUTPUTS: &[(&str, usize, &str, &str)] = &[
    ("A", 2, "clarification", "{'table_content': 'media dataset'}"),
    ("A", 4, "implicit", "{'table_domain': 'time travel works of fiction'}"),
    ("A", 6, "explicit", "{'row_count': 500}"),
    ("A", 8, "implicit", "{'column_names': ['year', 'title', 'author', 'short text description', 'type of work']}"),
    ("A", 11, "explicit", "{'column_names': ['year', 'title', 'author', 'short text description', 'category']}"),
    ("A", 17, "explicit", "{'column_name': 'author', 'distinct_count': 417}"),
    ("B", 2, "clarification", "{'table_domain': 'Geography'}"),
    ("B", 5, "explicit", "{'table_content': 'information about 98 nature parks in Germany', 'column_names': ['name of park', 'year', 'area']}"),
    ("B", 7, "explicit", "{'column_names': ['park name', 'German state', 'year of establishment', 'area in km2', 'short text summary']}"),
    ("B", 10, "explicit", "{'row_count': 98}"),
    ("B", 14, "explicit", "{'column_name': 'year of establishment', 'min_value': 1921, 'max_value': 2007}, {'column_name': 'area in km2', 'min_value': 48, 'max_value': 3940}"),
];
pub mod props;
pub mod guard;
