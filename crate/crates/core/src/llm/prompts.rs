//! Few-shot chat prompts for grounding-label classification and knowledge
//! extraction.

use crate::dialogue::Turn;
use crate::knowledge::GroundedKnowledge;

use super::{ChatMessage, ChatRole};

pub const CLASSIFICATION_SYSTEM: &str = "Predict the grounding label, representing when knowledge has been mutually grounded, for the last turn in the 'Input dialogue:'. The label can be 'explicit' if knowledge is verbally accepted, 'implicit' if accepted by moving forward with the conversation, or 'clarification' if a previous utterance must be clarified before acceptance.";

pub const CLASSIFICATION_EXAMPLES: [(&str, &str); 3] = [
    (
        "Input dialogue: seeker: Can you tell me about the dataset's content? provider: The dataset contains information about planets in our solar system. seeker: What is the number of columns in the dataset?",
        "Output label: implicit",
    ),
    (
        "Input dialogue: provider: My dataset has 191 rows and several columns. provider: There is a column for the human development index. seeker: But what does it represent and how is this index calculated?",
        "Output label: clarification",
    ),
    (
        "Input dialogue: provider: The Varso Tower is the tallest building in the EU. seeker: Okay, thanks.",
        "Output label: explicit",
    ),
];

pub const EXTRACTION_SYSTEM: &str = "Predict the newly grounded knowledge for the last turn in the 'Input dialogue:'. Use the JSON structure: {'table_domain': str, 'table_content': str, 'row_count': int, 'column_count': int, 'column_info': [{'column_name': str, 'values': [], 'distinct_count': int, 'min_value': int, 'max_value': int}]}. Adhere strictly to the JSON structure, and only predict the attributes mentioned in the dialogue turns, leaving unmentioned attributes as null.";

pub const EXTRACTION_EXAMPLES: [(&str, &str); 3] = [
    (
        "Input dialogue: seeker: Can you tell me about the dataset's content? provider: The dataset contains information about planets in our solar system. seeker: What is the number of columns in the dataset?",
        "Output JSON: {'table_content': 'planets of the solar system'}",
    ),
    (
        "Input dialogue: provider: My dataset has 191 rows and several columns. provider: There is a column for the human development index. seeker: But how is this index calculated and what does it mean?",
        "Output JSON: {'row_count': 191, 'column_info': [{'column_name': 'human development index', 'description': null}]}",
    ),
    (
        "Input dialogue: provider: One column contains data about the height of the building in meters. provider: The Varso Tower is the tallest building in the dataset with 310 m. seeker: Okay, thanks.",
        "Output JSON: {'column_info': [{'column_name': 'height', 'description': 'height in meters', 'max_value': 310}]}",
    ),
];

const LABEL_CUE: &str = "Output label: ";
const JSON_CUE: &str = "Output JSON: ";

/// `"seeker: ... provider: ..."`, one space between turns.
pub fn serialize_history(history: &[Turn]) -> String {
    history
        .iter()
        .map(|t| format!("{}: {}", t.role, t.text))
        .collect::<Vec<_>>()
        .join(" ")
}

fn few_shot(system: &str, examples: &[(&str, &str); 3], query: String) -> Vec<ChatMessage> {
    let mut messages = Vec::with_capacity(8);
    messages.push(ChatMessage::new(ChatRole::System, system));
    for (user, assistant) in examples {
        messages.push(ChatMessage::new(ChatRole::User, *user));
        messages.push(ChatMessage::new(ChatRole::Assistant, *assistant));
    }
    messages.push(ChatMessage::new(ChatRole::User, query));
    messages
}

pub fn build_classification_prompt(history: &[Turn]) -> Vec<ChatMessage> {
    let query = format!("Input dialogue: {}\n{LABEL_CUE}", serialize_history(history));
    few_shot(CLASSIFICATION_SYSTEM, &CLASSIFICATION_EXAMPLES, query)
}

pub fn build_extraction_prompt(history: &[Turn]) -> Vec<ChatMessage> {
    let query = format!("Input dialogue: {}\n{JSON_CUE}", serialize_history(history));
    few_shot(EXTRACTION_SYSTEM, &EXTRACTION_EXAMPLES, query)
}

/// Extraction prompt that puts the knowledge grounded so far in front of
/// the recent turns, so the model only has to report what is new.
pub fn build_incremental_extraction_prompt(
    grounded: &GroundedKnowledge,
    recent: &[Turn],
) -> Vec<ChatMessage> {
    let query = format!(
        "Grounded knowledge: {}\nInput dialogue: {}\n{JSON_CUE}",
        grounded.to_json(),
        serialize_history(recent)
    );
    few_shot(EXTRACTION_SYSTEM, &EXTRACTION_EXAMPLES, query)
}
