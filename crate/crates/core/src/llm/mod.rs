//! Language-model access: prompt construction, a chat-completions client
//! with a record/replay cache, output parsers and a rule-based baseline.

mod annotator;
mod baseline;
mod client;
mod parse;
pub mod prompts;

use serde::{Deserialize, Serialize, Serializer};

pub use annotator::{Annotator, DialogueAnnotation};
pub use baseline::rule_based_label;
pub use client::{request_hash, CacheMode, ChatClient, ClientConfig, LlmError, ResponseCache};
pub use parse::{parse_knowledge_json, parse_label, ParseError};
pub use prompts::{
    build_classification_prompt, build_extraction_prompt, build_incremental_extraction_prompt,
};

pub const DEFAULT_MODEL: &str = "gpt-3.5-turbo-1106";
pub const DEFAULT_MAX_TOKENS: u32 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChatRole {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: ChatRole,
    pub content: String,
}

impl ChatMessage {
    pub fn new(role: ChatRole, content: impl Into<String>) -> Self {
        Self {
            role,
            content: content.into(),
        }
    }
}

/// Request body for an OpenAI-compatible chat-completions endpoint.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompletionRequest {
    #[serde(rename = "model")]
    pub model_name: String,
    pub messages: Vec<ChatMessage>,
    #[serde(serialize_with = "integral_as_int")]
    pub temperature: f64,
    pub max_tokens: u32,
}

impl CompletionRequest {
    /// Deterministic decoding with a 256 token limit.
    pub fn new(model_name: impl Into<String>, messages: Vec<ChatMessage>) -> Self {
        Self {
            model_name: model_name.into(),
            messages,
            temperature: 0.0,
            max_tokens: DEFAULT_MAX_TOKENS,
        }
    }
}

fn integral_as_int<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        s.serialize_i64(*v as i64)
    } else {
        s.serialize_f64(*v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompletionResult {
    pub text: String,
    pub cached: bool,
}
