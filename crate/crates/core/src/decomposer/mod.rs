//! Plan proposers: a deterministic scripted decomposer and a chat-completion
//! client that follows the prompt protocol in [`prompt`].

pub mod llm;
pub mod prompt;
mod scripted;

use thiserror::Error;

use crate::executor::feedback::FeedbackTurn;
use crate::task::TaskView;

pub use llm::{FixtureRecorder, LlmConfig, LlmDecomposer, LlmMode};
pub use scripted::{Fault, ScriptedDecomposer};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecomposeError {
    #[error("cannot build a plan for this task: {0}")]
    UnknownTaskKind(String),
    #[error("endpoint unreachable: {0}")]
    EndpointUnreachable(String),
    #[error("response contains no fenced code block")]
    NoCodeBlockInResponse,
    #[error("API key variable `{0}` is not set")]
    AuthMissing(String),
    #[error("no replay fixture for request {key}")]
    FixtureMissing { key: String },
    #[error("malformed completion: {0}")]
    BadResponse(String),
}

impl DecomposeError {
    pub fn code(&self) -> &'static str {
        match self {
            DecomposeError::UnknownTaskKind(_) => "UnknownTaskKind",
            DecomposeError::EndpointUnreachable(_) => "EndpointUnreachable",
            DecomposeError::NoCodeBlockInResponse => "NoCodeBlockInResponse",
            DecomposeError::AuthMissing(_) => "AuthMissing",
            DecomposeError::FixtureMissing { .. } => "FixtureMissing",
            DecomposeError::BadResponse(_) => "BadResponse",
        }
    }

    /// Whether the episode must stop. A reply without code can be answered
    /// with feedback; the others will not go away on retry.
    pub fn is_fatal(&self) -> bool {
        !matches!(self, DecomposeError::NoCodeBlockInResponse)
    }
}

pub trait Decomposer: Send + Sync {
    fn name(&self) -> &str;

    /// Plan text for `task` given the conversation so far.
    fn propose(&self, task: &TaskView, history: &[FeedbackTurn]) -> Result<String, DecomposeError>;
}

/// Inner text of the last fenced code block, with a single trailing newline.
pub fn extract_code_block(text: &str) -> Option<String> {
    let mut last = None;
    let mut current: Option<Vec<&str>> = None;
    for line in text.lines() {
        let fence = line.trim_start().starts_with("```");
        match (&mut current, fence) {
            (None, true) => current = Some(Vec::new()),
            (Some(_), true) => last = current.take(),
            (Some(body), false) => body.push(line),
            (None, false) => {}
        }
    }
    last.map(|body| {
        let mut s = body.join("\n");
        s.truncate(s.trim_end().len());
        s.push('\n');
        s
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn last_block_wins() {
        let text = "intro\n```python\nA = f(x=1)\n```\nmore\n```\nB = g(y=2)\n\n```\ntail";
        assert_eq!(extract_code_block(text).unwrap(), "B = g(y=2)\n");
        assert_eq!(extract_code_block("no code here"), None);
        assert_eq!(extract_code_block("```python\nA = f(x=1)"), None);
    }
}
