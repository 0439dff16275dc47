//! Chat-completion decomposer with record/replay fixtures.
//!
//! Each request body is hashed (SHA-256 of its JSON text, keys sorted) and
//! the exchange is stored as `<fixtures_dir>/<hash>.json`:
//!
//! ```json
//! {"request": {...}, "response": {"choices": [{"message": {"content": "..."}}]}}
//! ```

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value as Json};
use sha2::{Digest, Sha256};

use super::prompt::build_prompt;
use super::{extract_code_block, DecomposeError, Decomposer};
use crate::executor::feedback::FeedbackTurn;
use crate::http::{Transport, TransportError};
use crate::io::write_atomic;
use crate::registry::Registry;
use crate::task::TaskView;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LlmMode {
    /// Answer only from fixtures; never touches the network.
    #[default]
    Replay,
    /// Call the endpoint and store every exchange as a fixture.
    Record,
    Live,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LlmConfig {
    pub mode: LlmMode,
    pub base_url: String,
    pub model: String,
    pub api_key_env: String,
    pub fixtures_dir: PathBuf,
    pub max_attempts: u32,
    pub backoff_ms: u64,
}

impl Default for LlmConfig {
    fn default() -> Self {
        Self {
            mode: LlmMode::Replay,
            base_url: "https://api.openai.com/v1/chat/completions".into(),
            model: "gpt-4o".into(),
            api_key_env: "TS_REASONER_API_KEY".into(),
            fixtures_dir: PathBuf::from("fixtures"),
            max_attempts: 3,
            backoff_ms: 500,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Fixture {
    request: Json,
    response: Json,
}

pub fn fixture_key(request: &Json) -> String {
    hex::encode(Sha256::digest(request.to_string().as_bytes()))
}

pub fn fixture_path(dir: &Path, request: &Json) -> PathBuf {
    dir.join(format!("{}.json", fixture_key(request)))
}

/// Store a canned completion whose message content is `content`.
pub fn save_fixture(dir: &Path, request: &Json, content: &str) -> std::io::Result<PathBuf> {
    let response = json!({"choices": [{"index": 0, "message": {"role": "assistant", "content": content}}]});
    store(dir, request, &response)
}

fn store(dir: &Path, request: &Json, response: &Json) -> std::io::Result<PathBuf> {
    let path = fixture_path(dir, request);
    let fx = Fixture {
        request: request.clone(),
        response: response.clone(),
    };
    let text = serde_json::to_string_pretty(&fx).expect("fixture serializes");
    write_atomic(&path, text.as_bytes()).map_err(std::io::Error::other)?;
    Ok(path)
}

fn content_of(response: &Json) -> Result<String, DecomposeError> {
    response
        .pointer("/choices/0/message/content")
        .and_then(Json::as_str)
        .map(str::to_string)
        .ok_or_else(|| DecomposeError::BadResponse("missing choices[0].message.content".into()))
}

pub struct LlmDecomposer {
    pub config: LlmConfig,
    transport: Arc<dyn Transport>,
}

impl LlmDecomposer {
    pub fn new(config: LlmConfig, transport: Arc<dyn Transport>) -> Self {
        Self { config, transport }
    }

    pub fn request(&self, task: &TaskView, history: &[FeedbackTurn]) -> Json {
        let bundle = build_prompt(task, history, Registry::standard());
        json!({
            "model": self.config.model,
            "messages": bundle.messages(),
            "temperature": 0.0,
            "top_p": 1.0,
        })
    }

    fn call(&self, request: &Json) -> Result<Json, DecomposeError> {
        let key = std::env::var(&self.config.api_key_env)
            .ok()
            .filter(|k| !k.is_empty())
            .ok_or_else(|| DecomposeError::AuthMissing(self.config.api_key_env.clone()))?;
        let headers = [("Authorization".to_string(), format!("Bearer {key}"))];
        let body = request.to_string();
        let mut last = String::new();
        for attempt in 0..self.config.max_attempts.max(1) {
            if attempt > 0 {
                std::thread::sleep(Duration::from_millis(self.config.backoff_ms << (attempt - 1)));
            }
            match self.transport.post_json(&self.config.base_url, &headers, &body) {
                Ok(r) if r.status == 429 || r.status >= 500 => last = format!("HTTP {}: {}", r.status, r.body),
                Ok(r) if r.status >= 400 => {
                    return Err(DecomposeError::BadResponse(format!("HTTP {}: {}", r.status, r.body)))
                }
                Ok(r) => {
                    return serde_json::from_str(&r.body).map_err(|e| DecomposeError::BadResponse(e.to_string()))
                }
                Err(TransportError::Disabled) => {
                    return Err(DecomposeError::EndpointUnreachable(TransportError::Disabled.to_string()))
                }
                Err(e) => last = e.to_string(),
            }
        }
        Err(DecomposeError::EndpointUnreachable(last))
    }

    /// Completion text for a request, from the fixture store or the endpoint.
    pub fn complete(&self, request: &Json) -> Result<String, DecomposeError> {
        let path = fixture_path(&self.config.fixtures_dir, request);
        match self.config.mode {
            LlmMode::Replay => {
                let text = fs::read_to_string(&path).map_err(|_| DecomposeError::FixtureMissing {
                    key: fixture_key(request),
                })?;
                let fx: Fixture = serde_json::from_str(&text).map_err(|e| DecomposeError::BadResponse(e.to_string()))?;
                content_of(&fx.response)
            }
            LlmMode::Record => {
                let response = self.call(request)?;
                store(&self.config.fixtures_dir, request, &response)
                    .map_err(|e| DecomposeError::BadResponse(format!("cannot write fixture: {e}")))?;
                content_of(&response)
            }
            LlmMode::Live => content_of(&self.call(request)?),
        }
    }
}

impl Decomposer for LlmDecomposer {
    fn name(&self) -> &str {
        "llm"
    }

    fn propose(&self, task: &TaskView, history: &[FeedbackTurn]) -> Result<String, DecomposeError> {
        let completion = self.complete(&self.request(task, history))?;
        extract_code_block(&completion).ok_or(DecomposeError::NoCodeBlockInResponse)
    }
}

/// Writes replay fixtures whose completions come from another decomposer,
/// wrapped in a fenced block. Lets a replay run be set up without an endpoint.
pub struct FixtureRecorder<D> {
    pub llm: LlmDecomposer,
    pub inner: D,
}

impl<D: Decomposer> Decomposer for FixtureRecorder<D> {
    fn name(&self) -> &str {
        "llm"
    }

    fn propose(&self, task: &TaskView, history: &[FeedbackTurn]) -> Result<String, DecomposeError> {
        let plan = self.inner.propose(task, history)?;
        let request = self.llm.request(task, history);
        save_fixture(&self.llm.config.fixtures_dir, &request, &format!("```python\n{plan}```\n"))
            .map_err(|e| DecomposeError::BadResponse(format!("cannot write fixture: {e}")))?;
        Ok(plan)
    }
}
