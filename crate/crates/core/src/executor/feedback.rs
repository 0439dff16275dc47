//! Feedback messages sent back to a decomposer. The first line of every
//! message is machine-readable:
//!
//! ```text
//! ERROR(step=1, code=UnimplementedOp, message=...)
//! QUALITY(model=ar_ls, mape=0.2345)
//! BUFFER_SUMMARY(holt_winters=0.2100, ar_ls=0.1800)
//! ```
//!
//! followed by one line of instruction. `step=none` marks a parse error.

use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

/// One round of the conversation: what was proposed and what came back.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackTurn {
    pub proposal: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Feedback {
    Error {
        step: Option<usize>,
        code: String,
        message: String,
    },
    Quality {
        model: String,
        mape: f64,
    },
    BufferSummary(Vec<(String, f64)>),
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

impl Feedback {
    pub fn render(&self, tau: f64) -> String {
        match self {
            Feedback::Error {
                step,
                code,
                message,
            } => {
                let step = step.map_or("none".to_string(), |s| s.to_string());
                format!(
                    "ERROR(step={step}, code={code}, message={})\nFix the failing step and return the whole corrected program.",
                    one_line(message)
                )
            }
            Feedback::Quality { model, mape } => format!(
                "QUALITY(model={model}, mape={mape:.4})\nThe backtest MAPE is above the target {tau:.4}. Try a different forecasting model."
            ),
            Feedback::BufferSummary(items) => {
                let list: Vec<String> = items.iter().map(|(m, q)| format!("{m}={q:.4}")).collect();
                format!(
                    "BUFFER_SUMMARY({})\nThis program was already tried. Return the earlier program with the lowest MAPE.",
                    list.join(", ")
                )
            }
        }
    }

    /// Parse the first line of a rendered message.
    pub fn parse(text: &str) -> Option<Feedback> {
        static RE: OnceLock<[Regex; 3]> = OnceLock::new();
        let [err, qual, buf] = RE.get_or_init(|| {
            [
                Regex::new(r"^ERROR\(step=(\w+), code=(\w+), message=(.*)\)$").unwrap(),
                Regex::new(r"^QUALITY\(model=(\w+), mape=([-+0-9.eE]+|NaN|inf)\)$").unwrap(),
                Regex::new(r"^BUFFER_SUMMARY\((.*)\)$").unwrap(),
            ]
        });
        let line = text.lines().next()?;
        if let Some(c) = err.captures(line) {
            return Some(Feedback::Error {
                step: c[1].parse().ok(),
                code: c[2].to_string(),
                message: c[3].to_string(),
            });
        }
        if let Some(c) = qual.captures(line) {
            return Some(Feedback::Quality {
                model: c[1].to_string(),
                mape: c[2].parse().ok()?,
            });
        }
        if let Some(c) = buf.captures(line) {
            let mut items = Vec::new();
            for part in c[1].split(", ").filter(|p| !p.is_empty()) {
                let (m, q) = part.split_once('=')?;
                items.push((m.to_string(), q.parse().ok()?));
            }
            return Some(Feedback::BufferSummary(items));
        }
        None
    }
}
