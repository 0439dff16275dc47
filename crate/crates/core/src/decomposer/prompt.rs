//! Prompt assembly: operator definitions, worked examples, the question, the
//! instruction block, then one assistant/user exchange per feedback turn.

use serde::{Deserialize, Serialize};

use crate::benchgen::templates::{anomaly_question, causal_question, predictive_question};
use crate::constraint::ConstraintKind;
use crate::executor::feedback::FeedbackTurn;
use crate::registry::Registry;
use crate::task::TaskView;

pub const INSTRUCTIONS: &str = "Answer the question with a program made only of the operations listed above. \
Enclose the program in a ```python``` block and return nothing else. \
Each line assigns one operation call to a new variable, arguments are passed by keyword, and the answer is assigned to FINAL_RESULT. \
Replace every {PLACEHOLDER} with a variable name or a literal value. \
After each attempt you may receive feedback. An ERROR line names the failing step; fix it and return the whole program again. \
A QUALITY line reports the backtest MAPE of the forecasting model you chose, where lower is better; try another model to improve it. \
If no other model does better, go back to the model with the lowest MAPE. \
Do not write any code other than calls to the listed operations.";

const LAST_QUESTION: &str =
    "Answer this last question in the same format as the examples above, inside a ```python``` block.";

/// The anomaly example program, spacing included.
pub const ANOMALY_EXAMPLE_PROGRAM: &str = "NORM_SCORE = AnomalDetOP(data=NORM_VAL)\n\
\n\
THRES = calibrateThreshOP(data=NORM_SCORE)\n\
\n\
TEST_SCORE = AnomalDetOP(data=VAL)\n\
\n\
FINAL_RESULT = convertBinaryOP(data=TEST_SCORE, threshold=THRES)\n";

const PREDICTIVE_EXAMPLE_PROGRAM: &str = "FORECAST = forecast_uni(data=VAL, future_length=24, model=\"holt_winters\")\n\
FINAL_RESULT = project(data=FORECAST, kind=\"max_load\", value=1151.4102)\n";

const CAUSAL_EXAMPLE_PROGRAM: &str = "PVALUES = CausalMatrixOP(data=VAL)\n\
FINAL_RESULT = select_top_ratio(data=PVALUES, ratio=0.416667)\n";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    fn new(role: &str, content: impl Into<String>) -> Self {
        Self {
            role: role.into(),
            content: content.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptBundle {
    pub operator_defs: String,
    /// (question, program) pairs.
    pub icl_examples: Vec<(String, String)>,
    pub question: String,
    pub instructions: String,
    pub feedback: Vec<FeedbackTurn>,
}

/// The fixed worked examples: anomaly detection against reference data,
/// a constrained forecast and causal discovery with a known edge ratio.
pub fn icl_examples() -> Vec<(String, String)> {
    let vars: Vec<String> = ["A", "B", "C", "D"].iter().map(|s| s.to_string()).collect();
    vec![
        (
            anomaly_question(219, None).expect("static template"),
            ANOMALY_EXAMPLE_PROGRAM.to_string(),
        ),
        (
            predictive_question(
                "load_power",
                None,
                70,
                24,
                "hours",
                Some((ConstraintKind::MaxLoad, 1151.4102)),
            )
            .expect("static template"),
            PREDICTIVE_EXAMPLE_PROGRAM.to_string(),
        ),
        (
            causal_question(&vars, 5.0 / 12.0).expect("static template"),
            CAUSAL_EXAMPLE_PROGRAM.to_string(),
        ),
    ]
}

pub fn build_prompt(task: &TaskView, history: &[FeedbackTurn], registry: &Registry) -> PromptBundle {
    PromptBundle {
        operator_defs: registry.render(),
        icl_examples: icl_examples(),
        question: task.question.to_string(),
        instructions: INSTRUCTIONS.to_string(),
        feedback: history.to_vec(),
    }
}

fn fenced(program: &str) -> String {
    let mut s = format!("```python\n{program}");
    if !s.ends_with('\n') {
        s.push('\n');
    }
    s.push_str("```");
    s
}

impl PromptBundle {
    /// The first user message.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str("Operations:\n");
        out.push_str(&self.operator_defs);
        out.push_str("\nExamples:\n");
        for (q, p) in &self.icl_examples {
            out.push_str(&format!("Question: {q}\n{}\n\n", fenced(p)));
        }
        out.push_str(&format!("Question: {} {LAST_QUESTION}\n\n", self.question));
        out.push_str(&self.instructions);
        out.push('\n');
        out
    }

    pub fn messages(&self) -> Vec<ChatMessage> {
        let mut msgs = vec![
            ChatMessage::new("system", self.instructions.clone()),
            ChatMessage::new("user", self.render()),
        ];
        for turn in &self.feedback {
            let said = if turn.proposal.trim().is_empty() {
                "(no program)".to_string()
            } else {
                fenced(&turn.proposal)
            };
            msgs.push(ChatMessage::new("assistant", said));
            msgs.push(ChatMessage::new("user", turn.message.clone()));
        }
        msgs
    }
}
