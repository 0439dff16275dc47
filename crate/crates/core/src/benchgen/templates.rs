//! Question templates with `{name}` placeholders.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::constraint::ConstraintKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TemplateId {
    Predictive,
    PredictiveCov,
    AnomalyReference,
    AnomalyRate,
    Causal,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Param {
    Text(String),
    Int(usize),
    /// Rendered with four decimals.
    Number(f64),
}

impl From<&str> for Param {
    fn from(s: &str) -> Self {
        Param::Text(s.to_string())
    }
}

impl From<String> for Param {
    fn from(s: String) -> Self {
        Param::Text(s)
    }
}

impl From<usize> for Param {
    fn from(n: usize) -> Self {
        Param::Int(n)
    }
}

impl From<f64> for Param {
    fn from(x: f64) -> Self {
        Param::Number(x)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TemplateError {
    #[error("no value for placeholder `{{{0}}}`")]
    MissingPlaceholder(String),
    #[error("unclosed placeholder in template")]
    Unclosed,
}

const PREDICTIVE: &str = "I have historical {target} data for the past {history_length} {unit}. {constraint_clause} \
Please give me a forecast for the next {horizon} {unit} for {target}. \
Your goal is to make the most accurate forecast as possible, refine prediction result based on the constraint previously described. \
Please return a 1D numpy array. The historical data is stored in variable VAL.";

const PREDICTIVE_COV: &str = "I have historical {covariates} data and the corresponding {target} data for the past {history_length} {unit}. {constraint_clause} \
Think about how {covariates} influence {target}. \
Please give me a forecast for the next {horizon} {unit} for {target}. \
Your goal is to make the most accurate forecast as possible, refine prediction result based on the constraint previously described. \
Please return a 1D numpy array. The historical {target} data is stored in variable VAL and the {covariates} data is stored in variable COV.";

const ANOMALY_HEAD: &str = "I have 2m temperature data that spans {length} hours. \
Please tell me whether there are anomalies (extreme weather events) and where are anomalies if present in this sequence.";

const ANOMALY_OUTPUT: &str = "Please return a 1D numpy array with 1 indicating an anomaly and 0 indicating no anomaly.";

const CAUSAL: &str = "I have historical {variables} data and want to get the causal relationship between each pair of the variables. \
I know that {ratio}% of the variable pairs have relationship. \
Consider the potential influence of each variable on the others in this variable list: {variables}. \
Please return a 2D numpy array where entry [i][j] is 1 if variable i influences variable j and 0 otherwise. \
The data is stored in variable VAL, one column per variable in the order listed.";

fn template(id: TemplateId) -> String {
    match id {
        TemplateId::Predictive => PREDICTIVE.into(),
        TemplateId::PredictiveCov => PREDICTIVE_COV.into(),
        TemplateId::AnomalyReference => format!(
            "{ANOMALY_HEAD} I also have some anomaly-free 2m temperature data from the same region. {ANOMALY_OUTPUT} \
The data is stored in variable VAL and some anomaly-free normal samples are stored in variable NORM_VAL."
        ),
        TemplateId::AnomalyRate => format!(
            "{ANOMALY_HEAD} I know that {{rate}} percent of the times have anomalies. {ANOMALY_OUTPUT} \
The data is stored in variable VAL and the anomaly rate, as a fraction between 0 and 1, is stored in variable ANOMALY_RATE."
        ),
        TemplateId::Causal => CAUSAL.into(),
    }
}

/// Constraint sentence for a predictive question, with a `{value}` slot.
pub fn constraint_clause(kind: ConstraintKind) -> &'static str {
    match kind {
        ConstraintKind::MaxLoad => "I need to ensure that the maximum allowable system load does not exceed {value} MW.",
        ConstraintKind::MinLoad => "I require that the system load is maintained above a minimum of {value} MW.",
        ConstraintKind::RampRate => "I must monitor the load ramp rate to ensure it does not exceed {value} MW for each time step.",
        ConstraintKind::Variability => {
            "I need to manage the load variability so that it does not exceed {value} MW over the given period."
        }
    }
}

/// Fill `{name}` slots in `text`.
pub fn fill(text: &str, params: &BTreeMap<&str, Param>) -> Result<String, TemplateError> {
    let mut out = String::with_capacity(text.len() + 64);
    let mut rest = text;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let close = rest[open..].find('}').ok_or(TemplateError::Unclosed)? + open;
        let name = &rest[open + 1..close];
        match params.get(name) {
            Some(Param::Text(s)) => out.push_str(s),
            Some(Param::Int(n)) => out.push_str(&n.to_string()),
            Some(Param::Number(x)) => out.push_str(&format!("{x:.4}")),
            None => return Err(TemplateError::MissingPlaceholder(name.to_string())),
        }
        rest = &rest[close + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

pub fn render_question(id: TemplateId, params: &BTreeMap<&str, Param>) -> Result<String, TemplateError> {
    fill(&template(id), params)
}

/// Predictive question for `kind` (or no constraint) in either variant.
pub fn predictive_question(
    target: &str,
    covariates: Option<&[String]>,
    history_length: usize,
    horizon: usize,
    unit: &str,
    constraint: Option<(ConstraintKind, f64)>,
) -> Result<String, TemplateError> {
    let mut p: BTreeMap<&str, Param> = BTreeMap::new();
    let clause = match constraint {
        Some((kind, value)) => fill(constraint_clause(kind), &BTreeMap::from([("value", Param::Number(value))]))?,
        None => String::new(),
    };
    p.insert("constraint_clause", clause.into());
    p.insert("target", target.into());
    p.insert("history_length", history_length.into());
    p.insert("horizon", horizon.into());
    p.insert("unit", unit.into());
    let id = match covariates {
        Some(names) => {
            p.insert("covariates", join_names(names).into());
            TemplateId::PredictiveCov
        }
        None => TemplateId::Predictive,
    };
    let q = render_question(id, &p)?;
    // An empty clause leaves a double space behind.
    Ok(q.replace("  ", " "))
}

/// "a", "a and b", "a, b and c".
pub fn join_names(names: &[String]) -> String {
    match names {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} and {last}", init.join(", ")),
    }
}

pub fn anomaly_question(length: usize, rate: Option<f64>) -> Result<String, TemplateError> {
    let mut p: BTreeMap<&str, Param> = BTreeMap::from([("length", length.into())]);
    let id = match rate {
        Some(r) => {
            p.insert("rate", Param::Number(r * 100.0));
            TemplateId::AnomalyRate
        }
        None => TemplateId::AnomalyReference,
    };
    render_question(id, &p)
}

pub fn causal_question(variables: &[String], ratio: f64) -> Result<String, TemplateError> {
    let p = BTreeMap::from([
        ("variables", Param::Text(variables.join(", "))),
        ("ratio", Param::Number(ratio * 100.0)),
    ]);
    render_question(TemplateId::Causal, &p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraint::parse_constraint;

    #[test]
    fn four_decimal_numbers() {
        let q = predictive_question(
            "load_power",
            None,
            70,
            69,
            "hours",
            Some((ConstraintKind::MaxLoad, 694.47961)),
        )
        .unwrap();
        assert!(q.contains("does not exceed 694.4796 MW"), "{q}");
        assert!(q.contains("next 69 hours"));
        let spec = parse_constraint(&q).unwrap().unwrap();
        assert_eq!(spec.kind, ConstraintKind::MaxLoad);
        assert_eq!(spec.value, 694.4796);
    }

    #[test]
    fn every_clause_parses_back() {
        for kind in ConstraintKind::ALL {
            let q = predictive_question("load", Some(&["temperature".into()]), 336, 24, "hours", Some((kind, 12.5)))
                .unwrap();
            assert_eq!(parse_constraint(&q).unwrap().unwrap().kind, kind);
            assert!(!q.contains("  "));
        }
        let q = predictive_question("load", None, 336, 24, "hours", None).unwrap();
        assert_eq!(parse_constraint(&q).unwrap(), None);
    }

    #[test]
    fn missing_placeholder_is_named() {
        let e = render_question(TemplateId::Causal, &BTreeMap::new()).unwrap_err();
        assert!(matches!(e, TemplateError::MissingPlaceholder(ref n) if n == "ratio" || n == "variables"));
        assert_eq!(
            fill("a {b", &BTreeMap::new()),
            Err(TemplateError::Unclosed)
        );
    }

    #[test]
    fn causal_ratio_text() {
        let vars: Vec<String> = ["A", "B", "C", "D"].iter().map(|s| s.to_string()).collect();
        let q = causal_question(&vars, 5.0 / 12.0).unwrap();
        assert!(q.contains("41.6667% of the variable pairs have relationship"), "{q}");
        let q = anomaly_question(219, None).unwrap();
        assert!(q.contains("anomaly-free 2m temperature data"));
        let q = anomaly_question(200, Some(0.015)).unwrap();
        assert!(q.contains("1.5000 percent"));
    }
}
