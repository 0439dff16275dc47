//! Operational constraints on forecasts: parse from question text, check,
//! and project onto the feasible set.

use std::fmt;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{OpError, OpResult};
use crate::stats::moments::{mean, sample_std};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    MaxLoad,
    MinLoad,
    RampRate,
    Variability,
}

impl ConstraintKind {
    pub const ALL: [ConstraintKind; 4] = [
        ConstraintKind::MaxLoad,
        ConstraintKind::MinLoad,
        ConstraintKind::RampRate,
        ConstraintKind::Variability,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ConstraintKind::MaxLoad => "max_load",
            ConstraintKind::MinLoad => "min_load",
            ConstraintKind::RampRate => "ramp_rate",
            ConstraintKind::Variability => "variability",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

impl fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSpec {
    pub kind: ConstraintKind,
    pub value: f64,
    /// Last observed history value; the first forecast step of a ramp
    /// constraint is measured against it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anchor: Option<f64>,
}

impl ConstraintSpec {
    pub fn new(kind: ConstraintKind, value: f64) -> Self {
        Self {
            kind,
            value,
            anchor: None,
        }
    }

    pub fn with_anchor(mut self, anchor: f64) -> Self {
        self.anchor = Some(anchor);
        self
    }

    fn validate(&self) -> OpResult<()> {
        if !self.value.is_finite() {
            return Err(OpError::InvalidArgument(
                "constraint value must be finite".into(),
            ));
        }
        if matches!(
            self.kind,
            ConstraintKind::RampRate | ConstraintKind::Variability
        ) && self.value < 0.0
        {
            return Err(OpError::InvalidArgument(format!(
                "{} limit must be >= 0, got {}",
                self.kind, self.value
            )));
        }
        if matches!(self.anchor, Some(a) if !a.is_finite()) {
            return Err(OpError::InvalidArgument("anchor must be finite".into()));
        }
        Ok(())
    }

    fn tolerance(&self) -> f64 {
        TOL * self.value.abs().max(1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ConstraintKind,
    pub indices: Vec<usize>,
    /// Worst excess over the limit.
    pub magnitude: f64,
}

/// Slack allowed when checking, relative to `max(1, |value|)`.
pub const TOL: f64 = 1e-9;

const NUMBER: &str = r"([-+]?\d+(?:\.\d+)?(?:[eE][-+]?\d+)?)";

fn clause_patterns() -> &'static [(ConstraintKind, Regex)] {
    static PATTERNS: OnceLock<Vec<(ConstraintKind, Regex)>> = OnceLock::new();
    PATTERNS.get_or_init(|| {
        [
            (
                ConstraintKind::MaxLoad,
                r"maximum allowable system load does not exceed\s+",
            ),
            (ConstraintKind::MinLoad, r"maintained above a minimum of\s+"),
            (
                ConstraintKind::RampRate,
                r"ramp rate to ensure it does not exceed\s+",
            ),
            (
                ConstraintKind::Variability,
                r"variability so that it does not exceed\s+",
            ),
        ]
        .into_iter()
        .map(|(k, p)| {
            let re = Regex::new(&format!(r"(?i){p}{NUMBER}\s*MW")).expect("static pattern");
            (k, re)
        })
        .collect()
    })
}

/// Extract the single constraint clause of a question, if any.
pub fn parse_constraint(question: &str) -> OpResult<Option<ConstraintSpec>> {
    let mut found = Vec::new();
    for (kind, re) in clause_patterns() {
        for cap in re.captures_iter(question) {
            let value: f64 = cap[1]
                .parse()
                .map_err(|_| OpError::InvalidArgument(format!("bad number `{}`", &cap[1])))?;
            found.push(ConstraintSpec::new(*kind, value));
        }
    }
    match found.len() {
        0 => Ok(None),
        1 => Ok(found.pop()),
        _ => Err(OpError::AmbiguousConstraint),
    }
}

pub fn check(forecast: &[f64], spec: &ConstraintSpec) -> OpResult<Vec<Violation>> {
    spec.validate()?;
    if forecast.is_empty() {
        return Err(OpError::SeriesTooShort { need: 1, got: 0 });
    }
    let v = spec.value;
    let tol = spec.tolerance();
    let excesses: Vec<f64> = match spec.kind {
        ConstraintKind::MaxLoad => forecast.iter().map(|y| y - v).collect(),
        ConstraintKind::MinLoad => forecast.iter().map(|y| v - y).collect(),
        ConstraintKind::RampRate => {
            let mut prev = spec.anchor.ok_or(OpError::MissingAnchor)?;
            forecast
                .iter()
                .map(|&y| {
                    let step = (y - prev).abs();
                    prev = y;
                    step - v
                })
                .collect()
        }
        ConstraintKind::Variability => {
            let sd = spread(forecast);
            if sd - v > tol {
                return Ok(vec![Violation {
                    kind: spec.kind,
                    indices: (0..forecast.len()).collect(),
                    magnitude: sd - v,
                }]);
            }
            return Ok(Vec::new());
        }
    };
    let indices: Vec<usize> = (0..excesses.len()).filter(|&i| excesses[i] > tol).collect();
    if indices.is_empty() {
        return Ok(Vec::new());
    }
    let magnitude = indices
        .iter()
        .map(|&i| excesses[i])
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(vec![Violation {
        kind: spec.kind,
        indices,
        magnitude,
    }])
}

/// Sample standard deviation, 0 for a single point.
fn spread(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        0.0
    } else {
        sample_std(xs)
    }
}

pub fn project(forecast: &[f64], spec: &ConstraintSpec) -> OpResult<Vec<f64>> {
    spec.validate()?;
    if forecast.is_empty() {
        return Err(OpError::SeriesTooShort { need: 1, got: 0 });
    }
    let v = spec.value;
    Ok(match spec.kind {
        ConstraintKind::MaxLoad => forecast.iter().map(|&y| y.min(v)).collect(),
        ConstraintKind::MinLoad => forecast.iter().map(|&y| y.max(v)).collect(),
        ConstraintKind::RampRate => {
            let mut prev = spec.anchor.ok_or(OpError::MissingAnchor)?;
            forecast
                .iter()
                .map(|&y| {
                    prev = y.clamp(prev - v, prev + v);
                    prev
                })
                .collect()
        }
        ConstraintKind::Variability => {
            let sd = spread(forecast);
            if sd <= v {
                forecast.to_vec()
            } else {
                let m = mean(forecast);
                let factor = v / sd;
                forecast.iter().map(|y| m + (y - m) * factor).collect()
            }
        }
    })
}

const MAX_ROUNDS: usize = 10;

/// Round-robin projection onto the intersection of several constraints.
pub fn project_all(forecast: &[f64], specs: &[ConstraintSpec]) -> OpResult<Vec<f64>> {
    let bound = |k: ConstraintKind| specs.iter().filter(move |s| s.kind == k).map(|s| s.value);
    let lo = bound(ConstraintKind::MinLoad).fold(f64::NEG_INFINITY, f64::max);
    let hi = bound(ConstraintKind::MaxLoad).fold(f64::INFINITY, f64::min);
    if lo > hi {
        return Err(OpError::InfeasibleConstraint(format!(
            "min_load {lo} above max_load {hi}"
        )));
    }
    let mut y = forecast.to_vec();
    for _ in 0..MAX_ROUNDS {
        for s in specs {
            y = project(&y, s)?;
        }
        let mut feasible = true;
        for s in specs {
            feasible &= check(&y, s)?.is_empty();
        }
        if feasible {
            return Ok(y);
        }
    }
    Err(OpError::InfeasibleConstraint(format!(
        "no feasible point after {MAX_ROUNDS} projection rounds"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_template_clauses() {
        let q =
            "I need to ensure that the maximum allowable system load does not exceed 694.4796 MW.";
        assert_eq!(
            parse_constraint(q).unwrap(),
            Some(ConstraintSpec::new(ConstraintKind::MaxLoad, 694.4796))
        );
        let q = "I require that the system load is maintained above a minimum of 50 MW.";
        assert_eq!(
            parse_constraint(q).unwrap(),
            Some(ConstraintSpec::new(ConstraintKind::MinLoad, 50.0))
        );
        let q = "I must monitor the load ramp rate to ensure it does not exceed 12.5 MW for each time step.";
        assert_eq!(
            parse_constraint(q).unwrap().unwrap().kind,
            ConstraintKind::RampRate
        );
        let q = "I need to manage the load variability so that it does not exceed 3.0000 MW over the given period.";
        assert_eq!(parse_constraint(q).unwrap().unwrap().value, 3.0);
        assert_eq!(
            parse_constraint("Forecast the next 24 hours.").unwrap(),
            None
        );
        let both = "maximum allowable system load does not exceed 5 MW and maintained above a minimum of 1 MW";
        assert!(matches!(
            parse_constraint(both),
            Err(OpError::AmbiguousConstraint)
        ));
    }

    #[test]
    fn check_examples() {
        let max = ConstraintSpec::new(ConstraintKind::MaxLoad, 12.0);
        assert!(check(&[10.0, 12.0, 12.0], &max).unwrap().is_empty());
        let ramp = ConstraintSpec::new(ConstraintKind::RampRate, 2.0).with_anchor(5.0);
        let v = check(&[5.0, 9.0], &ramp).unwrap();
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].indices, vec![1]);
        assert!((v[0].magnitude - 2.0).abs() < 1e-12);
        let var = ConstraintSpec::new(ConstraintKind::Variability, 5.0);
        let v = check(&[0.0, 10.0], &var).unwrap();
        assert_eq!(v.len(), 1);
        assert!((v[0].magnitude - (50f64.sqrt() - 5.0)).abs() < 1e-12);
        let no_anchor = ConstraintSpec::new(ConstraintKind::RampRate, 2.0);
        assert!(matches!(
            check(&[1.0], &no_anchor),
            Err(OpError::MissingAnchor)
        ));
    }

    #[test]
    fn project_examples() {
        let max = ConstraintSpec::new(ConstraintKind::MaxLoad, 12.0);
        assert_eq!(
            project(&[10.0, 12.0, 15.0], &max).unwrap(),
            vec![10.0, 12.0, 12.0]
        );
        let ramp = ConstraintSpec::new(ConstraintKind::RampRate, 2.0).with_anchor(5.0);
        assert_eq!(
            project(&[5.0, 9.0, 9.0], &ramp).unwrap(),
            vec![5.0, 7.0, 9.0]
        );
        let var = ConstraintSpec::new(ConstraintKind::Variability, 5.0);
        let p = project(&[0.0, 10.0], &var).unwrap();
        let half = 5.0 * 5.0 / 50f64.sqrt();
        assert!((p[0] - (5.0 - half)).abs() < 1e-12 && (p[1] - (5.0 + half)).abs() < 1e-12);
        assert!((sample_std(&p) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn composition() {
        let specs = [
            ConstraintSpec::new(ConstraintKind::MaxLoad, 10.0),
            ConstraintSpec::new(ConstraintKind::RampRate, 1.0).with_anchor(8.0),
        ];
        let y = project_all(&[12.0, 4.0, 11.0, 9.0], &specs).unwrap();
        for s in &specs {
            assert!(check(&y, s).unwrap().is_empty());
        }
        let clash = [
            ConstraintSpec::new(ConstraintKind::MaxLoad, 10.0),
            ConstraintSpec::new(ConstraintKind::MinLoad, 11.0),
        ];
        assert!(matches!(
            project_all(&[1.0], &clash),
            Err(OpError::InfeasibleConstraint(_))
        ));
    }

    #[test]
    fn json_shape() {
        let s = ConstraintSpec::new(ConstraintKind::RampRate, 2.5).with_anchor(400.0);
        assert_eq!(
            serde_json::to_string(&s).unwrap(),
            r#"{"kind":"ramp_rate","value":2.5,"anchor":400.0}"#
        );
    }
}
