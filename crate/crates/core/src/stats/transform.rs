//! Elementwise transforms and horizontal concatenation.

use serde::{Deserialize, Serialize};

use crate::error::{OpError, OpResult};
use crate::series::{Frame, TimeSeries};
use crate::stats::moments::{is_constant, mean, sample_std};

/// The enumerated set of functions `apply` may run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "fn", rename_all = "snake_case")]
pub enum FnSpec {
    Log,
    Diff,
    Zscore,
    Abs,
    Scale { c: f64 },
    Clip { lo: f64, hi: f64 },
}

impl FnSpec {
    pub fn validate(&self) -> OpResult<()> {
        match *self {
            FnSpec::Scale { c } if !c.is_finite() => Err(OpError::InvalidArgument(
                "scale factor must be finite".into(),
            )),
            FnSpec::Clip { lo, hi } if !(lo <= hi) => Err(OpError::InvalidArgument(format!(
                "clip bounds reversed: {lo} > {hi}"
            ))),
            _ => Ok(()),
        }
    }
}

pub fn apply(data: &TimeSeries, f: FnSpec) -> OpResult<TimeSeries> {
    f.validate()?;
    let xs = data.values();
    match f {
        FnSpec::Log => {
            if let Some(i) = xs.iter().position(|&x| x <= 0.0) {
                return Err(OpError::DomainError(format!(
                    "log of non-positive value {} at index {i}",
                    xs[i]
                )));
            }
            data.with_values(0, xs.iter().map(|x| x.ln()).collect())
        }
        FnSpec::Diff => {
            if xs.len() < 2 {
                return Err(OpError::EmptyAfterDiff);
            }
            data.with_values(1, xs.windows(2).map(|w| w[1] - w[0]).collect())
        }
        FnSpec::Zscore => {
            if xs.len() < 2 || is_constant(xs) {
                return Err(OpError::ConstantSeries("z-score"));
            }
            let (m, s) = (mean(xs), sample_std(xs));
            data.with_values(0, xs.iter().map(|x| (x - m) / s).collect())
        }
        FnSpec::Abs => data.with_values(0, xs.iter().map(|x| x.abs()).collect()),
        FnSpec::Scale { c } => data.with_values(0, xs.iter().map(|x| x * c).collect()),
        FnSpec::Clip { lo, hi } => {
            data.with_values(0, xs.iter().map(|x| x.clamp(lo, hi)).collect())
        }
    }
}

impl From<TimeSeries> for Frame {
    fn from(s: TimeSeries) -> Self {
        Frame::new(vec![s]).expect("single column frame is valid")
    }
}

/// Columns of `a` followed by columns of `b`.
pub fn concat(a: &Frame, b: &Frame) -> OpResult<Frame> {
    if a.width() > 0 && b.width() > 0 && a.len() != b.len() {
        return Err(OpError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let mut cols = a.columns().to_vec();
    cols.extend(b.columns().iter().cloned());
    Frame::new(cols)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(name: &str, v: &[f64]) -> TimeSeries {
        TimeSeries::from_values(name, v.to_vec()).unwrap()
    }

    #[test]
    fn apply_examples() {
        let out = apply(&s("x", &[1.0, 2.0, 3.0]), FnSpec::Scale { c: 2.0 }).unwrap();
        assert_eq!(out.values(), &[2.0, 4.0, 6.0]);
        let out = apply(&s("x", &[5.0, 5.0, 5.0]), FnSpec::Diff).unwrap();
        assert_eq!(out.values(), &[0.0, 0.0]);
        let out = apply(&s("x", &[1.0, std::f64::consts::E]), FnSpec::Log).unwrap();
        assert!(out.values()[0].abs() < 1e-15 && (out.values()[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn apply_errors() {
        assert!(matches!(
            apply(&s("x", &[1.0, -1.0]), FnSpec::Log),
            Err(OpError::DomainError(_))
        ));
        assert!(matches!(
            apply(&s("x", &[1.0]), FnSpec::Diff),
            Err(OpError::EmptyAfterDiff)
        ));
        assert!(apply(&s("x", &[1.0]), FnSpec::Clip { lo: 2.0, hi: 1.0 }).is_err());
        assert!(apply(&s("x", &[1.0]), FnSpec::Scale { c: f64::INFINITY }).is_err());
    }

    #[test]
    fn concat_examples() {
        let x = s("x", &[1.0; 5]);
        let y = s("y", &[2.0; 5]);
        let f = concat(&x.clone().into(), &y.into()).unwrap();
        assert_eq!(f.names(), vec!["x", "y"]);
        let g = concat(&f, &s("z", &[3.0; 5]).into()).unwrap();
        assert_eq!(g.width(), 3);
        assert!(matches!(
            concat(&x.clone().into(), &s("w", &[1.0; 6]).into()),
            Err(OpError::LengthMismatch { .. })
        ));
        assert!(matches!(
            concat(&x.clone().into(), &x.into()),
            Err(OpError::DuplicateColumn(_))
        ));
    }
}
