//! Scoring metrics: MAPE, binary F1 and pairwise adjacency accuracy.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_same_len, OpError, OpResult};
use crate::series::Matrix;

/// Below this magnitude an actual value counts as zero.
pub const ZERO_ACTUAL: f64 = 1e-12;
/// Denominator floor used by [`mape_guarded`].
pub const MAPE_EPS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Mape,
    F1,
    Accuracy,
}

impl Metric {
    pub fn name(&self) -> &'static str {
        match self {
            Metric::Mape => "mape",
            Metric::F1 => "f1",
            Metric::Accuracy => "accuracy",
        }
    }

    pub fn lower_is_better(&self) -> bool {
        matches!(self, Metric::Mape)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quality {
    pub metric: Metric,
    pub value: f64,
}

impl Quality {
    pub fn mape(value: f64) -> Self {
        Self {
            metric: Metric::Mape,
            value,
        }
    }
}

/// Mean absolute percentage error. Fails on zero actuals.
pub fn mape(actual: &[f64], predicted: &[f64]) -> OpResult<f64> {
    ensure_same_len(actual.len(), predicted.len())?;
    if actual.is_empty() {
        return Err(OpError::SeriesTooShort { need: 1, got: 0 });
    }
    if let Some(index) = actual.iter().position(|a| a.abs() < ZERO_ACTUAL) {
        return Err(OpError::ZeroDenominator { index });
    }
    let total: f64 = actual
        .iter()
        .zip(predicted)
        .map(|(a, p)| (a - p).abs() / a.abs())
        .sum();
    Ok(total / actual.len() as f64)
}

/// MAPE with denominator `max(|a_t|, MAPE_EPS)`; never fails on zeros.
pub fn mape_guarded(actual: &[f64], predicted: &[f64]) -> OpResult<f64> {
    ensure_same_len(actual.len(), predicted.len())?;
    if actual.is_empty() {
        return Err(OpError::SeriesTooShort { need: 1, got: 0 });
    }
    let total: f64 = actual
        .iter()
        .zip(predicted)
        .map(|(a, p)| (a - p).abs() / a.abs().max(MAPE_EPS))
        .sum();
    Ok(total / actual.len() as f64)
}

/// F1 on label 1. Both vectors free of positives scores 1.0.
pub fn f1_binary(truth: &[u8], pred: &[u8]) -> OpResult<f64> {
    ensure_same_len(truth.len(), pred.len())?;
    let (mut tp, mut fp, mut fneg) = (0usize, 0usize, 0usize);
    for (&t, &p) in truth.iter().zip(pred) {
        match (t != 0, p != 0) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (true, false) => fneg += 1,
            (false, false) => {}
        }
    }
    if tp + fp + fneg == 0 {
        return Ok(1.0);
    }
    if tp == 0 {
        return Ok(0.0);
    }
    let precision = tp as f64 / (tp + fp) as f64;
    let recall = tp as f64 / (tp + fneg) as f64;
    Ok(2.0 * precision * recall / (precision + recall))
}

/// Fraction of agreeing off-diagonal entries of two square 0/1 matrices.
pub fn pair_accuracy(truth: &Matrix, pred: &Matrix) -> OpResult<f64> {
    if !truth.is_square() || truth.rows() != pred.rows() || truth.cols() != pred.cols() {
        return Err(OpError::ShapeMismatch(format!(
            "expected two equal square matrices, got {}x{} and {}x{}",
            truth.rows(),
            truth.cols(),
            pred.rows(),
            pred.cols()
        )));
    }
    let d = truth.rows();
    if d < 2 {
        return Err(OpError::ShapeMismatch("need at least 2 variables".into()));
    }
    let mut agree = 0usize;
    for r in 0..d {
        for c in 0..d {
            if r != c && (truth.get(r, c) != 0.0) == (pred.get(r, c) != 0.0) {
                agree += 1;
            }
        }
    }
    Ok(agree as f64 / (d * (d - 1)) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn mape_hand_values() {
        assert!((mape(&[100.0, 200.0], &[110.0, 180.0]).unwrap() - 0.1).abs() < 1e-12);
        assert_eq!(mape(&[3.0, 4.0], &[3.0, 4.0]).unwrap(), 0.0);
        assert!((mape(&[1.0, 2.0, 4.0], &[2.0, 1.0, 4.0]).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn mape_errors() {
        assert!(matches!(
            mape(&[1.0], &[1.0, 2.0]),
            Err(OpError::LengthMismatch { .. })
        ));
        assert!(matches!(
            mape(&[1.0, 0.0], &[1.0, 2.0]),
            Err(OpError::ZeroDenominator { index: 1 })
        ));
        let g = mape_guarded(&[0.0], &[1e-8]).unwrap();
        assert!((g - 1.0).abs() < 1e-12);
    }

    #[test]
    fn f1_hand_values() {
        assert!((f1_binary(&[0, 1, 1, 0], &[0, 1, 0, 0]).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(f1_binary(&[0, 1, 1], &[0, 1, 1]).unwrap(), 1.0);
        assert_eq!(f1_binary(&[0, 0], &[1, 1]).unwrap(), 0.0);
        assert_eq!(f1_binary(&[0, 0], &[0, 0]).unwrap(), 1.0);
        assert!(f1_binary(&[0], &[0, 1]).is_err());
    }

    fn mat(rows: &[&[f64]]) -> Matrix {
        Matrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn pair_accuracy_counts_off_diagonal() {
        let a = mat(&[&[1., 0., 1.], &[0., 1., 0.], &[1., 1., 1.]]);
        assert_eq!(pair_accuracy(&a, &a).unwrap(), 1.0);
        let zeros = mat(&[&[0., 0., 0.], &[0., 0., 0.], &[0., 0., 0.]]);
        let ones = mat(&[&[0., 1., 1.], &[1., 0., 1.], &[1., 1., 0.]]);
        assert_eq!(pair_accuracy(&zeros, &ones).unwrap(), 0.0);
        // d = 4: flip two off-diagonal entries -> 10 of 12 agree.
        let mut t = Matrix::zeros(4, 4);
        let mut p = Matrix::zeros(4, 4);
        t.set(0, 1, 1.0);
        p.set(1, 0, 1.0);
        t.set(2, 2, 1.0);
        assert!((pair_accuracy(&t, &p).unwrap() - 10.0 / 12.0).abs() < 1e-12);
        assert!(pair_accuracy(&Matrix::zeros(2, 3), &Matrix::zeros(2, 3)).is_err());
    }

    proptest! {
        #[test]
        fn mape_identity_and_scaling(a in prop::collection::vec(0.5f64..100.0, 1..30),
                                     noise in prop::collection::vec(-5.0f64..5.0, 30),
                                     c in prop_oneof![-10.0f64..-0.1, 0.1f64..10.0]) {
            prop_assert_eq!(mape(&a, &a).unwrap(), 0.0);
            let p: Vec<f64> = a.iter().zip(&noise).map(|(x, e)| x + e).collect();
            let ca: Vec<f64> = a.iter().map(|x| c * x).collect();
            let cp: Vec<f64> = p.iter().map(|x| c * x).collect();
            let lhs = mape(&ca, &cp).unwrap();
            let rhs = mape(&a, &p).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.max(1.0));
        }

        #[test]
        fn f1_losing_a_true_positive_never_helps(bits in prop::collection::vec(0u8..2, 2..40),
                                                 pred in prop::collection::vec(0u8..2, 40)) {
            let truth = bits.clone();
            let pred: Vec<u8> = pred[..truth.len()].to_vec();
            let before = f1_binary(&truth, &pred).unwrap();
            if let Some(i) = (0..truth.len()).find(|&i| truth[i] == 1 && pred[i] == 1) {
                let mut worse = pred.clone();
                worse[i] = 0;
                prop_assert!(f1_binary(&truth, &worse).unwrap() <= before + 1e-12);
            }
        }

        #[test]
        fn pair_accuracy_symmetric(d in 2usize..7, bits in prop::collection::vec(0u8..2, 72)) {
            let mut a = Matrix::zeros(d, d);
            let mut b = Matrix::zeros(d, d);
            for r in 0..d {
                for c in 0..d {
                    a.set(r, c, bits[r * d + c] as f64);
                    b.set(r, c, bits[36 + r * d + c] as f64);
                }
            }
            prop_assert_eq!(pair_accuracy(&a, &b).unwrap(), pair_accuracy(&b, &a).unwrap());
        }
    }
}
