//! Threshold calibration and binarisation of anomaly scores.

use crate::error::{OpError, OpResult};
use crate::stats::moments::{is_constant, mean, sample_std};

/// Guard against `p * n` landing a hair above an integer.
const COUNT_SLACK: f64 = 1e-9;

/// `mean + 3 * sample_std` of the scores.
pub fn calibrate_threshold(scores: &[f64]) -> OpResult<f64> {
    if scores.len() < 2 {
        return Err(OpError::SeriesTooShort {
            need: 2,
            got: scores.len(),
        });
    }
    if is_constant(scores) {
        return Err(OpError::ConstantSeries("standard deviation"));
    }
    Ok(mean(scores) + 3.0 * sample_std(scores))
}

/// Flags scores strictly above a threshold.
///
/// In percentile mode the threshold is the `(n - k)`-th smallest score with
/// `k = ceil(percentile * n)`, so at most `k` entries are flagged (fewer on
/// ties at the cut).
pub fn threshold_to_binary(
    scores: &[f64],
    threshold: Option<f64>,
    percentile: Option<f64>,
) -> OpResult<Vec<u8>> {
    let cut = match (threshold, percentile) {
        (Some(t), None) => t,
        (None, Some(p)) => {
            if !(p > 0.0 && p < 1.0) {
                return Err(OpError::InvalidArgument(format!(
                    "percentile must lie in (0, 1), got {p}"
                )));
            }
            percentile_cut(scores, p)
        }
        _ => return Err(OpError::BothOrNeitherGiven),
    };
    Ok(scores.iter().map(|&s| u8::from(s > cut)).collect())
}

fn percentile_cut(scores: &[f64], p: f64) -> f64 {
    let n = scores.len();
    let k = ((p * n as f64) - COUNT_SLACK).ceil().max(0.0) as usize;
    if k == 0 {
        return f64::INFINITY;
    }
    if k >= n {
        return f64::NEG_INFINITY;
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted[n - k - 1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn calibrate_examples() {
        assert!((calibrate_threshold(&[0.0, 0.0, 0.0, 4.0]).unwrap() - 7.0).abs() < 1e-12);
        let unit = [-1.0, 1.0, -1.0, 1.0];
        let s = sample_std(&unit);
        let scaled: Vec<f64> = unit.iter().map(|x| x / s).collect();
        assert!((calibrate_threshold(&scaled).unwrap() - 3.0).abs() < 1e-12);
        let doubled: Vec<f64> = scaled.iter().map(|x| 2.0 * x).collect();
        assert!((calibrate_threshold(&doubled).unwrap() - 6.0).abs() < 1e-12);
        assert!(matches!(
            calibrate_threshold(&[1.0, 1.0]),
            Err(OpError::ConstantSeries(_))
        ));
    }

    #[test]
    fn binarise_examples() {
        assert_eq!(
            threshold_to_binary(&[1.0, 4.0, 2.0], Some(3.0), None).unwrap(),
            vec![0, 1, 0]
        );
        assert_eq!(
            threshold_to_binary(&[1.0, 2.0, 3.0, 4.0, 5.0], None, Some(0.2)).unwrap(),
            vec![0, 0, 0, 0, 1]
        );
        assert_eq!(
            threshold_to_binary(&[1.0, 2.0], Some(9.0), None).unwrap(),
            vec![0, 0]
        );
        assert!(matches!(
            threshold_to_binary(&[1.0], None, None),
            Err(OpError::BothOrNeitherGiven)
        ));
        assert!(matches!(
            threshold_to_binary(&[1.0], Some(1.0), Some(0.5)),
            Err(OpError::BothOrNeitherGiven)
        ));
    }

    #[test]
    fn rate_count_is_exact_for_integral_rates() {
        let scores: Vec<f64> = (0..200).map(|i| i as f64).collect();
        let flagged = threshold_to_binary(&scores, None, Some(3.0 / 200.0)).unwrap();
        assert_eq!(flagged.iter().filter(|&&b| b == 1).count(), 3);
    }

    proptest! {
        #[test]
        fn raising_threshold_is_monotone(scores in prop::collection::vec(-50.0f64..50.0, 1..60),
                                         t in -60.0f64..60.0, dt in 0.0f64..20.0) {
            let lo = threshold_to_binary(&scores, Some(t), None).unwrap();
            let hi = threshold_to_binary(&scores, Some(t + dt), None).unwrap();
            for (a, b) in lo.iter().zip(&hi) {
                prop_assert!(b <= a);
            }
        }

        #[test]
        fn percentile_flags_at_most_ceil(scores in prop::collection::vec(0i32..10, 1..60), p in 0.01f64..0.99) {
            let s: Vec<f64> = scores.iter().map(|&x| x as f64).collect();
            let flags = threshold_to_binary(&s, None, Some(p)).unwrap();
            let k = (p * s.len() as f64).ceil() as usize;
            prop_assert!(flags.iter().filter(|&&b| b == 1).count() <= k);
        }
    }
}
