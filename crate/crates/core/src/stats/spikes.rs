//! Robust spike detection with a median/MAD z-score.

use crate::error::{OpError, OpResult};
use crate::stats::moments::{is_constant, mean, median};

/// Consistency constant relating MAD to the normal standard deviation.
const MAD_TO_SIGMA: f64 = 1.4826;
/// Mean absolute deviation to sigma for normal data, `sqrt(pi / 2)`.
const MEAN_AD_TO_SIGMA: f64 = 1.253_314_137_315_500_3;

/// Ascending indices with `|x - median| > z * sigma_hat`.
///
/// `sigma_hat` is `1.4826 * MAD`; when more than half the points sit exactly
/// on the median (MAD = 0) the mean absolute deviation around the median is
/// used instead.
pub fn detect_spikes(xs: &[f64], z: f64) -> OpResult<Vec<usize>> {
    if !(z > 0.0) {
        return Err(OpError::InvalidArgument(format!(
            "z must be positive, got {z}"
        )));
    }
    if xs.len() < 10 {
        return Err(OpError::SeriesTooShort {
            need: 10,
            got: xs.len(),
        });
    }
    if is_constant(xs) {
        return Err(OpError::ConstantSeries("median absolute deviation"));
    }
    let med = median(xs);
    let abs_dev: Vec<f64> = xs.iter().map(|x| (x - med).abs()).collect();
    let mad = median(&abs_dev);
    let sigma = if mad > 0.0 {
        MAD_TO_SIGMA * mad
    } else {
        MEAN_AD_TO_SIGMA * mean(&abs_dev)
    };
    Ok(abs_dev
        .iter()
        .enumerate()
        .filter(|(_, d)| **d > z * sigma)
        .map(|(i, _)| i)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{gaussian_vec, seeded};

    #[test]
    fn single_spike_on_flat() {
        let mut xs = vec![0.0; 20];
        xs[7] = 100.0;
        assert_eq!(detect_spikes(&xs, 3.0).unwrap(), vec![7]);
    }

    #[test]
    fn two_spikes_ascending() {
        let mut xs = gaussian_vec(&mut seeded(1), 30, 1.0);
        xs[9] = 50.0;
        xs[3] = -50.0;
        assert_eq!(detect_spikes(&xs, 3.0).unwrap(), vec![3, 9]);
    }

    #[test]
    fn gaussian_noise_has_no_ten_sigma_spike() {
        let xs = gaussian_vec(&mut seeded(2024), 1000, 1.0);
        assert!(detect_spikes(&xs, 10.0).unwrap().is_empty());
    }

    #[test]
    fn errors() {
        assert!(matches!(
            detect_spikes(&[1.0; 12], 3.0),
            Err(OpError::ConstantSeries(_))
        ));
        assert!(matches!(
            detect_spikes(&[1.0; 5], 3.0),
            Err(OpError::SeriesTooShort { .. })
        ));
        assert!(detect_spikes(&[1.0; 12], 0.0).is_err());
    }
}
