//! Autocorrelation and lagged cross-correlation.

use crate::error::{ensure_same_len, OpError, OpResult};
use crate::stats::moments::{is_constant, mean};

/// Sample autocorrelations `r_0..=r_max_lag` (`r_0 = 1`).
pub fn acf(xs: &[f64], max_lag: usize) -> OpResult<Vec<f64>> {
    let n = xs.len();
    if max_lag >= n {
        return Err(OpError::LagTooLarge {
            lag: max_lag,
            len: n,
        });
    }
    if is_constant(xs) {
        return Err(OpError::ConstantSeries("autocorrelation"));
    }
    let m = mean(xs);
    let dev: Vec<f64> = xs.iter().map(|x| x - m).collect();
    let denom: f64 = dev.iter().map(|d| d * d).sum();
    Ok((0..=max_lag)
        .map(|k| {
            let num: f64 = (k..n).map(|t| dev[t] * dev[t - k]).sum();
            num / denom
        })
        .collect())
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return 0.0;
    }
    sab / (saa * sbb).sqrt()
}

/// Lag `k` in `0..=max_lag` maximising `|corr(x_{t-k}, y_t)|`; ties go to the
/// smaller lag.
pub fn max_corr_lag(x: &[f64], y: &[f64], max_lag: usize) -> OpResult<usize> {
    ensure_same_len(x.len(), y.len())?;
    let n = x.len();
    if 2 * max_lag >= n {
        return Err(OpError::LagTooLarge {
            lag: max_lag,
            len: n,
        });
    }
    if is_constant(x) || is_constant(y) {
        return Err(OpError::ConstantSeries("cross-correlation"));
    }
    let mut best = (0usize, f64::NEG_INFINITY);
    for k in 0..=max_lag {
        let c = pearson(&x[..n - k], &y[k..]).abs();
        if c > best.1 {
            best = (k, c);
        }
    }
    Ok(best.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{gaussian_vec, seeded};

    #[test]
    fn acf_basics() {
        let r = acf(&[1.0, 3.0, 2.0, 5.0, 4.0], 2).unwrap();
        assert_eq!(r[0], 1.0);
        assert!(matches!(acf(&[2.0; 8], 1), Err(OpError::ConstantSeries(_))));
        assert!(matches!(
            acf(&[1.0, 2.0], 2),
            Err(OpError::LagTooLarge { .. })
        ));
    }

    #[test]
    fn acf_of_white_noise_is_small() {
        let xs = gaussian_vec(&mut seeded(11), 10_000, 1.0);
        let r = acf(&xs, 5).unwrap();
        for (k, rk) in r.iter().enumerate().skip(1) {
            assert!(rk.abs() < 0.05, "r_{k} = {rk}");
        }
    }

    /// Brute-force scan written independently of the implementation: explicit
    /// covariance over aligned pairs.
    fn oracle_lag(x: &[f64], y: &[f64], max_lag: usize) -> usize {
        let n = x.len();
        let mut best = (0, -1.0);
        for k in 0..=max_lag {
            let pairs: Vec<(f64, f64)> = (k..n).map(|t| (x[t - k], y[t])).collect();
            let m = pairs.len() as f64;
            let mx = pairs.iter().map(|p| p.0).sum::<f64>() / m;
            let my = pairs.iter().map(|p| p.1).sum::<f64>() / m;
            let cov = pairs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>();
            let vx = pairs.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
            let vy = pairs.iter().map(|p| (p.1 - my).powi(2)).sum::<f64>();
            let c = (cov / (vx * vy).sqrt()).abs();
            if c > best.1 {
                best = (k, c);
            }
        }
        best.0
    }

    #[test]
    fn lag_copy_and_identity() {
        let x = gaussian_vec(&mut seeded(3), 200, 1.0);
        let mut y = vec![0.0; 3];
        y.extend_from_slice(&x[..197]);
        assert_eq!(max_corr_lag(&x, &y, 10).unwrap(), 3);
        assert_eq!(max_corr_lag(&x, &x, 10).unwrap(), 0);
    }

    #[test]
    fn noisy_lag_matches_oracle() {
        let mut rng = seeded(5);
        let x = gaussian_vec(&mut rng, 500, 1.0);
        let e = gaussian_vec(&mut rng, 500, 0.1);
        let y: Vec<f64> = (0..500)
            .map(|t| if t >= 2 { 0.9 * x[t - 2] + e[t] } else { e[t] })
            .collect();
        assert_eq!(oracle_lag(&x, &y, 20), 2);
        assert_eq!(max_corr_lag(&x, &y, 20).unwrap(), 2);
    }

    #[test]
    fn lag_errors() {
        assert!(matches!(
            max_corr_lag(&[1.0, 2.0, 3.0, 4.0], &[1.0, 2.0, 3.0, 4.0], 2),
            Err(OpError::LagTooLarge { .. })
        ));
        assert!(matches!(
            max_corr_lag(
                &[1.0; 10],
                &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 1.0],
                2
            ),
            Err(OpError::ConstantSeries(_))
        ));
    }
}
