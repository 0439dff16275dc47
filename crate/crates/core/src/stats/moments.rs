//! Small descriptive-statistics helpers shared across operators.

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance (ddof = 1). NaN below two observations.
pub fn sample_variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
}

pub fn sample_std(xs: &[f64]) -> f64 {
    sample_variance(xs).sqrt()
}

pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// True when every value equals the first one.
pub fn is_constant(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[0] == w[1])
}

/// Ordinary least-squares slope of `xs` against its index.
pub fn ols_slope(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let tbar = (n - 1.0) / 2.0;
    let ybar = mean(xs);
    let (mut sty, mut stt) = (0.0, 0.0);
    for (t, y) in xs.iter().enumerate() {
        let dt = t as f64 - tbar;
        sty += dt * (y - ybar);
        stt += dt * dt;
    }
    sty / stt
}

/// Residuals after removing the OLS line against the index.
pub fn detrend_linear(xs: &[f64]) -> Vec<f64> {
    let b = ols_slope(xs);
    let a = mean(xs) - b * (xs.len() as f64 - 1.0) / 2.0;
    xs.iter()
        .enumerate()
        .map(|(t, y)| y - a - b * t as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basics() {
        assert_eq!(mean(&[1.0, 2.0, 3.0]), 2.0);
        assert!((sample_std(&[0.0, 0.0, 0.0, 4.0]) - 2.0).abs() < 1e-12);
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
        let line: Vec<f64> = (0..10).map(|t| 2.0 * t as f64).collect();
        assert!((ols_slope(&line) - 2.0).abs() < 1e-12);
        assert!(detrend_linear(&line).iter().all(|r| r.abs() < 1e-9));
    }
}
