//! Stationarity, distribution and white-noise tests.
//!
//! ADF and KPSS p-values come from linear interpolation in published
//! critical-value tables and are clamped to the tabulated range.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{OpError, OpResult};
use crate::linalg::{lstsq_full_rank, ols};
use crate::stats::correlation::acf;
use crate::value::TestResult;

pub const ALPHA: f64 = 0.05;
const MIN_LEN: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    /// Augmented Dickey-Fuller with constant; verdict = stationary.
    Adf,
    /// KPSS around a linear trend; verdict = trend-stationary.
    Kpss,
    /// Two-sample Kolmogorov-Smirnov; verdict = same distribution.
    Ks,
    /// Ljung-Box portmanteau; verdict = white noise.
    LjungBox,
}

impl TestKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "adf" => Some(TestKind::Adf),
            "kpss" => Some(TestKind::Kpss),
            "ks" => Some(TestKind::Ks),
            "ljung_box" | "box" => Some(TestKind::LjungBox),
            _ => None,
        }
    }
}

pub fn stat_test(
    kind: TestKind,
    a: &[f64],
    b: Option<&[f64]>,
    lags: Option<usize>,
) -> OpResult<TestResult> {
    if a.len() < MIN_LEN {
        return Err(OpError::SeriesTooShort {
            need: MIN_LEN,
            got: a.len(),
        });
    }
    match kind {
        TestKind::Adf => adf(a, lags),
        TestKind::Kpss => kpss(a, lags),
        TestKind::Ks => {
            let b = b.ok_or(OpError::MissingSecondSeries("ks"))?;
            if b.len() < MIN_LEN {
                return Err(OpError::SeriesTooShort {
                    need: MIN_LEN,
                    got: b.len(),
                });
            }
            Ok(ks_two_sample(a, b))
        }
        TestKind::LjungBox => {
            let lags = lags.unwrap_or_else(|| (a.len() / 5).clamp(1, 10));
            ljung_box(a, lags)
        }
    }
}

// Dickey-Fuller tau_mu quantiles (regression with constant), Fuller (1976).
const DF_PROBS: [f64; 8] = [0.01, 0.025, 0.05, 0.10, 0.90, 0.95, 0.975, 0.99];
#[allow(clippy::approx_constant)]
const DF_TABLE: [(f64, [f64; 8]); 6] = [
    (25.0, [-3.75, -3.33, -3.00, -2.62, -0.37, 0.00, 0.34, 0.72]),
    (50.0, [-3.58, -3.22, -2.93, -2.60, -0.40, -0.03, 0.29, 0.66]),
    (
        100.0,
        [-3.51, -3.17, -2.89, -2.58, -0.42, -0.05, 0.26, 0.63],
    ),
    (
        250.0,
        [-3.46, -3.14, -2.88, -2.57, -0.42, -0.06, 0.24, 0.62],
    ),
    (
        500.0,
        [-3.44, -3.13, -2.87, -2.57, -0.43, -0.07, 0.24, 0.61],
    ),
    (
        f64::INFINITY,
        [-3.43, -3.12, -2.86, -2.57, -0.44, -0.07, 0.23, 0.60],
    ),
];

/// Quantile row for sample size `n`, interpolated linearly in `1/n`.
fn df_quantiles(n: f64) -> [f64; 8] {
    let inv = |m: f64| if m.is_infinite() { 0.0 } else { 1.0 / m };
    if n <= DF_TABLE[0].0 {
        return DF_TABLE[0].1;
    }
    for w in DF_TABLE.windows(2) {
        let ((n0, q0), (n1, q1)) = (w[0], w[1]);
        if n <= n1 {
            let f = (inv(n0) - inv(n)) / (inv(n0) - inv(n1));
            let mut out = [0.0; 8];
            for i in 0..8 {
                out[i] = q0[i] + f * (q1[i] - q0[i]);
            }
            return out;
        }
    }
    DF_TABLE[5].1
}

/// Linear interpolation of `p` at `x` given ascending `xs` and matching `ps`;
/// clamps outside the table.
fn interp(x: f64, xs: &[f64], ps: &[f64]) -> f64 {
    if x <= xs[0] {
        return ps[0];
    }
    let last = xs.len() - 1;
    if x >= xs[last] {
        return ps[last];
    }
    let i = xs
        .windows(2)
        .position(|w| x <= w[1])
        .expect("x inside table");
    let f = (x - xs[i]) / (xs[i + 1] - xs[i]);
    ps[i] + f * (ps[i + 1] - ps[i])
}

fn adf(y: &[f64], lags: Option<usize>) -> OpResult<TestResult> {
    let n = y.len();
    let k = lags.unwrap_or_else(|| ((n - 1) as f64).cbrt().floor() as usize);
    let dy: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).collect();
    if dy.len() < k + 10 {
        return Err(OpError::SeriesTooShort {
            need: k + 11,
            got: n,
        });
    }
    // dy[t] = a + b*y[t] + sum_i g_i * dy[t-i]  for t in k..dy.len()
    let mut rows = Vec::with_capacity(dy.len() - k);
    let mut target = Vec::with_capacity(dy.len() - k);
    for t in k..dy.len() {
        let mut row = vec![1.0, y[t]];
        row.extend((1..=k).map(|i| dy[t - i]));
        rows.push(row);
        target.push(dy[t]);
    }
    let fit = ols(&rows, &target, "ADF regression")?;
    let stat = fit.coef[1] / fit.se[1];
    let q = df_quantiles(target.len() as f64);
    let p_value = interp(stat, &q, &DF_PROBS);
    Ok(TestResult {
        stat,
        p_value,
        verdict: p_value < ALPHA,
    })
}

// KPSS eta_tau (trend) critical values, Kwiatkowski et al. (1992).
const KPSS_STATS: [f64; 4] = [0.119, 0.146, 0.176, 0.216];
const KPSS_PROBS: [f64; 4] = [0.10, 0.05, 0.025, 0.01];

fn kpss(y: &[f64], lags: Option<usize>) -> OpResult<TestResult> {
    let n = y.len();
    let rows: Vec<Vec<f64>> = (0..n).map(|t| vec![1.0, t as f64]).collect();
    let fit = lstsq_full_rank(&rows, y, "KPSS detrending")?;
    let resid: Vec<f64> = (0..n)
        .map(|t| y[t] - fit.coef[0] - fit.coef[1] * t as f64)
        .collect();
    let l = lags
        .unwrap_or_else(|| (12.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize)
        .min(n - 1);
    let gamma = |j: usize| (j..n).map(|t| resid[t] * resid[t - j]).sum::<f64>() / n as f64;
    let mut lrv = gamma(0);
    for j in 1..=l {
        lrv += 2.0 * (1.0 - j as f64 / (l as f64 + 1.0)) * gamma(j);
    }
    if !(lrv > 0.0) {
        return Err(OpError::ConstantSeries("long-run variance"));
    }
    let mut partial = 0.0;
    let mut sum_sq = 0.0;
    for r in &resid {
        partial += r;
        sum_sq += partial * partial;
    }
    let stat = sum_sq / ((n * n) as f64 * lrv);
    let p_value = interp(stat, &KPSS_STATS, &KPSS_PROBS);
    Ok(TestResult {
        stat,
        p_value,
        verdict: p_value > ALPHA,
    })
}

/// Survival function of the Kolmogorov distribution.
fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // Small-argument series for the CDF.
        let c = -std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda);
        let cdf: f64 = (1..=20)
            .map(|j| ((2 * j - 1) as f64).powi(2))
            .map(|k2| (k2 * c).exp())
            .sum::<f64>()
            * (2.0 * std::f64::consts::PI).sqrt()
            / lambda;
        return (1.0 - cdf).clamp(0.0, 1.0);
    }
    let q: f64 = (1..=100)
        .map(|j| {
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            sign * (-2.0 * (j * j) as f64 * lambda * lambda).exp()
        })
        .sum::<f64>()
        * 2.0;
    q.clamp(0.0, 1.0)
}

fn ks_two_sample(a: &[f64], b: &[f64]) -> TestResult {
    let mut xa = a.to_vec();
    let mut xb = b.to_vec();
    xa.sort_by(f64::total_cmp);
    xb.sort_by(f64::total_cmp);
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < xa.len() && j < xb.len() {
        let v = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] <= v {
            i += 1;
        }
        while j < xb.len() && xb[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let en = (na * nb / (na + nb)).sqrt();
    let p_value = kolmogorov_sf((en + 0.12 + 0.11 / en) * d);
    TestResult {
        stat: d,
        p_value,
        verdict: p_value > ALPHA,
    }
}

fn ljung_box(xs: &[f64], lags: usize) -> OpResult<TestResult> {
    let n = xs.len();
    if lags == 0 {
        return Err(OpError::InvalidArgument("ljung_box needs lags >= 1".into()));
    }
    let r = acf(xs, lags)?;
    let nf = n as f64;
    let q = nf
        * (nf + 2.0)
        * (1..=lags)
            .map(|k| r[k] * r[k] / (nf - k as f64))
            .sum::<f64>();
    let chi = ChiSquared::new(lags as f64).expect("positive degrees of freedom");
    let p_value = chi.sf(q).clamp(0.0, 1.0);
    Ok(TestResult {
        stat: q,
        p_value,
        verdict: p_value > ALPHA,
    })
}
