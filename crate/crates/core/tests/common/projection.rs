//! Seeded (forecast, spec) pairs and the projection properties over them.
//! Each property returns the number of pairs that break it.

use rand::Rng as _;
use tsr_core::constraint::{check, project, ConstraintKind, ConstraintSpec};
use tsr_core::rng::{seeded, Rng};

pub const PAIRS: usize = 1000;

fn forecast(rng: &mut Rng, min_len: usize) -> Vec<f64> {
    let n = rng.random_range(min_len..60);
    (0..n).map(|_| rng.random_range(-50.0..450.0)).collect()
}

fn spec(rng: &mut Rng) -> ConstraintSpec {
    let kind = ConstraintKind::ALL[rng.random_range(0..4)];
    match kind {
        ConstraintKind::MaxLoad | ConstraintKind::MinLoad => ConstraintSpec::new(kind, rng.random_range(100.0..200.0)),
        ConstraintKind::RampRate => {
            ConstraintSpec::new(kind, rng.random_range(0.0..50.0)).with_anchor(rng.random_range(0.0..400.0))
        }
        ConstraintKind::Variability => ConstraintSpec::new(kind, rng.random_range(0.0..50.0)),
    }
}

fn sd(y: &[f64]) -> f64 {
    let m = y.iter().sum::<f64>() / y.len() as f64;
    (y.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (y.len() - 1) as f64).sqrt()
}

/// A spec of the same kind that `y` already satisfies, with slack.
fn loose_spec(rng: &mut Rng, y: &[f64]) -> ConstraintSpec {
    let slack = rng.random_range(0.0..20.0);
    let max = y.iter().cloned().fold(f64::MIN, f64::max);
    let min = y.iter().cloned().fold(f64::MAX, f64::min);
    match ConstraintKind::ALL[rng.random_range(0..4)] {
        ConstraintKind::MaxLoad => ConstraintSpec::new(ConstraintKind::MaxLoad, max + slack),
        ConstraintKind::MinLoad => ConstraintSpec::new(ConstraintKind::MinLoad, min - slack),
        ConstraintKind::RampRate => {
            let anchor = y[0];
            let step = y.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
            ConstraintSpec::new(ConstraintKind::RampRate, step + slack).with_anchor(anchor)
        }
        ConstraintKind::Variability => ConstraintSpec::new(ConstraintKind::Variability, sd(y) + slack),
    }
}

fn close(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-9 * x.abs().max(1.0))
}

fn count(seed: u64, mut broken: impl FnMut(&mut Rng) -> bool) -> usize {
    let mut rng = seeded(seed);
    (0..PAIRS).filter(|_| broken(&mut rng)).count()
}

pub fn idempotence_failures() -> usize {
    count(91, |rng| {
        let (y, s) = (forecast(rng, 1), spec(rng));
        let once = project(&y, &s).unwrap();
        !close(&once, &project(&once, &s).unwrap())
    })
}

pub fn feasibility_failures() -> usize {
    count(92, |rng| {
        let (y, s) = (forecast(rng, 1), spec(rng));
        !check(&project(&y, &s).unwrap(), &s).unwrap().is_empty()
    })
}

pub fn feasible_input_failures() -> usize {
    count(93, |rng| {
        let y = forecast(rng, 2);
        let s = loose_spec(rng, &y);
        !check(&y, &s).unwrap().is_empty() || !close(&project(&y, &s).unwrap(), &y)
    })
}

pub fn mean_preservation_failures() -> usize {
    count(94, |rng| {
        let y = forecast(rng, 2);
        let s = ConstraintSpec::new(ConstraintKind::Variability, rng.random_range(0.0..50.0));
        let p = project(&y, &s).unwrap();
        let m = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
        (m(&p) - m(&y)).abs() > 1e-9 * m(&y).abs().max(1.0)
    })
}
