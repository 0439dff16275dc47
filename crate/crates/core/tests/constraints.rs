//! Projection properties over random forecasts and constraint specs.

use proptest::prelude::*;
use tsr_core::constraint::{check, project, ConstraintKind, ConstraintSpec};

fn spec_strategy() -> impl Strategy<Value = ConstraintSpec> {
    (0usize..4, 0.0f64..50.0, 100.0f64..200.0, 0.0f64..400.0).prop_map(
        |(k, small, level, anchor)| {
            let kind = ConstraintKind::ALL[k];
            match kind {
                ConstraintKind::MaxLoad | ConstraintKind::MinLoad => {
                    ConstraintSpec::new(kind, level)
                }
                ConstraintKind::RampRate => ConstraintSpec::new(kind, small).with_anchor(anchor),
                ConstraintKind::Variability => ConstraintSpec::new(kind, small),
            }
        },
    )
}

fn forecast_strategy() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-50.0f64..450.0, 1..60)
}

fn close(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|(x, y)| (x - y).abs() <= 1e-9 * x.abs().max(1.0))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn idempotent(y in forecast_strategy(), s in spec_strategy()) {
        let once = project(&y, &s).unwrap();
        let twice = project(&once, &s).unwrap();
        prop_assert!(close(&once, &twice));
    }

    #[test]
    fn feasible(y in forecast_strategy(), s in spec_strategy()) {
        let p = project(&y, &s).unwrap();
        prop_assert!(check(&p, &s).unwrap().is_empty());
    }

    #[test]
    fn feasible_input_unchanged(y in forecast_strategy(), s in spec_strategy()) {
        if check(&y, &s).unwrap().is_empty() {
            prop_assert!(close(&project(&y, &s).unwrap(), &y));
        }
    }

    #[test]
    fn variability_preserves_mean(y in prop::collection::vec(-50.0f64..450.0, 2..60), v in 0.0f64..50.0) {
        let s = ConstraintSpec::new(ConstraintKind::Variability, v);
        let p = project(&y, &s).unwrap();
        let m = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
        prop_assert!((m(&p) - m(&y)).abs() <= 1e-9 * m(&y).abs().max(1.0));
    }
}

#[path = "common/projection.rs"]
mod seeded_pairs;

#[test]
fn seeded_pairs_keep_all_properties() {
    assert_eq!(seeded_pairs::idempotence_failures(), 0);
    assert_eq!(seeded_pairs::feasibility_failures(), 0);
    assert_eq!(seeded_pairs::feasible_input_failures(), 0);
    assert_eq!(seeded_pairs::mean_preservation_failures(), 0);
}
