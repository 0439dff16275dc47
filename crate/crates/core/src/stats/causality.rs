//! Pairwise Granger tests and ratio-informed binarization.

use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use crate::error::{OpError, OpResult};
use crate::linalg::lstsq_full_rank;
use crate::series::{Frame, Matrix};

/// Granger F-test p-value for "lags of `x` help predict `y`".
///
/// Both regressions carry an intercept and a linear time trend so that
/// shared deterministic trends do not register as causal links.
pub fn granger_p_value(x: &[f64], y: &[f64], order: usize) -> OpResult<f64> {
    let n = y.len();
    let rows_n = n - order;
    let mut restricted = Vec::with_capacity(rows_n);
    let mut full = Vec::with_capacity(rows_n);
    let mut target = Vec::with_capacity(rows_n);
    for t in order..n {
        let mut r = vec![1.0, t as f64 / n as f64];
        r.extend((1..=order).map(|k| y[t - k]));
        let mut f = r.clone();
        f.extend((1..=order).map(|k| x[t - k]));
        restricted.push(r);
        full.push(f);
        target.push(y[t]);
    }
    let k_full = 2 + 2 * order;
    if rows_n <= k_full {
        return Err(OpError::SeriesTooShort {
            need: k_full + order + 1,
            got: n,
        });
    }
    let rss_r = lstsq_full_rank(&restricted, &target, "granger restricted")?.rss;
    let rss_u = lstsq_full_rank(&full, &target, "granger full")?.rss;
    let df2 = (rows_n - k_full) as f64;
    if rss_u <= 0.0 {
        return Err(OpError::SingularRegression("granger: perfect fit".into()));
    }
    let f = ((rss_r - rss_u).max(0.0) / order as f64) / (rss_u / df2);
    let dist = FisherSnedecor::new(order as f64, df2).expect("positive degrees of freedom");
    Ok(dist.sf(f).clamp(0.0, 1.0))
}

/// `d x d` matrix whose entry `(i, j)` is the p-value of column `i`
/// Granger-causing column `j`; the diagonal is 0.
pub fn causal_matrix(data: &Frame, max_lag: usize) -> OpResult<Matrix> {
    let d = data.width();
    if d < 2 {
        return Err(OpError::ShapeMismatch(format!(
            "causal_matrix needs >= 2 columns, got {d}"
        )));
    }
    if max_lag == 0 {
        return Err(OpError::InvalidArgument("max_lag must be >= 1".into()));
    }
    let n = data.len();
    if n < 10 * max_lag {
        return Err(OpError::SeriesTooShort {
            need: 10 * max_lag,
            got: n,
        });
    }
    let cols = data.columns();
    let mut m = Matrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            if i != j {
                let p =
                    granger_p_value(cols[i].values(), cols[j].values(), max_lag).map_err(|e| {
                        match e {
                            OpError::SingularRegression(msg) => OpError::SingularRegression(
                                format!("{} -> {}: {msg}", cols[i].name, cols[j].name),
                            ),
                            other => other,
                        }
                    })?;
                m.set(i, j, p);
            }
        }
    }
    Ok(m)
}

/// Marks the `round(ratio * d(d-1))` smallest off-diagonal p-values as 1.
pub fn select_top_ratio(pvals: &Matrix, ratio: f64) -> OpResult<Matrix> {
    if !pvals.is_square() {
        return Err(OpError::ShapeMismatch(
            "select_top_ratio needs a square matrix".into(),
        ));
    }
    if !(0.0..=1.0).contains(&ratio) {
        return Err(OpError::InvalidArgument(format!(
            "ratio {ratio} outside [0, 1]"
        )));
    }
    let d = pvals.rows();
    let mut cells: Vec<(f64, usize, usize)> = (0..d)
        .flat_map(|r| (0..d).filter(move |&c| c != r).map(move |c| (r, c)))
        .map(|(r, c)| (pvals.get(r, c), r, c))
        .collect();
    cells.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let k = (ratio * (d * d.saturating_sub(1)) as f64).round() as usize;
    let mut out = Matrix::zeros(d, d);
    for &(_, r, c) in cells.iter().take(k) {
        out.set(r, c, 1.0);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{gaussian_vec, seeded};
    use crate::series::TimeSeries;

    fn frame(cols: Vec<(&str, Vec<f64>)>) -> Frame {
        Frame::new(
            cols.into_iter()
                .map(|(n, v)| TimeSeries::from_values(n, v).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn select_counts() {
        let mut p = Matrix::zeros(3, 3);
        let vals = [0.3, 0.1, 0.5, 0.2, 0.9, 0.05];
        let mut it = vals.iter();
        for r in 0..3 {
            for c in 0..3 {
                if r != c {
                    p.set(r, c, *it.next().unwrap());
                }
            }
        }
        assert_eq!(select_top_ratio(&p, 0.0).unwrap().off_diagonal_ones(), 0);
        assert_eq!(select_top_ratio(&p, 1.0).unwrap().off_diagonal_ones(), 6);
        let half = select_top_ratio(&p, 0.5).unwrap();
        assert_eq!(half.off_diagonal_ones(), 3);
        assert_eq!(half.get(2, 1), 1.0);
        assert_eq!(half.get(0, 2), 1.0);
        assert_eq!(half.get(1, 2), 1.0);
        // Ties resolve in (row, col) order.
        let ties = select_top_ratio(&Matrix::zeros(3, 3), 1.0 / 6.0).unwrap();
        assert_eq!(ties.get(0, 1), 1.0);
    }

    #[test]
    fn diagonal_and_shape_errors() {
        let x = gaussian_vec(&mut seeded(1), 100, 1.0);
        let y = gaussian_vec(&mut seeded(2), 100, 1.0);
        let m = causal_matrix(&frame(vec![("x", x.clone()), ("y", y)]), 2).unwrap();
        assert_eq!(m.get(0, 0), 0.0);
        assert_eq!(m.get(1, 1), 0.0);
        assert!(causal_matrix(&frame(vec![("x", x.clone())]), 2).is_err());
        let short = frame(vec![("a", x[..15].to_vec()), ("b", x[..15].to_vec())]);
        assert!(matches!(
            causal_matrix(&short, 2),
            Err(OpError::SeriesTooShort { .. })
        ));
    }

    #[test]
    fn collinear_columns_are_singular() {
        let x = gaussian_vec(&mut seeded(3), 100, 1.0);
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let r = causal_matrix(&frame(vec![("x", x), ("y", y)]), 2);
        assert!(matches!(r, Err(OpError::SingularRegression(_))), "{r:?}");
    }
}
