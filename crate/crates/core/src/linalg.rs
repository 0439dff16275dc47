//! Least-squares helpers over `nalgebra`.

use nalgebra::{DMatrix, DVector, Dyn};

use crate::error::{OpError, OpResult};

#[derive(Debug, Clone)]
pub struct LstsqFit {
    pub coef: Vec<f64>,
    pub rss: f64,
    pub rank: usize,
}

/// Relative singular-value cutoff for rank decisions.
const RANK_RTOL: f64 = 1e-10;

/// Minimum-norm least squares `argmin ||X b - y||`.
///
/// `rows` are the design rows. A design with every singular value at zero
/// (for example, all columns zero) is rejected. The design is reduced to its
/// square `R` factor by Householder QR before the SVD; nalgebra's SVD of tall
/// rank-deficient matrices can return wrong singular values.
pub fn lstsq(rows: &[Vec<f64>], y: &[f64]) -> OpResult<LstsqFit> {
    let n = rows.len();
    let k = rows.first().map_or(0, Vec::len);
    if n == 0 || k == 0 || y.len() != n {
        return Err(OpError::SingularRegression("empty design".into()));
    }
    let x = DMatrix::from_fn(n, k, |r, c| rows[r][c]);
    let yv = DVector::from_column_slice(y);
    let (svd, qty) = reduced_svd(&x, &yv);
    let smax = svd.singular_values.max();
    if !(smax > 0.0) || !smax.is_finite() {
        return Err(OpError::SingularRegression("design matrix is zero".into()));
    }
    let eps = smax * RANK_RTOL * (n.max(k) as f64);
    let rank = svd.rank(eps);
    let b = svd
        .solve(&qty, eps)
        .map_err(|e| OpError::SingularRegression(e.to_string()))?;
    let resid = &yv - &x * &b;
    Ok(LstsqFit {
        coef: b.iter().copied().collect(),
        rss: resid.dot(&resid),
        rank,
    })
}

/// SVD of the square-or-wide factor `R` of `X = QR` together with `Q^T y`.
fn reduced_svd(x: &DMatrix<f64>, y: &DVector<f64>) -> (nalgebra::SVD<f64, Dyn, Dyn>, DVector<f64>) {
    if x.nrows() <= x.ncols() {
        return (x.clone().svd(true, true), y.clone());
    }
    let qr = x.clone().qr();
    let qty = qr.q().transpose() * y;
    (qr.r().svd(true, true), qty)
}

/// Like [`lstsq`] but requires full column rank.
pub fn lstsq_full_rank(rows: &[Vec<f64>], y: &[f64], what: &str) -> OpResult<LstsqFit> {
    let fit = lstsq(rows, y)?;
    let k = rows[0].len();
    if fit.rank < k {
        return Err(OpError::SingularRegression(format!(
            "{what}: design rank {} < {k} columns",
            fit.rank
        )));
    }
    Ok(fit)
}

/// Full-rank OLS fit with coefficient standard errors.
#[derive(Debug, Clone)]
pub struct OlsFit {
    pub coef: Vec<f64>,
    pub se: Vec<f64>,
    pub rss: f64,
}

pub fn ols(rows: &[Vec<f64>], y: &[f64], what: &str) -> OpResult<OlsFit> {
    let fit = lstsq_full_rank(rows, y, what)?;
    let n = rows.len();
    let k = rows[0].len();
    if n <= k {
        return Err(OpError::SingularRegression(format!(
            "{what}: {n} observations for {k} parameters"
        )));
    }
    let x = DMatrix::from_fn(n, k, |r, c| rows[r][c]);
    let (svd, _) = reduced_svd(&x, &DVector::zeros(n));
    let v_t = svd.v_t.expect("requested V^T");
    let sigma2 = fit.rss / (n - k) as f64;
    // diag((X'X)^-1) = sum_k V[j,k]^2 / s_k^2
    let se = (0..k)
        .map(|j| {
            let var: f64 = (0..svd.singular_values.len())
                .map(|i| (v_t[(i, j)] / svd.singular_values[i]).powi(2))
                .sum();
            (sigma2 * var).sqrt()
        })
        .collect();
    Ok(OlsFit {
        coef: fit.coef,
        se,
        rss: fit.rss,
    })
}
