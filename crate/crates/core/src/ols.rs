//! Ordinary least squares on small dense designs.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub(crate) struct OlsFit {
    pub coefficients: Vec<f64>,
    /// Standard errors under homoskedastic errors, `sigma² (X'X)⁻¹`.
    pub std_errors: Vec<f64>,
    pub sse: f64,
    pub nobs: usize,
}

/// Fits `y = X b` by SVD. Returns `None` when the design is rank deficient
/// or has no residual degrees of freedom.
pub(crate) fn ols(rows: &[Vec<f64>], y: &[f64]) -> Option<OlsFit> {
    let n = rows.len();
    let k = rows.first()?.len();
    if n <= k || y.len() != n {
        return None;
    }
    let x = DMatrix::from_fn(n, k, |i, j| rows[i][j]);
    let yv = DVector::from_column_slice(y);

    let svd = x.clone().svd(true, true);
    let smax = svd.singular_values.max();
    if !(smax > 0.0) {
        return None;
    }
    let cutoff = smax * 1e-10 * n.max(k) as f64;
    if svd.singular_values.iter().any(|&s| s <= cutoff) {
        return None;
    }
    let beta = svd.solve(&yv, 0.0).ok()?;
    let resid = &yv - &x * &beta;
    let sse = resid.norm_squared();
    let sigma2 = sse / (n - k) as f64;

    // (X'X)^-1 = V S^-2 V'
    let v_t = svd.v_t.as_ref()?;
    let std_errors = (0..k)
        .map(|j| {
            let var: f64 = (0..k)
                .map(|r| v_t[(r, j)].powi(2) / svd.singular_values[r].powi(2))
                .sum();
            (sigma2 * var).sqrt()
        })
        .collect();
    Some(OlsFit {
        coefficients: beta.iter().copied().collect(),
        std_errors,
        sse,
        nobs: n,
    })
}
