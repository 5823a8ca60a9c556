use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative threshold on the diagonal of R below which a design is singular.
const RANK_TOL: f64 = 1e-10;

pub(crate) struct OlsFit {
    pub beta: DVector<f64>,
    #[cfg_attr(not(test), allow(dead_code))]
    pub ssr: f64,
    pub std_err: DVector<f64>,
}

fn check_rank(r: &DMatrix<f64>) -> Result<()> {
    let diag: Vec<f64> = (0..r.ncols()).map(|i| r[(i, i)].abs()).collect();
    let scale = diag.iter().cloned().fold(0.0, f64::max);
    if scale == 0.0 || diag.iter().any(|&d| d <= RANK_TOL * scale) {
        return Err(Error::Degenerate(
            "regression design is singular (constant or collinear series?)".into(),
        ));
    }
    Ok(())
}

/// Least squares through a Householder QR of the design.
pub(crate) fn ols(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<OlsFit> {
    let (n, k) = x.shape();
    if n <= k {
        return Err(Error::Data(format!(
            "{n} observations cannot identify {k} coefficients"
        )));
    }
    let qr = x.clone().qr();
    let r = qr.r();
    check_rank(&r)?;
    let qty = qr.q().transpose() * y;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::Degenerate("triangular solve failed".into()))?;
    let resid = y - x * &beta;
    let ssr = resid.norm_squared();
    let sigma2 = ssr / (n - k) as f64;

    // diag((X'X)^-1) = row norms of R^-1.
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or_else(|| Error::Degenerate("triangular solve failed".into()))?;
    let std_err = DVector::from_iterator(
        k,
        (0..k).map(|j| (sigma2 * r_inv.row(j).norm_squared()).sqrt()),
    );
    Ok(OlsFit { beta, ssr, std_err })
}

/// Residual sums of squares of every leading-column prefix model
/// `X[:, ..m]` for `m` in `min_cols..=ncols`, from one factorisation.
pub(crate) fn nested_ssr(x: &DMatrix<f64>, y: &DVector<f64>, min_cols: usize) -> Result<Vec<f64>> {
    let (n, k) = x.shape();
    if n <= k {
        return Err(Error::Data(format!(
            "{n} observations cannot identify {k} coefficients"
        )));
    }
    let qr = x.clone().qr();
    check_rank(&qr.r())?;
    let qty = qr.q().transpose() * y;
    let total = y.norm_squared();
    let mut explained = 0.0;
    let mut out = Vec::with_capacity(k + 1 - min_cols);
    for m in 0..=k {
        if m >= min_cols {
            out.push((total - explained).max(0.0));
        }
        if m < k {
            explained += qty[m] * qty[m];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_fit() {
        let x = DMatrix::from_fn(5, 2, |i, j| if j == 0 { 1.0 } else { i as f64 });
        let y = DVector::from_iterator(5, (0..5).map(|i| 2.0 + 3.0 * i as f64));
        let fit = ols(&x, &y).unwrap();
        assert!((fit.beta[0] - 2.0).abs() < 1e-12);
        assert!((fit.beta[1] - 3.0).abs() < 1e-12);
        assert!(fit.ssr < 1e-20);
    }

    #[test]
    fn collinear_design_is_degenerate() {
        let x = DMatrix::from_fn(6, 2, |_, _| 1.0);
        let y = DVector::from_element(6, 1.0);
        assert!(matches!(ols(&x, &y), Err(Error::Degenerate(_))));
    }

    #[test]
    fn nested_matches_separate_fits() {
        let x = DMatrix::from_fn(30, 3, |i, j| {
            ((i * 7 + j * 13) % 11) as f64 + j as f64 * 0.5
        });
        let y = DVector::from_iterator(30, (0..30).map(|i| ((i * 5) % 9) as f64));
        let nested = nested_ssr(&x, &y, 1).unwrap();
        for m in 1..=3 {
            let sub = x.columns(0, m).into_owned();
            let ssr = ols(&sub, &y).unwrap().ssr;
            assert!((nested[m - 1] - ssr).abs() < 1e-9 * ssr.max(1.0));
        }
    }
}
