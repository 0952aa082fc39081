//! Dense least squares and linear solves on top of nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Ordinary least squares fit.
#[derive(Debug, Clone)]
pub struct Ols {
    pub coef: Vec<f64>,
    pub std_err: Vec<f64>,
    pub ssr: f64,
    pub nobs: usize,
}

impl Ols {
    /// Gaussian log-likelihood with the ML variance estimate.
    pub fn loglik(&self) -> f64 {
        let n = self.nobs as f64;
        -0.5 * n * ((2.0 * std::f64::consts::PI).ln() + (self.ssr / n).ln() + 1.0)
    }

    pub fn aic(&self) -> f64 {
        -2.0 * self.loglik() + 2.0 * self.coef.len() as f64
    }

    pub fn t_value(&self, j: usize) -> f64 {
        self.coef[j] / self.std_err[j]
    }
}

/// Regresses `y` on the columns of the row-major design `x` (QR based).
pub fn ols(y: &[f64], x: &[Vec<f64>]) -> Result<Ols> {
    let n = y.len();
    let k = x.first().map_or(0, Vec::len);
    if x.len() != n || k == 0 || n <= k {
        return Err(Error::InvalidParameter(format!("ols needs n > k (n={n}, k={k})")));
    }
    let xm = DMatrix::from_fn(n, k, |i, j| x[i][j]);
    let yv = DVector::from_column_slice(y);
    let qr = xm.clone().qr();
    let r = qr.r();
    let scale = (0..k).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    if (0..k).any(|i| r[(i, i)].abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE)) {
        return Err(Error::Singular("least squares design"));
    }
    let qty = qr.q().transpose() * &yv;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or(Error::Singular("least squares design"))?;
    let resid = &yv - &xm * &beta;
    let ssr = resid.dot(&resid);
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or(Error::Singular("least squares design"))?;
    // (X'X)^-1 = R^-1 R^-T
    let cov_unscaled = &r_inv * r_inv.transpose();
    let s2 = ssr / (n - k) as f64;
    let std_err = (0..k).map(|j| (s2 * cov_unscaled[(j, j)]).sqrt()).collect();
    Ok(Ols {
        coef: beta.iter().copied().collect(),
        std_err,
        ssr,
        nobs: n,
    })
}

/// Solves the square system `a x = b` by LU with partial pivoting.
pub fn solve(a: &[Vec<f64>], b: &[f64]) -> Result<Vec<f64>> {
    let n = b.len();
    let am = DMatrix::from_fn(n, n, |i, j| a[i][j]);
    let lu = am.lu();
    let x = lu
        .solve(&DVector::from_column_slice(b))
        .ok_or(Error::Singular("linear system"))?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Singular("linear system"));
    }
    Ok(x.iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ols_recovers_exact_line() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![1.0, i as f64]).collect();
        let y: Vec<f64> = (0..10).map(|i| 2.0 + 3.0 * i as f64).collect();
        let fit = ols(&y, &x).unwrap();
        assert_abs_diff_eq!(fit.coef[0], 2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.coef[1], 3.0, epsilon = 1e-10);
        assert!(fit.ssr < 1e-18);
    }

    #[test]
    fn ols_standard_errors_match_closed_form() {
        // simple regression: se(b1) = sqrt(s2 / Sxx)
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        let y = [0.1, 0.9, 2.2, 2.8, 4.1, 5.3];
        let x: Vec<Vec<f64>> = xs.iter().map(|&v| vec![1.0, v]).collect();
        let fit = ols(&y, &x).unwrap();
        let mx = xs.iter().sum::<f64>() / 6.0;
        let sxx: f64 = xs.iter().map(|v| (v - mx).powi(2)).sum();
        let s2 = fit.ssr / 4.0;
        assert_abs_diff_eq!(fit.std_err[1], (s2 / sxx).sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn collinear_design_is_singular() {
        let x: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, 2.0 * i as f64]).collect();
        let y: Vec<f64> = (0..10).map(|i| i as f64).collect();
        assert!(matches!(ols(&y, &x), Err(Error::Singular(_))));
    }

    #[test]
    fn solve_small_system() {
        let a = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        let x = solve(&a, &[3.0, 5.0]).unwrap();
        assert_abs_diff_eq!(x[0], 0.8, epsilon = 1e-12);
        assert_abs_diff_eq!(x[1], 1.4, epsilon = 1e-12);
    }
}
