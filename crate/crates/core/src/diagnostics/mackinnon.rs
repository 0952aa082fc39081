//! MacKinnon response-surface approximations for the Dickey-Fuller
//! distribution, single-series case with a constant term.
//!
//! p-value coefficients: MacKinnon (1994), "Approximate asymptotic
//! distribution functions for unit-root and cointegration tests",
//! Journal of Business & Economic Statistics 12, Table 3 (tau_c, N=1).
//! Critical values: MacKinnon (2010), "Critical values for cointegration
//! tests", Queen's Economics Department Working Paper 1227, Table 2
//! (constant, N=1). These are the same tables shipped with statsmodels
//! (`statsmodels/tsa/adfvalues.py`).

use statrs::distribution::{ContinuousCDF, Normal};

const TAU_MAX: f64 = 2.74;
const TAU_MIN: f64 = -18.83;
const TAU_STAR: f64 = -1.61;

/// Polynomial in the statistic for the lower tail (`stat <= TAU_STAR`).
const TAU_SMALLP: [f64; 3] = [2.1659, 1.4412, 3.8269e-2];
/// Polynomial for the upper region.
const TAU_LARGEP: [f64; 4] = [1.7339, 9.3202e-1, -1.2745e-1, -1.0368e-2];

/// Rows: 1%, 5%, 10%. Columns: b0 + b1/T + b2/T^2 + b3/T^3.
const CRIT_2010: [[f64; 4]; 3] = [
    [-3.43035, -6.5393, -16.786, -79.433],
    [-2.86154, -2.8903, -4.234, -40.040],
    [-2.56677, -1.5384, -2.809, 0.0],
];

fn poly(coef: &[f64], x: f64) -> f64 {
    coef.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Approximate p-value of an ADF statistic (constant-only regression).
pub fn p_value(stat: f64) -> f64 {
    if stat > TAU_MAX {
        return 1.0;
    }
    if stat < TAU_MIN {
        return 0.0;
    }
    let z = if stat <= TAU_STAR {
        poly(&TAU_SMALLP, stat)
    } else {
        poly(&TAU_LARGEP, stat)
    };
    Normal::new(0.0, 1.0).expect("standard normal").cdf(z)
}

/// Finite-sample critical values at 1%, 5% and 10% for `nobs` regression rows.
pub fn critical_values(nobs: usize) -> [f64; 3] {
    let inv = 1.0 / nobs as f64;
    CRIT_2010.map(|row| poly(&row, inv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn matches_statsmodels_reference_points() {
        // statsmodels 0.14 mackinnonp / mackinnoncrit
        assert_relative_eq!(p_value(-1.1981375240849856), 0.6743963884323163, max_relative = 1e-9);
        assert_relative_eq!(p_value(-3.733196752656929), 0.0036697159813519225, max_relative = 1e-9);
        let cv = critical_values(8000);
        assert_relative_eq!(cv[0], -3.43116767, max_relative = 1e-8);
        assert_relative_eq!(cv[1], -2.86190135, max_relative = 1e-8);
        assert_relative_eq!(cv[2], -2.56696234, max_relative = 1e-8);
    }

    #[test]
    fn clamps_outside_table() {
        assert_eq!(p_value(-25.0), 0.0);
        assert_eq!(p_value(3.0), 1.0);
    }

    #[test]
    fn monotone_in_statistic() {
        let mut prev = 0.0;
        for i in 0..400 {
            let s = -18.0 + i as f64 * 0.05;
            let p = p_value(s);
            assert!(p >= prev - 1e-12, "p not monotone at {s}");
            prev = p;
        }
    }
}
