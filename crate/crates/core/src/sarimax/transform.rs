//! Maps between unconstrained reals and stationary (or invertible) lag
//! coefficients, through partial autocorrelations.
//!
//! `u -> r = u / sqrt(1 + u^2)` puts each partial in (-1, 1); the
//! Durbin-Levinson recursion turns partials into AR coefficients of a
//! stationary polynomial. MA coefficients reuse the map with a sign flip,
//! since `1 + sum theta_i L^i` is invertible iff `1 - sum (-theta_i) L^i`
//! is stationary.

/// AR coefficients (`y_t = sum phi_i y_{t-i} + ...`) from partial autocorrelations.
pub fn pacf_to_ar(partials: &[f64]) -> Vec<f64> {
    let mut phi: Vec<f64> = Vec::with_capacity(partials.len());
    for &r in partials {
        let prev = phi.clone();
        let k = prev.len();
        for j in 0..k {
            phi[j] = prev[j] - r * prev[k - 1 - j];
        }
        phi.push(r);
    }
    phi
}

/// Partial autocorrelations of a stationary AR polynomial, or `None` when the
/// polynomial has a root on or inside the unit circle.
pub fn ar_to_pacf(phi: &[f64]) -> Option<Vec<f64>> {
    let mut a = phi.to_vec();
    let mut partials = vec![0.0; phi.len()];
    for k in (1..=phi.len()).rev() {
        let kappa = a[k - 1];
        if !kappa.is_finite() || kappa.abs() >= 1.0 {
            return None;
        }
        partials[k - 1] = kappa;
        let denom = 1.0 - kappa * kappa;
        let prev = a[..k - 1].to_vec();
        for j in 0..k - 1 {
            a[j] = (prev[j] + kappa * prev[k - 2 - j]) / denom;
        }
        a.truncate(k - 1);
    }
    Some(partials)
}

pub fn pacf_to_ma(partials: &[f64]) -> Vec<f64> {
    pacf_to_ar(partials).into_iter().map(|c| -c).collect()
}

pub fn ma_to_pacf(theta: &[f64]) -> Option<Vec<f64>> {
    let neg: Vec<f64> = theta.iter().map(|c| -c).collect();
    ar_to_pacf(&neg)
}

pub fn is_invertible(theta: &[f64]) -> bool {
    ma_to_pacf(theta).is_some()
}

fn squash(u: f64) -> f64 {
    u / (1.0 + u * u).sqrt()
}

fn unsquash(r: f64) -> f64 {
    r / (1.0 - r * r).sqrt()
}

pub fn constrain_ar(u: &[f64]) -> Vec<f64> {
    pacf_to_ar(&u.iter().map(|&v| squash(v)).collect::<Vec<_>>())
}

pub fn constrain_ma(u: &[f64]) -> Vec<f64> {
    pacf_to_ma(&u.iter().map(|&v| squash(v)).collect::<Vec<_>>())
}

pub fn unconstrain_ar(phi: &[f64]) -> Option<Vec<f64>> {
    ar_to_pacf(phi).map(|r| r.into_iter().map(unsquash).collect())
}

pub fn unconstrain_ma(theta: &[f64]) -> Option<Vec<f64>> {
    ma_to_pacf(theta).map(|r| r.into_iter().map(unsquash).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ar2_known_partials() {
        // AR(2) with phi = (0.75, -0.25): pacf_2 = -0.25, pacf_1 = 0.75 / 1.25
        let r = ar_to_pacf(&[0.75, -0.25]).unwrap();
        assert!((r[1] + 0.25).abs() < 1e-15);
        assert!((r[0] - 0.6).abs() < 1e-15);
        let back = pacf_to_ar(&r);
        assert!((back[0] - 0.75).abs() < 1e-15 && (back[1] + 0.25).abs() < 1e-15);
    }

    #[test]
    fn unit_root_rejected() {
        assert!(ar_to_pacf(&[1.0]).is_none());
        assert!(ar_to_pacf(&[0.5, 0.6]).is_none());
        assert!(is_invertible(&[0.9]));
        assert!(!is_invertible(&[-1.2]));
        assert_eq!(ar_to_pacf(&[]), Some(vec![]));
    }

    proptest! {
        #[test]
        fn round_trip(u in proptest::collection::vec(-4.0f64..4.0, 0..8)) {
            let phi = constrain_ar(&u);
            let back = unconstrain_ar(&phi).unwrap();
            for (a, b) in u.iter().zip(&back) {
                prop_assert!((a - b).abs() < 1e-6 * (1.0 + a.abs()));
            }
            let theta = constrain_ma(&u);
            prop_assert!(is_invertible(&theta));
        }
    }
}
