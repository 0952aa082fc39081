//! Ordinary and seasonal differencing and their inverse.

use crate::error::{Error, Result};

/// Applies `(1 - L)^d (1 - L^s)^D`; output length is `n - d - D*s`.
pub fn difference(y: &[f64], d: usize, seasonal_d: usize, s: usize) -> Result<Vec<f64>> {
    let lost = d + if s > 0 { seasonal_d * s } else { 0 };
    if y.len() <= lost {
        return Err(Error::TooShort {
            needed: lost + 1,
            have: y.len(),
        });
    }
    let mut w = y.to_vec();
    for _ in 0..d {
        w = w.windows(2).map(|p| p[1] - p[0]).collect();
    }
    if s > 0 {
        for _ in 0..seasonal_d {
            w = (s..w.len()).map(|t| w[t] - w[t - s]).collect();
        }
    }
    Ok(w)
}

/// Inverts [`difference`] given the first `d + D*s` original values.
///
/// Each level of integration is a running sum, accumulated with Neumaier
/// compensation so rounding does not grow with the series length.
pub fn integrate(w: &[f64], initial: &[f64], d: usize, seasonal_d: usize, s: usize) -> Result<Vec<f64>> {
    let sd = if s > 0 { seasonal_d } else { 0 };
    let lost = d + sd * s;
    if initial.len() != lost {
        return Err(Error::InvalidParameter(format!(
            "integration needs {lost} initial values, got {}",
            initial.len()
        )));
    }
    // starting values of each intermediate series, innermost last
    let mut stages = vec![initial.to_vec()];
    for _ in 0..d {
        let prev = stages.last().unwrap();
        stages.push(prev.windows(2).map(|p| p[1] - p[0]).collect());
    }
    for _ in 0..sd {
        let prev = stages.last().unwrap();
        stages.push((s..prev.len()).map(|t| prev[t] - prev[t - s]).collect());
    }

    let mut cur = w.to_vec();
    for level in (0..sd).rev() {
        let head = &stages[d + level];
        cur = undo(head, &cur, s);
    }
    for level in (0..d).rev() {
        let head = &stages[level];
        cur = undo(head, &cur, 1);
    }
    Ok(cur)
}

/// Rebuilds `x` from its `lag`-difference `dx` and its first `lag` values.
fn undo(head: &[f64], dx: &[f64], lag: usize) -> Vec<f64> {
    let mut out: Vec<f64> = head[..lag].to_vec();
    // one compensated accumulator per residue class
    let mut sums: Vec<f64> = head[..lag].to_vec();
    let mut comps = vec![0.0; lag];
    for (i, &v) in dx.iter().enumerate() {
        let k = i % lag;
        let t = sums[k] + v;
        if sums[k].abs() >= v.abs() {
            comps[k] += (sums[k] - t) + v;
        } else {
            comps[k] += (v - t) + sums[k];
        }
        sums[k] = t;
        out.push(t + comps[k]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_difference_of_cumsum() {
        assert_eq!(difference(&[1.0, 3.0, 6.0, 10.0], 1, 0, 0).unwrap(), vec![2.0, 3.0, 4.0]);
    }

    #[test]
    fn linear_becomes_constant() {
        let y: Vec<f64> = (0..20).map(|t| 3.0 + 0.5 * t as f64).collect();
        assert!(difference(&y, 1, 0, 0).unwrap().iter().all(|v| *v == 0.5));
    }

    #[test]
    fn seasonal_pattern_vanishes() {
        let y = [1.0, 4.0, -2.0, 0.5, 1.0, 4.0, -2.0, 0.5];
        let w = difference(&y, 0, 1, 4).unwrap();
        assert_eq!(w, vec![0.0; 4]);
    }

    #[test]
    fn too_short() {
        assert!(difference(&[1.0, 2.0], 2, 0, 0).is_err());
        assert!(difference(&[1.0; 12], 0, 1, 12).is_err());
    }

    #[test]
    fn round_trip_mixed() {
        let y: Vec<f64> = (0..60).map(|t| ((t * 37) % 11) as f64 * 0.7 - (t as f64).sqrt()).collect();
        for (d, sd, s) in [(1, 0, 0), (2, 0, 0), (0, 1, 5), (1, 1, 4), (2, 2, 3)] {
            let lost = d + sd * s;
            let w = difference(&y, d, sd, s).unwrap();
            let back = integrate(&w, &y[..lost], d, sd, s).unwrap();
            assert_eq!(back.len(), y.len());
            for (a, b) in back.iter().zip(&y) {
                assert!((a - b).abs() < 1e-9, "{d} {sd} {s}");
            }
        }
    }
}
