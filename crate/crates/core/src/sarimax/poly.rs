//! Lag polynomials and their seasonal expansion.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    /// `1 - c_1 L - ... - c_k L^k`
    Ar,
    /// `1 + c_1 L + ... + c_k L^k`
    Ma,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagPolynomial {
    pub coefficients: Vec<f64>,
    pub convention: Convention,
}

impl LagPolynomial {
    pub fn new(coefficients: Vec<f64>, convention: Convention) -> Result<Self> {
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter("non-finite lag coefficient".into()));
        }
        Ok(Self {
            coefficients,
            convention,
        })
    }

    pub fn ar(coefficients: &[f64]) -> Result<Self> {
        Self::new(coefficients.to_vec(), Convention::Ar)
    }

    pub fn ma(coefficients: &[f64]) -> Result<Self> {
        Self::new(coefficients.to_vec(), Convention::Ma)
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len()
    }

    fn sign(&self) -> f64 {
        match self.convention {
            Convention::Ar => -1.0,
            Convention::Ma => 1.0,
        }
    }

    /// Full coefficient vector `[1, a_1, ..., a_k]` of the polynomial in `L`.
    pub fn full(&self) -> Vec<f64> {
        let s = self.sign();
        std::iter::once(1.0).chain(self.coefficients.iter().map(|c| s * c)).collect()
    }
}

/// Product `nonseasonal(L) * seasonal(L^s)`, in the shared convention.
pub fn expand_polynomials(nonseasonal: &LagPolynomial, seasonal: &LagPolynomial, s: usize) -> Result<LagPolynomial> {
    if nonseasonal.convention != seasonal.convention {
        return Err(Error::InvalidParameter("cannot multiply AR and MA polynomials".into()));
    }
    if seasonal.degree() == 0 {
        return Ok(nonseasonal.clone());
    }
    if s == 0 {
        return Err(Error::InvalidParameter("seasonal polynomial requires a period".into()));
    }
    let a = nonseasonal.full();
    let mut b = vec![0.0; seasonal.degree() * s + 1];
    for (j, c) in seasonal.full().into_iter().enumerate() {
        b[j * s] = c;
    }
    let mut prod = vec![0.0; a.len() + b.len() - 1];
    for (i, ai) in a.iter().enumerate() {
        for (j, bj) in b.iter().enumerate() {
            prod[i + j] += ai * bj;
        }
    }
    let sign = nonseasonal.sign();
    LagPolynomial::new(prod[1..].iter().map(|c| sign * c).collect(), nonseasonal.convention)
}

/// Full coefficients of `(1 - L)^d (1 - L^s)^D`.
pub fn differencing_polynomial(d: usize, seasonal_d: usize, s: usize) -> Vec<f64> {
    let mut poly = vec![1.0];
    let mut mul = |lag: usize| {
        let mut next = vec![0.0; poly.len() + lag];
        for (i, c) in poly.iter().enumerate() {
            next[i] += c;
            next[i + lag] -= c;
        }
        poly = next;
    };
    for _ in 0..d {
        mul(1);
    }
    if s > 0 {
        for _ in 0..seasonal_d {
            mul(s);
        }
    }
    poly
}
