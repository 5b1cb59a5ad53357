//! Rank-one K-Bessel integral `K(s|a,b) = ∫_0^∞ y^s e^{-(ay + b/y)} dy/y`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadOptions};

/// Sign of the exponent in the integrand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    /// `e^{-(ay + b/y)}`, the convergent reading.
    #[default]
    Decaying,
    /// `e^{+(ay + b/y)}` as typeset; diverges for positive `a, b`.
    Verbatim,
}

/// Exponent drop (in nats) at which the integrand is truncated.
const TRUNCATION: f64 = 60.0;

pub fn k_bessel_rank1(s: Complex64, a: f64, b: f64) -> Result<Complex64> {
    k_bessel_rank1_with(s, a, b, Convention::Decaying)
}

pub fn k_bessel_rank1_with(s: Complex64, a: f64, b: f64, convention: Convention) -> Result<Complex64> {
    if convention == Convention::Verbatim {
        return Err(Error::Invalid(
            "the integrand e^{+(ay+b/y)} grows without bound for a, b > 0; use the decaying convention".into(),
        ));
    }
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::Invalid(format!("K-Bessel needs a, b > 0, got a = {a}, b = {b}")));
    }
    if !(s.re.is_finite() && s.im.is_finite()) {
        return Err(Error::Invalid("non-finite s".into()));
    }
    // With y = e^t the integrand is exp(st - a·e^t - b·e^{-t}); its real part
    // is log-concave with its peak where a·u² - σ·u - b = 0, u = e^t.
    let sigma = s.re;
    let g = |t: f64| sigma * t - a * t.exp() - b * (-t).exp();
    let u = (sigma + (sigma * sigma + 4.0 * a * b).sqrt()) / (2.0 * a);
    let tp = u.ln();
    let gmax = g(tp);
    let edge = |dir: f64| {
        let mut step = 1.0;
        while g(tp + dir * step) > gmax - TRUNCATION {
            step *= 2.0;
        }
        tp + dir * step
    };
    let (lo, hi) = (edge(-1.0), edge(1.0));
    let f = |t: f64| (s * t - a * t.exp() - b * (-t).exp() - gmax).exp();
    let r = integrate(f, lo, hi, QuadOptions::default())?;
    Ok(r.value * gmax.exp())
}
