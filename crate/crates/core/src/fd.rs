//! Central finite differences with one optional Richardson level.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Values that finite differences can be taken of.
pub trait FdValue: Clone {
    /// `a·x + b·y`
    fn axpby(a: f64, x: &Self, b: f64, y: &Self) -> Self;
    fn norm(&self) -> f64;
}

impl FdValue for f64 {
    fn axpby(a: f64, x: &Self, b: f64, y: &Self) -> Self {
        a * x + b * y
    }
    fn norm(&self) -> f64 {
        self.abs()
    }
}

impl FdValue for Complex64 {
    fn axpby(a: f64, x: &Self, b: f64, y: &Self) -> Self {
        x * a + y * b
    }
    fn norm(&self) -> f64 {
        Complex64::norm(*self)
    }
}

impl FdValue for DMatrix<f64> {
    fn axpby(a: f64, x: &Self, b: f64, y: &Self) -> Self {
        x * a + y * b
    }
    fn norm(&self) -> f64 {
        self.amax()
    }
}

impl FdValue for DMatrix<Complex64> {
    fn axpby(a: f64, x: &Self, b: f64, y: &Self) -> Self {
        x.map(|z| z * a) + y.map(|z| z * b)
    }
    fn norm(&self) -> f64 {
        self.iter().fold(0.0, |m, z| m.max(z.norm()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdConfig {
    /// Relative step; the absolute step is `step · max(|x|, 1)` or a
    /// caller-chosen length scale.
    pub step: f64,
    /// Richardson levels, 0 or 1.
    pub richardson: u8,
    /// Relative tolerance for the Richardson consistency check, which fails
    /// when the disagreement exceeds ten times this.
    pub tol: f64,
}

impl Default for FdConfig {
    fn default() -> Self {
        FdConfig { step: 1e-4, richardson: 1, tol: 1e-6 }
    }
}

impl FdConfig {
    pub fn validate(&self) -> Result<()> {
        if !(1e-6..=1e-2).contains(&self.step) {
            return Err(Error::Invalid(format!("relative step {} outside [1e-6, 1e-2]", self.step)));
        }
        if self.richardson > 1 {
            return Err(Error::Invalid("only one Richardson level is supported".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Invalid("tolerance must be positive".into()));
        }
        Ok(())
    }

    /// Configuration for the `depth`-th level of a nested difference: each
    /// level out uses a ten times larger step and a correspondingly looser
    /// consistency check, which keeps rounding noise from compounding.
    pub fn nested(&self, depth: u32) -> FdConfig {
        let f = 10f64.powi(depth as i32);
        FdConfig { step: (self.step * f).min(1e-1), richardson: self.richardson, tol: self.tol * f * f }
    }
}

/// Result of a difference quotient: the estimate and the Richardson
/// disagreement (zero when Richardson is off).
#[derive(Debug, Clone)]
pub struct FdEstimate<T> {
    pub value: T,
    pub disagreement: f64,
}

impl<T: FdValue> FdEstimate<T> {
    /// Fail when the disagreement exceeds `10·tol·scale`, where the scale is
    /// the larger of the estimate and the caller's reference magnitude.
    pub fn checked(self, tol: f64, reference: f64) -> Result<T> {
        let scale = self.value.norm().max(reference).max(f64::MIN_POSITIVE);
        let limit = 10.0 * tol * scale;
        if !(self.disagreement <= limit) {
            return Err(Error::FdInconsistent { disagreement: self.disagreement, limit });
        }
        Ok(self.value)
    }
}

fn richardson<T: FdValue>(coarse: T, fine: T, on: bool) -> FdEstimate<T> {
    if !on {
        return FdEstimate { value: coarse, disagreement: 0.0 };
    }
    let value = T::axpby(4.0 / 3.0, &fine, -1.0 / 3.0, &coarse);
    let disagreement = T::axpby(1.0, &value, -1.0, &fine).norm();
    FdEstimate { value, disagreement }
}

/// `g'(0)` from evaluations `g(±h)` (and `g(±h/2)` with Richardson).
pub fn first<T, G>(g: G, h: f64, rich: bool) -> Result<FdEstimate<T>>
where
    T: FdValue,
    G: Fn(f64) -> Result<T>,
{
    let quotient = |h: f64| -> Result<T> { Ok(T::axpby(0.5 / h, &g(h)?, -0.5 / h, &g(-h)?)) };
    let coarse = quotient(h)?;
    let fine = if rich { quotient(h / 2.0)? } else { coarse.clone() };
    Ok(richardson(coarse, fine, rich))
}

/// `g''(0)` given `g(0)`.
pub fn second<T, G>(g: G, g0: &T, h: f64, rich: bool) -> Result<FdEstimate<T>>
where
    T: FdValue,
    G: Fn(f64) -> Result<T>,
{
    let quotient = |h: f64| -> Result<T> {
        let sum = T::axpby(1.0, &g(h)?, 1.0, &g(-h)?);
        Ok(T::axpby(1.0 / (h * h), &sum, -2.0 / (h * h), g0))
    };
    let coarse = quotient(h)?;
    let fine = if rich { quotient(h / 2.0)? } else { coarse.clone() };
    Ok(richardson(coarse, fine, rich))
}

/// `∂²g/∂s∂t` at the origin.
pub fn mixed<T, G>(g: G, h1: f64, h2: f64, rich: bool) -> Result<FdEstimate<T>>
where
    T: FdValue,
    G: Fn(f64, f64) -> Result<T>,
{
    let quotient = |a: f64, b: f64| -> Result<T> {
        let p = T::axpby(1.0, &g(a, b)?, 1.0, &g(-a, -b)?);
        let m = T::axpby(1.0, &g(a, -b)?, 1.0, &g(-a, b)?);
        Ok(T::axpby(0.25 / (a * b), &p, -0.25 / (a * b), &m))
    };
    let coarse = quotient(h1, h2)?;
    let fine = if rich { quotient(h1 / 2.0, h2 / 2.0)? } else { coarse.clone() };
    Ok(richardson(coarse, fine, rich))
}
