//! The Grenier operator `𝔏_n f(W) = lim_{v→∞} v^{-(s_1+ξ_1)} f([v, x, W])`
//! sampled along a schedule, and the stable-chain check for Eisenstein
//! series.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::cosets::max_height;
use super::series::{EisensteinField, TruncationParams};
use crate::error::{Error, Result};
use crate::field::{batched, ScalarField};
use crate::geometry::PartialIwasawa;
use crate::linalg::SpdMatrix;
use crate::selberg::SpectralParameter;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrenierSample {
    pub v: f64,
    #[serde(with = "crate::json")]
    pub value: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrenierLimit {
    #[serde(with = "crate::json")]
    pub exponent: Complex64,
    pub samples: Vec<GrenierSample>,
    /// Scaled value at the largest `v`.
    #[serde(with = "crate::json")]
    pub last: Complex64,
    /// Aitken extrapolation of the last three samples when they contract,
    /// otherwise the last value.
    #[serde(with = "crate::json")]
    pub limit: Complex64,
    /// Observed power-law decay of successive differences in `v`.
    pub rate: Option<f64>,
    pub converged: bool,
    pub tol: f64,
}

fn check_schedule(v: &[f64]) -> Result<()> {
    if v.len() < 3 {
        return Err(Error::Invalid(format!("the v schedule needs at least 3 points, got {}", v.len())));
    }
    if !(v[0] > 0.0) || v.windows(2).any(|p| !(p[1] > p[0])) {
        return Err(Error::Invalid("the v schedule must be positive and strictly increasing".into()));
    }
    if v[v.len() - 1] / v[0] < 100.0 {
        return Err(Error::Invalid("the v schedule must span at least two decades".into()));
    }
    Ok(())
}

/// Samples `v^{-exponent}·f([v, x, W])` along the schedule.
pub fn grenier_scaled(f: &dyn ScalarField, exponent: Complex64, w: &SpdMatrix, v_schedule: &[f64], x_probe: &[f64], tol: f64) -> Result<GrenierLimit> {
    check_schedule(v_schedule)?;
    if x_probe.len() != w.n() {
        return Err(Error::DimensionMismatch { expected: w.n(), got: x_probe.len() });
    }
    let points = v_schedule
        .iter()
        .map(|&v| Ok(PartialIwasawa::new(v, x_probe.to_vec(), w.clone())?.reconstruct()))
        .collect::<Result<Vec<_>>>()?;
    let vals = f.eval_many(&points)?;
    let samples: Vec<GrenierSample> = v_schedule
        .iter()
        .zip(&vals)
        .map(|(&v, fv)| GrenierSample { v, value: fv * (-exponent * v.ln()).exp() })
        .collect();
    let k = samples.len();
    let g: Vec<Complex64> = samples.iter().map(|s| s.value).collect();
    let last = g[k - 1];
    let d1 = g[k - 1] - g[k - 2];
    let d0 = g[k - 2] - g[k - 3];
    let rate = (d1.norm() > 0.0 && d0.norm() > 0.0)
        .then(|| -(d1.norm() / d0.norm()).ln() / (v_schedule[k - 1] / v_schedule[k - 2]).ln());
    let ratio = if d0.norm() > 0.0 { d1.norm() / d0.norm() } else { f64::INFINITY };
    let limit = if ratio < 0.9 && (d1 - d0).norm() > 0.0 {
        let a = last - d1 * d1 / (d1 - d0);
        if a.re.is_finite() && a.im.is_finite() {
            a
        } else {
            last
        }
    } else {
        last
    };
    let converged = d1.norm() <= tol * last.norm().max(f64::MIN_POSITIVE) && last.re.is_finite();
    Ok(GrenierLimit { exponent, samples, last, limit, rate, converged, tol })
}

/// `𝔏_n f` at `W ∈ 𝒫_{n-1}` with the exponent `s_1 + ξ_1`.
pub fn grenier_operator(f: &dyn ScalarField, s: &SpectralParameter, w: &SpdMatrix, v_schedule: &[f64], x_probe: &[f64], tol: f64) -> Result<GrenierLimit> {
    let n = w.n() + 1;
    if s.n != n || s.s.len() + 1 != n {
        return Err(Error::DimensionMismatch { expected: n - 1, got: s.s.len() });
    }
    grenier_scaled(f, s.s[0] + s.xi(1), w, v_schedule, x_probe, tol)
}

/// A probe `(W, x)` for one level of the chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainProbe {
    #[serde(rename = "W")]
    pub w: SpdMatrix,
    pub x: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainEntry {
    pub v: f64,
    #[serde(with = "crate::json")]
    pub scaled: Complex64,
    #[serde(with = "crate::json")]
    pub target: Complex64,
    pub rel_error: f64,
    pub passed: bool,
    pub limit: GrenierLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainLevel {
    pub n: usize,
    pub s: SpectralParameter,
    #[serde(rename = "H")]
    pub h: i64,
    pub target_h: i64,
    pub entries: Vec<ChainEntry>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StableChainReport {
    pub levels: Vec<ChainLevel>,
    pub tol: f64,
    pub passed: bool,
}

/// Largest dimension the chain check accepts.
pub const CHAIN_MAX_DIM: usize = 3;

/// Checks `𝔏_n E_n(α_n, ·) ≈ E_{n-1}(α_{n-1}, ·)` for `n = n_max, …, 2`,
/// where `α_{n-1}` drops the first entry of `α_n` and `α_{n_max} = s`.
/// `probes[n-2]` holds the probes of level `n`; `E_n` is truncated at
/// `trunc.H` (capped by the guardrail of its dimension) and targets at the
/// largest admissible height. The scaled value at the last schedule point
/// is compared against the target.
pub fn stable_chain_check(
    s: &SpectralParameter,
    probes: &[Vec<ChainProbe>],
    trunc: &TruncationParams,
    v_schedule: &[f64],
    tol: f64,
) -> Result<StableChainReport> {
    let n_max = s.n;
    if !(2..=CHAIN_MAX_DIM).contains(&n_max) {
        return Err(Error::Guardrail(format!("stable chain supports 2 <= n <= {CHAIN_MAX_DIM}, got {n_max}")));
    }
    if probes.len() != n_max - 1 {
        return Err(Error::DimensionMismatch { expected: n_max - 1, got: probes.len() });
    }
    check_schedule(v_schedule)?;
    let mut levels = Vec::new();
    let mut alpha = s.clone();
    for n in (2..=n_max).rev() {
        let lower = alpha.truncated();
        let level_probes = &probes[n - 2];
        for p in level_probes {
            if p.w.n() != n - 1 || p.x.len() != n - 1 {
                return Err(Error::DimensionMismatch { expected: n - 1, got: p.w.n() });
            }
        }
        let h = trunc.h.min(max_height(n)?);
        let field = EisensteinField::new(alpha.clone(), TruncationParams { h, ..*trunc })?;
        let limits = batched(&field, |g| level_probes.iter().map(|p| grenier_operator(g, &alpha, &p.w, v_schedule, &p.x, tol)).collect::<Result<Vec<_>>>())?;
        let target_h = if n - 1 == 1 { 1 } else { max_height(n - 1)? };
        let targets: Vec<Complex64> = if n - 1 == 1 {
            vec![Complex64::new(1.0, 0.0); level_probes.len()]
        } else {
            let ws: Vec<SpdMatrix> = level_probes.iter().map(|p| p.w.clone()).collect();
            EisensteinField::new(lower.clone(), TruncationParams::new(target_h)?)?.eval_many(&ws)?
        };
        let entries: Vec<ChainEntry> = limits
            .into_iter()
            .zip(targets)
            .map(|(limit, target)| {
                let rel_error = (limit.last - target).norm() / target.norm();
                ChainEntry { v: v_schedule[v_schedule.len() - 1], scaled: limit.last, target, rel_error, passed: rel_error < tol, limit }
            })
            .collect();
        let passed = entries.iter().all(|e| e.passed);
        levels.push(ChainLevel { n, s: alpha.clone(), h, target_h, entries, passed });
        alpha = lower;
    }
    let passed = levels.iter().all(|l| l.passed);
    Ok(StableChainReport { levels, tol, passed })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sp(n: usize, s: &[f64]) -> SpectralParameter {
        SpectralParameter::real(n, s).unwrap()
    }

    #[test]
    fn constants_pass_through() {
        let f = |_: &SpdMatrix| Ok(Complex64::new(3.0, 0.0));
        let l = grenier_operator(&f, &sp(3, &[0.0, 0.0]), &SpdMatrix::identity(2), &[1.0, 10.0, 100.0], &[0.1, 0.2], 1e-12).unwrap();
        assert_eq!(l.limit, Complex64::new(3.0, 0.0));
        assert!(l.converged);
    }

    #[test]
    fn schedule_validation() {
        let f = |_: &SpdMatrix| Ok(Complex64::new(1.0, 0.0));
        let w = SpdMatrix::identity(1);
        let s = sp(2, &[2.0]);
        assert!(grenier_operator(&f, &s, &w, &[1.0, 10.0], &[0.0], 1e-6).is_err());
        assert!(grenier_operator(&f, &s, &w, &[1.0, 5.0, 50.0], &[0.0], 1e-6).is_err());
        assert!(grenier_operator(&f, &s, &w, &[1.0, 0.5, 500.0], &[0.0], 1e-6).is_err());
    }

    #[test]
    fn rank_two_limit_is_one() {
        let s = sp(2, &[2.5]);
        let e = EisensteinField::new(s.clone(), TruncationParams::new(50).unwrap()).unwrap();
        let l = grenier_operator(&e, &s, &SpdMatrix::identity(1), &[10.0, 100.0, 1000.0], &[0.3], 1e-2).unwrap();
        assert!((l.last.re - 1.0).abs() < 1e-2, "{:?}", l);
        assert!(l.converged);
    }

    #[test]
    fn wrong_exponent_diverges() {
        let s = sp(2, &[2.5]);
        let e = EisensteinField::new(s.clone(), TruncationParams::new(50).unwrap()).unwrap();
        let l = grenier_scaled(&e, Complex64::new(2.6, 0.0), &SpdMatrix::identity(1), &[10.0, 100.0, 1000.0], &[0.3], 1e-2).unwrap();
        assert!(!l.converged);
        assert!(l.samples.windows(2).all(|p| p[1].value.norm() < 0.85 * p[0].value.norm()));
    }

    #[test]
    fn small_chain_passes() {
        let w = SpdMatrix::from_rows(&[vec![1.3, 0.2], vec![0.2, 0.8]]).unwrap().normalize_det();
        let probes = vec![
            vec![ChainProbe { w: SpdMatrix::identity(1), x: vec![0.4] }],
            vec![ChainProbe { w, x: vec![0.1, -0.3] }],
        ];
        let r = stable_chain_check(&sp(3, &[2.5, 2.5]), &probes, &TruncationParams::new(6).unwrap(), &[10.0, 100.0, 1000.0], 1e-2).unwrap();
        assert!(r.passed, "{r:#?}");
        assert_eq!(r.levels.len(), 2);
    }
}
