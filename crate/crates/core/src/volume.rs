//! Volume of the fundamental domain: Siegel's formula and a Monte Carlo
//! estimate over the Grenier domain.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::PartialIwasawa;
use crate::linalg::SpdMatrix;
use crate::reduction::{grenier_membership, F3Mode};
use crate::rng::sharded;
use crate::special::{sphere_volume, zeta};

/// Siegel parameter of the sampling superset `𝒮_{4/3,1/2}`.
const SIEGEL_T: f64 = 4.0 / 3.0;

/// `n·2^{n-1}·∏_{k=2}^n ζ(k)/Vol(S^{k-1})`, the volume of
/// `SL(n,ℤ)\𝔓_n`.
pub fn volume_formula(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::Unsupported { n, reason: "volume formula needs n >= 2".into() });
    }
    let prod: f64 = (2..=n).map(|k| zeta(k as f64) / sphere_volume(k)).product();
    Ok(n as f64 * 2f64.powi(n as i32 - 1) * prod)
}

/// `[SL(n,ℤ)\𝔓_n : Γ_n\𝔓_n]`: 2 for even `n` (where `-I ∈ SL(n,ℤ)` acts
/// trivially while `GL(n,ℤ)/{±I}` has index 2 over `SL(n,ℤ)/{±I}`), 1 for
/// odd `n`.
pub fn gl_index(n: usize) -> f64 {
    if n % 2 == 0 {
        2.0
    } else {
        1.0
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VolumeReport {
    pub n: usize,
    /// Siegel's formula value for `SL(n,ℤ)\𝔓_n`.
    pub formula_sl: f64,
    pub index: f64,
    /// `formula_sl / index`, the volume of the Grenier domain.
    pub target_gamma: f64,
    pub estimate: Option<f64>,
    pub stderr: Option<f64>,
    pub samples: usize,
}

pub fn volume_report_formula(n: usize) -> Result<VolumeReport> {
    let f = volume_formula(n)?;
    let index = gl_index(n);
    Ok(VolumeReport { n, formula_sl: f, index, target_gamma: f / index, estimate: None, stderr: None, samples: 0 })
}

/// Deep in the cusp membership no longer depends on how large `v` and `w`
/// are, so samples are clamped here to keep the matrices well conditioned.
const CUSP_CAP: f64 = 1e4;

/// One point of `𝒮_{4/3,1/2}` drawn with density proportional to the
/// invariant measure, and the total measure of that Siegel set.
fn sample_point<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<SpdMatrix> {
    let lower = SIEGEL_T.powf(-0.5);
    let u = |rng: &mut R| 1.0 - rng.gen::<f64>();
    match n {
        2 => {
            // v ≥ t^{-1/2} with density v^{-2}
            let v = (lower / u(rng)).min(CUSP_CAP);
            let x = rng.gen::<f64>() - 0.5;
            PartialIwasawa::new(v, vec![x], SpdMatrix::identity(1)).map(|p| p.reconstruct())
        }
        3 => {
            // y₂ = w ≥ t^{-1/2} with density w^{-3}; y₁ = v^{3/4}w^{-1/2} ≥ t^{-1/2}
            // gives v ≥ t^{-2/3}w^{2/3} with density v^{-5/2}.
            let w = (lower * u(rng).powf(-0.5)).min(CUSP_CAP);
            let v0 = SIEGEL_T.powf(-2.0 / 3.0) * w.powf(2.0 / 3.0);
            let v = (v0 * u(rng).powf(-2.0 / 3.0)).min(CUSP_CAP);
            let x = vec![rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5];
            let xw = rng.gen::<f64>() - 0.5;
            let wm = PartialIwasawa::new(w, vec![xw], SpdMatrix::identity(1))?.reconstruct();
            PartialIwasawa::new(v, x, wm).map(|p| p.reconstruct())
        }
        _ => Err(Error::Unsupported { n, reason: "Monte Carlo volume supports n = 2, 3".into() }),
    }
}

fn siegel_measure(n: usize) -> f64 {
    match n {
        2 => SIEGEL_T.sqrt(),
        _ => SIEGEL_T * SIEGEL_T / 3.0,
    }
}

/// Monte Carlo volume of `𝔉_n` (strict translation box) as the Siegel-set
/// measure times the fraction of invariantly distributed samples that land
/// in the domain.
pub fn volume_mc(n: usize, samples: usize, seed: u64) -> Result<VolumeReport> {
    if !(2..=3).contains(&n) {
        return Err(Error::Unsupported { n, reason: "Monte Carlo volume supports n = 2, 3".into() });
    }
    if samples == 0 {
        return Err(Error::Invalid("at least one sample is needed".into()));
    }
    let hits = sharded(samples, seed, |rng, count| -> Result<usize> {
        let mut h = 0;
        for _ in 0..count {
            let y = sample_point(rng, n)?;
            if grenier_membership(&y, F3Mode::Strict)?.member {
                h += 1;
            }
        }
        Ok(h)
    });
    let mut total = 0usize;
    for h in hits {
        total += h?;
    }
    let p = total as f64 / samples as f64;
    let m = siegel_measure(n);
    let mut rep = volume_report_formula(n)?;
    rep.estimate = Some(m * p);
    rep.stderr = Some(m * (p * (1.0 - p) / samples as f64).sqrt());
    rep.samples = samples;
    Ok(rep)
}
