use rand::Rng;
use serde::{Deserialize, Serialize};

use super::grenier::{grenier_membership, grenier_reduce, F3Mode};
use crate::error::{Error, Result};
use crate::geometry::{full_iwasawa, congruence_int, FullIwasawa};
use crate::linalg::{IntMatrix, SpdMatrix};
use crate::rng::{random_unit_det, sharded};

const TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SiegelSetParams {
    pub t: f64,
}

impl SiegelSetParams {
    pub fn new(t: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Invalid(format!("Siegel parameter t must be positive, got {t}")));
        }
        Ok(SiegelSetParams { t })
    }
}

/// `y_i ≥ t^{-1/2}` for all `i` and `|x_ij| ≤ 1/2`.
pub fn siegel_membership(y: &SpdMatrix, params: SiegelSetParams) -> Result<bool> {
    let f = full_iwasawa(y)?;
    Ok(in_siegel(&f, params.t))
}

fn in_siegel(f: &FullIwasawa, t: f64) -> bool {
    let lower = t.powf(-0.5);
    f.ys.iter().all(|&yi| yi >= lower * (1.0 - TOL)) && f.xs.iter().flatten().all(|x| x.abs() <= 0.5 + TOL)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SandwichReport {
    pub n: usize,
    pub samples: usize,
    /// Sampled points of `𝒮_{1,1/2}` not found in any `𝔉_n[γ]`, `γ ∈ D_n`.
    pub lower_violations: usize,
    /// Points of `𝔉_n^♯` found outside `𝒮_{4/3,1/2}`.
    pub upper_violations: usize,
    /// Up to five offending matrices, in sample order.
    pub counterexamples: Vec<SpdMatrix>,
}

/// All `diag(±1, …, ±1)` modulo `±I`.
fn sign_diagonals(n: usize) -> Vec<IntMatrix> {
    (0..1u32 << (n - 1))
        .map(|mask| {
            let d: Vec<i64> = std::iter::once(1).chain((0..n - 1).map(|i| if mask >> i & 1 == 1 { -1 } else { 1 })).collect();
            IntMatrix::diagonal(&d)
        })
        .collect()
}

/// Random point of `𝒮_{1,1/2}`: `y_i` log-uniform in `[1, 4]`, `x_ij`
/// uniform in `[-1/2, 1/2]`.
fn sample_siegel<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<SpdMatrix> {
    let ys: Vec<f64> = (0..n - 1).map(|_| 4f64.powf(rng.gen::<f64>())).collect();
    let xs = (0..n).map(|i| (i + 1..n).map(|_| rng.gen::<f64>() - 0.5).collect()).collect();
    let logy: f64 = ys.iter().enumerate().map(|(k, y)| 2.0 * (n - 1 - k) as f64 * y.ln()).sum::<f64>() / n as f64;
    FullIwasawa { y: logy.exp(), ys, xs }.reconstruct().map(|y| y.normalize_det())
}

/// Empirical check of `𝒮_{1,1/2} ⊆ 𝔉_n^♯ ⊆ 𝒮_{4/3,1/2}` on `samples`
/// points of each kind. Uses the strict reading of (F3).
pub fn sandwich_probe(samples: usize, n: usize, seed: u64) -> Result<SandwichReport> {
    if !(2..=3).contains(&n) {
        return Err(Error::Unsupported { n, reason: "sandwich probe supports n = 2, 3".into() });
    }
    let signs = sign_diagonals(n);
    let parts = sharded(samples, seed, |rng, count| -> Result<SandwichReport> {
        let mut rep = SandwichReport { n, samples: count, ..Default::default() };
        for _ in 0..count {
            // Upper containment: 𝔉_n[γ] ⊆ 𝒮_{4/3,1/2}.
            let r = grenier_reduce(&random_unit_det(rng, n))?.r;
            for g in &signs {
                let z = congruence_int(&r, g)?;
                if !siegel_membership(&z, SiegelSetParams { t: 4.0 / 3.0 })? {
                    rep.upper_violations += 1;
                    rep.counterexamples.push(z);
                }
            }
            // Lower containment: some Y[γ] lies in 𝔉_n.
            let s = sample_siegel(rng, n)?;
            let mut found = false;
            for g in &signs {
                if grenier_membership(&congruence_int(&s, g)?, F3Mode::Strict)?.member {
                    found = true;
                    break;
                }
            }
            if !found {
                rep.lower_violations += 1;
                rep.counterexamples.push(s);
            }
        }
        Ok(rep)
    });
    let mut total = SandwichReport { n, ..Default::default() };
    for part in parts {
        let part = part?;
        total.samples += part.samples;
        total.lower_violations += part.lower_violations;
        total.upper_violations += part.upper_violations;
        total.counterexamples.extend(part.counterexamples);
    }
    total.counterexamples.truncate(5);
    Ok(total)
}
