use serde::{Deserialize, Serialize};

use super::{Domain, ReductionResult, BOUNDARY_MARGIN, ITERATION_CAP};
use crate::error::{Error, Result};
use crate::geometry::{congruence_int, partial_iwasawa, UNIT_DET_TOL};
use crate::lattice::{for_each_short_vector, NODE_CAP};
use crate::linalg::{complete_primitive, gcd, gcd_slice, IntMatrix, SpdMatrix, UnimodularMatrix};

const TOL: f64 = 1e-12;

/// Largest dimension accepted by [`grenier_reduce`].
pub const MAX_REDUCE_DIM: usize = 4;

/// How the translation condition (F3) is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum F3Mode {
    /// `0 ≤ x_1 ≤ 1/2` and `|x_j| ≤ 2` for `2 ≤ j ≤ n-2`; `x_{n-1}` is free.
    #[default]
    Printed,
    /// `0 ≤ x_1 ≤ 1/2` and `|x_j| ≤ 1/2` for every `j ≥ 2`.
    Strict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "condition")]
pub enum GrenierViolation {
    /// `(a + ᵗxc)² + v^{n/(n-1)}·W[c] < 1`.
    F1 { level: usize, a: i64, c: Vec<i64>, value: f64 },
    /// Translation bound violated on coordinate `j` (1-based).
    F3 { level: usize, j: usize, x: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrenierCheck {
    pub member: bool,
    pub violation: Option<GrenierViolation>,
    /// Printed mode accepted some `1/2 < |x_j| ≤ 2` (or an unconstrained
    /// `x_{n-1}` beyond `1/2`).
    pub loose_x: bool,
}

/// (F1)–(F3) for `Y ∈ 𝔓_n`, recursing into `W` for (F2). `level` in the
/// witness counts recursion depth, 0 being `Y` itself.
pub fn grenier_membership(y: &SpdMatrix, mode: F3Mode) -> Result<GrenierCheck> {
    y.check_unit_det(UNIT_DET_TOL)?;
    let mut loose_x = false;
    let mut cur = y.clone();
    let mut level = 0;
    while cur.n() >= 2 {
        let n = cur.n();
        let p = partial_iwasawa(&cur)?;
        if let Some(v) = f1_violation(&p.w, p.v, &p.x, n, level)? {
            return Ok(GrenierCheck { member: false, violation: Some(v), loose_x });
        }
        for (j, &xj) in p.x.iter().enumerate() {
            let j1 = j + 1;
            let ok = if j1 == 1 {
                (-TOL..=0.5 + TOL).contains(&xj)
            } else {
                match mode {
                    F3Mode::Strict => xj.abs() <= 0.5 + TOL,
                    F3Mode::Printed if j1 <= n - 2 => xj.abs() <= 2.0 + TOL,
                    F3Mode::Printed => true,
                }
            };
            if !ok {
                return Ok(GrenierCheck {
                    member: false,
                    violation: Some(GrenierViolation::F3 { level, j: j1, x: xj }),
                    loose_x,
                });
            }
            if j1 > 1 && xj.abs() > 0.5 + TOL {
                loose_x = true;
            }
        }
        cur = p.w;
        level += 1;
    }
    Ok(GrenierCheck { member: true, violation: None, loose_x })
}

fn f1_violation(w: &SpdMatrix, v: f64, x: &[f64], n: usize, level: usize) -> Result<Option<GrenierViolation>> {
    let scale = v.powf(n as f64 / (n - 1) as f64);
    let bound = 1.0 / scale;
    let mut found: Option<GrenierViolation> = None;
    for_each_short_vector(w, bound, NODE_CAP, |c, _| {
        if found.is_some() {
            return Ok(());
        }
        let t: f64 = c.iter().zip(x).map(|(&ci, xi)| ci as f64 * xi).sum();
        let wc = w.form_int(c);
        let g = gcd_slice(c);
        for a in [(-t).floor() as i64, (-t).ceil() as i64] {
            if gcd(a, g) != 1 {
                continue;
            }
            let val = (a as f64 + t).powi(2) + scale * wc;
            if val < 1.0 - TOL {
                found = Some(GrenierViolation::F1 { level, a, c: c.to_vec(), value: val });
                return Ok(());
            }
        }
        Ok(())
    })?;
    Ok(found)
}

/// Reduces a point of `𝔓_n` into the Grenier domain, translating `x` into
/// the strict box so the result satisfies either reading of (F3).
pub fn grenier_reduce(y: &SpdMatrix) -> Result<ReductionResult> {
    y.check_unit_det(UNIT_DET_TOL)?;
    let n = y.n();
    if n > MAX_REDUCE_DIM {
        return Err(Error::Unsupported { n, reason: format!("Grenier reduction is limited to n <= {MAX_REDUCE_DIM}") });
    }
    let mut iterations = 0;
    let u = reduce_rec(y, &mut iterations)?;
    let a = UnimodularMatrix::new(u)?;
    let r = congruence_int(y, a.int())?;
    let boundary = grenier_margin(&r)? < BOUNDARY_MARGIN;
    Ok(ReductionResult { a, r, domain: Domain::Grenier, iterations, boundary })
}

fn shortest_vector(r: &SpdMatrix) -> Result<(Vec<i64>, f64)> {
    let mut best: Option<(Vec<i64>, f64)> = None;
    for_each_short_vector(r, r.get(0, 0), NODE_CAP, |a, _| {
        let val = r.form_int(a);
        if best.as_ref().map_or(true, |(_, b)| val < *b) {
            best = Some((a.to_vec(), val));
        }
        Ok(())
    })?;
    Ok(best.expect("e_1 is always enumerated"))
}

fn reduce_rec(y: &SpdMatrix, iterations: &mut usize) -> Result<IntMatrix> {
    let n = y.n();
    let mut u = IntMatrix::identity(n);
    if n == 1 {
        return Ok(u);
    }
    // Make e_1 a shortest vector: this is (F1).
    loop {
        *iterations += 1;
        if *iterations > ITERATION_CAP {
            return Err(Error::IterationCap(ITERATION_CAP));
        }
        let r = congruence_int(y, &u)?;
        let (a, val) = shortest_vector(&r)?;
        if val >= r.get(0, 0) * (1.0 - TOL) {
            break;
        }
        u = u.mul(&complete_primitive(&a)?)?;
    }
    // (F2): reduce W with diag(1, B).
    let r = congruence_int(y, &u)?;
    let p = partial_iwasawa(&r)?;
    if n > 2 {
        let b = reduce_rec(&p.w, iterations)?;
        let mut d = IntMatrix::identity(n);
        for i in 1..n {
            for j in 1..n {
                d.set(i, j, b.get(i - 1, j - 1));
            }
        }
        u = u.mul(&d)?;
    }
    // (F3): translate x by [[1, ᵗb], [0, I]], then fix the sign of x_1.
    let r = congruence_int(y, &u)?;
    let p = partial_iwasawa(&r)?;
    let mut t = IntMatrix::identity(n);
    for (j, xj) in p.x.iter().enumerate() {
        t.set(0, j + 1, -xj.round() as i64);
    }
    u = u.mul(&t)?;
    let r = congruence_int(y, &u)?;
    let p = partial_iwasawa(&r)?;
    if p.x[0] < 0.0 {
        for i in 0..n {
            u.set(i, 0, -u.get(i, 0));
        }
    }
    Ok(u)
}

/// Relative distance to the nearest active constraint of the strict domain,
/// capped at 1.
pub fn grenier_margin(y: &SpdMatrix) -> Result<f64> {
    let mut margin = 1.0f64;
    let mut cur = y.clone();
    while cur.n() >= 2 {
        let r11 = cur.get(0, 0);
        for_each_short_vector(&cur, 2.0 * r11, NODE_CAP, |a, _| {
            let unit = a[0].abs() == 1 && a[1..].iter().all(|&x| x == 0);
            if !unit && gcd_slice(a) == 1 {
                margin = margin.min((cur.form_int(a) - r11) / r11);
            }
            Ok(())
        })?;
        let p = partial_iwasawa(&cur)?;
        margin = margin.min(p.x[0]).min(0.5 - p.x[0]);
        for xj in &p.x[1..] {
            margin = margin.min(0.5 - xj.abs());
        }
        cur = p.w;
    }
    Ok(margin)
}
