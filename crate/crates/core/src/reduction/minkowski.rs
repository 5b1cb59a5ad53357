use serde::Serialize;

use super::{Domain, ReductionResult, BOUNDARY_MARGIN, ITERATION_CAP};
use crate::error::{Error, Result};
use crate::geometry::congruence_int;
use crate::lattice::{for_each_short_vector, NODE_CAP};
use crate::linalg::{complete_primitive, gcd_slice, IntMatrix, SpdMatrix, UnimodularMatrix};

/// Relative slack in the (M.1)/(M.2) inequalities.
const TOL: f64 = 1e-12;

/// Largest dimension handled by the enumeration-based reduction.
pub const MAX_DIM: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "condition")]
pub enum MinkowskiViolation {
    /// `Y[a] < y_kk` with `gcd(a_k,…,a_n) = 1` (1-based `k`).
    M1 { k: usize, a: Vec<i64>, value: f64 },
    /// `y_{k,k+1} < 0`.
    M2 { k: usize, value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinkowskiCheck {
    pub reduced: bool,
    pub witness: Option<MinkowskiViolation>,
}

fn sign_normalized(a: &[i64]) -> Vec<i64> {
    match a.iter().find(|&&x| x != 0) {
        Some(&f) if f < 0 => a.iter().map(|x| -x).collect(),
        _ => a.to_vec(),
    }
}

fn l1(a: &[i64]) -> i64 {
    a.iter().map(|x| x.abs()).sum()
}

/// Checks (M.1) for every integer `a` with `‖a‖_∞ ≤ bound` and (M.2). All
/// candidates are drawn from the finite set `Y[a] < max_k y_kk`.
pub fn is_minkowski_reduced(y: &SpdMatrix, bound: i64) -> Result<MinkowskiCheck> {
    if bound < 1 {
        return Err(Error::Invalid("search bound must be at least 1".into()));
    }
    let n = y.n();
    let diag: Vec<f64> = (0..n).map(|i| y.get(i, i)).collect();
    let ymax = diag.iter().cloned().fold(0.0, f64::max);
    // Best violation per k: (value, l1, vector).
    let mut best: Vec<Option<(f64, i64, Vec<i64>)>> = vec![None; n];
    for_each_short_vector(y, ymax, NODE_CAP, |a, _| {
        if a.iter().any(|x| x.abs() > bound) {
            return Ok(());
        }
        let val = y.form_int(a);
        for k in 0..n {
            if val >= diag[k] * (1.0 - TOL) || gcd_slice(&a[k..]) != 1 {
                continue;
            }
            let a = sign_normalized(a);
            let key = (val, l1(&a));
            let better = match &best[k] {
                None => true,
                Some((v, l, b)) => key.0 < *v || (key.0 == *v && (key.1 < *l || (key.1 == *l && a > *b))),
            };
            if better {
                best[k] = Some((val, key.1, a));
            }
        }
        Ok(())
    })?;
    if let Some((k, Some((value, _, a)))) = best.into_iter().enumerate().find(|(_, b)| b.is_some()) {
        return Ok(MinkowskiCheck { reduced: false, witness: Some(MinkowskiViolation::M1 { k: k + 1, a, value }) });
    }
    for k in 0..n.saturating_sub(1) {
        let v = y.get(k, k + 1);
        if v < -TOL * diag[k] {
            return Ok(MinkowskiCheck { reduced: false, witness: Some(MinkowskiViolation::M2 { k: k + 1, value: v }) });
        }
    }
    Ok(MinkowskiCheck { reduced: true, witness: None })
}

/// The (R4) inequalities: nondecreasing diagonal and `|y_ij| < y_ii/2` for
/// `i < j`.
pub fn r4_check(y: &SpdMatrix) -> bool {
    let n = y.n();
    (0..n.saturating_sub(1)).all(|i| y.get(i, i) <= y.get(i + 1, i + 1))
        && (0..n).all(|i| (i + 1..n).all(|j| y.get(i, j).abs() < 0.5 * y.get(i, i)))
}

/// Shortest vector among those with `gcd(a_k,…,a_n) = 1`, ties to the
/// lexicographically largest sign-normalized vector.
fn shortest_extending(r: &SpdMatrix, k: usize) -> Result<Vec<i64>> {
    let n = r.n();
    let bound = (k..n).map(|j| r.get(j, j)).fold(f64::INFINITY, f64::min);
    let mut best: Option<(f64, Vec<i64>)> = None;
    for_each_short_vector(r, bound, NODE_CAP, |a, _| {
        if gcd_slice(&a[k..]) != 1 {
            return Ok(());
        }
        let val = r.form_int(a);
        let a = sign_normalized(a);
        let better = match &best {
            None => true,
            Some((v, b)) => {
                let eps = TOL * bound;
                val < v - eps || ((val - v).abs() <= eps && a > *b)
            }
        };
        if better {
            best = Some((val, a));
        }
        Ok(())
    })?;
    Ok(best.expect("unit vectors e_k..e_n always qualify").1)
}

/// `[[I_k, a_top], [0, completion(a_bottom)]]`.
fn extension_matrix(a: &[i64], k: usize) -> Result<IntMatrix> {
    let n = a.len();
    let c = complete_primitive(&a[k..])?;
    let mut v = IntMatrix::identity(n);
    for i in 0..k {
        v.set(i, k, a[i]);
    }
    for i in k..n {
        for j in k..n {
            v.set(i, j, c.get(i - k, j - k));
        }
    }
    Ok(v)
}

/// Greedy successive-minima reduction followed by the (M.2) sign fix.
pub fn minkowski_reduce(y: &SpdMatrix) -> Result<ReductionResult> {
    let n = y.n();
    if n > MAX_DIM {
        return Err(Error::Unsupported { n, reason: format!("Minkowski reduction is limited to n <= {MAX_DIM}") });
    }
    let mut u = IntMatrix::identity(n);
    let mut iterations = 0;
    for k in 0..n {
        let r = congruence_int(y, &u)?;
        let a = shortest_extending(&r, k)?;
        iterations += 1;
        if iterations > ITERATION_CAP {
            return Err(Error::IterationCap(ITERATION_CAP));
        }
        let is_unit = a.iter().enumerate().all(|(i, &x)| x == i64::from(i == k));
        if !is_unit {
            u = u.mul(&extension_matrix(&a, k)?)?;
        }
    }
    for k in 0..n.saturating_sub(1) {
        let r = congruence_int(y, &u)?;
        if r.get(k, k + 1) < 0.0 {
            for i in 0..n {
                u.set(i, k + 1, -u.get(i, k + 1));
            }
        }
    }
    let a = UnimodularMatrix::new(u)?;
    let r = congruence_int(y, a.int())?;
    let boundary = minkowski_margin(&r)? < BOUNDARY_MARGIN;
    Ok(ReductionResult { a, r, domain: Domain::Minkowski, iterations, boundary })
}

/// Relative distance of a reduced form to the nearest active (M.1)/(M.2)
/// constraint; capped at 1.
pub fn minkowski_margin(r: &SpdMatrix) -> Result<f64> {
    let n = r.n();
    let diag: Vec<f64> = (0..n).map(|i| r.get(i, i)).collect();
    let ymax = diag.iter().cloned().fold(0.0, f64::max);
    let mut margin = 1.0f64;
    for_each_short_vector(r, 2.0 * ymax, NODE_CAP, |a, _| {
        let val = r.form_int(a);
        for k in 0..n {
            let unit = a.iter().enumerate().all(|(i, &x)| x.abs() == i64::from(i == k));
            if unit || gcd_slice(&a[k..]) != 1 {
                continue;
            }
            margin = margin.min((val - diag[k]) / diag[k]);
        }
        Ok(())
    })?;
    for k in 0..n.saturating_sub(1) {
        margin = margin.min(r.get(k, k + 1) / diag[k].sqrt() / diag[k + 1].sqrt());
    }
    Ok(margin)
}
