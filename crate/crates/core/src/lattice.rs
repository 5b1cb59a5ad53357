//! Fincke–Pohst enumeration of short vectors of a positive-definite form.

use crate::error::{Error, Result};
use crate::linalg::SpdMatrix;

/// Maximum number of enumeration nodes before giving up.
pub const NODE_CAP: usize = 10_000_000;

/// Relative slack added to the radius so vectors exactly on the boundary
/// survive rounding; callers filter on the returned exact value.
const RADIUS_SLACK: f64 = 1e-10;

struct Enum<'a, F> {
    n: usize,
    qd: Vec<f64>,
    mu: Vec<Vec<f64>>,
    bound: f64,
    x: Vec<i64>,
    nodes: usize,
    cap: usize,
    visit: &'a mut F,
}

impl<F: FnMut(&[i64], f64) -> Result<()>> Enum<'_, F> {
    fn level(&mut self, i: usize, partial: f64, zero_prefix: bool) -> Result<()> {
        let c: f64 = -(i + 1..self.n).map(|j| self.mu[i][j] * self.x[j] as f64).sum::<f64>();
        let rem = (self.bound - partial).max(0.0);
        let rho = (rem / self.qd[i]).sqrt();
        let mut lo = (c - rho).ceil() as i64;
        let hi = (c + rho).floor() as i64;
        if zero_prefix {
            lo = lo.max(0);
        }
        for xi in lo..=hi {
            self.nodes += 1;
            if self.nodes > self.cap {
                return Err(Error::EnumerationOverflow(self.cap));
            }
            let d = xi as f64 - c;
            let p = partial + self.qd[i] * d * d;
            if p > self.bound {
                continue;
            }
            self.x[i] = xi;
            let zp = zero_prefix && xi == 0;
            if i == 0 {
                if !zp {
                    (self.visit)(&self.x, p)?;
                }
            } else {
                self.level(i - 1, p, zp)?;
            }
        }
        self.x[i] = 0;
        Ok(())
    }
}

/// Calls `visit(a, Q[a])` for every nonzero integer vector with
/// `Q[a] ≤ bound`, one per `±` pair (the last nonzero entry is positive).
/// The reported value is the enumeration's running sum; recompute exactly
/// where it matters. Returns the number of nodes visited.
pub fn for_each_short_vector<F>(q: &SpdMatrix, bound: f64, cap: usize, mut visit: F) -> Result<usize>
where
    F: FnMut(&[i64], f64) -> Result<()>,
{
    let n = q.n();
    if !(bound > 0.0) {
        return Ok(0);
    }
    let l = q.cholesky();
    let qd: Vec<f64> = (0..n).map(|i| l[(i, i)] * l[(i, i)]).collect();
    let mu = (0..n).map(|i| (0..n).map(|j| if j > i { l[(j, i)] / l[(i, i)] } else { 0.0 }).collect()).collect();
    let mut e = Enum {
        n,
        qd,
        mu,
        bound: bound * (1.0 + RADIUS_SLACK),
        x: vec![0; n],
        nodes: 0,
        cap,
        visit: &mut visit,
    };
    e.level(n - 1, 0.0, true)?;
    Ok(e.nodes)
}

/// All nonzero vectors (up to sign) with `Q[a] ≤ bound`, with exact values.
pub fn short_vectors(q: &SpdMatrix, bound: f64) -> Result<Vec<(Vec<i64>, f64)>> {
    let mut out = Vec::new();
    for_each_short_vector(q, bound, NODE_CAP, |a, _| {
        out.push((a.to_vec(), q.form_int(a)));
        Ok(())
    })?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::random_spd;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn brute(q: &SpdMatrix, bound: f64, box_r: i64) -> usize {
        let n = q.n();
        let mut count = 0;
        let total = (2 * box_r + 1).pow(n as u32);
        for idx in 0..total {
            let mut a = vec![0i64; n];
            let mut k = idx;
            for ai in a.iter_mut() {
                *ai = k % (2 * box_r + 1) - box_r;
                k /= 2 * box_r + 1;
            }
            if a.iter().all(|&x| x == 0) {
                continue;
            }
            if q.form_int(&a) <= bound {
                count += 1;
            }
        }
        count / 2
    }

    #[test]
    fn identity_shells() {
        let q = SpdMatrix::identity(3);
        assert_eq!(short_vectors(&q, 1.0).unwrap().len(), 3);
        assert_eq!(short_vectors(&q, 2.0).unwrap().len(), 9);
        for (a, v) in short_vectors(&q, 3.0).unwrap() {
            assert_eq!(*a.iter().rev().find(|&&x| x != 0).unwrap() > 0, true);
            assert!(v <= 3.0);
        }
    }

    #[test]
    fn matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=4 {
            for _ in 0..5 {
                let q = random_spd(&mut rng, n);
                let bound = 2.0 * (0..n).map(|i| q.get(i, i)).fold(f64::INFINITY, f64::min);
                // Box radius large enough to contain the ellipsoid.
                let inv = q.inverse();
                let r = (0..n).map(|i| (bound * inv[(i, i)]).sqrt()).fold(0.0, f64::max).ceil() as i64;
                assert_eq!(short_vectors(&q, bound).unwrap().len(), brute(&q, bound, r.max(1)));
            }
        }
    }

    #[test]
    fn node_cap_is_enforced() {
        let q = SpdMatrix::identity(4);
        let err = for_each_short_vector(&q, 100.0, 50, |_, _| Ok(())).unwrap_err();
        assert_eq!(err, Error::EnumerationOverflow(50));
    }
}
