//! Representatives of `GL(n,ℤ)/Γ_★`, where `Γ_★` is the integral
//! upper-triangular group with `±1` diagonal.
//!
//! A coset `γΓ_★` is determined by the flag of primitive sublattices spanned
//! by the leading columns of `γ`. The canonical representative reduces each
//! column modulo the span of the previous ones (Hermite style, against an
//! echelon basis) and then picks the lexicographically larger of the two
//! signs. The last column is a completion with determinant `+1`, reduced the
//! same way.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{bezout_vector, gcd, IntMatrix, UnimodularMatrix};

/// Largest dimension the enumerator accepts.
pub const MAX_DIM: usize = 4;

/// Hard cap on materialized coset lists; larger sums must stream.
pub const LIST_CAP: usize = 20_000_000;

const CHUNK: usize = 32;

/// Largest admissible height for dimension `n`.
pub fn max_height(n: usize) -> Result<i64> {
    match n {
        1 => Ok(i64::MAX),
        2 => Ok(1000),
        3 => Ok(30),
        4 => Ok(6),
        _ => Err(Error::Guardrail(format!("coset enumeration supports n <= {MAX_DIM}, got {n}"))),
    }
}

fn check_height(n: usize, h: i64) -> Result<()> {
    if h < 1 {
        return Err(Error::Invalid(format!("height bound must be at least 1, got {h}")));
    }
    let cap = max_height(n)?;
    if h > cap {
        return Err(Error::Guardrail(format!("height {h} exceeds the limit {cap} for n = {n}")));
    }
    Ok(())
}

/// Echelon basis of a sublattice: `basis[k]` vanishes before `pivots[k]` and
/// has the positive entry `heights[k]` there; pivots increase strictly.
#[derive(Debug, Clone, Default)]
struct Echelon {
    pivots: Vec<usize>,
    heights: Vec<i64>,
    basis: Vec<Vec<i64>>,
}

impl Echelon {
    fn of(cols: &[Vec<i64>], n: usize) -> Echelon {
        let mut work: Vec<Vec<i64>> = cols.to_vec();
        let mut out = Echelon::default();
        for i in 0..n {
            let Some(first) = work.iter().position(|w| w[i] != 0) else { continue };
            let mut lead = work.swap_remove(first);
            for w in work.iter_mut() {
                if w[i] == 0 {
                    continue;
                }
                let (g, p, q) = crate::linalg::ext_gcd(lead[i], w[i]);
                let (a, b) = (lead[i] / g, w[i] / g);
                for k in 0..n {
                    let (x, y) = (lead[k], w[k]);
                    lead[k] = p * x + q * y;
                    w[k] = a * y - b * x;
                }
            }
            if lead[i] < 0 {
                lead.iter_mut().for_each(|x| *x = -*x);
            }
            out.pivots.push(i);
            out.heights.push(lead[i]);
            out.basis.push(lead);
        }
        out
    }

    /// The unique element of `c + L` whose pivot entries lie in `[0, h_k)`.
    fn reduce(&self, c: &mut [i64]) {
        for ((&p, &h), b) in self.pivots.iter().zip(&self.heights).zip(&self.basis) {
            let x = c[p];
            let q = if (0..h).contains(&x) {
                0
            } else if (-h..0).contains(&x) {
                -1
            } else {
                x.div_euclid(h)
            };
            if q != 0 {
                for (ci, bi) in c.iter_mut().zip(b) {
                    *ci -= q * bi;
                }
            }
        }
    }

    fn canonical(&self, c: &[i64]) -> Vec<i64> {
        let mut a = c.to_vec();
        self.reduce(&mut a);
        let mut b: Vec<i64> = c.iter().map(|x| -x).collect();
        self.reduce(&mut b);
        a.max(b)
    }
}

fn det_small(rows: &[usize], cols: &[&[i64]]) -> i64 {
    match cols.len() {
        1 => cols[0][rows[0]],
        2 => cols[0][rows[0]] * cols[1][rows[1]] - cols[0][rows[1]] * cols[1][rows[0]],
        3 => {
            let e = |r: usize, c: usize| cols[c][rows[r]];
            e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1)) - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0))
                + e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0))
        }
        _ => unreachable!("at most three columns below n = 4"),
    }
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

fn binary_gcd(a: u64, b: u64) -> u64 {
    if a == 0 {
        return b;
    }
    if b == 0 {
        return a;
    }
    let shift = (a | b).trailing_zeros();
    let mut a = a >> a.trailing_zeros();
    let mut b = b >> b.trailing_zeros();
    while a != b {
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        b -= a;
        b >>= b.trailing_zeros();
    }
    a << shift
}

/// Whether the columns extend to a basis of `ℤⁿ`: the maximal minors have
/// gcd one.
fn is_primitive_system(cols: &[&[i64]], minors: &[Vec<usize>]) -> bool {
    let mut g = 0;
    for rows in minors {
        g = binary_gcd(g, det_small(rows, cols).unsigned_abs());
        if g == 1 {
            return true;
        }
    }
    g == 1
}

/// Canonical representative of the coset `m·Γ_★`.
pub fn canonical(m: &IntMatrix) -> Result<IntMatrix> {
    let n = m.n();
    let d = m.det()?;
    if d.abs() != 1 {
        return Err(Error::NotUnimodular(d));
    }
    let mut cols: Vec<Vec<i64>> = Vec::with_capacity(n);
    for j in 0..n.saturating_sub(1) {
        let ech = Echelon::of(&cols, n);
        cols.push(ech.canonical(&m.col(j)));
    }
    let mut last = m.col(n - 1);
    let ech = Echelon::of(&cols, n);
    cols.push(last.clone());
    if IntMatrix::from_cols(&cols)?.det()? < 0 {
        last.iter_mut().for_each(|x| *x = -*x);
    }
    ech.reduce(&mut last);
    cols[n - 1] = last;
    IntMatrix::from_cols(&cols)
}

/// Completes `n-1` primitive columns with a reduced last column of
/// determinant `+1`.
fn complete(cols: &[Vec<i64>], n: usize) -> Result<IntMatrix> {
    if n == 1 {
        return Ok(IntMatrix::identity(1));
    }
    // det[cols | u] = Σ_i u_i·C_i with cofactors C_i along the last column.
    let refs: Vec<&[i64]> = cols.iter().map(|c| c.as_slice()).collect();
    let cof: Vec<i64> = (0..n)
        .map(|i| {
            let rows: Vec<usize> = (0..n).filter(|&r| r != i).collect();
            let sign = if (i + n - 1) % 2 == 0 { 1 } else { -1 };
            sign * det_small(&rows, &refs)
        })
        .collect();
    let mut u = bezout_vector(&cof)?;
    Echelon::of(cols, n).reduce(&mut u);
    let mut all = cols.to_vec();
    all.push(u);
    IntMatrix::from_cols(&all)
}

/// A canonical coset representative.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CosetRep {
    #[serde(rename = "M")]
    m: UnimodularMatrix,
}

impl CosetRep {
    pub fn from_matrix(m: &IntMatrix) -> Result<Self> {
        Ok(CosetRep { m: UnimodularMatrix::new(canonical(m)?)? })
    }

    pub fn matrix(&self) -> &UnimodularMatrix {
        &self.m
    }

    /// Largest absolute entry among the first `n-1` columns.
    pub fn height(&self) -> i64 {
        let n = self.m.n();
        (0..n.saturating_sub(1)).flat_map(|j| self.m.int().col(j)).map(i64::abs).max().unwrap_or(0)
    }
}

/// Sign-normalized primitive vectors of `[-h, h]ⁿ` in lexicographic order.
fn first_columns(n: usize, h: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut c = vec![-h; n];
    loop {
        if let Some(&f) = c.iter().find(|&&x| x != 0) {
            if f > 0 && c.iter().fold(0, |g, &x| gcd(g, x)) == 1 {
                out.push(c.clone());
            }
        }
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if c[i] < h {
                c[i] += 1;
                break;
            }
            c[i] = -h;
        }
    }
}

struct Walker<'a, F> {
    n: usize,
    h: i64,
    minors: Vec<Vec<Vec<usize>>>,
    visit: &'a mut F,
}

impl<F: FnMut(&[Vec<i64>], i64)> Walker<'_, F> {
    /// `cols[..j]` are fixed; fills `cols[j]` with every admissible column.
    fn descend(&mut self, cols: &mut [Vec<i64>], j: usize, height: i64) {
        let n = self.n;
        if j + 1 == n {
            (self.visit)(cols, height);
            return;
        }
        let ech = Echelon::of(&cols[..j], n);
        let h = self.h;
        let mut lo = vec![-h; n];
        let mut hi = vec![h; n];
        for (&p, &ph) in ech.pivots.iter().zip(&ech.heights) {
            lo[p] = 0;
            hi[p] = (ph - 1).min(h);
        }
        let mut c = lo.clone();
        let mut neg = vec![0i64; n];
        loop {
            neg.iter_mut().zip(&c).for_each(|(d, x)| *d = -x);
            ech.reduce(&mut neg);
            if c > neg {
                let ok = {
                    let mut refs: [&[i64]; MAX_DIM] = [&[]; MAX_DIM];
                    for (r, v) in refs.iter_mut().zip(&cols[..j]) {
                        *r = v;
                    }
                    refs[j] = &c;
                    is_primitive_system(&refs[..=j], &self.minors[j + 1])
                };
                if ok {
                    let ch = c.iter().fold(height, |m, x| m.max(x.abs()));
                    cols[j].copy_from_slice(&c);
                    self.descend(cols, j + 1, ch);
                }
            }
            let mut i = n;
            loop {
                if i == 0 {
                    return;
                }
                i -= 1;
                if c[i] < hi[i] {
                    c[i] += 1;
                    break;
                }
                c[i] = lo[i];
            }
        }
    }
}

/// Streams the cosets of height at most `h` in lexicographic order, in
/// chunks processed concurrently. `visit` receives the first `n-1` canonical
/// columns and the height; one accumulator is produced per chunk, returned
/// in chunk order.
pub fn fold_cosets<A, I, V>(n: usize, h: i64, init: I, visit: V) -> Result<Vec<A>>
where
    A: Send,
    I: Fn() -> A + Sync,
    V: Fn(&mut A, &[Vec<i64>], i64) + Sync,
{
    if n == 0 {
        return Err(Error::Invalid("dimension must be positive".into()));
    }
    check_height(n, h)?;
    if n == 1 {
        let mut acc = init();
        visit(&mut acc, &[], 0);
        return Ok(vec![acc]);
    }
    let minors: Vec<Vec<Vec<usize>>> = (0..n).map(|k| subsets(n, k)).collect();
    let firsts = first_columns(n, h);
    let out = firsts
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = init();
            let mut f = |cols: &[Vec<i64>], ht: i64| visit(&mut acc, cols, ht);
            let mut w = Walker { n, h, minors: minors.clone(), visit: &mut f };
            let mut cols = vec![vec![0i64; n]; n - 1];
            for c1 in chunk {
                let ht = c1.iter().map(|x| x.abs()).max().unwrap_or(0);
                cols[0].copy_from_slice(c1);
                w.descend(&mut cols, 1, ht);
            }
            acc
        })
        .collect();
    Ok(out)
}

/// Number of cosets of height at most `h`.
pub fn count_cosets(n: usize, h: i64) -> Result<u64> {
    let parts = fold_cosets(n, h, || 0u64, |acc, _, _| *acc += 1)?;
    Ok(parts.into_iter().sum())
}

/// All canonical representatives of height at most `h`, in lexicographic
/// order of their columns.
pub fn enumerate_cosets(n: usize, h: i64) -> Result<Vec<CosetRep>> {
    let count = count_cosets(n, h)?;
    if count as usize > LIST_CAP {
        return Err(Error::Guardrail(format!("{count} cosets exceed the list cap {LIST_CAP}; sum them by streaming instead")));
    }
    let parts = fold_cosets(n, h, Vec::new, |acc: &mut Vec<Vec<Vec<i64>>>, cols, _| acc.push(cols.to_vec()))?;
    let mut out = Vec::with_capacity(count as usize);
    for cols in parts.into_iter().flatten() {
        out.push(CosetRep { m: UnimodularMatrix::new(complete(&cols, n)?)? });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::random_unimodular;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    #[test]
    fn rank_two_small_heights() {
        let reps = enumerate_cosets(2, 1).unwrap();
        let firsts: Vec<Vec<i64>> = reps.iter().map(|r| r.matrix().int().col(0)).collect();
        assert_eq!(firsts, vec![vec![0, 1], vec![1, -1], vec![1, 0], vec![1, 1]]);
        assert_eq!(count_cosets(2, 2).unwrap(), 8);
    }

    #[test]
    fn rank_two_matches_primitive_pairs() {
        for h in [3i64, 7, 25] {
            let mut brute = 0u64;
            for a in -h..=h {
                for c in -h..=h {
                    if gcd(a, c) == 1 {
                        brute += 1;
                    }
                }
            }
            assert_eq!(count_cosets(2, h).unwrap(), brute / 2);
        }
    }

    #[test]
    fn identity_coset_always_present() {
        for (n, h) in [(2, 1), (3, 1), (3, 2), (4, 1)] {
            let reps = enumerate_cosets(n, h).unwrap();
            assert!(reps.iter().any(|r| r.matrix().int() == &IntMatrix::identity(n)), "n={n} h={h}");
        }
    }

    #[test]
    fn listing_is_canonical_and_duplicate_free() {
        for (n, h) in [(3, 2), (3, 3), (4, 1)] {
            let reps = enumerate_cosets(n, h).unwrap();
            let mut seen = HashSet::new();
            for r in &reps {
                assert_eq!(&canonical(r.matrix().int()).unwrap(), r.matrix().int());
                assert!(r.height() <= h);
                assert!(seen.insert(r.clone()));
            }
        }
    }

    #[test]
    fn rank_three_matches_brute_force() {
        // Canonicalize every unimodular matrix reachable as a column flag of
        // small entries and keep those of height at most h.
        let h = 2;
        let n = 3;
        let mut brute = HashSet::new();
        let r = -h..=h;
        for a in r.clone().flat_map(|x| r.clone().flat_map(move |y| (-h..=h).map(move |z| vec![x, y, z]))) {
            for b in r.clone().flat_map(|x| r.clone().flat_map(move |y| (-h..=h).map(move |z| vec![x, y, z]))) {
                let refs = [a.as_slice(), b.as_slice()];
                if !is_primitive_system(&refs, &subsets(3, 2)) {
                    continue;
                }
                let m = complete(&[a.clone(), b.clone()], n).unwrap();
                let c = canonical(&m).unwrap();
                let rep = CosetRep { m: UnimodularMatrix::new(c).unwrap() };
                if rep.height() <= h {
                    brute.insert(rep);
                }
            }
        }
        let listed: HashSet<CosetRep> = enumerate_cosets(n, h).unwrap().into_iter().collect();
        assert_eq!(listed, brute);
    }

    #[test]
    fn canonicalization_is_idempotent_and_stabilizer_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for n in 2..=4 {
            for _ in 0..50 {
                let m = random_unimodular(&mut rng, n, 10).into_int();
                let c = canonical(&m).unwrap();
                assert_eq!(canonical(&c).unwrap(), c);
                let mut t = IntMatrix::identity(n);
                for i in 0..n {
                    t.set(i, i, if rng.gen::<bool>() { 1 } else { -1 });
                    for j in i + 1..n {
                        t.set(i, j, rng.gen_range(-3..=3));
                    }
                }
                assert_eq!(canonical(&m.mul(&t).unwrap()).unwrap(), c);
            }
        }
    }

    #[test]
    fn guardrails() {
        assert!(matches!(count_cosets(2, 1001), Err(Error::Guardrail(_))));
        assert!(matches!(count_cosets(3, 31), Err(Error::Guardrail(_))));
        assert!(matches!(count_cosets(5, 1), Err(Error::Guardrail(_))));
        assert_eq!(count_cosets(1, 5).unwrap(), 1);
    }
}
