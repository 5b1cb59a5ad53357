//! Principally polarized real tori `T_Y = ℝⁿ/Yℤⁿ`, their isomorphism
//! problem, and the normal forms `Ω = X + iY` with `2X` integral under the
//! parabolic group `Γ_g★`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::congruence_spd;
use crate::lattice::{for_each_short_vector, NODE_CAP};
use crate::linalg::{IntMatrix, SpdMatrix, SymMatrix, UnimodularMatrix};
use crate::reduction::minkowski_reduce;

/// Relative tolerance for matching Gram matrices.
pub const MATCH_TOL: f64 = 1e-8;

/// Residual allowed when rounding `2X` to integers.
pub const HALF_INTEGRAL_TOL: f64 = 1e-9;

/// Largest dimension for isomorphism testing.
pub const MAX_DIM: usize = 4;

/// Cap on the number of isometries collected in one search.
pub const WITNESS_CAP: usize = 100_000;

/// The torus `ℝⁿ/Yℤⁿ` attached to a positive-definite `Y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealTorus {
    #[serde(rename = "Y")]
    pub y: SpdMatrix,
}

impl RealTorus {
    pub fn new(y: SpdMatrix) -> Self {
        RealTorus { y }
    }

    /// Columns generate the lattice `Λ_Y = Yℤⁿ`.
    pub fn lattice_basis(&self) -> DMatrix<f64> {
        self.y.matrix().clone()
    }

    /// Basis of `L_Y = ℤⁿ + iΛ_Y`: the unit vectors followed by `i·Y e_k`.
    pub fn complex_lattice_basis(&self) -> Vec<Vec<Complex64>> {
        let n = self.y.n();
        let mut out = Vec::with_capacity(2 * n);
        for k in 0..n {
            out.push((0..n).map(|i| Complex64::new(if i == k { 1.0 } else { 0.0 }, 0.0)).collect());
        }
        for k in 0..n {
            out.push((0..n).map(|i| Complex64::new(0.0, self.y.get(i, k))).collect());
        }
        out
    }

    pub fn hermitian_form(&self, u: &[Complex64], w: &[Complex64]) -> Result<Complex64> {
        hermitian_form(&self.y, u, w)
    }
}

/// `H_Y(u, w) = ᵗu·Y⁻¹·w̄`.
pub fn hermitian_form(y: &SpdMatrix, u: &[Complex64], w: &[Complex64]) -> Result<Complex64> {
    let n = y.n();
    for v in [u, w] {
        if v.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: v.len() });
        }
    }
    let inv = y.inverse();
    let mut out = Complex64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            out += u[i] * inv[(i, j)] * w[j].conj();
        }
    }
    Ok(out)
}

/// `E_Y = Im H_Y`.
pub fn alternating_form(y: &SpdMatrix, u: &[Complex64], w: &[Complex64]) -> Result<f64> {
    Ok(hermitian_form(y, u, w)?.im)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status")]
pub enum Polarization {
    Polarized,
    NotPolarized { positive: usize, negative: usize, zero: usize, reason: String },
}

/// Polarized iff `Q` is positive definite; otherwise reports the eigenvalue
/// signature.
pub fn polarizability_check(q: &SymMatrix) -> Polarization {
    let eig = SymmetricEigen::new(q.matrix().clone());
    let scale = eig.eigenvalues.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let thresh = 1e-12 * scale.max(f64::MIN_POSITIVE);
    let positive = eig.eigenvalues.iter().filter(|&&x| x > thresh).count();
    let negative = eig.eigenvalues.iter().filter(|&&x| x < -thresh).count();
    let zero = q.n() - positive - negative;
    if positive == q.n() {
        return Polarization::Polarized;
    }
    let reason = if negative == q.n() {
        "negative definite: the Hermitian form must be positive definite".to_string()
    } else if zero > 0 {
        format!("degenerate form with signature ({positive},{negative},{zero})")
    } else {
        format!("indefinite form with signature ({positive},{negative})")
    };
    Polarization::NotPolarized { positive, negative, zero, reason }
}

/// All `S` with `R2 = R1[S]`, searched column by column among the vectors of
/// the right length. Candidates with an entry above `bound` are dropped and
/// flagged.
struct IsometrySearch {
    found: Vec<IntMatrix>,
    truncated: bool,
}

fn isometries(r1: &SpdMatrix, r2: &SpdMatrix, bound: i64) -> Result<IsometrySearch> {
    let n = r1.n();
    let scale = (0..n).map(|i| r1.get(i, i).max(r2.get(i, i))).fold(0.0, f64::max);
    let tol = MATCH_TOL * scale;
    let mut truncated = false;
    let mut cands: Vec<Vec<Vec<i64>>> = Vec::with_capacity(n);
    for k in 0..n {
        let target = r2.get(k, k);
        let mut list = Vec::new();
        let r = for_each_short_vector(r1, target + tol, NODE_CAP, |a, _| {
            if (r1.form_int(a) - target).abs() <= tol {
                if a.iter().any(|x| x.abs() > bound) {
                    truncated = true;
                } else {
                    list.push(a.to_vec());
                    list.push(a.iter().map(|x| -x).collect());
                }
            }
            Ok(())
        });
        match r {
            Ok(_) => {}
            Err(Error::EnumerationOverflow(_)) => return Ok(IsometrySearch { found: Vec::new(), truncated: true }),
            Err(e) => return Err(e),
        }
        list.sort();
        cands.push(list);
    }
    let bilinear = |a: &[i64], b: &[i64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += a[i] as f64 * r1.get(i, j) * b[j] as f64;
            }
        }
        s
    };
    let mut found = Vec::new();
    let mut chosen: Vec<Vec<i64>> = Vec::with_capacity(n);
    fn rec(
        k: usize,
        n: usize,
        cands: &[Vec<Vec<i64>>],
        chosen: &mut Vec<Vec<i64>>,
        found: &mut Vec<IntMatrix>,
        r2: &SpdMatrix,
        tol: f64,
        bilinear: &dyn Fn(&[i64], &[i64]) -> f64,
        truncated: &mut bool,
    ) -> Result<()> {
        if found.len() >= WITNESS_CAP {
            *truncated = true;
            return Ok(());
        }
        if k == n {
            let s = IntMatrix::from_cols(chosen)?;
            if s.det()?.abs() == 1 {
                found.push(s);
            }
            return Ok(());
        }
        for c in &cands[k] {
            if chosen.iter().enumerate().all(|(i, prev)| (bilinear(prev, c) - r2.get(i, k)).abs() <= tol) {
                chosen.push(c.clone());
                rec(k + 1, n, cands, chosen, found, r2, tol, bilinear, truncated)?;
                chosen.pop();
            }
        }
        Ok(())
    }
    rec(0, n, &cands, &mut chosen, &mut found, r2, tol, &bilinear, &mut truncated)?;
    Ok(IsometrySearch { found, truncated })
}

/// Every `A` (up to sign) with `Y2 = A·Y1·ᵗA`, sorted lexicographically.
struct Witnesses {
    all: Vec<IntMatrix>,
    truncated: bool,
}

fn congruence_witnesses(y1: &SpdMatrix, y2: &SpdMatrix, bound: i64) -> Result<Witnesses> {
    let n = y1.n();
    if y2.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: y2.n() });
    }
    if n > MAX_DIM {
        return Err(Error::Unsupported { n, reason: format!("isomorphism testing is provided for n <= {MAX_DIM}") });
    }
    if bound < 1 {
        return Err(Error::Invalid("search bound must be at least 1".into()));
    }
    let (d1, d2) = (y1.det(), y2.det());
    if (d1 - d2).abs() > MATCH_TOL * d1.abs().max(1.0) {
        return Ok(Witnesses { all: Vec::new(), truncated: false });
    }
    let red1 = minkowski_reduce(y1)?;
    let red2 = minkowski_reduce(y2)?;
    let search = isometries(&red1.r, &red2.r, bound)?;
    let u1 = red1.a.int();
    let u2_inv = red2.a.int().inverse_unimodular()?;
    let scale = y2.matrix().amax().max(1.0);
    let mut all = Vec::with_capacity(search.found.len());
    for s in &search.found {
        // Y2 = Y1[U1·S·U2⁻¹], so A = ᵗ(U1·S·U2⁻¹).
        let a = u1.mul(s)?.mul(&u2_inv)?.transpose();
        let a = UnimodularMatrix::new(a)?.into_int();
        let back = congruence_spd(y1, &a.transpose().to_f64())?;
        if back.sym().max_abs_diff(y2.sym()) <= MATCH_TOL * scale {
            all.push(a);
        }
    }
    all.sort();
    all.dedup();
    Ok(Witnesses { all, truncated: search.truncated })
}

/// Decides whether `Y2 = A·Y1·ᵗA` for some unimodular `A` and returns the
/// lexicographically smallest witness. Candidate vectors with entries above
/// `search_bound` are skipped; if that leaves no witness the answer is
/// [`Error::Inconclusive`] rather than `None`.
pub fn tori_isomorphic(y1: &SpdMatrix, y2: &SpdMatrix, search_bound: i64) -> Result<Option<UnimodularMatrix>> {
    let w = congruence_witnesses(y1, y2, search_bound)?;
    match w.all.into_iter().next() {
        Some(a) => Ok(Some(UnimodularMatrix::new(a)?)),
        None if w.truncated => Err(Error::Inconclusive(format!("no witness with entries up to {search_bound}; the search was truncated"))),
        None => Ok(None),
    }
}

/// A point `Ω = X + iY` of `ℋ_g`, stored with `2X` as an integer matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HgPointRaw")]
pub struct HgPoint {
    pub g: usize,
    pub two_re: IntMatrix,
    pub im: SpdMatrix,
}

#[derive(Deserialize)]
struct HgPointRaw {
    g: usize,
    two_re: IntMatrix,
    im: SpdMatrix,
}

impl TryFrom<HgPointRaw> for HgPoint {
    type Error = Error;
    fn try_from(r: HgPointRaw) -> Result<Self> {
        let p = HgPoint::new(r.two_re, r.im)?;
        if p.g != r.g {
            return Err(Error::DimensionMismatch { expected: r.g, got: p.g });
        }
        Ok(p)
    }
}

/// Rounds `2X` to integers after checking the residual.
pub fn round_half_integral(x: &SymMatrix) -> Result<IntMatrix> {
    let n = x.n();
    let mut m = IntMatrix::zeros(n);
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let t = 2.0 * x.get(i, j);
            let r = t.round();
            worst = worst.max((t - r).abs());
            m.set(i, j, r as i64);
        }
    }
    if worst >= HALF_INTEGRAL_TOL {
        return Err(Error::NotHalfIntegral(worst));
    }
    Ok(m)
}

impl HgPoint {
    pub fn new(two_re: IntMatrix, im: SpdMatrix) -> Result<Self> {
        if two_re.n() != im.n() {
            return Err(Error::DimensionMismatch { expected: im.n(), got: two_re.n() });
        }
        if !two_re.is_symmetric() {
            return Err(Error::Invalid("2·Re Ω must be symmetric".into()));
        }
        Ok(HgPoint { g: im.n(), two_re, im })
    }

    pub fn from_real_part(x: &SymMatrix, im: SpdMatrix) -> Result<Self> {
        Self::new(round_half_integral(x)?, im)
    }

    pub fn re(&self) -> DMatrix<f64> {
        self.two_re.to_f64() * 0.5
    }
}

/// `γ = [[A, B], [0, ᵗA⁻¹]]` with `A·ᵗB = B·ᵗA`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GammaStarRaw")]
pub struct GammaStarElem {
    #[serde(rename = "A")]
    pub a: IntMatrix,
    #[serde(rename = "B")]
    pub b: IntMatrix,
}

#[derive(Deserialize)]
struct GammaStarRaw {
    #[serde(rename = "A")]
    a: IntMatrix,
    #[serde(rename = "B")]
    b: IntMatrix,
}

impl TryFrom<GammaStarRaw> for GammaStarElem {
    type Error = Error;
    fn try_from(r: GammaStarRaw) -> Result<Self> {
        GammaStarElem::new(r.a, r.b)
    }
}

impl GammaStarElem {
    pub fn new(a: IntMatrix, b: IntMatrix) -> Result<Self> {
        if a.n() != b.n() {
            return Err(Error::DimensionMismatch { expected: a.n(), got: b.n() });
        }
        let d = a.det()?;
        if d.abs() != 1 {
            return Err(Error::NotUnimodular(d));
        }
        if a.mul(&b.transpose())? != b.mul(&a.transpose())? {
            return Err(Error::Invalid("A·ᵗB must equal B·ᵗA".into()));
        }
        Ok(GammaStarElem { a, b })
    }

    pub fn identity(g: usize) -> Self {
        GammaStarElem { a: IntMatrix::identity(g), b: IntMatrix::zeros(g) }
    }

    /// Block-matrix product: `(A₁A₂, A₁B₂ + B₁·ᵗA₂⁻¹)`.
    pub fn compose(&self, other: &GammaStarElem) -> Result<GammaStarElem> {
        let a = self.a.mul(&other.a)?;
        let a2_inv_t = other.a.inverse_unimodular()?.transpose();
        let b = self.a.mul(&other.b)?.add(&self.b.mul(&a2_inv_t)?)?;
        GammaStarElem::new(a, b)
    }
}

/// `Ω ↦ A·Ω·ᵗA + B·ᵗA`, computed as `2X' = A(2X)ᵗA + 2BᵗA`, `Y' = AYᵗA`.
pub fn gamma_star_action(gamma: &GammaStarElem, omega: &HgPoint) -> Result<HgPoint> {
    if gamma.a.n() != omega.g {
        return Err(Error::DimensionMismatch { expected: omega.g, got: gamma.a.n() });
    }
    let at = gamma.a.transpose();
    let two_re = gamma.a.mul(&omega.two_re)?.mul(&at)?.add(&gamma.b.mul(&at)?.scale(2)?)?;
    let im = congruence_spd(&omega.im, &at.to_f64())?;
    HgPoint::new(two_re, im)
}

/// `J_g = [[0, I], [-I, 0]]`.
pub fn j_matrix(g: usize) -> IntMatrix {
    let mut j = IntMatrix::zeros(2 * g);
    for i in 0..g {
        j.set(i, g + i, 1);
        j.set(g + i, i, -1);
    }
    j
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RealStructureMatrix {
    #[serde(rename = "M")]
    pub m: IntMatrix,
    pub two_x: IntMatrix,
}

/// `M_σ = [[-I, 0], [2X, I]]`, checked to satisfy `ᵗM·J·M = -J` exactly.
pub fn real_structure_matrix(x: &SymMatrix) -> Result<RealStructureMatrix> {
    let two_x = round_half_integral(x)?;
    let g = two_x.n();
    let mut m = IntMatrix::zeros(2 * g);
    for i in 0..g {
        m.set(i, i, -1);
        m.set(g + i, g + i, 1);
        for j in 0..g {
            m.set(g + i, j, two_x.get(i, j));
        }
    }
    let j = j_matrix(g);
    if m.transpose().mul(&j)?.mul(&m)? != j.neg() {
        return Err(Error::Invalid("ᵗM·J·M differs from -J".into()));
    }
    Ok(RealStructureMatrix { m, two_x })
}

/// Largest genus for equivalence testing.
pub const HG_MAX_DIM: usize = 3;

/// Searches `γ ∈ Γ_g★` with `Ω2 = γ·Ω1`: `A` runs over the unimodular
/// congruences `Im Ω2 = A·Im Ω1·ᵗA` in lexicographic order and the first one
/// with `2 Re Ω2 ≡ A·2 Re Ω1·ᵗA (mod 2)` is completed by
/// `B = ((2 Re Ω2 - A·2 Re Ω1·ᵗA)/2)·ᵗA⁻¹`.
pub fn hg_equivalent(o1: &HgPoint, o2: &HgPoint, search_bound: i64) -> Result<Option<GammaStarElem>> {
    let g = o1.g;
    if o2.g != g {
        return Err(Error::DimensionMismatch { expected: g, got: o2.g });
    }
    if g > HG_MAX_DIM {
        return Err(Error::Unsupported { n: g, reason: format!("equivalence testing is provided for g <= {HG_MAX_DIM}") });
    }
    let w = congruence_witnesses(&o1.im, &o2.im, search_bound)?;
    for a in &w.all {
        // `a` is determined up to sign; the mod-2 test and `B` are sign-blind
        // only after fixing one, so try both.
        for a in [a.clone(), a.neg()] {
            let diff = o2.two_re.sub(&a.mul(&o1.two_re)?.mul(&a.transpose())?)?;
            if diff.rows().iter().flatten().any(|x| x.rem_euclid(2) != 0) {
                continue;
            }
            let mut half = IntMatrix::zeros(g);
            for i in 0..g {
                for j in 0..g {
                    half.set(i, j, diff.get(i, j) / 2);
                }
            }
            let b = half.mul(&a.inverse_unimodular()?.transpose())?;
            let gamma = GammaStarElem::new(a, b)?;
            let image = gamma_star_action(&gamma, o1)?;
            let scale = o2.im.matrix().amax().max(1.0);
            if image.two_re == o2.two_re && image.im.sym().max_abs_diff(o2.im.sym()) <= MATCH_TOL * scale {
                return Ok(Some(gamma));
            }
        }
    }
    if w.truncated {
        return Err(Error::Inconclusive(format!("no equivalence with entries up to {search_bound}; the search was truncated")));
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::congruence_int;
    use crate::rng::{random_spd, random_unimodular};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_cvec(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
        (0..n).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
    }

    #[test]
    fn hermitian_form_basics() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = random_cvec(&mut rng, 3);
        let w = random_cvec(&mut rng, 3);
        let id = hermitian_form(&SpdMatrix::identity(3), &u, &w).unwrap();
        let direct: Complex64 = u.iter().zip(&w).map(|(a, b)| a * b.conj()).sum();
        assert!((id - direct).norm() < 1e-15);
        for _ in 0..100 {
            let y = random_spd(&mut rng, 3);
            let u = random_cvec(&mut rng, 3);
            let w = random_cvec(&mut rng, 3);
            let h = hermitian_form(&y, &u, &u).unwrap();
            assert!(h.re > 0.0 && h.im.abs() < 1e-12 * h.re);
            let a = hermitian_form(&y, &u, &w).unwrap();
            let b = hermitian_form(&y, &w, &u).unwrap();
            assert!((a - b.conj()).norm() < 1e-12 * a.norm().max(1.0));
            let z = c(0.3, -1.2);
            let su: Vec<Complex64> = u.iter().map(|x| x * z).collect();
            let lin = hermitian_form(&y, &su, &w).unwrap();
            assert!((lin - a * z).norm() < 1e-12 * lin.norm().max(1.0));
        }
    }

    #[test]
    fn alternating_form_is_integral_on_the_lattice() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let t = RealTorus::new(random_spd(&mut rng, 3));
            let basis = t.complex_lattice_basis();
            for u in &basis {
                for w in &basis {
                    let e = alternating_form(&t.y, u, w).unwrap();
                    assert!((e - e.round()).abs() < 1e-9, "{e}");
                }
            }
        }
    }

    #[test]
    fn polarization_examples() {
        let q = SymMatrix::from_rows(&[vec![2f64.sqrt(), 3f64.sqrt()], vec![3f64.sqrt(), -(5f64.sqrt())]]).unwrap();
        assert_eq!(
            polarizability_check(&q),
            Polarization::NotPolarized { positive: 1, negative: 1, zero: 0, reason: "indefinite form with signature (1,1)".into() }
        );
        assert!(matches!(polarizability_check(&SymMatrix::identity(2).scale(-1.0)), Polarization::NotPolarized { negative: 2, .. }));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            assert_eq!(polarizability_check(random_spd(&mut rng, 4).sym()), Polarization::Polarized);
        }
    }

    #[test]
    fn isomorphism_examples() {
        let id = SpdMatrix::identity(2);
        assert_eq!(tori_isomorphic(&id, &SpdMatrix::diagonal(&[1.0, 2.0]).unwrap(), 10).unwrap(), None);
        let y2 = SpdMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let a = tori_isomorphic(&id, &y2, 10).unwrap().unwrap();
        let back = congruence_spd(&id, &a.int().transpose().to_f64()).unwrap();
        assert!(back.sym().max_abs_diff(y2.sym()) < 1e-12);
    }

    #[test]
    fn constructed_pairs_have_witnesses() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for n in 2..=4 {
            for _ in 0..25 {
                let y = random_spd(&mut rng, n);
                let u = random_unimodular(&mut rng, n, 8);
                let y2 = congruence_int(&y, &u.int().transpose()).unwrap();
                let a = tori_isomorphic(&y, &y2, 1000).unwrap().expect("constructed pair");
                let back = congruence_spd(&y, &a.int().transpose().to_f64()).unwrap();
                assert!(back.sym().max_abs_diff(y2.sym()) < 1e-8 * y2.matrix().amax());
            }
        }
    }

    #[test]
    fn non_isomorphic_same_determinant() {
        let y1 = SpdMatrix::diagonal(&[1.0, 4.0]).unwrap();
        let y2 = SpdMatrix::diagonal(&[2.0, 2.0]).unwrap();
        assert_eq!(tori_isomorphic(&y1, &y2, 10).unwrap(), None);
    }

    #[test]
    fn search_bound_is_validated() {
        let y = SpdMatrix::identity(2);
        assert!(matches!(tori_isomorphic(&y, &y, 0), Err(Error::Invalid(_))));
        let y2 = congruence_int(&y, &IntMatrix::from_rows(&[vec![1, 0], vec![5, 1]]).unwrap()).unwrap();
        // Both reduce to I, so a witness with large entries is found with bound 1.
        assert!(tori_isomorphic(&y, &y2, 1).unwrap().is_some());
    }

    #[test]
    fn real_structure_identity() {
        let m = real_structure_matrix(&SymMatrix::from_rows(&[vec![0.5]]).unwrap()).unwrap();
        assert_eq!(m.m, IntMatrix::from_rows(&[vec![-1, 0], vec![1, 1]]).unwrap());
        let z = real_structure_matrix(&SymMatrix::identity(2).scale(0.0)).unwrap();
        assert_eq!(z.m, IntMatrix::diagonal(&[-1, -1, 1, 1]));
        assert!(matches!(real_structure_matrix(&SymMatrix::from_rows(&[vec![0.3]]).unwrap()), Err(Error::NotHalfIntegral(_))));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let g = rng.gen_range(1..=4);
            let mut x = DMatrix::zeros(g, g);
            for i in 0..g {
                for j in i..g {
                    let v = rng.gen_range(-6..=6) as f64 / 2.0;
                    x[(i, j)] = v;
                    x[(j, i)] = v;
                }
            }
            real_structure_matrix(&SymMatrix::new(x).unwrap()).unwrap();
        }
    }

    fn random_gamma(rng: &mut ChaCha8Rng, g: usize) -> GammaStarElem {
        let a = random_unimodular(rng, g, 5).into_int();
        let a = if rng.gen::<bool>() { a.neg() } else { a };
        // B = S·ᵗA⁻¹ with S symmetric gives A·ᵗB = A·A⁻¹·S = S = B·ᵗA.
        let mut s = IntMatrix::zeros(g);
        for i in 0..g {
            for j in i..g {
                let v = rng.gen_range(-3..=3);
                s.set(i, j, v);
                s.set(j, i, v);
            }
        }
        let b = s.mul(&a.inverse_unimodular().unwrap().transpose()).unwrap();
        GammaStarElem::new(a, b).unwrap()
    }

    fn random_point(rng: &mut ChaCha8Rng, g: usize) -> HgPoint {
        let mut t = IntMatrix::zeros(g);
        for i in 0..g {
            for j in i..g {
                let v = rng.gen_range(-3..=3);
                t.set(i, j, v);
                t.set(j, i, v);
            }
        }
        HgPoint::new(t, random_spd(rng, g)).unwrap()
    }

    #[test]
    fn action_examples_and_law() {
        let o = HgPoint::from_real_part(&SymMatrix::from_rows(&[vec![0.5]]).unwrap(), SpdMatrix::identity(1)).unwrap();
        let g = GammaStarElem::new(IntMatrix::identity(1), IntMatrix::identity(1)).unwrap();
        let r = gamma_star_action(&g, &o).unwrap();
        assert_eq!(r.two_re.get(0, 0), 3);
        assert_eq!(r.im.get(0, 0), 1.0);
        assert_eq!(gamma_star_action(&GammaStarElem::identity(1), &o).unwrap(), o);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..100 {
            let g = rng.gen_range(1..=3);
            let (g1, g2) = (random_gamma(&mut rng, g), random_gamma(&mut rng, g));
            let o = random_point(&mut rng, g);
            let lhs = gamma_star_action(&g1.compose(&g2).unwrap(), &o).unwrap();
            let rhs = gamma_star_action(&g1, &gamma_star_action(&g2, &o).unwrap()).unwrap();
            assert_eq!(lhs.two_re, rhs.two_re);
            assert!(lhs.im.sym().max_abs_diff(rhs.im.sym()) < 1e-10 * lhs.im.matrix().amax());
        }
    }

    #[test]
    fn equivalence_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..30 {
            let g = rng.gen_range(1..=3);
            let o = random_point(&mut rng, g);
            let gamma = random_gamma(&mut rng, g);
            let o2 = gamma_star_action(&gamma, &o).unwrap();
            let found = hg_equivalent(&o, &o2, 1000).unwrap().expect("constructed pair");
            let img = gamma_star_action(&found, &o).unwrap();
            assert_eq!(img.two_re, o2.two_re);
        }
        let o = random_point(&mut rng, 2);
        let mut shifted = o.clone();
        shifted.two_re = o.two_re.add(&IntMatrix::from_rows(&[vec![2, -4], vec![-4, 6]]).unwrap()).unwrap();
        let gamma = hg_equivalent(&o, &shifted, 10).unwrap().unwrap();
        let img = gamma_star_action(&gamma, &o).unwrap();
        assert_eq!(img.two_re, shifted.two_re);
        assert!(img.im.sym().max_abs_diff(shifted.im.sym()) < 1e-12);
        let other = HgPoint::new(o.two_re.clone(), SpdMatrix::new(o.im.sym().scale(2.0)).unwrap()).unwrap();
        assert_eq!(hg_equivalent(&o, &other, 10).unwrap(), None);
    }

    #[test]
    fn parity_obstruction() {
        // Same imaginary part I; 2X differ by an odd diagonal entry, and every
        // congruence of I is a signed permutation, which preserves parity of
        // the diagonal of 2X up to reordering.
        let o1 = HgPoint::new(IntMatrix::zeros(2), SpdMatrix::identity(2)).unwrap();
        let o2 = HgPoint::new(IntMatrix::diagonal(&[1, 0]), SpdMatrix::identity(2)).unwrap();
        assert_eq!(hg_equivalent(&o1, &o2, 10).unwrap(), None);
    }
}
