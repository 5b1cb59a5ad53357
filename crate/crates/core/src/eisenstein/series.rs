//! Truncated Selberg Eisenstein series
//! `E_n(s, Y) = Σ_{γ ∈ Γ_n/Γ_★} p_{-s}(Y[γ])`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::cosets::{fold_cosets, max_height, MAX_DIM};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::geometry::UNIT_DET_TOL;
use crate::linalg::SpdMatrix;
use crate::selberg::SpectralParameter;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TailMode {
    #[default]
    None,
    Heuristic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationParams {
    #[serde(rename = "H")]
    pub h: i64,
    #[serde(default)]
    pub tail_mode: TailMode,
}

impl TruncationParams {
    pub fn new(h: i64) -> Result<Self> {
        if h < 1 {
            return Err(Error::Invalid(format!("height bound must be at least 1, got {h}")));
        }
        Ok(TruncationParams { h, tail_mode: TailMode::None })
    }

    pub fn heuristic(h: i64) -> Result<Self> {
        Ok(TruncationParams { tail_mode: TailMode::Heuristic, ..Self::new(h)? })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EisensteinValue {
    #[serde(with = "crate::json")]
    pub value: Complex64,
    pub terms: u64,
    #[serde(rename = "H")]
    pub h: i64,
    pub tail_estimate: Option<f64>,
}

/// Neumaier-compensated complex sum.
#[derive(Debug, Clone, Copy, Default)]
struct Compensated {
    re: (f64, f64),
    im: (f64, f64),
}

fn neumaier(acc: &mut (f64, f64), x: f64) {
    let t = acc.0 + x;
    if acc.0.abs() >= x.abs() {
        acc.1 += (acc.0 - t) + x;
    } else {
        acc.1 += (x - t) + acc.0;
    }
    acc.0 = t;
}

impl Compensated {
    #[inline]
    fn add(&mut self, re: f64, im: f64) {
        neumaier(&mut self.re, re);
        if im != 0.0 {
            neumaier(&mut self.im, im);
        }
    }

    fn merge(&mut self, o: &Compensated) {
        self.add(o.re.0, o.im.0);
        self.add(o.re.1, o.im.1);
    }

    fn value(&self) -> Complex64 {
        Complex64::new(self.re.0 + self.re.1, self.im.0 + self.im.1)
    }
}

/// Requires `s` of length `n-1` with every `Re s_j > 1`.
pub fn check_convergence(s: &SpectralParameter, n: usize) -> Result<()> {
    if s.n != n || s.s.len() + 1 != n {
        return Err(Error::DimensionMismatch { expected: n.saturating_sub(1), got: s.s.len() });
    }
    if let Some((j, z)) = s.s.iter().enumerate().find(|(_, z)| !(z.re > 1.0)) {
        return Err(Error::OutsideConvergence(format!("Re s_{} = {} must exceed 1", j + 1, z.re)));
    }
    Ok(())
}

/// Per-point state: the Gram matrix of the current columns
/// and the factors `det(Gram_k)^{-s_k}`, valid for the cached columns.
struct PointState {
    y: [[f64; MAX_DIM]; MAX_DIM],
    gram: [[f64; MAX_DIM]; MAX_DIM],
    factor: [Complex64; MAX_DIM],
}

/// How `d^{-s}` is computed for one exponent.
#[derive(Debug, Clone, Copy)]
enum Power {
    /// Real `s = k/2`: integer powers and one square root.
    HalfInteger(i32),
    Real(f64),
    Complex(Complex64),
}

impl Power {
    fn of(s: Complex64) -> Power {
        if s.im != 0.0 {
            return Power::Complex(s);
        }
        let twice = 2.0 * s.re;
        if twice == twice.round() && twice.abs() < 64.0 {
            Power::HalfInteger(twice as i32)
        } else {
            Power::Real(s.re)
        }
    }

    fn neg_pow(self, d: f64) -> Complex64 {
        match self {
            Power::HalfInteger(k) => {
                let whole = d.powi(-(k.div_euclid(2)));
                let r = if k.rem_euclid(2) == 1 { whole / d.sqrt() } else { whole };
                Complex64::new(r, 0.0)
            }
            Power::Real(s) => Complex64::new(d.powf(-s), 0.0),
            Power::Complex(s) => (-s * d.ln()).exp(),
        }
    }
}

fn det_small(g: &[[f64; MAX_DIM]; MAX_DIM], k: usize) -> f64 {
    match k {
        1 => g[0][0],
        2 => g[0][0] * g[1][1] - g[0][1] * g[0][1],
        3 => {
            g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[1][2]) - g[0][1] * (g[0][1] * g[2][2] - g[1][2] * g[0][2])
                + g[0][2] * (g[0][1] * g[1][2] - g[1][1] * g[0][2])
        }
        _ => unreachable!(),
    }
}

struct Acc {
    cached: Vec<Vec<i64>>,
    cf: [[f64; MAX_DIM]; MAX_DIM],
    valid: usize,
    points: Vec<PointState>,
    all: Vec<Compensated>,
    half: Vec<Compensated>,
    quarter: Vec<Compensated>,
    terms: u64,
}

struct Setup<'a> {
    n: usize,
    powers: Vec<Power>,
    real: bool,
    half_h: i64,
    quarter_h: i64,
    ys: &'a [SpdMatrix],
}

impl Setup<'_> {
    fn init(&self) -> Acc {
        let n = self.n;
        let points = self
            .ys
            .iter()
            .map(|y| {
                let mut a = [[0.0; MAX_DIM]; MAX_DIM];
                for (i, row) in a.iter_mut().enumerate().take(n) {
                    for (j, e) in row.iter_mut().enumerate().take(n) {
                        *e = y.get(i, j);
                    }
                }
                PointState { y: a, gram: [[0.0; MAX_DIM]; MAX_DIM], factor: [Complex64::new(1.0, 0.0); MAX_DIM] }
            })
            .collect();
        Acc {
            cached: vec![vec![0; n]; n.saturating_sub(1)],
            cf: [[0.0; MAX_DIM]; MAX_DIM],
            valid: 0,
            points,
            all: vec![Compensated::default(); self.ys.len()],
            half: vec![Compensated::default(); self.ys.len()],
            quarter: vec![Compensated::default(); self.ys.len()],
            terms: 0,
        }
    }

    fn visit(&self, acc: &mut Acc, cols: &[Vec<i64>], height: i64) {
        let n = self.n;
        let m = cols.len();
        acc.terms += 1;
        let mut first = 0;
        while first < acc.valid.min(m) && acc.cached[first] == cols[first] {
            first += 1;
        }
        for k in first..m {
            acc.cached[k].copy_from_slice(&cols[k]);
            for i in 0..n {
                acc.cf[k][i] = cols[k][i] as f64;
            }
        }
        acc.valid = m;
        let in_half = height <= self.half_h;
        let in_quarter = height <= self.quarter_h;
        let cf = &acc.cf;
        for (pi, p) in acc.points.iter_mut().enumerate() {
            for k in first..m {
                let c = &cf[k];
                let mut u = [0.0; MAX_DIM];
                for (ui, row) in u.iter_mut().zip(&p.y).take(n) {
                    let mut t = 0.0;
                    for j in 0..n {
                        t += row[j] * c[j];
                    }
                    *ui = t;
                }
                for a in 0..=k {
                    let mut g = 0.0;
                    for i in 0..n {
                        g += cf[a][i] * u[i];
                    }
                    p.gram[a][k] = g;
                    p.gram[k][a] = g;
                }
                p.factor[k] = self.powers[k].neg_pow(det_small(&p.gram, k + 1));
            }
            let (tr, ti) = if self.real {
                let mut t = 1.0;
                for z in &p.factor[..m] {
                    t *= z.re;
                }
                (t, 0.0)
            } else {
                let z: Complex64 = p.factor[..m].iter().product();
                (z.re, z.im)
            };
            acc.all[pi].add(tr, ti);
            if in_half {
                acc.half[pi].add(tr, ti);
            }
            if in_quarter {
                acc.quarter[pi].add(tr, ti);
            }
        }
    }
}

/// Twice the geometric tail `|E(H) - E(H/2)|/(2^κ - 1)`, with the nominal
/// exponent `κ = 2·min Re s_j - n` lowered to the observed decay between the
/// last two doublings when that is slower. The factor two absorbs the
/// fluctuation of primitive-vector counts between height shells.
fn tail_estimate(full: Complex64, half: Complex64, quarter: Option<Complex64>, kappa: f64) -> Option<f64> {
    let last = (full - half).norm();
    let mut k = kappa;
    if let Some(q) = quarter {
        let prev = (half - q).norm();
        if last > 0.0 && prev > 0.0 {
            let observed = (prev / last).log2();
            if observed.is_finite() {
                k = k.min(observed);
            }
        }
    }
    (k > 0.0).then(|| 2.0 * last / (2f64.powf(k) - 1.0))
}

/// Evaluates the truncated series at several points with one coset pass.
/// Points may lie anywhere on the cone.
pub fn eisenstein_many(s: &SpectralParameter, ys: &[SpdMatrix], trunc: &TruncationParams) -> Result<Vec<EisensteinValue>> {
    let n = s.n;
    check_convergence(s, n)?;
    for y in ys {
        if y.n() != n {
            return Err(Error::DimensionMismatch { expected: n, got: y.n() });
        }
    }
    if trunc.h < 1 {
        return Err(Error::Invalid(format!("height bound must be at least 1, got {}", trunc.h)));
    }
    if n == 1 {
        let one = EisensteinValue { value: Complex64::new(1.0, 0.0), terms: 1, h: trunc.h, tail_estimate: Some(0.0) };
        return Ok(vec![one; ys.len()]);
    }
    max_height(n)?;
    let powers: Vec<Power> = s.s.iter().map(|&z| Power::of(z)).collect();
    let real = s.s.iter().all(|z| z.im == 0.0);
    let setup = Setup { n, powers, real, half_h: trunc.h / 2, quarter_h: trunc.h / 4, ys };
    let parts = fold_cosets(n, trunc.h, || setup.init(), |acc, cols, ht| setup.visit(acc, cols, ht))?;
    let mut all = vec![Compensated::default(); ys.len()];
    let mut half = vec![Compensated::default(); ys.len()];
    let mut quarter = vec![Compensated::default(); ys.len()];
    let mut terms = 0;
    for part in &parts {
        terms += part.terms;
        for i in 0..ys.len() {
            all[i].merge(&part.all[i]);
            half[i].merge(&part.half[i]);
            quarter[i].merge(&part.quarter[i]);
        }
    }
    let kappa = 2.0 * s.s.iter().map(|z| z.re).fold(f64::INFINITY, f64::min) - n as f64;
    Ok((0..ys.len())
        .map(|i| {
            let value = all[i].value();
            let tail_estimate = match trunc.tail_mode {
                TailMode::Heuristic if trunc.h >= 2 => {
                    tail_estimate(value, half[i].value(), (trunc.h >= 4).then(|| quarter[i].value()), kappa)
                }
                _ => None,
            };
            EisensteinValue { value, terms, h: trunc.h, tail_estimate }
        })
        .collect())
}

/// `E_n(s, Y)` truncated to cosets of height at most `H`, for `Y` of
/// determinant one.
pub fn eisenstein_series(s: &SpectralParameter, y: &SpdMatrix, trunc: &TruncationParams) -> Result<EisensteinValue> {
    y.check_unit_det(UNIT_DET_TOL)?;
    Ok(eisenstein_many(s, std::slice::from_ref(y), trunc)?[0])
}

/// The truncated series as a field; batched evaluations share one coset
/// pass.
#[derive(Debug, Clone)]
pub struct EisensteinField {
    pub s: SpectralParameter,
    pub trunc: TruncationParams,
}

impl EisensteinField {
    pub fn new(s: SpectralParameter, trunc: TruncationParams) -> Result<Self> {
        check_convergence(&s, s.n)?;
        Ok(EisensteinField { s, trunc })
    }
}

impl ScalarField for EisensteinField {
    fn eval(&self, y: &SpdMatrix) -> Result<Complex64> {
        Ok(eisenstein_many(&self.s, std::slice::from_ref(y), &self.trunc)?[0].value)
    }

    fn eval_many(&self, ys: &[SpdMatrix]) -> Result<Vec<Complex64>> {
        Ok(eisenstein_many(&self.s, ys, &self.trunc)?.into_iter().map(|v| v.value).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eisenstein::cosets::enumerate_cosets;
    use crate::geometry::{congruence_int, PartialIwasawa};
    use crate::rng::{random_unimodular, random_unit_det};
    use crate::selberg::power_function;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sp(n: usize, s: &[f64]) -> SpectralParameter {
        SpectralParameter::real(n, s).unwrap()
    }

    #[test]
    fn rank_one_is_one() {
        let v = eisenstein_series(&sp(1, &[]), &SpdMatrix::identity(1), &TruncationParams::new(5).unwrap()).unwrap();
        assert_eq!(v.value, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn convergence_region_enforced() {
        let r = eisenstein_series(&sp(2, &[1.0]), &SpdMatrix::identity(2), &TruncationParams::new(5).unwrap());
        assert!(matches!(r, Err(Error::OutsideConvergence(_))));
        let r = eisenstein_series(&sp(3, &[2.0, 0.9]), &SpdMatrix::identity(3), &TruncationParams::new(2).unwrap());
        assert!(matches!(r, Err(Error::OutsideConvergence(_))));
    }

    #[test]
    fn streaming_matches_listed_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for (n, h, s) in [(2usize, 12i64, vec![1.7]), (3, 3, vec![2.2, 1.6]), (4, 1, vec![2.0, 2.5, 1.5])] {
            let y = random_unit_det(&mut rng, n);
            let s = sp(n, &s);
            let neg: Vec<Complex64> = s.s.iter().map(|z| -z).collect();
            let mut direct = Complex64::new(0.0, 0.0);
            let reps = enumerate_cosets(n, h).unwrap();
            for r in &reps {
                direct += power_function(&neg, &congruence_int(&y, r.matrix().int()).unwrap()).unwrap();
            }
            let v = eisenstein_series(&s, &y, &TruncationParams::new(h).unwrap()).unwrap();
            assert_eq!(v.terms, reps.len() as u64);
            assert!((v.value - direct).norm() < 1e-12 * direct.norm(), "n={n}: {} vs {direct}", v.value);
        }
    }

    #[test]
    fn complex_parameters() {
        let y = SpdMatrix::from_rows(&[vec![1.5, 0.2], vec![0.2, 0.7]]).unwrap().normalize_det();
        let s = SpectralParameter::new(2, vec![Complex64::new(2.0, 3.0)]).unwrap();
        let v = eisenstein_series(&s, &y, &TruncationParams::new(8).unwrap()).unwrap();
        let mut direct = Complex64::new(0.0, 0.0);
        for r in enumerate_cosets(2, 8).unwrap() {
            direct += power_function(&[-s.s[0]], &congruence_int(&y, r.matrix().int()).unwrap()).unwrap();
        }
        assert!((v.value - direct).norm() < 1e-12 * direct.norm());
    }

    #[test]
    fn summand_independent_of_representative() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let neg = [Complex64::new(-2.3, 0.4), Complex64::new(-1.7, 0.0)];
        for _ in 0..100 {
            let y = random_unit_det(&mut rng, 3);
            let m = random_unimodular(&mut rng, 3, 4).into_int();
            let mut t = crate::linalg::IntMatrix::identity(3);
            for i in 0..3 {
                t.set(i, i, if rng.gen::<bool>() { 1 } else { -1 });
                for j in i + 1..3 {
                    t.set(i, j, rng.gen_range(-2..=2));
                }
            }
            let a = power_function(&neg, &congruence_int(&y, &m).unwrap()).unwrap();
            let b = power_function(&neg, &congruence_int(&y, &m.mul(&t).unwrap()).unwrap()).unwrap();
            assert!((a - b).norm() < 1e-12 * a.norm(), "{}", (a - b).norm() / a.norm());
        }
    }

    #[test]
    fn invariance_under_small_unimodular() {
        // Terms are permuted within the height window; interior points and a
        // wide window keep the boundary effect small.
        let s = sp(2, &[3.0]);
        let trunc = TruncationParams::new(200).unwrap();
        let y = PartialIwasawa::new(1.2, vec![0.2], SpdMatrix::identity(1)).unwrap().reconstruct();
        let e = eisenstein_series(&s, &y, &trunc).unwrap().value;
        for g in [vec![vec![1, 1], vec![0, 1]], vec![vec![0, 1], vec![1, 0]], vec![vec![1, 0], vec![2, 1]]] {
            let g = crate::linalg::IntMatrix::from_rows(&g).unwrap();
            let e2 = eisenstein_series(&s, &congruence_int(&y, &g).unwrap(), &trunc).unwrap().value;
            assert!((e - e2).norm() / e.norm() < 1e-6, "{e} vs {e2}");
        }
    }

    #[test]
    fn block_identity_for_first_diagonal_entry() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for n in 2..=4 {
            for _ in 0..50 {
                let y = random_unit_det(&mut rng, n);
                let p = crate::geometry::partial_iwasawa(&y).unwrap();
                let g = random_unimodular(&mut rng, n, 6);
                let col = g.int().col(0);
                let (a, c) = (col[0] as f64, &col[1..]);
                let xc: f64 = p.x.iter().zip(c).map(|(x, &ci)| x * ci as f64).sum();
                let alpha = (a + xc).powi(2) / p.v + p.v.powf(1.0 / (n as f64 - 1.0)) * p.w.form_int(c);
                let got = congruence_int(&y, g.int()).unwrap().get(0, 0);
                assert!((got - alpha).abs() < 1e-10 * got.max(1.0), "{got} vs {alpha}");
            }
        }
    }

    #[test]
    fn tail_estimate_bounds_doubling_change() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut ok = 0;
        let trials = 40;
        for _ in 0..trials {
            let y = crate::reduction::grenier_reduce(&random_unit_det(&mut rng, 2)).unwrap().r;
            let s = sp(2, &[rng.gen_range(1.6..3.0)]);
            let a = eisenstein_series(&s, &y, &TruncationParams::heuristic(40).unwrap()).unwrap();
            let b = eisenstein_series(&s, &y, &TruncationParams::new(80).unwrap()).unwrap();
            if (b.value - a.value).norm() < a.tail_estimate.unwrap() {
                ok += 1;
            }
        }
        assert!(ok as f64 >= 0.95 * trials as f64, "{ok}/{trials}");
    }

    #[test]
    fn thread_count_does_not_change_bits() {
        let s = sp(3, &[2.5, 2.5]);
        let y = random_unit_det(&mut ChaCha8Rng::seed_from_u64(3), 3);
        let trunc = TruncationParams::new(6).unwrap();
        let run = |t: usize| {
            rayon::ThreadPoolBuilder::new().num_threads(t).build().unwrap().install(|| eisenstein_series(&s, &y, &trunc).unwrap().value)
        };
        let one = run(1);
        assert_eq!(one, run(2));
        assert_eq!(one, run(8));
    }
}
