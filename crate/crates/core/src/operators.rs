//! Invariant differential operators by finite differences: Selberg's `D_k`,
//! the Iwasawa-coordinate Laplacian, and the Eisenstein eigenvalue.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fd::{first, mixed, second, FdConfig};
use crate::field::ScalarField;
use crate::geometry::{partial_iwasawa, PartialIwasawa};
use crate::linalg::{SpdMatrix, SymMatrix};
use crate::selberg::SpectralParameter;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorKind {
    Dk(usize),
    LaplacianPaper,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorSpec {
    pub kind: OperatorKind,
    pub fd: FdConfig,
}

impl OperatorSpec {
    pub fn validate(&self, n: usize) -> Result<()> {
        self.fd.validate()?;
        if let OperatorKind::Dk(k) = self.kind {
            if k == 0 || k > n {
                return Err(Error::Invalid(format!("D_k needs 1 <= k <= n, got k = {k}, n = {n}")));
            }
        }
        Ok(())
    }
}

fn dk_supported(n: usize, k: usize) -> Result<()> {
    let ok = match k {
        0 => false,
        1 => true,
        2 => n <= 3,
        _ => n <= 2,
    };
    if !ok || k > n {
        return Err(Error::Unsupported { n, reason: format!("D_{k} is provided for k = 1 (any n), k = 2 (n <= 3), k >= 3 (n <= 2), k <= n") });
    }
    Ok(())
}

type CMat = DMatrix<Complex64>;

fn perturb(y: &SpdMatrix, a: usize, b: usize, t: f64) -> Result<SpdMatrix> {
    let mut m = y.matrix().clone();
    m[(a, b)] += t;
    if a != b {
        m[(b, a)] += t;
    }
    SpdMatrix::new(SymMatrix::symmetrize(m))
}

/// `G_0 = f·I`, `G_r = Y·Div(G_{r-1})` with `Div(G)_{ml} = Σ_j ∂_{mj} G_{jl}`
/// and `∂ = ((1 + δ_ij)/2)·∂/∂y_ij`.
fn g_matrix(f: &dyn ScalarField, y: &SpdMatrix, r: u32, cfg: &FdConfig) -> Result<CMat> {
    let n = y.n();
    if r == 0 {
        let v = f.eval(y)?;
        return Ok(CMat::from_diagonal_element(n, n, v));
    }
    let level = cfg.nested(r - 1);
    let center = g_matrix(f, y, r - 1, cfg)?;
    let mut partial = vec![vec![CMat::zeros(n, n); n]; n];
    for a in 0..n {
        for b in a..n {
            let scale = (y.get(a, a) * y.get(b, b)).sqrt();
            let h = level.step * scale;
            let est = first(|t| g_matrix(f, &perturb(y, a, b, t)?, r - 1, cfg), h, level.richardson > 0)?;
            let d = est.checked(level.tol, center.norm() / scale)?;
            let d = if a == b { d } else { d.map(|z| z * 0.5) };
            partial[a][b] = d.clone();
            partial[b][a] = d;
        }
    }
    let mut div = CMat::zeros(n, n);
    for m in 0..n {
        for l in 0..n {
            div[(m, l)] = (0..n).map(|j| partial[m][j][(j, l)]).sum();
        }
    }
    let ym = y.matrix().map(|x| Complex64::new(x, 0.0));
    Ok(ym * div)
}

/// `D_k f = σ((Y·∂/∂Y)^k) f` at `Y`.
pub fn apply_dk(f: &dyn ScalarField, y: &SpdMatrix, k: usize, cfg: &FdConfig) -> Result<Complex64> {
    cfg.validate()?;
    dk_supported(y.n(), k)?;
    Ok(g_matrix(f, y, k as u32, cfg)?.trace())
}

/// Reading of the first-order `v` term of the Laplacian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LaplacianMode {
    /// `-(1/n)·v·∂/∂v`.
    #[default]
    Corrected,
    /// `-(1/n)·∂/∂v` as typeset.
    Verbatim,
}

/// A field given in partial Iwasawa coordinates.
pub trait PartialField: Sync {
    fn eval_partial(&self, p: &PartialIwasawa) -> Result<Complex64>;
}

/// Adapter viewing a field on the cone through `[v, x, W]`.
pub struct ViaMatrix<'a>(pub &'a dyn ScalarField);

impl PartialField for ViaMatrix<'_> {
    fn eval_partial(&self, p: &PartialIwasawa) -> Result<Complex64> {
        self.0.eval(&p.reconstruct())
    }
}

struct InnerW<'a> {
    outer: &'a dyn PartialField,
    v: f64,
    x: &'a [f64],
}

impl PartialField for InnerW<'_> {
    fn eval_partial(&self, q: &PartialIwasawa) -> Result<Complex64> {
        let p = PartialIwasawa { v: self.v, x: self.x.to_vec(), w: q.reconstruct() };
        self.outer.eval_partial(&p)
    }
}

/// `((n-1)/n)·v²·∂²_v - (1/n)·v·∂_v + v^{n/(n-1)}·W[∂_x] + Δ_{n-1}`, with
/// `Δ_1 = 0`.
pub fn laplacian_paper(f: &dyn PartialField, p: &PartialIwasawa, mode: LaplacianMode, cfg: &FdConfig) -> Result<Complex64> {
    cfg.validate()?;
    laplacian_rec(f, p, mode, cfg)
}

/// [`laplacian_paper`] for a field on the cone.
pub fn laplacian_paper_matrix(f: &dyn ScalarField, p: &PartialIwasawa, mode: LaplacianMode, cfg: &FdConfig) -> Result<Complex64> {
    laplacian_paper(&ViaMatrix(f), p, mode, cfg)
}

fn laplacian_rec(f: &dyn PartialField, p: &PartialIwasawa, mode: LaplacianMode, cfg: &FdConfig) -> Result<Complex64> {
    let n = p.n();
    let nf = n as f64;
    let m = n - 1;
    let rich = cfg.richardson > 0;
    let f0 = f.eval_partial(p)?;
    let at = |v: f64, x: Vec<f64>| PartialIwasawa { v, x, w: p.w.clone() };

    let hv = cfg.step * p.v;
    let fv = |t: f64| f.eval_partial(&at(p.v + t, p.x.clone()));
    let dv = first(fv, hv, rich)?.checked(cfg.tol, f0.norm() / p.v)?;
    let dvv = second(fv, &f0, hv, rich)?.checked(cfg.tol, f0.norm() / (p.v * p.v))?;
    let first_order = match mode {
        LaplacianMode::Corrected => dv * p.v,
        LaplacianMode::Verbatim => dv,
    };
    let mut total = dvv * ((nf - 1.0) / nf * p.v * p.v) - first_order / nf;

    // W[∂/∂x] = Σ_ij w_ij ∂²/∂x_i∂x_j
    let hx = cfg.step;
    let shifted = |i: usize, ti: f64, j: usize, tj: f64| {
        let mut x = p.x.clone();
        x[i] += ti;
        x[j] += tj;
        f.eval_partial(&at(p.v, x))
    };
    let mut wx = Complex64::new(0.0, 0.0);
    for i in 0..m {
        let d = second(|t| shifted(i, t, i, 0.0), &f0, hx, rich)?.checked(cfg.tol, f0.norm())?;
        wx += d * p.w.get(i, i);
        for j in i + 1..m {
            let d = mixed(|s, t| shifted(i, s, j, t), hx, hx, rich)?.checked(cfg.tol, f0.norm())?;
            wx += d * (2.0 * p.w.get(i, j));
        }
    }
    total += wx * p.v.powf(nf / (nf - 1.0));

    if m >= 2 {
        let inner = InnerW { outer: f, v: p.v, x: &p.x };
        let pw = partial_iwasawa(&p.w)?;
        total += laplacian_rec(&inner, &pw, mode, cfg)?;
    }
    Ok(total)
}

/// `λ = Σ_{j=1}^{n-1} ((n-j)/(n-j+1))·(s_j + ξ_j)·(s_j - 1 + ξ_j - 1/(n-j))`.
pub fn eigenvalue_lambda(s: &SpectralParameter) -> Result<Complex64> {
    let n = s.n;
    if s.s.len() + 1 != n {
        return Err(Error::DimensionMismatch { expected: n - 1, got: s.s.len() });
    }
    let mut lam = Complex64::new(0.0, 0.0);
    for j in 1..n {
        let a = (n - j) as f64;
        let sj = s.s[j - 1];
        let xi = s.xi(j);
        lam += (sj + xi) * (sj - 1.0 + xi - 1.0 / a) * (a / (a + 1.0));
    }
    Ok(lam)
}

/// `max |Δf - λf| / |f|` over the points, with the corrected Laplacian.
pub fn eigen_residual(f: &dyn PartialField, s: &SpectralParameter, points: &[PartialIwasawa], cfg: &FdConfig) -> Result<f64> {
    let lam = eigenvalue_lambda(s)?;
    let mut worst = 0.0f64;
    for p in points {
        let f0 = f.eval_partial(p)?;
        if f0.norm() == 0.0 {
            return Err(Error::VanishingField);
        }
        let d = laplacian_paper(f, p, LaplacianMode::Corrected, cfg)?;
        worst = worst.max((d - lam * f0).norm() / f0.norm());
    }
    Ok(worst)
}

impl<F> PartialField for F
where
    F: Fn(&PartialIwasawa) -> Result<Complex64> + Sync,
{
    fn eval_partial(&self, p: &PartialIwasawa) -> Result<Complex64> {
        self(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::congruence_spd;
    use crate::rng::{gaussian_matrix, random_spd, random_unit_det};
    use crate::selberg::power_function;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn dk_on_constants_and_determinants() {
        let cfg = FdConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let konst = |_: &SpdMatrix| Ok(c(2.5));
        for n in 1..=3 {
            let y = random_spd(&mut rng, n);
            assert!(apply_dk(&konst, &y, 1, &cfg).unwrap().norm() < 1e-8);
            let s = 0.7;
            let det_s = move |y: &SpdMatrix| Ok(c(y.det().powf(s)));
            let d1 = apply_dk(&det_s, &y, 1, &cfg).unwrap();
            let want = n as f64 * s * y.det().powf(s);
            assert!((d1.re - want).abs() < 1e-6 * want, "n={n}: {d1} vs {want}");
        }
    }

    #[test]
    fn power_functions_are_eigenfunctions() {
        let cfg = FdConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = vec![c(0.4), c(-0.7), c(1.1)];
        let p = |y: &SpdMatrix| power_function(&s, y);
        for k in 1..=2 {
            let ratios: Vec<Complex64> = (0..4)
                .map(|_| {
                    let y = random_spd(&mut rng, 3);
                    apply_dk(&p, &y, k, &cfg).unwrap() / p(&y).unwrap()
                })
                .collect();
            for r in &ratios {
                assert!((r - ratios[0]).norm() < 1e-4 * ratios[0].norm().max(1.0), "k={k}: {ratios:?}");
            }
        }
    }

    #[test]
    fn dk_is_invariant() {
        let cfg = FdConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = vec![c(0.5), c(0.3)];
        for k in 1..=2 {
            let y = random_spd(&mut rng, 2);
            let g = gaussian_matrix(&mut rng, 2, 2) + DMatrix::identity(2, 2) * 2.0;
            let f = |z: &SpdMatrix| power_function(&s, z).map(|p| p * z.get(0, 1).cos());
            // f_g(Z) = f(g·Z·ᵗg)
            let fg = |z: &SpdMatrix| f(&congruence_spd(z, &g.transpose()).unwrap());
            let lhs = apply_dk(&fg, &y, k, &cfg).unwrap();
            let rhs = apply_dk(&f, &congruence_spd(&y, &g.transpose()).unwrap(), k, &cfg).unwrap();
            assert!((lhs - rhs).norm() <= 1e-4 * rhs.norm().max(1e-3), "k={k}: {lhs} {rhs}");
        }
    }

    #[test]
    fn unsupported_configurations() {
        let f = |_: &SpdMatrix| Ok(c(1.0));
        let cfg = FdConfig::default();
        assert!(matches!(apply_dk(&f, &SpdMatrix::identity(4), 2, &cfg), Err(Error::Unsupported { .. })));
        assert!(matches!(apply_dk(&f, &SpdMatrix::identity(3), 3, &cfg), Err(Error::Unsupported { .. })));
        assert!(apply_dk(&f, &SpdMatrix::identity(2), 2, &cfg).is_ok());
    }

    #[test]
    fn paper_laplacian_on_powers_of_v() {
        let cfg = FdConfig::default();
        let s = 2.5;
        let f = move |p: &PartialIwasawa| Ok(c(p.v.powf(s)));
        let p = PartialIwasawa::new(1.7, vec![0.2], SpdMatrix::identity(1)).unwrap();
        let d = laplacian_paper(&f, &p, LaplacianMode::Corrected, &cfg).unwrap();
        assert!((d.re / p.v.powf(s) - 0.5 * s * (s - 2.0)).abs() < 1e-6);
        // Verbatim: (1/2)s(s-1)v^s - (1/2)s·v^{s-1}
        let d = laplacian_paper(&f, &p, LaplacianMode::Verbatim, &cfg).unwrap();
        let want = 0.5 * s * (s - 1.0) * p.v.powf(s) - 0.5 * s * p.v.powf(s - 1.0);
        assert!((d.re - want).abs() < 1e-6 * want.abs());
        let konst = |_: &PartialIwasawa| Ok(c(3.0));
        assert!(laplacian_paper(&konst, &p, LaplacianMode::Corrected, &cfg).unwrap().norm() < 1e-8);
    }

    #[test]
    fn paper_laplacian_is_linear() {
        // A wide step keeps rounding in the difference quotients below 1e-10.
        let cfg = FdConfig { step: 1e-2, richardson: 1, tol: 1e-3 };
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let p = partial_iwasawa(&random_unit_det(&mut rng, 3)).unwrap();
        let f = |q: &PartialIwasawa| Ok(c(q.v.powf(1.3) * (1.0 + q.x[1] * q.x[0]) + q.w.get(0, 0)));
        let g = |q: &PartialIwasawa| Ok(c((q.x[0] * 6.0).sin() + q.v));
        let h = |q: &PartialIwasawa| Ok(f(q)? * 2.0 - g(q)? * 0.5);
        let lf = laplacian_paper(&f, &p, LaplacianMode::Corrected, &cfg).unwrap();
        let lg = laplacian_paper(&g, &p, LaplacianMode::Corrected, &cfg).unwrap();
        let lh = laplacian_paper(&h, &p, LaplacianMode::Corrected, &cfg).unwrap();
        assert!((lh - (lf * 2.0 - lg * 0.5)).norm() < 1e-10 * lh.norm().max(1.0));
    }

    #[test]
    fn lambda_examples() {
        let lam = |n, s: &[f64]| eigenvalue_lambda(&SpectralParameter::real(n, s).unwrap()).unwrap();
        assert!(lam(2, &[2.0]).norm() < 1e-15);
        assert!((lam(2, &[3.0]) - c(1.5)).norm() < 1e-15);
        assert!((lam(3, &[2.0, 2.0]) - c(3.0)).norm() < 1e-15);
        // last term reduces to (1/2)s_{n-1}(s_{n-1} - 2)
        let l4 = lam(4, &[0.0, 0.0, 3.0]);
        let xi1 = 3.0 / 3.0;
        let xi2 = 3.0 / 2.0;
        let want = 0.75 * xi1 * (-1.0 + xi1 - 1.0 / 3.0) + (2.0 / 3.0) * xi2 * (-1.0 + xi2 - 0.5) + 0.5 * 3.0 * 1.0;
        assert!((l4 - c(want)).norm() < 1e-14);
    }

    #[test]
    fn eigen_residual_detects_non_eigenfunctions() {
        let cfg = FdConfig::default();
        let s = SpectralParameter::real(2, &[2.5]).unwrap();
        let pts: Vec<PartialIwasawa> =
            [1.1, 1.5, 2.0].iter().map(|&v| PartialIwasawa::new(v, vec![0.1], SpdMatrix::identity(1)).unwrap()).collect();
        let exact = |p: &PartialIwasawa| Ok(c(p.v.powf(2.5)));
        assert!(eigen_residual(&exact, &s, &pts, &cfg).unwrap() < 1e-4);
        let perturbed = |p: &PartialIwasawa| Ok(c(p.v.powf(2.5) + 0.1 * p.v));
        assert!(eigen_residual(&perturbed, &s, &pts, &cfg).unwrap() > 0.05);
        let zero = |_: &PartialIwasawa| Ok(c(0.0));
        assert_eq!(eigen_residual(&zero, &s, &pts, &cfg).unwrap_err(), Error::VanishingField);
    }
}
