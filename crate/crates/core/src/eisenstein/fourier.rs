//! Torus averages: Fourier coefficients in the `x` variable and the block
//! integrals defining cusp forms.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::geometry::{congruence_spd, PartialIwasawa};
use crate::linalg::SpdMatrix;

/// Largest tensor grid evaluated in one call.
pub const GRID_CAP: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TorusAverage {
    #[serde(with = "crate::json")]
    pub value: Complex64,
    /// Points per dimension of the coarse grid; the value uses twice as many.
    pub m: usize,
    /// `|value(2M) - value(M)|`.
    pub change: f64,
}

/// Trapezoid average of `g(x)·f(point(x))` over `[0,1)^d` on grids of `M`
/// and `2M` points per dimension, both read off one batch of `(2M)^d`
/// evaluations.
fn torus_average(
    f: &dyn ScalarField,
    d: usize,
    m: usize,
    tol: f64,
    point: impl Fn(&[f64]) -> Result<SpdMatrix>,
    weight: impl Fn(&[f64]) -> Complex64,
) -> Result<TorusAverage> {
    if m < 8 {
        return Err(Error::Invalid(format!("need at least 8 quadrature points per dimension, got {m}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Invalid("tolerance must be positive".into()));
    }
    let fine = 2 * m;
    let total = fine.checked_pow(d as u32).filter(|&t| t <= GRID_CAP).ok_or_else(|| {
        Error::Guardrail(format!("{fine}^{d} quadrature points exceed the cap {GRID_CAP}"))
    })?;
    let mut xs = Vec::with_capacity(total);
    let mut pts = Vec::with_capacity(total);
    let mut idx = vec![0usize; d];
    for _ in 0..total {
        let x: Vec<f64> = idx.iter().map(|&k| k as f64 / fine as f64).collect();
        pts.push(point(&x)?);
        xs.push((x, idx.iter().all(|k| k % 2 == 0)));
        for k in (0..d).rev() {
            idx[k] += 1;
            if idx[k] < fine {
                break;
            }
            idx[k] = 0;
        }
    }
    let vals = f.eval_many(&pts)?;
    let mut fine_sum = Complex64::new(0.0, 0.0);
    let mut coarse_sum = Complex64::new(0.0, 0.0);
    let mut mag = 0.0;
    for ((x, even), fv) in xs.iter().zip(&vals) {
        let t = fv * weight(x);
        fine_sum += t;
        mag += fv.norm();
        if *even {
            coarse_sum += t;
        }
    }
    let value = fine_sum / total as f64;
    let coarse = coarse_sum / m.pow(d as u32) as f64;
    let change = (value - coarse).norm();
    let scale = value.norm().max(mag / total as f64);
    if change > 10.0 * tol * scale {
        return Err(Error::Quadrature { estimate: value.norm(), error: change });
    }
    Ok(TorusAverage { value, m, change })
}

/// `a_N(v, W) = ∫_{[0,1]^{n-1}} f([v, x, W])·e^{-2πi·ᵗxN} dx`.
pub fn fourier_coefficient(f: &dyn ScalarField, big_n: &[i64], v: f64, w: &SpdMatrix, m: usize, tol: f64) -> Result<TorusAverage> {
    let d = w.n();
    if big_n.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: big_n.len() });
    }
    PartialIwasawa::new(v, vec![0.0; d], w.clone())?;
    torus_average(
        f,
        d,
        m,
        tol,
        |x| Ok(PartialIwasawa { v, x: x.to_vec(), w: w.clone() }.reconstruct()),
        |x| {
            let phase: f64 = x.iter().zip(big_n).map(|(xi, &ni)| xi * ni as f64).sum();
            Complex64::from_polar(1.0, -TAU * phase)
        },
    )
}

/// `∫_{X ∈ (ℝ/ℤ)^{j×(n-j)}} f(Y[[I_j, X], [0, I_{n-j}]]) dX`.
pub fn cuspidality_defect(f: &dyn ScalarField, j: usize, y: &SpdMatrix, m: usize, tol: f64) -> Result<TorusAverage> {
    let n = y.n();
    if j == 0 || j >= n {
        return Err(Error::Invalid(format!("block index must satisfy 1 <= j <= n-1, got j = {j}, n = {n}")));
    }
    let d = j * (n - j);
    torus_average(
        f,
        d,
        m,
        tol,
        |x| {
            let mut t = DMatrix::identity(n, n);
            for a in 0..j {
                for b in 0..n - j {
                    t[(a, j + b)] = x[a * (n - j) + b];
                }
            }
            congruence_spd(y, &t)
        },
        |_| Complex64::new(1.0, 0.0),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eisenstein::{EisensteinField, TruncationParams};
    use crate::geometry::partial_iwasawa;
    use crate::selberg::SpectralParameter;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn constant_fields() {
        let f = |_: &SpdMatrix| Ok(c(2.5));
        let w = SpdMatrix::identity(2);
        let a = fourier_coefficient(&f, &[0, 0], 1.3, &w, 8, 1e-12).unwrap();
        assert!((a.value - c(2.5)).norm() < 1e-14);
        let y = SpdMatrix::from_rows(&[vec![2.0, 0.3, 0.1], vec![0.3, 1.0, 0.2], vec![0.1, 0.2, 0.6]]).unwrap();
        for j in 1..3 {
            let d = cuspidality_defect(&f, j, &y, 8, 1e-12).unwrap();
            assert!((d.value - c(2.5)).norm() < 1e-14);
        }
    }

    #[test]
    fn characters_are_orthogonal() {
        let n0 = [2i64, -1];
        let f = move |y: &SpdMatrix| {
            let p = partial_iwasawa(y)?;
            let phase: f64 = p.x.iter().zip(&n0).map(|(x, &k)| x * k as f64).sum();
            Ok(Complex64::from_polar(1.0, TAU * phase))
        };
        let w = SpdMatrix::from_rows(&[vec![1.2, 0.4], vec![0.4, 1.0]]).unwrap().normalize_det();
        for big_n in [[2i64, -1], [0, 0], [1, -1], [3, 2]] {
            let m = 2 * big_n.iter().zip(&n0).map(|(a, b)| (a - b).abs()).max().unwrap() as usize + 2;
            let a = fourier_coefficient(&f, &big_n, 0.8, &w, m.max(8), 1e-10).unwrap();
            let want = if big_n == n0 { 1.0 } else { 0.0 };
            assert!((a.value - c(want)).norm() < 1e-12, "{big_n:?}: {}", a.value);
        }
    }

    #[test]
    fn oscillation_is_cuspidal() {
        let f = |y: &SpdMatrix| Ok(Complex64::from_polar(1.0, TAU * partial_iwasawa(y)?.x[0]));
        let y = PartialIwasawa::new(1.7, vec![0.3], SpdMatrix::identity(1)).unwrap().reconstruct();
        let d = cuspidality_defect(&f, 1, &y, 8, 1e-10).unwrap();
        assert!(d.value.norm() < 1e-12);
    }

    #[test]
    fn eisenstein_constant_term_and_defect() {
        let s = SpectralParameter::real(2, &[2.5]).unwrap();
        let e = EisensteinField::new(s, TruncationParams::new(100).unwrap()).unwrap();
        let v = 1e3;
        let a0 = fourier_coefficient(&e, &[0], v, &SpdMatrix::identity(1), 8, 1e-10).unwrap();
        assert!((a0.value.re / v.powf(2.5) - 1.0).abs() < 1e-2);
        let y = PartialIwasawa::new(1.5, vec![0.2], SpdMatrix::identity(1)).unwrap().reconstruct();
        let d = cuspidality_defect(&e, 1, &y, 16, 1e-8).unwrap();
        assert!(d.value.norm() > 1.0, "{}", d.value);
    }

    #[test]
    fn rough_integrands_are_refused() {
        // Not periodic, so the trapezoid rule converges only to first order.
        let f = |y: &SpdMatrix| Ok(c(partial_iwasawa(y)?.x[0]));
        let r = fourier_coefficient(&f, &[0], 1.0, &SpdMatrix::identity(1), 8, 1e-10);
        assert!(matches!(r, Err(Error::Quadrature { .. })), "{r:?}");
    }
}
