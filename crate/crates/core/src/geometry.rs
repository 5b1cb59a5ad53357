//! Group action, Iwasawa coordinates, geodesics and the invariant volume on
//! the positive-definite cone.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{IntMatrix, SpdMatrix, SymMatrix};

/// Tolerance on `det Y = 1` for inputs to the determinant-one operations.
pub const UNIT_DET_TOL: f64 = 1e-8;

/// `Y[A] = ᵗA·Y·A`. `A` may be rectangular (`n×m`), giving an `m×m` result.
pub fn congruence(y: &SymMatrix, a: &DMatrix<f64>) -> Result<SymMatrix> {
    if a.nrows() != y.n() {
        return Err(Error::DimensionMismatch { expected: y.n(), got: a.nrows() });
    }
    Ok(SymMatrix::symmetrize(a.transpose() * y.matrix() * a))
}

/// Congruence that must stay positive definite; `A` has to be square and
/// invertible.
pub fn congruence_spd(y: &SpdMatrix, a: &DMatrix<f64>) -> Result<SpdMatrix> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), got: a.ncols() });
    }
    let scale = a.amax().max(f64::MIN_POSITIVE);
    let det = a.determinant();
    if det.abs() <= 1e-14 * scale.powi(a.nrows() as i32) {
        return Err(Error::Singular);
    }
    SpdMatrix::new(congruence(y.sym(), a)?)
}

pub fn congruence_int(y: &SpdMatrix, a: &IntMatrix) -> Result<SpdMatrix> {
    congruence_spd(y, &a.to_f64())
}

/// `Y = [v, x, W]`: `Y = diag(v⁻¹, v^{1/(n-1)}·W)[[1, ᵗx], [0, I]]` with
/// `det W = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartialIwasawa {
    pub v: f64,
    pub x: Vec<f64>,
    #[serde(rename = "W")]
    pub w: SpdMatrix,
}

impl PartialIwasawa {
    pub fn new(v: f64, x: Vec<f64>, w: SpdMatrix) -> Result<Self> {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Invalid(format!("v must be positive, got {v}")));
        }
        if x.len() != w.n() {
            return Err(Error::DimensionMismatch { expected: w.n(), got: x.len() });
        }
        w.check_unit_det(UNIT_DET_TOL)?;
        Ok(PartialIwasawa { v, x, w })
    }

    /// Dimension `n` of the reconstructed matrix.
    pub fn n(&self) -> usize {
        self.w.n() + 1
    }

    pub fn reconstruct(&self) -> SpdMatrix {
        let n = self.n();
        let m = n - 1;
        let vinv = 1.0 / self.v;
        let scale = self.v.powf(1.0 / m as f64);
        let mut y = DMatrix::zeros(n, n);
        y[(0, 0)] = vinv;
        for i in 0..m {
            y[(0, i + 1)] = vinv * self.x[i];
            y[(i + 1, 0)] = vinv * self.x[i];
            for j in 0..m {
                y[(i + 1, j + 1)] = vinv * self.x[i] * self.x[j] + scale * self.w.get(i, j);
            }
        }
        SpdMatrix::new(SymMatrix::symmetrize(y)).expect("partial Iwasawa data reconstructs to an SPD matrix")
    }
}

pub fn partial_iwasawa(y: &SpdMatrix) -> Result<PartialIwasawa> {
    let n = y.n();
    if n < 2 {
        return Err(Error::Unsupported { n, reason: "partial Iwasawa needs n >= 2".into() });
    }
    y.check_unit_det(UNIT_DET_TOL)?;
    let y11 = y.get(0, 0);
    let v = 1.0 / y11;
    let m = n - 1;
    let x: Vec<f64> = (1..n).map(|i| y.get(i, 0) / y11).collect();
    let scale = v.powf(-1.0 / m as f64);
    let w = DMatrix::from_fn(m, m, |i, j| scale * (y.get(i + 1, j + 1) - y11 * x[i] * x[j]));
    let w = SpdMatrix::new(SymMatrix::symmetrize(w))?;
    Ok(PartialIwasawa { v, x, w })
}

/// `Y = y⁻¹·diag(1, y₁², (y₁y₂)², …)[N]`, `N` upper unitriangular with
/// entries `x_ij`. With `det Y = 1` the scale satisfies
/// `yⁿ = y₁^{2(n-1)}·y₂^{2(n-2)}⋯y_{n-1}²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullIwasawa {
    pub y: f64,
    pub ys: Vec<f64>,
    /// `xs[i][k]` is `x_{i, i+k+1}` (zero-based rows).
    pub xs: Vec<Vec<f64>>,
}

impl FullIwasawa {
    pub fn n(&self) -> usize {
        self.ys.len() + 1
    }

    pub fn x(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < j);
        self.xs[i][j - i - 1]
    }

    /// The diagonal of `D` in `Y = ᵗN·D·N`.
    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = Vec::with_capacity(self.n());
        let mut cur = 1.0 / self.y;
        d.push(cur);
        for yk in &self.ys {
            cur *= yk * yk;
            d.push(cur);
        }
        d
    }

    /// `log(yⁿ) - Σ 2(n-k)·log y_k`; zero exactly when `det Y = 1`.
    pub fn scale_relation_defect(&self) -> f64 {
        let n = self.n();
        let rhs: f64 = self.ys.iter().enumerate().map(|(k, yk)| 2.0 * (n - 1 - k) as f64 * yk.ln()).sum();
        n as f64 * self.y.ln() - rhs
    }

    pub fn reconstruct(&self) -> Result<SpdMatrix> {
        let n = self.n();
        let d = self.diagonal();
        let mut nm = DMatrix::<f64>::identity(n, n);
        for i in 0..n {
            for j in i + 1..n {
                nm[(i, j)] = self.x(i, j);
            }
        }
        let dm = DMatrix::from_diagonal(&DVector::from_vec(d));
        SpdMatrix::new(SymMatrix::symmetrize(nm.transpose() * dm * nm))
    }
}

pub fn full_iwasawa(y: &SpdMatrix) -> Result<FullIwasawa> {
    let n = y.n();
    if n < 2 {
        return Err(Error::Unsupported { n, reason: "Iwasawa coordinates need n >= 2".into() });
    }
    y.check_unit_det(UNIT_DET_TOL)?;
    let l = y.cholesky();
    let d: Vec<f64> = (0..n).map(|i| l[(i, i)] * l[(i, i)]).collect();
    let ys = (0..n - 1).map(|k| (d[k + 1] / d[k]).sqrt()).collect();
    let xs = (0..n).map(|i| (i + 1..n).map(|j| l[(j, i)] / l[(i, i)]).collect()).collect();
    Ok(FullIwasawa { y: 1.0 / d[0], ys, xs })
}

/// Spectral data `Y = ᵗV·exp(A)·V` of a point; `α(t) = ᵗV·exp(tA)·V`.
#[derive(Debug, Clone)]
pub struct GeodesicSpec {
    pub v: DMatrix<f64>,
    pub a: Vec<f64>,
}

impl GeodesicSpec {
    pub fn from_point(y: &SpdMatrix) -> Self {
        let eig = SymmetricEigen::new(y.matrix().clone());
        let a = eig.eigenvalues.iter().map(|l| l.ln()).collect();
        GeodesicSpec { v: eig.eigenvectors.transpose(), a }
    }

    pub fn at(&self, t: f64) -> SpdMatrix {
        let e = DVector::from_iterator(self.a.len(), self.a.iter().map(|a| (t * a).exp()));
        let m = self.v.transpose() * DMatrix::from_diagonal(&e) * &self.v;
        SpdMatrix::new(SymMatrix::symmetrize(m)).expect("exponential of a symmetric matrix is SPD")
    }

    pub fn length(&self) -> f64 {
        self.a.iter().map(|a| a * a).sum::<f64>().sqrt()
    }
}

/// Point at parameter `t` on the geodesic from `I` to `Y`.
pub fn geodesic(y: &SpdMatrix, t: f64) -> SpdMatrix {
    GeodesicSpec::from_point(y).at(t)
}

/// Invariant distance; for `Y1 = L·ᵗL` it equals the geodesic length from
/// `I` to `L⁻¹·Y2·ᵗL⁻¹`.
pub fn distance(y1: &SpdMatrix, y2: &SpdMatrix) -> Result<f64> {
    if y1.n() != y2.n() {
        return Err(Error::DimensionMismatch { expected: y1.n(), got: y2.n() });
    }
    let n = y1.n();
    let linv = y1
        .cholesky()
        .clone()
        .solve_lower_triangular(&DMatrix::identity(n, n))
        .ok_or(Error::Singular)?;
    let z = &linv * y2.matrix() * linv.transpose();
    let eig = SymmetricEigen::new(SymMatrix::symmetrize(z).into_matrix());
    Ok(eig.eigenvalues.iter().map(|l| l.ln().powi(2)).sum::<f64>().sqrt())
}

/// `det(Y)^{-(n+1)/2}`, the density of the invariant volume in the entries
/// `y_ij`, `i ≤ j`.
pub fn volume_density(y: &SpdMatrix) -> f64 {
    let n = y.n() as f64;
    let logdet = *y.log_leading_minors().last().unwrap();
    (-(n + 1.0) / 2.0 * logdet).exp()
}

/// `v^{-(n+2)/2}`, the density in partial Iwasawa coordinates `(v, x, W)`
/// relative to `dv·dx·dμ_{n-1}(W)`.
pub fn iwasawa_volume_density(p: &PartialIwasawa) -> f64 {
    let n = p.n() as f64;
    p.v.powf(-(n + 2.0) / 2.0)
}

/// Flattened recursive partial-Iwasawa chart on the determinant-one slice:
/// `(v, x₁…x_{n-1}, chart of W)`, of dimension `n(n+1)/2 - 1`.
pub fn chart_dim(n: usize) -> usize {
    n * (n + 1) / 2 - 1
}

pub fn to_chart(y: &SpdMatrix) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(chart_dim(y.n()));
    let mut cur = y.clone();
    while cur.n() >= 2 {
        let p = partial_iwasawa(&cur)?;
        out.push(p.v);
        out.extend_from_slice(&p.x);
        cur = p.w;
    }
    Ok(out)
}

pub fn from_chart(n: usize, q: &[f64]) -> Result<SpdMatrix> {
    if q.len() != chart_dim(n) {
        return Err(Error::DimensionMismatch { expected: chart_dim(n), got: q.len() });
    }
    if n == 1 {
        return Ok(SpdMatrix::identity(1));
    }
    let v = q[0];
    if !(v > 0.0) {
        return Err(Error::Invalid(format!("chart coordinate v = {v} must be positive")));
    }
    let x = q[1..n].to_vec();
    let w = from_chart(n - 1, &q[n..])?;
    Ok(PartialIwasawa { v, x, w }.reconstruct())
}
