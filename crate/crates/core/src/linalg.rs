//! Matrix types on the cone of positive-definite matrices and exact integer
//! matrices acting on it.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Pivot threshold for certifying positive definiteness, relative to the
/// largest diagonal entry.
pub const TAU_PD: f64 = 1e-12;

/// Maximum asymmetry accepted on input before averaging.
pub const SYMMETRY_TOL: f64 = 1e-9;

/// A real symmetric matrix, stored symmetrized.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    m: DMatrix<f64>,
}

impl SymMatrix {
    /// Accepts an arbitrary square matrix, rejecting it when the asymmetry
    /// exceeds [`SYMMETRY_TOL`] (scaled by the entry magnitude), and stores
    /// the average of the matrix and its transpose.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("non-finite matrix entry".into()));
        }
        let scale = m.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
        let asym = (&m - m.transpose()).amax();
        if asym > SYMMETRY_TOL * scale {
            return Err(Error::Asymmetric(asym));
        }
        Ok(Self::symmetrize(m))
    }

    /// Averages with the transpose without checking; for matrices that are
    /// symmetric up to rounding by construction.
    pub fn symmetrize(m: DMatrix<f64>) -> Self {
        let t = m.transpose();
        SymMatrix { m: (m + t) * 0.5 }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Invalid("empty matrix".into()));
        }
        for r in rows {
            if r.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: r.len() });
            }
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn identity(n: usize) -> Self {
        SymMatrix { m: DMatrix::identity(n, n) }
    }

    pub fn diagonal(d: &[f64]) -> Self {
        SymMatrix { m: DMatrix::from_diagonal(&DVector::from_column_slice(d)) }
    }

    pub fn n(&self) -> usize {
        self.m.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n()).map(|i| (0..self.n()).map(|j| self.m[(i, j)]).collect()).collect()
    }

    pub fn det(&self) -> f64 {
        self.m.determinant()
    }

    /// Evaluates the quadratic form `ᵗa·Y·a` at an integer vector.
    pub fn form_int(&self, a: &[i64]) -> f64 {
        let n = self.n();
        let mut s = 0.0;
        for i in 0..n {
            if a[i] == 0 {
                continue;
            }
            let mut row = 0.0;
            for j in 0..n {
                row += self.m[(i, j)] * a[j] as f64;
            }
            s += a[i] as f64 * row;
        }
        s
    }

    pub fn max_abs_diff(&self, other: &SymMatrix) -> f64 {
        (&self.m - &other.m).amax()
    }

    pub fn scale(&self, c: f64) -> SymMatrix {
        SymMatrix { m: &self.m * c }
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    n: usize,
    entries: Vec<Vec<f64>>,
}

impl Serialize for SymMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson { n: self.n(), entries: self.rows() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SymMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(d)?;
        if raw.entries.len() != raw.n {
            return Err(serde::de::Error::custom(format!(
                "declared n = {} but {} rows given",
                raw.n,
                raw.entries.len()
            )));
        }
        SymMatrix::from_rows(&raw.entries).map_err(serde::de::Error::custom)
    }
}

/// A symmetric positive-definite matrix together with its Cholesky factor.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdMatrix {
    sym: SymMatrix,
    chol: DMatrix<f64>,
}

impl SpdMatrix {
    pub fn new(sym: SymMatrix) -> Result<Self> {
        let chol = cholesky(sym.matrix())?;
        Ok(SpdMatrix { sym, chol })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(SymMatrix::from_rows(rows)?)
    }

    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        Self::new(SymMatrix::new(m)?)
    }

    pub fn identity(n: usize) -> Self {
        SpdMatrix { sym: SymMatrix::identity(n), chol: DMatrix::identity(n, n) }
    }

    pub fn diagonal(d: &[f64]) -> Result<Self> {
        Self::new(SymMatrix::diagonal(d))
    }

    pub fn n(&self) -> usize {
        self.sym.n()
    }

    pub fn sym(&self) -> &SymMatrix {
        &self.sym
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        self.sym.matrix()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.sym.get(i, j)
    }

    /// Lower-triangular `L` with `Y = L·ᵗL`.
    pub fn cholesky(&self) -> &DMatrix<f64> {
        &self.chol
    }

    pub fn det(&self) -> f64 {
        self.chol.diagonal().iter().map(|d| d * d).product()
    }

    /// Determinants of the upper-left `j×j` corners, `j = 1..=n`, taken from
    /// running products of the Cholesky diagonal.
    pub fn leading_minors(&self) -> Vec<f64> {
        let mut acc = 1.0;
        self.chol
            .diagonal()
            .iter()
            .map(|d| {
                acc *= d * d;
                acc
            })
            .collect()
    }

    /// Logarithms of the leading minors; no loss of range for tiny or huge
    /// determinants.
    pub fn log_leading_minors(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.chol
            .diagonal()
            .iter()
            .map(|d| {
                acc += 2.0 * d.ln();
                acc
            })
            .collect()
    }

    pub fn inverse(&self) -> DMatrix<f64> {
        let n = self.n();
        let linv = self
            .chol
            .clone()
            .solve_lower_triangular(&DMatrix::identity(n, n))
            .expect("Cholesky factor has a positive diagonal");
        linv.transpose() * linv
    }

    pub fn form_int(&self, a: &[i64]) -> f64 {
        self.sym.form_int(a)
    }

    /// Returns the same point rescaled to determinant one.
    pub fn normalize_det(&self) -> SpdMatrix {
        let n = self.n() as f64;
        let c = (-self.log_leading_minors().last().copied().unwrap_or(0.0) / n).exp();
        SpdMatrix::new(self.sym.scale(c)).expect("positive rescaling of an SPD matrix")
    }

    pub fn check_unit_det(&self, tol: f64) -> Result<()> {
        let d = self.det();
        if (d - 1.0).abs() > tol {
            return Err(Error::NotUnitDeterminant(d));
        }
        Ok(())
    }
}

impl Serialize for SpdMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.sym.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SpdMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let sym = SymMatrix::deserialize(d)?;
        SpdMatrix::new(sym).map_err(serde::de::Error::custom)
    }
}

fn cholesky(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let scale = (0..n).fold(0.0f64, |acc, i| acc.max(a[(i, i)].abs())).max(f64::MIN_POSITIVE);
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if !(d > TAU_PD * scale) {
            return Err(Error::NotPositiveDefinite { pivot: j, value: d });
        }
        let ljj = d.sqrt();
        l[(j, j)] = ljj;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(l)
}

/// A square integer matrix with overflow-checked arithmetic.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntMatrix {
    n: usize,
    data: Vec<i64>,
}

impl IntMatrix {
    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            if r.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: r.len() });
            }
            data.extend_from_slice(r);
        }
        Ok(IntMatrix { n, data })
    }

    pub fn from_cols(cols: &[Vec<i64>]) -> Result<Self> {
        Ok(Self::from_rows(cols)?.transpose())
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0; n * n];
        for i in 0..n {
            data[i * n + i] = 1;
        }
        IntMatrix { n, data }
    }

    pub fn zeros(n: usize) -> Self {
        IntMatrix { n, data: vec![0; n * n] }
    }

    pub fn diagonal(d: &[i64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, v) in d.iter().enumerate() {
            m.set(i, i, *v);
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: i64) {
        self.data[i * self.n + j] = v;
    }

    pub fn col(&self, j: usize) -> Vec<i64> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.data.chunks(self.n.max(1)).map(|r| r.to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut t = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn neg(&self) -> Self {
        IntMatrix { n: self.n, data: self.data.iter().map(|v| -v).collect() }
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: other.n });
        }
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let mut s: i64 = 0;
                for k in 0..n {
                    let p = self.get(i, k).checked_mul(other.get(k, j)).ok_or(Error::Overflow)?;
                    s = s.checked_add(p).ok_or(Error::Overflow)?;
                }
                out.set(i, j, s);
            }
        }
        Ok(out)
    }

    pub fn add(&self, other: &IntMatrix) -> Result<IntMatrix> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: other.n });
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.checked_add(*b).ok_or(Error::Overflow))
            .collect::<Result<Vec<_>>>()?;
        Ok(IntMatrix { n: self.n, data })
    }

    pub fn sub(&self, other: &IntMatrix) -> Result<IntMatrix> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: i64) -> Result<IntMatrix> {
        let data = self
            .data
            .iter()
            .map(|a| a.checked_mul(c).ok_or(Error::Overflow))
            .collect::<Result<Vec<_>>>()?;
        Ok(IntMatrix { n: self.n, data })
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn max_abs(&self) -> i64 {
        self.data.iter().map(|v| v.abs()).max().unwrap_or(0)
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> Result<i128> {
        let n = self.n;
        if n == 0 {
            return Ok(1);
        }
        let mut a: Vec<i128> = self.data.iter().map(|&v| v as i128).collect();
        let mut sign = 1i128;
        let mut prev = 1i128;
        for k in 0..n - 1 {
            if a[k * n + k] == 0 {
                let Some(p) = (k + 1..n).find(|&r| a[r * n + k] != 0) else {
                    return Ok(0);
                };
                for c in 0..n {
                    a.swap(k * n + c, p * n + c);
                }
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let t = a[i * n + j]
                        .checked_mul(a[k * n + k])
                        .and_then(|x| x.checked_sub(a[i * n + k].checked_mul(a[k * n + j])?))
                        .ok_or(Error::Overflow)?;
                    a[i * n + j] = t / prev;
                }
            }
            prev = a[k * n + k];
        }
        Ok(sign * a[n * n - 1])
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j) as f64)
    }

    /// Exact inverse of a unimodular matrix (adjugate via floating solve,
    /// rounded and then verified in integer arithmetic).
    pub fn inverse_unimodular(&self) -> Result<IntMatrix> {
        let d = self.det()?;
        if d.abs() != 1 {
            return Err(Error::NotUnimodular(d));
        }
        let inv = self.to_f64().try_inverse().ok_or(Error::Singular)?;
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let v = inv[(i, j)].round();
                if v.abs() > 9.0e15 {
                    return Err(Error::Overflow);
                }
                out.set(i, j, v as i64);
            }
        }
        if self.mul(&out)? != Self::identity(n) {
            return Err(Error::Overflow);
        }
        Ok(out)
    }
}

impl Serialize for IntMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<i64>>::deserialize(d)?;
        IntMatrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// An element of `GL(n,ℤ)/{±I}` stored with the first nonzero entry of the
/// first column positive.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct UnimodularMatrix(IntMatrix);

impl UnimodularMatrix {
    pub fn new(m: IntMatrix) -> Result<Self> {
        let d = m.det()?;
        if d.abs() != 1 {
            return Err(Error::NotUnimodular(d));
        }
        Ok(Self::canonical_sign(m))
    }

    fn canonical_sign(m: IntMatrix) -> Self {
        let first = m.col(0).into_iter().find(|&v| v != 0).unwrap_or(1);
        if first < 0 {
            UnimodularMatrix(m.neg())
        } else {
            UnimodularMatrix(m)
        }
    }

    pub fn identity(n: usize) -> Self {
        UnimodularMatrix(IntMatrix::identity(n))
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        Self::new(IntMatrix::from_rows(rows)?)
    }

    pub fn n(&self) -> usize {
        self.0.n()
    }

    pub fn int(&self) -> &IntMatrix {
        &self.0
    }

    pub fn into_int(self) -> IntMatrix {
        self.0
    }

    pub fn mul(&self, other: &UnimodularMatrix) -> Result<UnimodularMatrix> {
        Ok(Self::canonical_sign(self.0.mul(&other.0)?))
    }

    pub fn inverse(&self) -> Result<UnimodularMatrix> {
        Ok(Self::canonical_sign(self.0.inverse_unimodular()?))
    }

    pub fn transpose(&self) -> UnimodularMatrix {
        Self::canonical_sign(self.0.transpose())
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        self.0.to_f64()
    }
}

impl<'de> Deserialize<'de> for UnimodularMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let m = IntMatrix::deserialize(d)?;
        UnimodularMatrix::new(m).map_err(serde::de::Error::custom)
    }
}

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a as i64
}

pub fn gcd_slice(v: &[i64]) -> i64 {
    v.iter().fold(0, |g, &x| gcd(g, x))
}

/// Returns `(g, p, q)` with `p·a + q·b = g = gcd(a, b) ≥ 0`.
pub fn ext_gcd(a: i64, b: i64) -> (i64, i64, i64) {
    let (mut r0, mut r1) = (a, b);
    let (mut s0, mut s1) = (1i64, 0i64);
    let (mut t0, mut t1) = (0i64, 1i64);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 < 0 {
        (-r0, -s0, -t0)
    } else {
        (r0, s0, t0)
    }
}

/// Builds a unimodular matrix whose first column is the primitive vector `v`,
/// by iterated extended gcd on adjacent entries (bottom to top).
pub fn complete_primitive(v: &[i64]) -> Result<IntMatrix> {
    let n = v.len();
    if gcd_slice(v) != 1 {
        return Err(Error::Invalid(format!("vector {v:?} is not primitive")));
    }
    let mut w = v.to_vec();
    // gamma = product of inverse 2x2 steps, accumulated as column operations.
    let mut gamma = IntMatrix::identity(n);
    for i in (1..n).rev() {
        let (a, b) = (w[i - 1], w[i]);
        if b == 0 {
            continue;
        }
        let (g, p, q) = ext_gcd(a, b);
        let (a0, b0) = (a / g, b / g);
        // step on rows (i-1, i): [[p, q], [-b0, a0]] maps (a, b) to (g, 0);
        // its inverse is [[a0, -q], [b0, p]].
        w[i - 1] = g;
        w[i] = 0;
        for r in 0..n {
            let (x, y) = (gamma.get(r, i - 1), gamma.get(r, i));
            let nx = x
                .checked_mul(a0)
                .and_then(|t| t.checked_add(y.checked_mul(b0)?))
                .ok_or(Error::Overflow)?;
            let ny = x
                .checked_mul(-q)
                .and_then(|t| t.checked_add(y.checked_mul(p)?))
                .ok_or(Error::Overflow)?;
            gamma.set(r, i - 1, nx);
            gamma.set(r, i, ny);
        }
    }
    if w[0] == -1 {
        for r in 0..n {
            gamma.set(r, 0, -gamma.get(r, 0));
        }
    }
    debug_assert_eq!(gamma.col(0), v);
    Ok(gamma)
}

/// Solves `Σ x_i·c_i = 1` for a vector of coefficients with gcd one.
pub fn bezout_vector(c: &[i64]) -> Result<Vec<i64>> {
    let n = c.len();
    let m = complete_primitive(c)?;
    // m has first column c; the first row of m⁻¹ satisfies row·c = 1.
    let inv = m.inverse_unimodular()?;
    Ok((0..n).map(|j| inv.get(0, j)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn asymmetric_input_rejected() {
        let r = SymMatrix::from_rows(&[vec![1.0, 0.5], vec![0.4, 1.0]]);
        assert!(matches!(r, Err(Error::Asymmetric(_))));
        let ok = SymMatrix::from_rows(&[vec![1.0, 0.5], vec![0.5 + 1e-12, 1.0]]).unwrap();
        assert_eq!(ok.get(0, 1), ok.get(1, 0));
    }

    #[test]
    fn indefinite_rejected() {
        let r = SpdMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]);
        assert!(matches!(r, Err(Error::NotPositiveDefinite { pivot: 1, .. })));
        let tiny = SpdMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1e-14]]);
        assert!(tiny.is_err());
    }

    #[test]
    fn minors_from_cholesky() {
        let y = SpdMatrix::from_rows(&[vec![2.0, 1.0, 0.0], vec![1.0, 3.0, 1.0], vec![0.0, 1.0, 4.0]]).unwrap();
        let m = y.leading_minors();
        assert!((m[0] - 2.0).abs() < 1e-14);
        assert!((m[1] - 5.0).abs() < 1e-13);
        assert!((m[2] - y.sym().det()).abs() < 1e-12);
        let inv = y.inverse();
        let prod = y.matrix() * inv;
        assert!((prod - DMatrix::identity(3, 3)).amax() < 1e-14);
    }

    #[test]
    fn exact_det() {
        let m = IntMatrix::from_rows(&[vec![2, 1, 0], vec![1, 1, 0], vec![5, 7, 1]]).unwrap();
        assert_eq!(m.det().unwrap(), 1);
        let s = IntMatrix::from_rows(&[vec![0, 1], vec![1, 0]]).unwrap();
        assert_eq!(s.det().unwrap(), -1);
        let z = IntMatrix::from_rows(&[vec![0, 0, 1], vec![0, 2, 0], vec![3, 0, 0]]).unwrap();
        assert_eq!(z.det().unwrap(), -6);
    }

    #[test]
    fn canonical_sign() {
        let u = UnimodularMatrix::from_rows(&[vec![0, 1], vec![-1, 0]]).unwrap();
        assert_eq!(u.int().col(0), vec![0, 1]);
        assert!(UnimodularMatrix::from_rows(&[vec![2, 0], vec![0, 1]]).is_err());
    }

    #[test]
    fn ext_gcd_identity() {
        for (a, b) in [(12, 18), (-7, 3), (0, 5), (5, 0), (-4, -6), (1, 0)] {
            let (g, p, q) = ext_gcd(a, b);
            assert_eq!(g, gcd(a, b));
            assert_eq!(p * a + q * b, g);
        }
    }

    #[test]
    fn completion_has_requested_column() {
        for v in [vec![1, 0, 0], vec![0, 0, 1], vec![3, 5, 7], vec![-2, 3], vec![6, 10, 15], vec![0, -1], vec![4, -9, 0, 7]] {
            let m = complete_primitive(&v).unwrap();
            assert_eq!(m.col(0), v);
            assert_eq!(m.det().unwrap().abs(), 1);
        }
        assert!(complete_primitive(&[2, 4]).is_err());
    }

    #[test]
    fn bezout() {
        let c = [6, 10, 15];
        let x = bezout_vector(&c).unwrap();
        assert_eq!(c.iter().zip(&x).map(|(a, b)| a * b).sum::<i64>(), 1);
    }

    #[test]
    fn json_round_trip() {
        let y = SpdMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let s = serde_json::to_string(&y).unwrap();
        assert_eq!(s, r#"{"n":2,"entries":[[2.0,1.0],[1.0,1.0]]}"#);
        let back: SpdMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, y);
    }
}
