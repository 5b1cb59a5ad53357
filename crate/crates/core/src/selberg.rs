//! Selberg power functions, characters of the triangular group and Monte
//! Carlo spherical functions.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::congruence_spd;
use crate::linalg::{SpdMatrix, SymMatrix};
use crate::rng::{gaussian_matrix, sharded};

/// `s = (s_1, …, s_m)` attached to dimension `n`; `m` is `n-1` for the
/// determinant-one slice and may be `n` for power functions on the full cone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralParameter {
    pub n: usize,
    #[serde(with = "crate::json::vec")]
    pub s: Vec<Complex64>,
}

impl SpectralParameter {
    pub fn new(n: usize, s: Vec<Complex64>) -> Result<Self> {
        if n == 0 || !(s.len() + 1 == n || s.len() == n) {
            return Err(Error::DimensionMismatch { expected: n.saturating_sub(1), got: s.len() });
        }
        Ok(SpectralParameter { n, s })
    }

    pub fn real(n: usize, s: &[f64]) -> Result<Self> {
        Self::new(n, s.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// `ξ_j = (1/(n-j))·Σ_{k=j+1}^{n-1} (n-k)·s_k` for 1-based `j ≤ n-1`.
    pub fn xi(&self, j: usize) -> Complex64 {
        let n = self.n;
        assert!(j >= 1 && j < n, "xi index out of range");
        let sum: Complex64 = (j + 1..n).map(|k| self.s[k - 1] * (n - k) as f64).sum();
        sum / (n - j) as f64
    }

    pub fn xis(&self) -> Vec<Complex64> {
        (1..self.n).map(|j| self.xi(j)).collect()
    }

    pub fn negated(&self) -> Self {
        SpectralParameter { n: self.n, s: self.s.iter().map(|z| -z).collect() }
    }

    /// The parameter `(s_2, …, s_{n-1})` of the next lower level.
    pub fn truncated(&self) -> Self {
        SpectralParameter { n: self.n - 1, s: self.s.iter().skip(1).take(self.n.saturating_sub(2)).cloned().collect() }
    }
}

/// `p_s(Y) = ∏_j det(Y_j)^{s_j}` over leading principal minors.
pub fn power_function(s: &[Complex64], y: &SpdMatrix) -> Result<Complex64> {
    let n = y.n();
    if s.len() > n {
        return Err(Error::DimensionMismatch { expected: n, got: s.len() });
    }
    let logm = y.log_leading_minors();
    let e: Complex64 = s.iter().zip(&logm).map(|(sj, lm)| sj * lm).sum();
    Ok(e.exp())
}

/// An upper-triangular real matrix with positive diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangularMatrix {
    m: DMatrix<f64>,
}

impl TriangularMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        let n = m.nrows();
        if m.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: m.ncols() });
        }
        for i in 0..n {
            if !(m[(i, i)] > 0.0) {
                return Err(Error::Invalid(format!("diagonal entry {i} is not positive")));
            }
            for j in 0..i {
                if m[(i, j)] != 0.0 {
                    return Err(Error::Invalid("matrix is not upper triangular".into()));
                }
            }
        }
        Ok(TriangularMatrix { m })
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Self {
        let m = DMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
            std::cmp::Ordering::Less => rng.gen_range(-1.0..1.0),
            std::cmp::Ordering::Equal => rng.gen_range(-1.0f64..1.0).exp(),
            std::cmp::Ordering::Greater => 0.0,
        });
        TriangularMatrix { m }
    }

    pub fn n(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn mul(&self, other: &TriangularMatrix) -> TriangularMatrix {
        TriangularMatrix { m: &self.m * &other.m }
    }
}

/// `τ_r(t) = ∏_j t_jj^{r_j}`.
pub fn tau_character(r: &[Complex64], t: &TriangularMatrix) -> Result<Complex64> {
    if r.len() != t.n() {
        return Err(Error::DimensionMismatch { expected: t.n(), got: r.len() });
    }
    Ok(r.iter().enumerate().map(|(j, rj)| rj * t.m[(j, j)].ln()).sum::<Complex64>().exp())
}

/// `r_j = 2(s_j + ⋯ + s_n)`.
pub fn r_from_s(s: &[Complex64]) -> Vec<Complex64> {
    let mut r = vec![Complex64::new(0.0, 0.0); s.len()];
    let mut acc = Complex64::new(0.0, 0.0);
    for j in (0..s.len()).rev() {
        acc += s[j];
        r[j] = acc * 2.0;
    }
    r
}

/// Exponents `2z_j + j - (n+1)/2` of `φ_z`.
pub fn phi_exponents(z: &[Complex64]) -> Vec<Complex64> {
    let n = z.len() as f64;
    z.iter().enumerate().map(|(j, zj)| zj * 2.0 + (j as f64 + 1.0) - (n + 1.0) / 2.0).collect()
}

/// `φ_z(t) = ∏_j t_jj^{2z_j + j - (n+1)/2}`.
pub fn phi_character(z: &[Complex64], t: &TriangularMatrix) -> Result<Complex64> {
    tau_character(&phi_exponents(z), t)
}

/// Solves `2(s_j + ⋯ + s_n) = r_j` by back-substitution.
pub fn s_from_r(r: &[Complex64]) -> Vec<Complex64> {
    let n = r.len();
    (0..n).map(|j| if j + 1 < n { (r[j] - r[j + 1]) / 2.0 } else { r[j] / 2.0 }).collect()
}

/// The `s` with `p_s(I[t]) = φ_z(t)`.
pub fn s_for_phi(z: &[Complex64]) -> Vec<Complex64> {
    s_from_r(&phi_exponents(z))
}

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the
/// signs of `R`'s diagonal moved into `Q`.
pub fn haar_orthogonal_sample<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<f64> {
    loop {
        let g = gaussian_matrix(rng, n, n);
        let qr = g.qr();
        let r = qr.r();
        if (0..n).any(|i| r[(i, i)] == 0.0) {
            continue;
        }
        let mut q = qr.q();
        for j in 0..n {
            if r[(j, j)] < 0.0 {
                q.column_mut(j).neg_mut();
            }
        }
        return q;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SphericalEstimate {
    #[serde(with = "crate::json")]
    pub estimate: Complex64,
    pub stderr: f64,
    pub samples: usize,
}

/// `h_s(Y) = ∫_K p_s(Y[k]) dk` by Monte Carlo over Haar samples.
pub fn spherical_function(s: &[Complex64], y: &SpdMatrix, samples: usize, seed: u64) -> Result<SphericalEstimate> {
    let n = y.n();
    if s.len() > n {
        return Err(Error::DimensionMismatch { expected: n, got: s.len() });
    }
    if y.sym().max_abs_diff(&SymMatrix::identity(n)) == 0.0 {
        return Ok(SphericalEstimate { estimate: Complex64::new(1.0, 0.0), stderr: 0.0, samples: 0 });
    }
    if n == 1 {
        return Ok(SphericalEstimate { estimate: power_function(s, y)?, stderr: 0.0, samples: 0 });
    }
    if samples < 100 {
        return Err(Error::Invalid("spherical function needs at least 100 samples".into()));
    }
    let parts = sharded(samples, seed, |rng, count| -> Result<[f64; 4]> {
        let mut acc = [0.0; 4];
        for _ in 0..count {
            let k = haar_orthogonal_sample(rng, n);
            let p = power_function(s, &congruence_spd(y, &k)?)?;
            acc[0] += p.re;
            acc[1] += p.im;
            acc[2] += p.re * p.re;
            acc[3] += p.im * p.im;
        }
        Ok(acc)
    });
    let mut tot = [0.0; 4];
    for p in parts {
        let p = p?;
        for i in 0..4 {
            tot[i] += p[i];
        }
    }
    let m = samples as f64;
    let mean = Complex64::new(tot[0] / m, tot[1] / m);
    let var = (tot[2] / m - mean.re * mean.re) + (tot[3] / m - mean.im * mean.im);
    let stderr = (var.max(0.0) * m / (m - 1.0) / m).sqrt();
    Ok(SphericalEstimate { estimate: mean, stderr, samples })
}
