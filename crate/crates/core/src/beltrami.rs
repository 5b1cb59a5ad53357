//! Laplace–Beltrami operator of the invariant metric, assembled numerically
//! in the recursive partial-Iwasawa chart.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fd::{first, FdConfig};
use crate::field::ScalarField;
use crate::geometry::{chart_dim, from_chart, to_chart, PartialIwasawa};
use crate::linalg::SpdMatrix;

/// Which chart coordinates are `v`-type (positive, scaled multiplicatively).
fn v_positions(n: usize) -> Vec<bool> {
    let mut out = Vec::with_capacity(chart_dim(n));
    for m in (2..=n).rev() {
        out.push(true);
        out.extend(std::iter::repeat(false).take(m - 1));
    }
    out
}

fn steps(q: &[f64], n: usize, step: f64) -> Vec<f64> {
    v_positions(n).iter().zip(q).map(|(&is_v, &qi)| if is_v { step * qi } else { step }).collect()
}

/// `g_ab = tr(Y⁻¹·∂_aY·Y⁻¹·∂_bY)` in the chart, with `∂_aY` by central
/// differences.
pub fn metric_tensor(n: usize, q: &[f64], cfg: &FdConfig) -> Result<DMatrix<f64>> {
    let d = chart_dim(n);
    let y = from_chart(n, q)?;
    let yinv = y.inverse();
    let h = steps(q, n, cfg.step);
    let mut dy = Vec::with_capacity(d);
    for a in 0..d {
        let est = first(
            |t| {
                let mut qq = q.to_vec();
                qq[a] += t;
                Ok(from_chart(n, &qq)?.matrix().clone())
            },
            h[a],
            cfg.richardson > 0,
        )?;
        dy.push(&yinv * est.checked(cfg.tol, y.matrix().amax() / h[a].max(1e-300) * cfg.step)?);
    }
    let mut g = DMatrix::zeros(d, d);
    for a in 0..d {
        for b in a..d {
            let v = (&dy[a] * &dy[b]).trace();
            g[(a, b)] = v;
            g[(b, a)] = v;
        }
    }
    Ok(g)
}

/// The metric as typeset in block form:
/// `(n/(n-1))·v⁻²dv² + 2·v^{-n/(n-1)}·W⁻¹[dx] + ds²_W`.
pub fn metric_tensor_blocks(n: usize, q: &[f64]) -> Result<DMatrix<f64>> {
    let d = chart_dim(n);
    let mut g = DMatrix::zeros(d, d);
    let mut off = 0;
    let mut m = n;
    let y = from_chart(n, q)?;
    let mut cur = y;
    while m >= 2 {
        let p = crate::geometry::partial_iwasawa(&cur)?;
        let mf = m as f64;
        g[(off, off)] = mf / (mf - 1.0) / (p.v * p.v);
        let winv = p.w.inverse();
        let c = 2.0 * p.v.powf(-mf / (mf - 1.0));
        for i in 0..m - 1 {
            for j in 0..m - 1 {
                g[(off + 1 + i, off + 1 + j)] = c * winv[(i, j)];
            }
        }
        off += m;
        m -= 1;
        cur = p.w;
    }
    Ok(g)
}

fn eval_chart(f: &dyn ScalarField, n: usize, q: &[f64]) -> Result<Complex64> {
    f.eval(&from_chart(n, q)?)
}

/// One flux-form evaluation `(1/√g)·Σ_a ∂_a(√g·g^{ab}·∂_b f)` with steps `h`.
fn lb_once(f: &dyn ScalarField, n: usize, q: &[f64], h: &[f64]) -> Result<Complex64> {
    let d = q.len();
    let shift = |base: &[f64], a: usize, t: f64| {
        let mut qq = base.to_vec();
        qq[a] += t;
        qq
    };
    // √g·g^{ab}·∂_b f at a point
    let flux = |qq: &[f64], a: usize| -> Result<Complex64> {
        let g = metric_tensor_blocks(n, qq)?;
        let sqrt_det = g.determinant().sqrt();
        let ginv = g.try_inverse().ok_or(Error::Singular)?;
        let mut out = Complex64::new(0.0, 0.0);
        for b in 0..d {
            if ginv[(a, b)] == 0.0 {
                continue;
            }
            let fp = eval_chart(f, n, &shift(qq, b, h[b]))?;
            let fm = eval_chart(f, n, &shift(qq, b, -h[b]))?;
            out += (fp - fm) / (2.0 * h[b]) * ginv[(a, b)];
        }
        Ok(out * sqrt_det)
    };
    let g0 = metric_tensor_blocks(n, q)?;
    let sqrt_det0 = g0.determinant().sqrt();
    let mut total = Complex64::new(0.0, 0.0);
    for a in 0..d {
        let up = flux(&shift(q, a, h[a]), a)?;
        let dn = flux(&shift(q, a, -h[a]), a)?;
        total += (up - dn) / (2.0 * h[a]);
    }
    Ok(total / sqrt_det0)
}

/// Laplace–Beltrami operator of the invariant metric applied to `f` at the
/// point `p`, using the recursive chart `(v, x, chart of W)`.
pub fn laplace_beltrami_oracle(f: &dyn ScalarField, p: &PartialIwasawa, cfg: &FdConfig) -> Result<Complex64> {
    cfg.validate()?;
    let n = p.n();
    let q = to_chart(&p.reconstruct())?;
    let h = steps(&q, n, cfg.step);
    let coarse = lb_once(f, n, &q, &h)?;
    if cfg.richardson == 0 {
        return Ok(coarse);
    }
    let h2: Vec<f64> = h.iter().map(|x| x / 2.0).collect();
    let fine = lb_once(f, n, &q, &h2)?;
    let value = (fine * 4.0 - coarse) / 3.0;
    let f0 = f.eval(&p.reconstruct())?;
    let scale = value.norm().max(f0.norm());
    let disagreement = (value - fine).norm();
    let limit = 10.0 * cfg.tol * scale.max(f64::MIN_POSITIVE);
    if disagreement > limit {
        return Err(Error::FdInconsistent { disagreement, limit });
    }
    Ok(value)
}

/// Convenience wrapper taking a point on the cone.
pub fn laplace_beltrami_at(f: &dyn ScalarField, y: &SpdMatrix, cfg: &FdConfig) -> Result<Complex64> {
    laplace_beltrami_oracle(f, &crate::geometry::partial_iwasawa(y)?, cfg)
}
