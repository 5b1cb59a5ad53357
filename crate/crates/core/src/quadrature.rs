//! Adaptive Gauss–Kronrod (7, 15) quadrature on finite intervals.

use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

/// Gauss weights for the nodes `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { abs_tol: 1e-300, rel_tol: 1e-13, max_intervals: 2000 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: Complex64,
    pub error: f64,
    pub intervals: usize,
}

struct Piece {
    err: f64,
    a: f64,
    b: f64,
    val: Complex64,
}

impl PartialEq for Piece {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Piece {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&o.err)
    }
}

fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for i in 0..7 {
        let dx = h * XGK[i];
        let pair = f(c - dx) + f(c + dx);
        kron += pair * WGK[i];
        if i % 2 == 1 {
            gauss += pair * WG[i / 2];
        }
    }
    let kron = kron * h;
    let gauss = gauss * h;
    (kron, (kron - gauss).norm())
}

/// `∫_a^b f`, splitting the interval with the largest error estimate until
/// the total error meets the tolerance.
pub fn integrate<F: Fn(f64) -> Complex64>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<QuadResult> {
    let (v, e) = gk15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Piece { err: e, a, b, val: v });
    let mut total = v;
    let mut err = e;
    let mut intervals = 1;
    loop {
        if !(total.re.is_finite() && total.im.is_finite() && err.is_finite()) {
            return Err(Error::Quadrature { estimate: total.norm(), error: err });
        }
        if err <= opts.abs_tol.max(opts.rel_tol * total.norm()) {
            break;
        }
        if intervals >= opts.max_intervals {
            return Err(Error::Quadrature { estimate: total.norm(), error: err });
        }
        let p = heap.pop().expect("heap holds every interval");
        let m = 0.5 * (p.a + p.b);
        let (v1, e1) = gk15(&f, p.a, m);
        let (v2, e2) = gk15(&f, m, p.b);
        total += v1 + v2 - p.val;
        err += e1 + e2 - p.err;
        heap.push(Piece { err: e1, a: p.a, b: m, val: v1 });
        heap.push(Piece { err: e2, a: m, b: p.b, val: v2 });
        intervals += 1;
        // Re-sum occasionally so cancellation in the running totals cannot
        // drift.
        if intervals % 64 == 0 {
            total = heap.iter().map(|p| p.val).sum();
            err = heap.iter().map(|p| p.err).sum();
        }
    }
    Ok(QuadResult { value: total, error: err, intervals })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let r = integrate(|x| Complex64::new(x.powi(6) - 2.0 * x, 0.0), 0.0, 2.0, QuadOptions::default()).unwrap();
        assert!((r.value.re - (128.0 / 7.0 - 4.0)).abs() < 1e-13);
        assert_eq!(r.intervals, 1);
    }

    #[test]
    fn peaked_and_oscillatory() {
        let r = integrate(|x| Complex64::new((-x * x * 100.0).exp(), 0.0), -5.0, 5.0, QuadOptions::default()).unwrap();
        assert!((r.value.re - (std::f64::consts::PI / 100.0).sqrt()).abs() < 1e-13);
        let r = integrate(|x| Complex64::new(0.0, 20.0 * x).exp(), 0.0, 1.0, QuadOptions::default()).unwrap();
        let exact = (Complex64::new(0.0, 20.0).exp() - 1.0) / Complex64::new(0.0, 20.0);
        assert!((r.value - exact).norm() < 1e-13);
    }

    #[test]
    fn gives_up_on_singularities() {
        let opts = QuadOptions { max_intervals: 20, ..Default::default() };
        assert!(matches!(
            integrate(|x: f64| Complex64::new(x.abs().powf(-0.9), 0.0), -1.0, 1.0, opts),
            Err(Error::Quadrature { .. })
        ));
    }
}
