//! Riemann zeta at real arguments, the Gamma function and sphere volumes.

use std::f64::consts::PI;

/// `B_{2j}/(2j)!` for `j = 1..=8`.
const BERNOULLI_OVER_FACTORIAL: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 720.0,
    1.0 / 30240.0,
    -1.0 / 1209600.0,
    1.0 / 47900160.0,
    -691.0 / 1307674368000.0,
    1.0 / 74724249600.0,
    -3617.0 / 10670622842880000.0,
];

/// `ζ(s)` for real `s > 1` by Euler–Maclaurin summation.
pub fn zeta(s: f64) -> f64 {
    assert!(s > 1.0, "zeta is only implemented for s > 1");
    const N: usize = 12;
    let nf = N as f64;
    let mut sum: f64 = (1..N).map(|k| (k as f64).powf(-s)).sum();
    sum += nf.powf(1.0 - s) / (s - 1.0) + 0.5 * nf.powf(-s);
    // rising factorial s(s+1)…(s+2j-2) times N^{-s-2j+1}
    let mut rising = s;
    let mut pow = nf.powf(-s - 1.0);
    for (j, c) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        if j > 0 {
            let m = 2.0 * j as f64;
            rising *= (s + m - 1.0) * (s + m);
            pow /= nf * nf;
        }
        sum += c * rising * pow;
    }
    sum
}

pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

/// `Vol(S^{k-1}) = 2π^{k/2}/Γ(k/2)`.
pub fn sphere_volume(k: usize) -> f64 {
    let h = k as f64 / 2.0;
    2.0 * PI.powf(h) / gamma(h)
}
