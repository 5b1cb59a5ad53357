//! Seeded randomness: per-shard generators and random test objects.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::linalg::{IntMatrix, SpdMatrix, SymMatrix, UnimodularMatrix};

/// Samples per shard for Monte Carlo work. Fixed so results never depend on
/// the number of worker threads.
pub const SHARD_SIZE: usize = 4096;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn shard_seed(seed: u64, shard: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ shard.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

pub fn shard_rng(seed: u64, shard: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(shard_seed(seed, shard))
}

/// Split `total` samples into fixed-size shards, run `f(rng, count)` on each
/// in parallel and return the results in shard order.
pub fn sharded<T, F>(total: usize, seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng, usize) -> T + Sync,
{
    let shards = total.div_ceil(SHARD_SIZE);
    (0..shards)
        .into_par_iter()
        .map(|s| {
            let count = SHARD_SIZE.min(total - s * SHARD_SIZE);
            let mut rng = shard_rng(seed, s as u64);
            f(&mut rng, count)
        })
        .collect()
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Random SPD matrix `L·ᵗL` with a moderately conditioned lower factor.
pub fn random_spd<R: Rng + ?Sized>(rng: &mut R, n: usize) -> SpdMatrix {
    let mut l = DMatrix::zeros(n, n);
    for i in 0..n {
        l[(i, i)] = (0.4 * rng.sample::<f64, _>(StandardNormal)).exp();
        for j in 0..i {
            l[(i, j)] = 0.6 * rng.sample::<f64, _>(StandardNormal);
        }
    }
    SpdMatrix::new(SymMatrix::symmetrize(&l * l.transpose())).expect("L·ᵗL with positive diagonal is SPD")
}

pub fn random_unit_det<R: Rng + ?Sized>(rng: &mut R, n: usize) -> SpdMatrix {
    random_spd(rng, n).normalize_det()
}

/// Product of `steps` random elementary transvections and sign flips.
pub fn random_unimodular<R: Rng + ?Sized>(rng: &mut R, n: usize, steps: usize) -> UnimodularMatrix {
    let mut m = IntMatrix::identity(n);
    if n == 1 {
        return UnimodularMatrix::new(m).unwrap();
    }
    for _ in 0..steps {
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let c: i64 = if rng.gen_bool(0.5) { 1 } else { -1 };
        // column op: col_j += c·col_i
        for r in 0..n {
            let v = m.get(r, j) + c * m.get(r, i);
            m.set(r, j, v);
        }
        if rng.gen_bool(0.1) {
            for r in 0..n {
                let v = -m.get(r, i);
                m.set(r, i, v);
            }
        }
    }
    UnimodularMatrix::new(m).expect("elementary products are unimodular")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shards_are_deterministic() {
        let a: Vec<f64> = sharded(10_000, 5, |rng, k| (0..k).map(|_| rng.gen::<f64>()).sum());
        let b: Vec<f64> = sharded(10_000, 5, |rng, k| (0..k).map(|_| rng.gen::<f64>()).sum());
        assert_eq!(a, b);
        assert_eq!(a.len(), 3);
        assert_ne!(shard_seed(5, 0), shard_seed(5, 1));
    }

    #[test]
    fn random_objects_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..6 {
            let y = random_unit_det(&mut rng, n);
            assert!((y.det() - 1.0).abs() < 1e-12);
            let u = random_unimodular(&mut rng, n, 12);
            assert_eq!(u.int().det().unwrap().abs(), 1);
        }
    }
}
