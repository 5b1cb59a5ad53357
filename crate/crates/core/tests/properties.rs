use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pnlab::eisenstein::canonical;
use pnlab::geometry::{congruence, congruence_int, congruence_spd, distance, full_iwasawa, geodesic, partial_iwasawa, volume_density};
use pnlab::reduction::{minkowski_reduce, r4_check};
use pnlab::rng::{gaussian_matrix, random_spd, random_unimodular, random_unit_det};
use pnlab::tori::{gamma_star_action, tori_isomorphic, GammaStarElem, HgPoint};
use pnlab::{IntMatrix, SpdMatrix};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn invertible(r: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    gaussian_matrix(r, n, n) + DMatrix::identity(n, n) * 3.0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn congruence_composes(seed: u64, n in 1usize..6) {
        let mut r = rng(seed);
        let y = random_spd(&mut r, n);
        let a = gaussian_matrix(&mut r, n, n);
        let b = gaussian_matrix(&mut r, n, n);
        let lhs = congruence(&congruence(y.sym(), &a).unwrap(), &b).unwrap();
        let rhs = congruence(y.sym(), &(&a * &b)).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12 * rhs.matrix().amax().max(1.0));
    }

    #[test]
    fn distance_is_invariant(seed: u64, n in 1usize..5) {
        let mut r = rng(seed);
        let (y1, y2) = (random_spd(&mut r, n), random_spd(&mut r, n));
        let g = invertible(&mut r, n);
        let d = distance(&y1, &y2).unwrap();
        let dg = distance(&congruence_spd(&y1, &g).unwrap(), &congruence_spd(&y2, &g).unwrap()).unwrap();
        prop_assert!((d - dg).abs() < 1e-8 * d.max(1.0));
    }

    #[test]
    fn geodesic_endpoints(seed: u64, n in 1usize..6) {
        let y = random_spd(&mut rng(seed), n);
        prop_assert!(geodesic(&y, 0.0).sym().max_abs_diff(SpdMatrix::identity(n).sym()) < 1e-9);
        prop_assert!(geodesic(&y, 1.0).sym().max_abs_diff(y.sym()) < 1e-9 * y.matrix().amax().max(1.0));
    }

    #[test]
    fn iwasawa_round_trips(seed: u64, n in 2usize..7) {
        let y = random_unit_det(&mut rng(seed), n);
        prop_assert!(partial_iwasawa(&y).unwrap().reconstruct().sym().max_abs_diff(y.sym()) < 1e-9);
        prop_assert!(full_iwasawa(&y).unwrap().reconstruct().unwrap().sym().max_abs_diff(y.sym()) < 1e-9);
    }

    #[test]
    fn density_transforms(seed: u64, n in 1usize..5) {
        let mut r = rng(seed);
        let y = random_spd(&mut r, n);
        let a = invertible(&mut r, n);
        let lhs = volume_density(&congruence_spd(&y, &a).unwrap()) * a.determinant().abs().powi(n as i32 + 1);
        let rhs = volume_density(&y);
        prop_assert!((lhs - rhs).abs() < 1e-9 * rhs);
    }

    #[test]
    fn reduction_is_class_invariant(seed: u64, n in 2usize..5) {
        let mut r = rng(seed);
        let y = random_spd(&mut r, n);
        let u = random_unimodular(&mut r, n, 6);
        let a = minkowski_reduce(&y).unwrap();
        let b = minkowski_reduce(&congruence_int(&y, u.int()).unwrap()).unwrap();
        prop_assert!(r4_check(&a.r) && r4_check(&b.r));
        if !a.boundary {
            prop_assert!(a.r.sym().max_abs_diff(b.r.sym()) < 1e-9 * a.r.matrix().amax());
        }
    }

    #[test]
    fn canonical_cosets_are_stable(seed: u64, n in 2usize..5) {
        let mut r = rng(seed);
        let g = random_unimodular(&mut r, n, 6).into_int();
        let c = canonical(&g).unwrap();
        prop_assert_eq!(canonical(&c).unwrap(), c.clone());
        // Right multiplication by an upper unitriangular integer matrix
        // stays in the same coset.
        let mut t = IntMatrix::identity(n);
        for i in 0..n {
            for j in i + 1..n {
                t.set(i, j, (seed.wrapping_add((i * n + j) as u64) % 5) as i64 - 2);
            }
        }
        prop_assert_eq!(canonical(&g.mul(&t).unwrap()).unwrap(), c);
    }

    #[test]
    fn isomorphic_tori_are_found(seed: u64, n in 2usize..4) {
        let mut r = rng(seed);
        let y = random_spd(&mut r, n);
        let u = random_unimodular(&mut r, n, 6);
        let y2 = congruence_int(&y, &u.int().transpose()).unwrap();
        let a = tori_isomorphic(&y, &y2, 1000).unwrap();
        prop_assert!(a.is_some());
        let back = congruence_spd(&y, &a.unwrap().int().transpose().to_f64()).unwrap();
        prop_assert!(back.sym().max_abs_diff(y2.sym()) < 1e-8 * y2.matrix().amax());
    }

    #[test]
    fn gamma_star_identity_acts_trivially(seed: u64, g in 1usize..4) {
        let mut r = rng(seed);
        let o = HgPoint::new(IntMatrix::identity(g), random_spd(&mut r, g)).unwrap();
        let image = gamma_star_action(&GammaStarElem::identity(g), &o).unwrap();
        prop_assert_eq!(image, o);
    }
}
