//! Property tests over randomized inputs.

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rfs_fusion_core::assignment::hungarian;
use rfs_fusion_core::gaussian::{Gaussian, GaussianMixture};
use rfs_fusion_core::ospa::{ospa_distance, OspaParams};

fn gaussian_1d() -> impl Strategy<Value = Gaussian> {
    (-50.0f64..50.0, 0.1f64..10.0).prop_map(|(m, v)| {
        Gaussian::new(DVector::from_vec(vec![m]), DMatrix::from_vec(1, 1, vec![v])).unwrap()
    })
}

fn mixture_1d(max_components: usize) -> impl Strategy<Value = GaussianMixture> {
    prop::collection::vec((0.01f64..1.0, gaussian_1d()), 1..=max_components)
        .prop_map(|c| GaussianMixture::new(c).unwrap().normalize().unwrap())
}

fn point_set(max_len: usize) -> impl Strategy<Value = Vec<DVector<f64>>> {
    prop::collection::vec((-500.0f64..500.0, -500.0f64..500.0), 0..=max_len)
        .prop_map(|v| v.into_iter().map(|(x, y)| DVector::from_vec(vec![x, y])).collect())
}

proptest! {
    #[test]
    fn prune_merge_keeps_moments_when_only_merging(gm in mixture_1d(6)) {
        let (mean0, cov0) = gm.mean_cov().unwrap();
        let merged = gm.prune_merge(0.0, f64::INFINITY, usize::MAX).unwrap();
        let (mean1, cov1) = merged.mean_cov().unwrap();
        prop_assert!((mean0[0] - mean1[0]).abs() < 1e-6 * (1.0 + mean0[0].abs()));
        prop_assert!((cov0[(0, 0)] - cov1[(0, 0)]).abs() < 1e-6 * cov0[(0, 0)]);
    }

    #[test]
    fn mixture_power_of_one_is_identity(gm in mixture_1d(4)) {
        let p = gm.power_scale(1.0).unwrap();
        prop_assert_eq!(p, gm);
    }

    #[test]
    fn ospa_is_symmetric_and_bounded(
        x in point_set(5),
        y in point_set(5),
        cutoff in 10.0f64..200.0,
        order in 1.0f64..3.0,
    ) {
        let params = OspaParams::new(cutoff, order).unwrap();
        let d_xy = ospa_distance(&x, &y, &params).unwrap();
        let d_yx = ospa_distance(&y, &x, &params).unwrap();
        prop_assert_eq!(d_xy, d_yx);
        prop_assert!(d_xy >= 0.0);
        prop_assert!(d_xy <= cutoff + 1e-9);
    }

    #[test]
    fn hungarian_beats_or_matches_random_permutations(
        costs in prop::collection::vec(0.0f64..100.0, 16),
        perm_seed in 0u64..1000,
    ) {
        let assignment = hungarian(&costs, 4).unwrap();
        let optimal: f64 = assignment.iter().enumerate().map(|(r, &c)| costs[r * 4 + c]).sum();
        // Any permutation must cost at least as much.
        let mut p = [0usize, 1, 2, 3];
        let mut s = perm_seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
        for i in (1..4).rev() {
            s ^= s << 13; s ^= s >> 7; s ^= s << 17;
            p.swap(i, (s as usize) % (i + 1));
        }
        let candidate: f64 = (0..4).map(|r| costs[r * 4 + p[r]]).sum();
        prop_assert!(optimal <= candidate + 1e-9);
    }
}
