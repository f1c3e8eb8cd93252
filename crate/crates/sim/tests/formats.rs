//! Round-trip invariants of the density file format.

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use rfs_fusion::density_fmt::{from_doc, to_doc, Density, DensityDoc};
use rfs_fusion_core::gaussian::{Gaussian, GaussianMixture};
use rfs_fusion_core::labeled_rfs::{BernoulliComponent, Label, LmbDensity};

fn arbitrary_lmb() -> impl Strategy<Value = LmbDensity> {
    prop::collection::vec(
        (
            0u32..50,
            0u32..8,
            0.0f64..=1.0,
            prop::collection::vec(
                (0.01f64..1.0, -1000.0f64..1000.0, 0.1f64..2000.0),
                1..3,
            ),
        ),
        0..5,
    )
    .prop_map(|tracks| {
        let mut components = Vec::new();
        for (i, (time, index, existence, comps)) in tracks.into_iter().enumerate() {
            let label = Label::new(time, index.wrapping_add(i as u32 * 8));
            let parts: Vec<(f64, Gaussian)> = comps
                .into_iter()
                .map(|(w, m, v)| {
                    (
                        w,
                        Gaussian::new(
                            DVector::from_vec(vec![m, -m, m / 10.0, 0.25]),
                            DMatrix::from_diagonal(&DVector::from_vec(vec![v, v, v / 2.0, v / 2.0])),
                        )
                        .unwrap(),
                    )
                })
                .collect();
            let density = GaussianMixture::new(parts).unwrap();
            components.push(BernoulliComponent::new(label, existence, density).unwrap());
        }
        // Collisions are possible in the random labels; keep the first.
        let mut seen = std::collections::BTreeSet::new();
        components.retain(|c| seen.insert(c.label));
        LmbDensity::new(components).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// JSON serialization is exactly lossless for every parameter.
    #[test]
    fn lmb_json_round_trip_is_exact(lmb in arbitrary_lmb()) {
        let doc = to_doc(&Density::Lmb(lmb.clone()));
        let json = serde_json::to_string(&doc).unwrap();
        let parsed: DensityDoc = serde_json::from_str(&json).unwrap();
        let back = match from_doc(&parsed).unwrap() {
            Density::Lmb(l) => l,
            _ => unreachable!(),
        };
        prop_assert_eq!(back, lmb);
    }
}
