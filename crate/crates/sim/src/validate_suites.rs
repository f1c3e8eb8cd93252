//! Built-in invariant suites behind `rfs-fusion validate`. Each suite
//! returns Err with a short description on the first violation.

use std::collections::BTreeSet;
use std::sync::Arc;

use rfs_fusion_core::diagnostics::{
    yes_object_identity_residual, discretize_gmb, discretize_mb, gci_fuse_discrete,
    label_inconsistency_indicator, DiscreteMultiObjectDensity, DiscreteSpace,
};
use rfs_fusion_core::fusion::{enumerate_fusion_maps, gci_fuse_mb_pair, FusionConfig};
use rfs_fusion_core::ospa::{ospa_distance, OspaParams};

use crate::engine::monte_carlo;
use crate::report::per_run_csv;
use crate::rng::RngStream;
use crate::scenario::{EstimatorKind, ScenarioConfig};
use crate::testkit;

fn indicator_instances(
    count: usize,
    seed: u64,
    mut check: impl FnMut(usize, &rfs_fusion_core::diagnostics::DiagnosticsReport) -> Result<(), String>,
) -> Result<(), String> {
    let mut stream = RngStream::from_seed(seed);
    for i in 0..count {
        let n_labels = 2 + (stream.next_f64() * 2.0) as usize;
        let n_cells = 6 + (stream.next_f64() * 6.0) as usize;
        let space = testkit::labeled_grid(n_cells, n_labels, 2);
        let n_sensors = 2 + (stream.next_f64() * 2.0) as usize;
        let densities: Vec<DiscreteMultiObjectDensity> = (0..n_sensors)
            .map(|_| testkit::random_labeled_density(&space, &mut stream))
            .collect();
        let weights = testkit::random_weights(n_sensors, &mut stream);
        let inputs: Vec<(&DiscreteMultiObjectDensity, f64)> =
            densities.iter().zip(weights.iter().copied()).collect();
        let report = label_inconsistency_indicator(&inputs)
            .map_err(|e| format!("instance {i}: {e}"))?;
        check(i, &report)?;
    }
    Ok(())
}

/// The two routes to d_G agree (the indicator errors internally beyond
/// 1e-9, so success of the call is the check).
pub fn decomposition() -> Result<(), String> {
    indicator_instances(50, 101, |_, _| Ok(()))
}

pub fn bounds() -> Result<(), String> {
    indicator_instances(200, 202, |i, report| {
        if report.d_g < -1e-12 || report.d_g > report.d_g_upper + 1e-9 {
            return Err(format!(
                "instance {i}: d_g {} outside [0, {}]",
                report.d_g, report.d_g_upper
            ));
        }
        Ok(())
    })
}

pub fn yes_object_identity() -> Result<(), String> {
    indicator_instances(50, 303, |i, report| {
        let residual = yes_object_identity_residual(report);
        if residual > 1e-9 {
            return Err(format!("instance {i}: residual {residual}"));
        }
        Ok(())
    })
}

pub fn fusion_map_counts() -> Result<(), String> {
    for n1 in 0..=6usize {
        for n2 in n1..=6usize {
            let i1: BTreeSet<usize> = (0..n1).collect();
            let i2: BTreeSet<usize> = (10..10 + n2).collect();
            let maps = enumerate_fusion_maps(&i1, &i2).map_err(|e| e.to_string())?;
            let expected: usize = if n1 == 0 { 1 } else { (0..n1).map(|k| n2 - k).product() };
            if maps.len() != expected {
                return Err(format!("|I1|={n1} |I2|={n2}: {} maps != {expected}", maps.len()));
            }
        }
    }
    Ok(())
}

pub fn fusion_oracle() -> Result<(), String> {
    let mut stream = RngStream::from_seed(404);
    for i in 0..5 {
        let pair = testkit::random_separated_mb_pair(&mut stream);
        let cfg = FusionConfig {
            weights: vec![pair.weight1, 1.0 - pair.weight1],
            ..FusionConfig::uniform(2)
        };
        let fused = gci_fuse_mb_pair(&pair.mb1, &pair.mb2, &cfg).map_err(|e| e.to_string())?;
        let cells = ((pair.hi - pair.lo) * 8.0) as usize;
        let space = Arc::new(
            DiscreteSpace::grid_1d(pair.lo, pair.hi, cells, Vec::new(), pair.n_tracks)
                .map_err(|e| e.to_string())?,
        );
        let (d1, _) = discretize_mb(&pair.mb1, &space).map_err(|e| e.to_string())?;
        let (d2, _) = discretize_mb(&pair.mb2, &space).map_err(|e| e.to_string())?;
        let oracle = gci_fuse_discrete(&[(&d1, pair.weight1), (&d2, 1.0 - pair.weight1)])
            .map_err(|e| e.to_string())?;
        let (pipeline, _) = discretize_gmb(&fused, &space).map_err(|e| e.to_string())?;
        let tv = DiscreteMultiObjectDensity::total_variation(&oracle, &pipeline)
            .map_err(|e| e.to_string())?;
        if tv > 1e-3 {
            return Err(format!("instance {i}: total variation {tv}"));
        }
    }
    Ok(())
}

pub fn moment_preservation() -> Result<(), String> {
    let mut stream = RngStream::from_seed(505);
    let grid = testkit::phd_grid(-15.0, 35.0, 101);
    for i in 0..30 {
        let gmb = testkit::random_gmb(&mut stream);
        let mb = gmb.to_mb_moments().map_err(|e| e.to_string())?;
        let phd_in = gmb.phd().map_err(|e| e.to_string())?;
        let phd_out = mb.phd();
        for x in &grid {
            let a = phd_in.eval(x).map_err(|e| e.to_string())?;
            let b = phd_out.eval(x).map_err(|e| e.to_string())?;
            if (a - b).abs() > 1e-9 * (1.0 + a.abs()) {
                return Err(format!("instance {i}: PHD mismatch {a} vs {b} at {}", x[0]));
            }
        }
    }
    Ok(())
}

pub fn ospa_oracle() -> Result<(), String> {
    let mut stream = RngStream::from_seed(606);
    for i in 0..100 {
        let nx = (stream.next_f64() * 5.0) as usize;
        let ny = (stream.next_f64() * 5.0) as usize;
        let mk = |stream: &mut RngStream, n: usize| {
            (0..n)
                .map(|_| {
                    nalgebra::DVector::from_vec(vec![
                        stream.uniform(-300.0, 300.0),
                        stream.uniform(-300.0, 300.0),
                    ])
                })
                .collect::<Vec<_>>()
        };
        let x = mk(&mut stream, nx);
        let y = mk(&mut stream, ny);
        let params = OspaParams::new(100.0, 1.0).unwrap();
        let fast = ospa_distance(&x, &y, &params).map_err(|e| e.to_string())?;
        let brute = testkit::ospa_brute_force(&x, &y, &params);
        if (fast - brute).abs() > 1e-12 {
            return Err(format!("instance {i}: {fast} vs brute {brute}"));
        }
    }
    Ok(())
}

const TINY_SCENARIO: &str = r#"
name = "validate-tiny"
region = { min = [-500.0, -500.0], max = [500.0, 500.0] }
duration = 8
[motion]
process_noise_std = 5.0
survival_probability = 0.98
[[tracks]]
birth = 1
death = 9
state = [0.0, 0.0, 5.0, -3.0]
[[sensors]]
detection_probability = 0.95
measurement_noise_std = 15.0
clutter_rate = 3.0
[[sensors]]
detection_probability = 0.95
measurement_noise_std = 15.0
clutter_rate = 3.0
[birth]
variant = "adaptive"
expected_births = 0.8
max_existence = 0.3
position_var = 900.0
velocity_var = 400.0
"#;

pub fn determinism() -> Result<(), String> {
    let cfg = ScenarioConfig::from_toml_str(TINY_SCENARIO).map_err(|e| e.to_string())?;
    let estimators = [EstimatorKind::Local, EstimatorKind::RGci];
    let a = monte_carlo(&cfg, 3, 17, &estimators, 1).map_err(|e| e.to_string())?;
    let b = monte_carlo(&cfg, 3, 17, &estimators, 3).map_err(|e| e.to_string())?;
    for estimator in estimators {
        if per_run_csv(&a, estimator) != per_run_csv(&b, estimator) {
            return Err(format!("{} CSV differs across job counts", estimator.as_str()));
        }
    }
    Ok(())
}
