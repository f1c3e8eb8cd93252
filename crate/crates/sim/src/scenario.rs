//! Scenario configuration: TOML schema, validation, and construction
//! of the filter/fusion model objects.
//!
//! All quantities are SI: positions in metres, velocities in m/s,
//! noise standard deviations in m (measurement) and m/s^2 (process),
//! time steps of `sampling_period` seconds. A track is alive on steps
//! `birth <= k < death`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use rfs_fusion_core::gaussian::{Gaussian, GaussianMixture};
use rfs_fusion_core::labeled_rfs::{BernoulliComponent, Label};
use rfs_fusion_core::lmb_filter::{
    AdaptiveBirthParams, BirthModel, LmbUpdateConfig, MotionModel, PriorBirth, SensorModel,
};

use crate::SimError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub region: Region,
    /// Number of time steps.
    pub duration: u32,
    pub motion: MotionConfig,
    #[serde(default)]
    pub tracks: Vec<TrackConfig>,
    pub sensors: Vec<SensorConfig>,
    pub birth: BirthConfig,
    #[serde(default)]
    pub filter: FilterConfig,
    #[serde(default)]
    pub fusion: FusionSection,
    #[serde(default = "default_estimators")]
    pub estimators: Vec<EstimatorKind>,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
    #[serde(default)]
    pub ospa: OspaConfig,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OspaConfig {
    /// Cut-off distance (m).
    pub cutoff: f64,
    pub order: f64,
}

impl Default for OspaConfig {
    fn default() -> Self {
        Self {
            cutoff: 100.0,
            order: 1.0,
        }
    }
}

fn default_estimators() -> Vec<EstimatorKind> {
    vec![EstimatorKind::Local, EstimatorKind::RGci]
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Region {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Region {
    pub fn area(&self) -> f64 {
        (self.max[0] - self.min[0]) * (self.max[1] - self.min[1])
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotionConfig {
    #[serde(default = "one")]
    pub sampling_period: f64,
    /// Process noise standard deviation (m/s^2).
    pub process_noise_std: f64,
    pub survival_probability: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackConfig {
    /// First step the object exists.
    pub birth: u32,
    /// First step the object no longer exists.
    pub death: u32,
    /// Initial state [x, y, vx, vy].
    pub state: [f64; 4],
    /// Optional velocity changes: at `step`, add `dv` to the velocity.
    #[serde(default)]
    pub maneuvers: Vec<Maneuver>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Maneuver {
    pub step: u32,
    pub dv: [f64; 2],
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorConfig {
    pub detection_probability: f64,
    /// Measurement noise standard deviation (m).
    pub measurement_noise_std: f64,
    /// Expected clutter reports per scan (Poisson rate).
    pub clutter_rate: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case", deny_unknown_fields)]
pub enum BirthConfig {
    /// Fixed birth components with labels (step, index).
    Prior {
        existence: f64,
        locations: Vec<[f64; 2]>,
        position_var: f64,
        velocity_var: f64,
        /// Steps (inclusive range) on which births are injected;
        /// defaults to the whole run.
        #[serde(default)]
        window: Option<[u32; 2]>,
    },
    /// Measurement-driven births.
    Adaptive {
        expected_births: f64,
        max_existence: f64,
        position_var: f64,
        velocity_var: f64,
    },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FilterConfig {
    /// Bernoulli truncation threshold.
    pub truncation_threshold: f64,
    /// Gaussian pruning threshold.
    pub prune_threshold: f64,
    /// Squared-Mahalanobis merge threshold.
    pub merge_threshold: f64,
    /// Cap on Gaussian components per track.
    pub max_components: usize,
    /// Cap on association hypotheses per update group.
    pub max_hypotheses: usize,
    /// Existence threshold for state extraction.
    pub existence_threshold: f64,
    /// Squared-Mahalanobis association gate.
    pub gate: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            truncation_threshold: 1e-4,
            prune_threshold: 1e-5,
            merge_threshold: 4.0,
            max_components: 10,
            max_hypotheses: 1000,
            existence_threshold: 0.5,
            gate: 40.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FusionSection {
    /// Per-sensor GCI weights; uniform when omitted.
    pub weights: Option<Vec<f64>>,
    /// Neighbour lists per sensor, 1-based. Empty = every other node.
    pub topology: Vec<Vec<usize>>,
    pub max_hypotheses: usize,
    pub weight_floor: f64,
    pub eta_floor: f64,
    /// 1-based sensor whose fused output headlines the summary.
    pub report_sensor: usize,
}

impl Default for FusionSection {
    fn default() -> Self {
        Self {
            weights: None,
            topology: Vec::new(),
            max_hypotheses: 1000,
            weight_floor: 1e-6,
            eta_floor: 1e-30,
            report_sensor: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Local,
    RGci,
    ClassicalGci,
}

impl EstimatorKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EstimatorKind::Local => "local",
            EstimatorKind::RGci => "r_gci",
            EstimatorKind::ClassicalGci => "classical_gci",
        }
    }
}

impl std::str::FromStr for EstimatorKind {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, SimError> {
        match s {
            "local" => Ok(EstimatorKind::Local),
            "r_gci" => Ok(EstimatorKind::RGci),
            "classical_gci" => Ok(EstimatorKind::ClassicalGci),
            other => Err(SimError::Config(format!("unknown estimator '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsConfig {
    pub enabled: bool,
    /// Pair of 1-based sensors whose posteriors are compared.
    pub sensor_pair: [usize; 2],
    /// Cells of the 1-D diagnostic grid (x-position marginal).
    pub cells: usize,
    pub max_cardinality: usize,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        Self {
            enabled: false,
            sensor_pair: [1, 2],
            cells: 48,
            max_cardinality: 2,
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, SimError> {
        let cfg: ScenarioConfig =
            toml::from_str(text).map_err(|e| SimError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String, SimError> {
        toml::to_string(self).map_err(|e| SimError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.duration == 0 {
            return Err(SimError::Config("duration must be at least one step".into()));
        }
        if self.sensors.is_empty() {
            return Err(SimError::Config("at least one sensor is required".into()));
        }
        if !(self.region.max[0] > self.region.min[0] && self.region.max[1] > self.region.min[1]) {
            return Err(SimError::Config("region must have positive area".into()));
        }
        for (i, t) in self.tracks.iter().enumerate() {
            if t.death <= t.birth {
                return Err(SimError::Config(format!(
                    "track {i}: death step must exceed birth step"
                )));
            }
            for (j, c) in [t.state[0], t.state[1]].iter().enumerate() {
                if *c < self.region.min[j] || *c > self.region.max[j] {
                    return Err(SimError::Config(format!(
                        "track {i}: initial position outside the region"
                    )));
                }
            }
        }
        for (i, s) in self.sensors.iter().enumerate() {
            if !(0.0..=1.0).contains(&s.detection_probability) {
                return Err(SimError::Config(format!(
                    "sensor {}: detection probability out of [0, 1]",
                    i + 1
                )));
            }
            if s.measurement_noise_std <= 0.0 || s.clutter_rate < 0.0 {
                return Err(SimError::Config(format!("sensor {}: bad noise/clutter", i + 1)));
            }
        }
        if let Some(w) = &self.fusion.weights {
            if w.len() != self.sensors.len() {
                return Err(SimError::Config("fusion.weights length != sensor count".into()));
            }
            let total: f64 = w.iter().sum();
            if (total - 1.0).abs() > 1e-9 || w.iter().any(|x| *x < 0.0) {
                return Err(SimError::Config(
                    "fusion.weights must be nonnegative and sum to one".into(),
                ));
            }
        }
        let n = self.sensors.len();
        if !self.fusion.topology.is_empty() {
            if self.fusion.topology.len() != n {
                return Err(SimError::Config("fusion.topology needs one entry per sensor".into()));
            }
            for (i, neighbors) in self.fusion.topology.iter().enumerate() {
                for &nb in neighbors {
                    if nb == 0 || nb > n {
                        return Err(SimError::Config(format!(
                            "fusion.topology[{i}]: neighbour {nb} out of range"
                        )));
                    }
                    if nb == i + 1 {
                        return Err(SimError::Config(format!(
                            "fusion.topology[{i}]: a sensor cannot neighbour itself"
                        )));
                    }
                }
            }
            if n > 1 && !self.topology_connected() {
                return Err(SimError::Config("fusion.topology must be connected".into()));
            }
        }
        if self.fusion.report_sensor == 0 || self.fusion.report_sensor > n {
            return Err(SimError::Config("fusion.report_sensor out of range".into()));
        }
        for s in self.diagnostics.sensor_pair {
            if self.diagnostics.enabled && (s == 0 || s > n) {
                return Err(SimError::Config("diagnostics.sensor_pair out of range".into()));
            }
        }
        match &self.birth {
            BirthConfig::Prior {
                existence,
                locations,
                position_var,
                velocity_var,
                ..
            } => {
                if !(0.0..=1.0).contains(existence) {
                    return Err(SimError::Config("birth.existence out of [0, 1]".into()));
                }
                if locations.is_empty() {
                    return Err(SimError::Config("birth.locations must not be empty".into()));
                }
                if *position_var <= 0.0 || *velocity_var <= 0.0 {
                    return Err(SimError::Config("birth variances must be positive".into()));
                }
            }
            BirthConfig::Adaptive {
                expected_births,
                max_existence,
                position_var,
                velocity_var,
            } => {
                if *expected_births <= 0.0 || !(0.0..=1.0).contains(max_existence) {
                    return Err(SimError::Config("bad adaptive birth parameters".into()));
                }
                if *position_var <= 0.0 || *velocity_var <= 0.0 {
                    return Err(SimError::Config("birth variances must be positive".into()));
                }
            }
        }
        Ok(())
    }

    fn topology_connected(&self) -> bool {
        let n = self.sensors.len();
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            let mut neighbors: Vec<usize> = self.fusion.topology[i]
                .iter()
                .map(|nb| nb - 1)
                .collect();
            // Links are treated as bidirectional for connectivity.
            for (j, nbs) in self.fusion.topology.iter().enumerate() {
                if nbs.contains(&(i + 1)) {
                    neighbors.push(j);
                }
            }
            for j in neighbors {
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Nearly-constant-velocity transition and noise matrices.
    pub fn motion_model(&self) -> MotionModel {
        let dt = self.motion.sampling_period;
        let sv2 = self.motion.process_noise_std * self.motion.process_noise_std;
        let mut f = DMatrix::identity(4, 4);
        f[(0, 2)] = dt;
        f[(1, 3)] = dt;
        let mut q = DMatrix::zeros(4, 4);
        let q_pp = sv2 * dt.powi(4) / 4.0;
        let q_pv = sv2 * dt.powi(3) / 2.0;
        let q_vv = sv2 * dt.powi(2);
        for i in 0..2 {
            q[(i, i)] = q_pp;
            q[(i, i + 2)] = q_pv;
            q[(i + 2, i)] = q_pv;
            q[(i + 2, i + 2)] = q_vv;
        }
        MotionModel::new(f, q, self.motion.survival_probability).expect("validated config")
    }

    pub fn sensor_model(&self, sensor: usize) -> SensorModel {
        let s = &self.sensors[sensor];
        let h = DMatrix::from_row_slice(2, 4, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        let r = DMatrix::identity(2, 2) * s.measurement_noise_std * s.measurement_noise_std;
        SensorModel::new(
            h,
            r,
            s.detection_probability,
            s.clutter_rate,
            s.clutter_rate / self.region.area(),
        )
        .expect("validated config")
    }

    pub fn birth_model(&self) -> BirthModel {
        match &self.birth {
            BirthConfig::Prior {
                existence,
                locations,
                position_var,
                velocity_var,
                ..
            } => BirthModel::Prior(
                locations
                    .iter()
                    .enumerate()
                    .map(|(i, loc)| PriorBirth {
                        existence: *existence,
                        density: GaussianMixture::single(
                            Gaussian::new(
                                DVector::from_vec(vec![loc[0], loc[1], 0.0, 0.0]),
                                birth_cov(*position_var, *velocity_var),
                            )
                            .expect("validated config"),
                        ),
                        index: i as u32 + 1,
                    })
                    .collect(),
            ),
            BirthConfig::Adaptive {
                expected_births,
                max_existence,
                position_var,
                velocity_var,
            } => BirthModel::Adaptive(AdaptiveBirthParams {
                expected_births: *expected_births,
                max_existence: *max_existence,
                covariance: birth_cov(*position_var, *velocity_var),
            }),
        }
    }

    /// Prior births scheduled for `step`, if the prior window covers
    /// it.
    pub fn prior_births_at(&self, step: u32) -> Vec<BernoulliComponent> {
        match (&self.birth, self.birth_model()) {
            (BirthConfig::Prior { window, .. }, BirthModel::Prior(components)) => {
                let in_window = match window {
                    Some([lo, hi]) => step >= *lo && step <= *hi,
                    None => true,
                };
                if !in_window {
                    return Vec::new();
                }
                components
                    .into_iter()
                    .map(|b| {
                        BernoulliComponent::new(Label::new(step, b.index), b.existence, b.density)
                            .expect("validated config")
                    })
                    .collect()
            }
            _ => Vec::new(),
        }
    }

    pub fn update_config(&self) -> LmbUpdateConfig {
        LmbUpdateConfig {
            max_hypotheses: self.filter.max_hypotheses,
            weight_floor: 1e-6,
            gate: self.filter.gate,
        }
    }

    pub fn fusion_weights(&self) -> Vec<f64> {
        match &self.fusion.weights {
            Some(w) => w.clone(),
            None => vec![1.0 / self.sensors.len() as f64; self.sensors.len()],
        }
    }

    /// 0-based neighbour lists; defaults to all-to-all.
    pub fn neighbours(&self, sensor: usize) -> Vec<usize> {
        if self.fusion.topology.is_empty() {
            (0..self.sensors.len()).filter(|s| *s != sensor).collect()
        } else {
            self.fusion.topology[sensor].iter().map(|nb| nb - 1).collect()
        }
    }
}

fn birth_cov(position_var: f64, velocity_var: f64) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_vec(vec![
        position_var,
        position_var,
        velocity_var,
        velocity_var,
    ]))
}
