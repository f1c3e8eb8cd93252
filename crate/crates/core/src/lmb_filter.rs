//! Gaussian-mixture labeled multi-Bernoulli tracker: prediction,
//! measurement update, adaptive birth, truncation and state extraction.
//!
//! The update realizes the exact single-step association expansion of
//! the LMB prior (every track independently missed, undetected or
//! matched to one measurement, measurements used at most once) with
//! ranked truncation, then matches the first moment back onto an LMB.
//! Gating partitions tracks and measurements into independent groups
//! first, so the enumeration is exact per group.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::assignment::{k_best_assignments, Choice, ItemOptions};
use crate::error::{Error, Result};
use crate::gaussian::{kalman_predict, kalman_update_log, Gaussian, GaussianMixture};
use crate::labeled_rfs::{BernoulliComponent, Label, LmbDensity};
use crate::math;

/// Linear-Gaussian motion model with survival probability.
#[derive(Debug, Clone)]
pub struct MotionModel {
    pub transition: DMatrix<f64>,
    pub noise: DMatrix<f64>,
    pub survival: f64,
}

impl MotionModel {
    pub fn new(transition: DMatrix<f64>, noise: DMatrix<f64>, survival: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&survival) {
            return Err(Error::InvalidParameter("survival probability must be in [0, 1]"));
        }
        if transition.nrows() != transition.ncols() {
            return Err(Error::DimensionMismatch {
                expected: transition.nrows(),
                got: transition.ncols(),
            });
        }
        if noise.nrows() != transition.nrows() || noise.ncols() != transition.ncols() {
            return Err(Error::DimensionMismatch {
                expected: transition.nrows(),
                got: noise.nrows(),
            });
        }
        Ok(Self {
            transition,
            noise,
            survival,
        })
    }
}

/// Linear-Gaussian sensor with constant detection probability and
/// Poisson clutter, uniform over the surveillance region.
#[derive(Debug, Clone)]
pub struct SensorModel {
    pub observation: DMatrix<f64>,
    pub noise: DMatrix<f64>,
    pub detection: f64,
    pub clutter_rate: f64,
    /// Uniform clutter intensity: clutter_rate / region area.
    pub clutter_density: f64,
}

impl SensorModel {
    pub fn new(
        observation: DMatrix<f64>,
        noise: DMatrix<f64>,
        detection: f64,
        clutter_rate: f64,
        clutter_density: f64,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&detection) {
            return Err(Error::InvalidParameter("detection probability must be in [0, 1]"));
        }
        if clutter_rate < 0.0 || clutter_density < 0.0 {
            return Err(Error::InvalidParameter("clutter parameters must be >= 0"));
        }
        if noise.nrows() != observation.nrows() || noise.ncols() != observation.nrows() {
            return Err(Error::DimensionMismatch {
                expected: observation.nrows(),
                got: noise.nrows(),
            });
        }
        Ok(Self {
            observation,
            noise,
            detection,
            clutter_rate,
            clutter_density,
        })
    }
}

/// Fixed birth component for the prior-knowledge birth procedure.
#[derive(Debug, Clone)]
pub struct PriorBirth {
    pub existence: f64,
    pub density: GaussianMixture,
    pub index: u32,
}

/// Parameters of the measurement-driven (adaptive) birth procedure.
#[derive(Debug, Clone)]
pub struct AdaptiveBirthParams {
    /// Expected number of births per step.
    pub expected_births: f64,
    /// Cap on the existence probability of a new track.
    pub max_existence: f64,
    /// Covariance of a new track (position seeded from the
    /// measurement, velocity zero).
    pub covariance: DMatrix<f64>,
}

#[derive(Debug, Clone)]
pub enum BirthModel {
    Prior(Vec<PriorBirth>),
    Adaptive(AdaptiveBirthParams),
}

/// Knobs of the ranked association expansion.
#[derive(Debug, Clone)]
pub struct LmbUpdateConfig {
    /// Cap on retained association hypotheses per independent group.
    pub max_hypotheses: usize,
    /// Hypotheses below `best * weight_floor` are discarded (0 keeps
    /// everything up to the cap).
    pub weight_floor: f64,
    /// Squared-Mahalanobis gate in measurement space; `f64::INFINITY`
    /// disables gating.
    pub gate: f64,
}

impl Default for LmbUpdateConfig {
    fn default() -> Self {
        Self {
            max_hypotheses: 1000,
            weight_floor: 1e-6,
            gate: 40.0,
        }
    }
}

/// Survival-scaled, Kalman-predicted LMB with births appended.
///
/// Birth labels must not collide with surviving labels.
pub fn lmb_predict(
    posterior: &LmbDensity,
    motion: &MotionModel,
    births: &[BernoulliComponent],
) -> Result<LmbDensity> {
    let mut components = Vec::with_capacity(posterior.len() + births.len());
    for c in posterior.components() {
        let predicted: Vec<(f64, Gaussian)> = c
            .density
            .components()
            .iter()
            .map(|(w, g)| Ok((*w, kalman_predict(g, &motion.transition, &motion.noise)?)))
            .collect::<Result<_>>()?;
        components.push(BernoulliComponent::new(
            c.label,
            motion.survival * c.existence,
            GaussianMixture::new(predicted)?,
        )?);
    }
    components.extend_from_slice(births);
    LmbDensity::new(components)
}

struct TrackData {
    label: Label,
    existence: f64,
    predicted: GaussianMixture,
    /// (measurement index, log psi, updated density)
    matches: Vec<(usize, f64, GaussianMixture)>,
}

/// Measurement update. Returns the moment-matched posterior LMB and,
/// per measurement, the probability r_U(z) that it was associated to
/// some track (the quantity the adaptive birth procedure consumes).
pub fn lmb_update(
    predicted: &LmbDensity,
    measurements: &[DVector<f64>],
    sensor: &SensorModel,
    cfg: &LmbUpdateConfig,
) -> Result<(LmbDensity, Vec<f64>)> {
    if !measurements.is_empty() && sensor.clutter_density <= 0.0 {
        return Err(Error::InvalidParameter(
            "clutter density must be positive when measurements are present",
        ));
    }
    let h = &sensor.observation;
    let r_noise = &sensor.noise;
    let log_pd = if sensor.detection > 0.0 {
        math::ln(sensor.detection)
    } else {
        f64::NEG_INFINITY
    };
    let log_miss = if sensor.detection < 1.0 {
        math::ln(1.0 - sensor.detection)
    } else {
        f64::NEG_INFINITY
    };
    let log_kappa = if measurements.is_empty() {
        0.0
    } else {
        math::ln(sensor.clutter_density)
    };

    // Gate and precompute the per-(track, measurement) likelihoods and
    // updated densities.
    let mut tracks: Vec<TrackData> = Vec::with_capacity(predicted.len());
    for c in predicted.components() {
        let mut matches = Vec::new();
        if log_pd > f64::NEG_INFINITY {
            for (j, z) in measurements.iter().enumerate() {
                if !gated(&c.density, z, h, r_noise, cfg.gate)? {
                    continue;
                }
                let (updated, log_lik) = update_mixture(&c.density, z, h, r_noise)?;
                matches.push((j, log_pd + log_lik - log_kappa, updated));
            }
        }
        tracks.push(TrackData {
            label: c.label,
            existence: c.existence,
            predicted: c.density.clone(),
            matches,
        });
    }

    // Independent groups: tracks sharing gated measurements.
    let groups = partition(&tracks, measurements.len());

    let mut assoc = vec![0.0; measurements.len()];
    let mut components = Vec::with_capacity(tracks.len());
    for group in groups {
        let items: Vec<ItemOptions> = group
            .iter()
            .map(|&t| {
                let track = &tracks[t];
                let r = track.existence.clamp(0.0, 1.0);
                let log_r = if r > 0.0 { math::ln(r) } else { f64::NEG_INFINITY };
                let log_not = if r < 1.0 { math::ln(1.0 - r) } else { f64::NEG_INFINITY };
                ItemOptions {
                    // Private option 0: track does not exist.
                    // Private option 1: track exists, missed.
                    private: vec![log_not, log_r + log_miss],
                    columns: track
                        .matches
                        .iter()
                        .map(|(j, log_psi, _)| (*j, log_r + log_psi))
                        .collect(),
                }
            })
            .collect();
        let ranked = k_best_assignments(&items, cfg.max_hypotheses, cfg.weight_floor)?;
        let log_weights: Vec<f64> = ranked.iter().map(|a| a.score).collect();
        let weights = math::normalize_log_weights(&log_weights);

        for (slot, &t) in group.iter().enumerate() {
            let track = &tracks[t];
            let mut existence = 0.0;
            let mut parts: Vec<(f64, Gaussian)> = Vec::new();
            for (a, w) in ranked.iter().zip(&weights) {
                match a.choices[slot] {
                    Choice::Private(0) => {}
                    Choice::Private(_) => {
                        existence += w;
                        for (cw, g) in track.predicted.components() {
                            parts.push((w * cw, g.clone()));
                        }
                    }
                    Choice::Column(j) => {
                        existence += w;
                        let updated = track
                            .matches
                            .iter()
                            .find(|(jj, _, _)| *jj == j)
                            .map(|(_, _, gm)| gm)
                            .expect("chosen column was precomputed");
                        for (cw, g) in updated.components() {
                            parts.push((w * cw, g.clone()));
                        }
                    }
                }
            }
            let density = if parts.is_empty() || existence <= 0.0 {
                track.predicted.clone()
            } else {
                GaussianMixture::new(parts)?.normalize()?
            };
            components.push(BernoulliComponent::new(
                track.label,
                existence.min(1.0),
                density,
            )?);
        }
        // r_U per measurement in this group.
        for (a, w) in ranked.iter().zip(&weights) {
            for choice in &a.choices {
                if let Choice::Column(j) = choice {
                    assoc[*j] += w;
                }
            }
        }
    }
    for a in assoc.iter_mut() {
        *a = a.clamp(0.0, 1.0);
    }
    Ok((LmbDensity::new(components)?, assoc))
}

fn gated(
    gm: &GaussianMixture,
    z: &DVector<f64>,
    h: &DMatrix<f64>,
    r: &DMatrix<f64>,
    gate: f64,
) -> Result<bool> {
    if gate == f64::INFINITY {
        return Ok(true);
    }
    for (_, g) in gm.components() {
        let innov_cov = h * g.cov() * h.transpose() + r;
        let predicted = Gaussian::new(h * g.mean(), innov_cov)?;
        if predicted.mahalanobis_sq(z)? <= gate {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Kalman-updates every component of the mixture against `z`; returns
/// the normalized posterior mixture and the log marginal likelihood.
fn update_mixture(
    gm: &GaussianMixture,
    z: &DVector<f64>,
    h: &DMatrix<f64>,
    r: &DMatrix<f64>,
) -> Result<(GaussianMixture, f64)> {
    let mut log_terms = Vec::with_capacity(gm.len());
    let mut posts = Vec::with_capacity(gm.len());
    for (w, g) in gm.components() {
        if *w == 0.0 {
            continue;
        }
        let (post, log_lik) = kalman_update_log(g, z, h, r)?;
        log_terms.push(math::ln(*w) + log_lik);
        posts.push(post);
    }
    let log_total = math::log_sum_exp(&log_terms);
    let weights = math::normalize_log_weights(&log_terms);
    Ok((
        GaussianMixture::new(weights.into_iter().zip(posts).collect())?,
        log_total,
    ))
}

/// Union-find partition of track indices; tracks sharing a gated
/// measurement end up in one group.
fn partition(tracks: &[TrackData], n_meas: usize) -> Vec<Vec<usize>> {
    let n = tracks.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let mut meas_owner: Vec<Option<usize>> = vec![None; n_meas];
    for (t, track) in tracks.iter().enumerate() {
        for (j, _, _) in &track.matches {
            match meas_owner[*j] {
                Some(o) => {
                    let (a, b) = (find(&mut parent, t), find(&mut parent, o));
                    if a != b {
                        parent[a] = b;
                    }
                }
                None => meas_owner[*j] = Some(t),
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for t in 0..n {
        let root = find(&mut parent, t);
        groups.entry(root).or_default().push(t);
    }
    groups.into_values().collect()
}

/// Measurement-driven births for the next time step: one Bernoulli per
/// measurement with existence min(r_max, share * lambda_B), where the
/// share weights measurements by how unexplained they are. Fully
/// associated measurement sets produce no births.
pub fn adaptive_birth(
    measurements: &[DVector<f64>],
    assoc: &[f64],
    params: &AdaptiveBirthParams,
    next_time: u32,
) -> Result<Vec<BernoulliComponent>> {
    if measurements.len() != assoc.len() {
        return Err(Error::DimensionMismatch {
            expected: measurements.len(),
            got: assoc.len(),
        });
    }
    if !(0.0..=1.0).contains(&params.max_existence) {
        return Err(Error::InvalidParameter("max existence must be in [0, 1]"));
    }
    for a in assoc {
        if !(0.0..=1.0).contains(a) {
            return Err(Error::InvalidParameter("association probabilities must be in [0, 1]"));
        }
    }
    let total_unassigned: f64 = assoc.iter().map(|a| 1.0 - a).sum();
    if total_unassigned <= 0.0 {
        return Ok(Vec::new());
    }
    let dim = params.covariance.nrows();
    let mut births = Vec::new();
    for (i, (z, a)) in measurements.iter().zip(assoc).enumerate() {
        if z.len() < 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: z.len() });
        }
        let share = (1.0 - a) / total_unassigned;
        let existence = (share * params.expected_births).min(params.max_existence);
        if existence <= 0.0 {
            continue;
        }
        let mut mean = DVector::zeros(dim);
        mean[0] = z[0];
        mean[1] = z[1];
        let density = GaussianMixture::single(Gaussian::new(mean, params.covariance.clone())?);
        births.push(BernoulliComponent::new(
            Label::new(next_time, i as u32),
            existence,
            density,
        )?);
    }
    Ok(births)
}

/// Drops Bernoulli components with existence below `gamma_t`.
pub fn lmb_truncate(lmb: &LmbDensity, gamma_t: f64) -> Result<LmbDensity> {
    lmb.truncate(gamma_t)
}

/// For each component with existence strictly above `threshold`, emits
/// its label and the mean of its largest-weight Gaussian.
pub fn extract_estimates(lmb: &LmbDensity, threshold: f64) -> Result<Vec<(Label, DVector<f64>)>> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidParameter("extraction threshold must be in (0, 1)"));
    }
    let mut out = Vec::new();
    for c in lmb.components() {
        if c.existence > threshold {
            let (_, g) = c
                .density
                .components()
                .iter()
                .max_by(|a, b| a.0.total_cmp(&b.0))
                .expect("mixtures are nonempty");
            out.push((c.label, g.mean().clone()));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gm1(mean: f64, var: f64) -> GaussianMixture {
        GaussianMixture::single(
            Gaussian::new(DVector::from_vec(vec![mean]), DMatrix::from_vec(1, 1, vec![var]))
                .unwrap(),
        )
    }

    fn planar_gm(x: f64, y: f64, pos_var: f64, vel_var: f64) -> GaussianMixture {
        GaussianMixture::single(
            Gaussian::new(
                DVector::from_vec(vec![x, y, 0.0, 0.0]),
                DMatrix::from_diagonal(&DVector::from_vec(vec![pos_var, pos_var, vel_var, vel_var])),
            )
            .unwrap(),
        )
    }

    fn planar_sensor(p_d: f64, kappa: f64) -> SensorModel {
        SensorModel::new(
            DMatrix::from_row_slice(2, 4, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]),
            DMatrix::identity(2, 2) * 625.0,
            p_d,
            10.0,
            kappa,
        )
        .unwrap()
    }

    #[test]
    fn predict_identity_dynamics() {
        let lmb = LmbDensity::new(vec![
            BernoulliComponent::new(Label::new(1, 1), 0.5, gm1(1.0, 2.0)).unwrap(),
        ])
        .unwrap();
        let motion = MotionModel::new(DMatrix::identity(1, 1), DMatrix::zeros(1, 1), 1.0).unwrap();
        let out = lmb_predict(&lmb, &motion, &[]).unwrap();
        assert_eq!(&out, &lmb);
    }

    #[test]
    fn predict_scales_existence_by_survival() {
        let lmb = LmbDensity::new(vec![
            BernoulliComponent::new(Label::new(1, 1), 0.5, gm1(0.0, 1.0)).unwrap(),
        ])
        .unwrap();
        let motion = MotionModel::new(DMatrix::identity(1, 1), DMatrix::zeros(1, 1), 0.98).unwrap();
        let out = lmb_predict(&lmb, &motion, &[]).unwrap();
        assert!((out.components().next().unwrap().existence - 0.49).abs() < 1e-15);
    }

    #[test]
    fn predict_appends_prior_births() {
        let motion = MotionModel::new(DMatrix::identity(1, 1), DMatrix::zeros(1, 1), 0.98).unwrap();
        let births: Vec<BernoulliComponent> = (0..3)
            .map(|i| {
                BernoulliComponent::new(Label::new(7, i), 0.04, gm1(i as f64, 1.0)).unwrap()
            })
            .collect();
        let out = lmb_predict(&LmbDensity::empty(), &motion, &births).unwrap();
        assert_eq!(out.len(), 3);
        for c in out.components() {
            assert!((c.existence - 0.04).abs() < 1e-15);
        }
    }

    #[test]
    fn predict_rejects_label_collisions() {
        let lmb = LmbDensity::new(vec![
            BernoulliComponent::new(Label::new(1, 1), 0.5, gm1(0.0, 1.0)).unwrap(),
        ])
        .unwrap();
        let motion = MotionModel::new(DMatrix::identity(1, 1), DMatrix::zeros(1, 1), 1.0).unwrap();
        let clash = vec![BernoulliComponent::new(Label::new(1, 1), 0.1, gm1(5.0, 1.0)).unwrap()];
        assert!(matches!(
            lmb_predict(&lmb, &motion, &clash),
            Err(Error::LabelCollision { .. })
        ));
    }

    #[test]
    fn miss_detection_update_closed_form() {
        let lmb = LmbDensity::new(vec![
            BernoulliComponent::new(Label::new(1, 1), 0.5, planar_gm(0.0, 0.0, 100.0, 25.0))
                .unwrap(),
        ])
        .unwrap();
        let sensor = planar_sensor(0.99, 1e-5);
        let (post, assoc) = lmb_update(&lmb, &[], &sensor, &LmbUpdateConfig::default()).unwrap();
        let expected = 0.5 * 0.01 / (0.5 + 0.5 * 0.01);
        let got = post.components().next().unwrap().existence;
        assert!((got - expected).abs() < 1e-12, "got {got}");
        assert!(assoc.is_empty());
    }

    #[test]
    fn zero_detection_probability_is_a_no_op() {
        let lmb = LmbDensity::new(vec![
            BernoulliComponent::new(Label::new(1, 1), 0.7, planar_gm(0.0, 0.0, 100.0, 25.0))
                .unwrap(),
        ])
        .unwrap();
        let sensor = planar_sensor(0.0, 1e-5);
        let z = vec![DVector::from_vec(vec![0.0, 0.0])];
        let (post, assoc) = lmb_update(&lmb, &z, &sensor, &LmbUpdateConfig::default()).unwrap();
        let c = post.components().next().unwrap();
        assert!((c.existence - 0.7).abs() < 1e-12);
        assert_eq!(assoc, vec![0.0]);
    }

    #[test]
    fn confirming_measurement_raises_existence() {
        // One track, one measurement at the predicted mean, clutter
        // density per a 1000 m x 1000 m region with rate 10.
        let lmb = LmbDensity::new(vec![
            BernoulliComponent::new(Label::new(1, 1), 0.9, planar_gm(0.0, 0.0, 100.0, 25.0))
                .unwrap(),
        ])
        .unwrap();
        let sensor = planar_sensor(0.99, 10.0 / 1.0e6);
        let z = vec![DVector::from_vec(vec![0.0, 0.0])];
        let (post, assoc) = lmb_update(&lmb, &z, &sensor, &LmbUpdateConfig::default()).unwrap();
        let c = post.components().next().unwrap();
        assert!(c.existence > 0.99, "existence {}", c.existence);
        assert!(assoc[0] > 0.9, "assoc {}", assoc[0]);

        // Cross-check against the exhaustive three-hypothesis
        // enumeration: not exist / miss / associate.
        let q = planar_gm(0.0, 0.0, 100.0, 25.0)
            .log_measurement_likelihood(&z[0], &sensor.observation, &sensor.noise)
            .unwrap()
            .exp();
        let psi = 0.99 * q / sensor.clutter_density;
        let w_not = 0.1;
        let w_miss = 0.9 * 0.01;
        let w_hit = 0.9 * psi;
        let expected_r = (w_miss + w_hit) / (w_not + w_miss + w_hit);
        assert!((c.existence - expected_r).abs() < 1e-12);
        let expected_assoc = w_hit / (w_not + w_miss + w_hit);
        assert!((assoc[0] - expected_assoc).abs() < 1e-12);
    }

    #[test]
    fn empty_measurement_set_never_raises_existence() {
        let sensor = planar_sensor(0.7, 1e-5);
        for r in [0.1, 0.5, 0.9, 0.999] {
            let lmb = LmbDensity::new(vec![
                BernoulliComponent::new(Label::new(1, 1), r, planar_gm(0.0, 0.0, 50.0, 10.0))
                    .unwrap(),
            ])
            .unwrap();
            let (post, _) = lmb_update(&lmb, &[], &sensor, &LmbUpdateConfig::default()).unwrap();
            assert!(post.components().next().unwrap().existence <= r);
        }
    }

    #[test]
    fn adaptive_birth_formula() {
        let params = AdaptiveBirthParams {
            expected_births: 0.8,
            max_existence: 0.3,
            covariance: DMatrix::from_diagonal(&DVector::from_vec(vec![
                900.0, 900.0, 400.0, 400.0,
            ])),
        };
        let z = vec![DVector::from_vec(vec![10.0, -5.0])];
        let births = adaptive_birth(&z, &[0.0], &params, 4).unwrap();
        assert_eq!(births.len(), 1);
        assert!((births[0].existence - 0.3).abs() < 1e-15);
        assert_eq!(births[0].label, Label::new(4, 0));
        let mean = births[0].density.components()[0].1.mean().clone();
        assert_eq!(mean.as_slice(), &[10.0, -5.0, 0.0, 0.0]);
    }

    #[test]
    fn adaptive_birth_fully_associated_is_empty() {
        let params = AdaptiveBirthParams {
            expected_births: 0.8,
            max_existence: 0.3,
            covariance: DMatrix::identity(4, 4),
        };
        let z = vec![
            DVector::from_vec(vec![0.0, 0.0]),
            DVector::from_vec(vec![5.0, 5.0]),
        ];
        assert!(adaptive_birth(&z, &[1.0, 1.0], &params, 3).unwrap().is_empty());
    }

    #[test]
    fn adaptive_birth_shares() {
        let params = AdaptiveBirthParams {
            expected_births: 0.8,
            max_existence: 0.3,
            covariance: DMatrix::identity(4, 4),
        };
        let z = vec![
            DVector::from_vec(vec![0.0, 0.0]),
            DVector::from_vec(vec![5.0, 5.0]),
        ];
        let births = adaptive_birth(&z, &[0.0, 0.5], &params, 3).unwrap();
        assert_eq!(births.len(), 2);
        assert!((births[0].existence - 0.3).abs() < 1e-12);
        assert!((births[1].existence - (0.5 / 1.5) * 0.8).abs() < 1e-12);
    }

    #[test]
    fn extraction_threshold_is_strict() {
        let lmb = LmbDensity::new(vec![
            BernoulliComponent::new(Label::new(1, 1), 0.9, gm1(0.0, 1.0)).unwrap(),
            BernoulliComponent::new(Label::new(1, 2), 0.5, gm1(5.0, 1.0)).unwrap(),
            BernoulliComponent::new(Label::new(1, 3), 0.1, gm1(9.0, 1.0)).unwrap(),
        ])
        .unwrap();
        let est = extract_estimates(&lmb, 0.5).unwrap();
        assert_eq!(est.len(), 1);
        assert_eq!(est[0].0, Label::new(1, 1));
    }

    #[test]
    fn existence_stays_in_unit_interval_over_random_steps() {
        // 1000 randomized predict/update steps.
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let motion = MotionModel::new(
            DMatrix::identity(4, 4),
            DMatrix::identity(4, 4) * 4.0,
            0.95,
        )
        .unwrap();
        let sensor = planar_sensor(0.9, 1e-5);
        let mut lmb = LmbDensity::new(vec![
            BernoulliComponent::new(Label::new(0, 0), 0.3, planar_gm(0.0, 0.0, 100.0, 25.0))
                .unwrap(),
            BernoulliComponent::new(Label::new(0, 1), 0.6, planar_gm(40.0, -30.0, 100.0, 25.0))
                .unwrap(),
        ])
        .unwrap();
        for step in 0..1000 {
            let predicted = lmb_predict(&lmb, &motion, &[]).unwrap();
            let mut zs = Vec::new();
            let n_z = (next() * 3.0) as usize;
            for _ in 0..n_z {
                zs.push(DVector::from_vec(vec![
                    (next() - 0.5) * 200.0,
                    (next() - 0.5) * 200.0,
                ]));
            }
            let (post, assoc) =
                lmb_update(&predicted, &zs, &sensor, &LmbUpdateConfig::default()).unwrap();
            for c in post.components() {
                assert!(
                    (0.0..=1.0).contains(&c.existence),
                    "step {step}: existence {} out of range",
                    c.existence
                );
            }
            for a in &assoc {
                assert!((0.0..=1.0).contains(a));
            }
            // Per-step mixture reduction, as in the filter loop.
            lmb = LmbDensity::new(
                post.components()
                    .map(|c| {
                        BernoulliComponent::new(
                            c.label,
                            c.existence,
                            c.density.prune_merge(1e-5, 4.0, 10).unwrap(),
                        )
                        .unwrap()
                    })
                    .collect(),
            )
            .unwrap();
        }
    }

    #[test]
    fn persistent_object_confirms_quickly() {
        // High-quality sensor, object observed dead-on every step.
        let motion = MotionModel::new(
            DMatrix::identity(4, 4),
            DMatrix::identity(4, 4) * 1e-6,
            0.99,
        )
        .unwrap();
        let sensor = SensorModel::new(
            DMatrix::from_row_slice(2, 4, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]),
            DMatrix::identity(2, 2) * 1.0,
            1.0,
            0.0,
            1e-6,
        )
        .unwrap();
        let mut lmb = LmbDensity::new(vec![
            BernoulliComponent::new(Label::new(0, 0), 0.1, planar_gm(0.0, 0.0, 100.0, 25.0))
                .unwrap(),
        ])
        .unwrap();
        let z = vec![DVector::from_vec(vec![0.0, 0.0])];
        for _ in 0..5 {
            let predicted = lmb_predict(&lmb, &motion, &[]).unwrap();
            let (post, _) = lmb_update(&predicted, &z, &sensor, &LmbUpdateConfig::default()).unwrap();
            lmb = post;
        }
        assert!(lmb.components().next().unwrap().existence > 0.999);
    }
}
