//! Ground truth, measurement generation, per-run network simulation
//! and Monte-Carlo aggregation.

use nalgebra::DVector;
use rayon::prelude::*;

use rfs_fusion_core::diagnostics::{discretize_lmb, label_inconsistency_indicator, DiagnosticsReport, DiscreteSpace};
use rfs_fusion_core::fusion::{classical_gci_lmb_fuse, r_gci_lmb_fuse, FusionConfig};
use rfs_fusion_core::gaussian::{Gaussian, GaussianMixture};
use rfs_fusion_core::labeled_rfs::{BernoulliComponent, Label, LmbDensity};
use rfs_fusion_core::lmb_filter::{
    adaptive_birth, extract_estimates, lmb_predict, lmb_update, BirthModel, SensorModel,
};
use rfs_fusion_core::ospa::{ospa_distance, OspaParams};

use crate::rng::{purpose, RngStream};
use crate::scenario::{EstimatorKind, ScenarioConfig};
use crate::SimError;

/// One scored estimator output at one step for one sensor.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub run: u64,
    pub step: u32,
    pub sensor: usize,
    pub estimator: EstimatorKind,
    pub card_true: usize,
    pub card_est: usize,
    pub ospa: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagRow {
    pub run: u64,
    pub step: u32,
    pub report: DiagnosticsReport,
}

/// Everything produced by one simulated run; deterministic in the
/// seed.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub run: u64,
    pub seed: u64,
    pub steps: Vec<StepRecord>,
    pub diagnostics: Vec<DiagRow>,
    pub errors: Vec<String>,
}

/// Noiseless nominal trajectories; objects exist on steps
/// `birth <= k < death`.
pub fn generate_truth(cfg: &ScenarioConfig) -> Vec<Vec<(Label, DVector<f64>)>> {
    let dt = cfg.motion.sampling_period;
    let mut out = Vec::with_capacity(cfg.duration as usize);
    let mut states: Vec<DVector<f64>> = cfg
        .tracks
        .iter()
        .map(|t| DVector::from_vec(vec![t.state[0], t.state[1], t.state[2], t.state[3]]))
        .collect();
    for step in 1..=cfg.duration {
        let mut now = Vec::new();
        for (i, track) in cfg.tracks.iter().enumerate() {
            for m in &track.maneuvers {
                if m.step == step {
                    states[i][2] += m.dv[0];
                    states[i][3] += m.dv[1];
                }
            }
            if step >= track.birth && step < track.death {
                now.push((Label::new(track.birth, i as u32 + 1), states[i].clone()));
                // Propagate only while alive.
                let s = &mut states[i];
                s[0] += dt * s[2];
                s[1] += dt * s[3];
            }
        }
        out.push(now);
    }
    out
}

/// Detections with additive Gaussian noise plus uniform Poisson
/// clutter, in shuffled order.
pub fn generate_measurements(
    truth_now: &[(Label, DVector<f64>)],
    sensor: &SensorModel,
    cfg: &ScenarioConfig,
    stream: &RngStream,
) -> Vec<DVector<f64>> {
    let mut detection = stream.substream(purpose::DETECTION, 0);
    let mut noise = stream.substream(purpose::NOISE, 0);
    let mut clutter = stream.substream(purpose::CLUTTER, 0);
    let mut shuffle = stream.substream(purpose::SHUFFLE, 0);
    let sigma = sensor.noise[(0, 0)].sqrt();
    let mut zs: Vec<DVector<f64>> = Vec::new();
    for (_, x) in truth_now {
        if detection.bernoulli(sensor.detection) {
            zs.push(DVector::from_vec(vec![
                x[0] + sigma * noise.normal(),
                x[1] + sigma * noise.normal(),
            ]));
        }
    }
    let n_clutter = clutter.poisson(sensor.clutter_rate);
    for _ in 0..n_clutter {
        zs.push(DVector::from_vec(vec![
            clutter.uniform(cfg.region.min[0], cfg.region.max[0]),
            clutter.uniform(cfg.region.min[1], cfg.region.max[1]),
        ]));
    }
    shuffle.shuffle(&mut zs);
    zs
}

struct SensorState {
    posterior: LmbDensity,
    pending_births: Vec<BernoulliComponent>,
}

fn reduce(lmb: &LmbDensity, cfg: &ScenarioConfig) -> Result<LmbDensity, SimError> {
    let f = &cfg.filter;
    let truncated = lmb.truncate(f.truncation_threshold)?;
    let components = truncated
        .components()
        .map(|c| {
            Ok(BernoulliComponent::new(
                c.label,
                c.existence,
                c.density
                    .prune_merge(f.prune_threshold, f.merge_threshold, f.max_components)?,
            )?)
        })
        .collect::<Result<Vec<_>, SimError>>()?;
    Ok(LmbDensity::new(components)?)
}

fn score(
    estimates: &[(Label, DVector<f64>)],
    truth_now: &[(Label, DVector<f64>)],
    params: &OspaParams,
) -> (usize, f64) {
    let est_states: Vec<DVector<f64>> = estimates.iter().map(|(_, x)| x.clone()).collect();
    let true_states: Vec<DVector<f64>> = truth_now.iter().map(|(_, x)| x.clone()).collect();
    let d = ospa_distance(&est_states, &true_states, params).unwrap_or(params.cutoff);
    (est_states.len(), d)
}

fn mixture_x_marginal(gm: &GaussianMixture) -> Result<GaussianMixture, SimError> {
    let parts = gm
        .components()
        .iter()
        .map(|(w, g)| {
            Ok((
                *w,
                Gaussian::new(
                    DVector::from_vec(vec![g.mean()[0]]),
                    nalgebra::DMatrix::from_vec(1, 1, vec![g.cov()[(0, 0)]]),
                )?,
            ))
        })
        .collect::<Result<Vec<_>, SimError>>()?;
    Ok(GaussianMixture::new(parts)?)
}

/// Projects an LMB onto its first-state-component marginal (1-D
/// Gaussians), the substrate of the running diagnostics.
pub fn x_marginal(lmb: &LmbDensity) -> Result<LmbDensity, SimError> {
    let components = lmb
        .components()
        .map(|c| {
            Ok(BernoulliComponent::new(
                c.label,
                c.existence,
                mixture_x_marginal(&c.density)?,
            )?)
        })
        .collect::<Result<Vec<_>, SimError>>()?;
    Ok(LmbDensity::new(components)?)
}

/// First-state-component marginal of a GLMB.
pub fn x_marginal_glmb(
    glmb: &rfs_fusion_core::labeled_rfs::GlmbDensity,
) -> Result<rfs_fusion_core::labeled_rfs::GlmbDensity, SimError> {
    use rfs_fusion_core::labeled_rfs::{GlmbDensity, GlmbHypothesis};
    let hypotheses = glmb
        .hypotheses()
        .iter()
        .map(|h| {
            let densities = h
                .densities
                .iter()
                .map(|(l, gm)| Ok((*l, std::sync::Arc::new(mixture_x_marginal(gm)?))))
                .collect::<Result<_, SimError>>()?;
            Ok(GlmbHypothesis {
                labels: h.labels.clone(),
                log_weight: h.log_weight,
                densities,
            })
        })
        .collect::<Result<Vec<_>, SimError>>()?;
    Ok(GlmbDensity::new(
        glmb.label_space().clone(),
        hypotheses,
    )?)
}

/// A labeled density accepted by the diagnostics front end.
pub enum LabeledInput {
    Lmb(LmbDensity),
    Glmb(rfs_fusion_core::labeled_rfs::GlmbDensity),
}

/// Computes the label-inconsistency report for labeled densities of
/// any state dimension: posteriors are projected onto their
/// first-state-component marginal and discretized on one shared 1-D
/// grid over the union label space. Returns None when every input is
/// empty.
pub fn diagnose_labeled(
    inputs: &[(LabeledInput, f64)],
    cells: usize,
    max_cardinality: usize,
) -> Result<Option<DiagnosticsReport>, SimError> {
    let mut labels: std::collections::BTreeSet<Label> = std::collections::BTreeSet::new();
    let mut projected: Vec<LabeledInput> = Vec::with_capacity(inputs.len());
    for (input, _) in inputs {
        match input {
            LabeledInput::Lmb(l) => {
                let p = x_marginal(l)?;
                labels.extend(p.labels().copied());
                projected.push(LabeledInput::Lmb(p));
            }
            LabeledInput::Glmb(g) => {
                let p = x_marginal_glmb(g)?;
                labels.extend(p.label_space().iter().copied());
                projected.push(LabeledInput::Glmb(p));
            }
        }
    }
    if labels.is_empty() {
        return Ok(None);
    }
    // Grid covering every component's 6.5-sigma interval.
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut cover = |gm: &GaussianMixture| {
        for (_, g) in gm.components() {
            let s = g.cov()[(0, 0)].sqrt();
            lo = lo.min(g.mean()[0] - 6.5 * s);
            hi = hi.max(g.mean()[0] + 6.5 * s);
        }
    };
    for input in &projected {
        match input {
            LabeledInput::Lmb(l) => {
                for c in l.components() {
                    cover(&c.density);
                }
            }
            LabeledInput::Glmb(g) => {
                for h in g.hypotheses() {
                    for gm in h.densities.values() {
                        cover(gm);
                    }
                }
            }
        }
    }
    if !(hi > lo) {
        return Ok(None);
    }
    let space = std::sync::Arc::new(DiscreteSpace::grid_1d(
        lo,
        hi,
        cells,
        labels.into_iter().collect(),
        max_cardinality,
    )?);
    let mut discretized = Vec::with_capacity(projected.len());
    for input in &projected {
        let (d, _) = match input {
            LabeledInput::Lmb(l) => discretize_lmb(l, &space)?,
            LabeledInput::Glmb(g) => rfs_fusion_core::diagnostics::discretize_glmb(g, &space)?,
        };
        discretized.push(d);
    }
    let with_weights: Vec<(&rfs_fusion_core::diagnostics::DiscreteMultiObjectDensity, f64)> =
        discretized.iter().zip(inputs.iter().map(|(_, w)| *w)).collect();
    Ok(Some(label_inconsistency_indicator(&with_weights)?))
}

/// Simulates one run of the whole sensor network. Filter and fusion
/// errors are recorded and the run continues; a failed estimator
/// contributes an empty estimate for that step.
pub fn run_network(
    cfg: &ScenarioConfig,
    seed: u64,
    run: u64,
    estimators: &[EstimatorKind],
) -> RunRecord {
    let motion = cfg.motion_model();
    let n_sensors = cfg.sensors.len();
    let sensor_models: Vec<SensorModel> = (0..n_sensors).map(|s| cfg.sensor_model(s)).collect();
    let update_cfg = cfg.update_config();
    let birth_model = cfg.birth_model();
    let ospa_params = OspaParams::new(cfg.ospa.cutoff, cfg.ospa.order).expect("validated config");
    let truth = generate_truth(cfg);
    let weights = cfg.fusion_weights();
    let root = RngStream::from_seed(seed);

    let mut states: Vec<SensorState> = (0..n_sensors)
        .map(|_| SensorState {
            posterior: LmbDensity::empty(),
            pending_births: Vec::new(),
        })
        .collect();
    let mut steps = Vec::new();
    let mut diagnostics = Vec::new();
    let mut errors = Vec::new();

    for step in 1..=cfg.duration {
        let truth_now = &truth[(step - 1) as usize];
        // Local filtering.
        for s in 0..n_sensors {
            let stream = root
                .substream(purpose::SENSOR, s as u64)
                .substream(purpose::STEP, step as u64);
            let zs = generate_measurements(truth_now, &sensor_models[s], cfg, &stream);
            let births = match &birth_model {
                BirthModel::Prior(_) => cfg.prior_births_at(step),
                BirthModel::Adaptive(_) => std::mem::take(&mut states[s].pending_births),
            };
            match step_filter(
                &states[s].posterior,
                &births,
                &zs,
                &motion,
                &sensor_models[s],
                cfg,
                &update_cfg,
            ) {
                Ok((posterior, assoc)) => {
                    if let BirthModel::Adaptive(params) = &birth_model {
                        match adaptive_birth(&zs, &assoc, params, step + 1) {
                            Ok(b) => states[s].pending_births = b,
                            Err(e) => errors.push(format!("run {run} step {step} sensor {s}: {e}")),
                        }
                    }
                    states[s].posterior = posterior;
                }
                Err(e) => {
                    errors.push(format!("run {run} step {step} sensor {s}: {e}"));
                }
            }
        }
        // Scoring and fusion.
        for s in 0..n_sensors {
            for estimator in estimators {
                let lmb = match estimator {
                    EstimatorKind::Local => Some(states[s].posterior.clone()),
                    EstimatorKind::RGci => {
                        match fuse_robust(cfg, &states, s, &weights) {
                            Ok(l) => Some(l),
                            Err(e) => {
                                errors.push(format!(
                                    "run {run} step {step} sensor {s} r_gci: {e}"
                                ));
                                None
                            }
                        }
                    }
                    EstimatorKind::ClassicalGci => {
                        match fuse_classical(cfg, &states, s, &weights) {
                            Ok(l) => Some(l),
                            Err(e) => {
                                errors.push(format!(
                                    "run {run} step {step} sensor {s} classical_gci: {e}"
                                ));
                                None
                            }
                        }
                    }
                };
                let estimates = match &lmb {
                    Some(l) => {
                        extract_estimates(l, cfg.filter.existence_threshold).unwrap_or_default()
                    }
                    None => Vec::new(),
                };
                let (card_est, ospa) = score(&estimates, truth_now, &ospa_params);
                steps.push(StepRecord {
                    run,
                    step,
                    sensor: s + 1,
                    estimator: *estimator,
                    card_true: truth_now.len(),
                    card_est,
                    ospa,
                });
            }
        }
        if cfg.diagnostics.enabled && n_sensors >= 2 {
            let [pa, pb] = cfg.diagnostics.sensor_pair;
            let wa = weights[pa - 1];
            let wb = weights[pb - 1];
            let total = wa + wb;
            let inputs = [
                (LabeledInput::Lmb(states[pa - 1].posterior.clone()), wa / total),
                (LabeledInput::Lmb(states[pb - 1].posterior.clone()), wb / total),
            ];
            match diagnose_labeled(&inputs, cfg.diagnostics.cells, cfg.diagnostics.max_cardinality)
            {
                Ok(Some(report)) => diagnostics.push(DiagRow { run, step, report }),
                Ok(None) => {}
                Err(e) => errors.push(format!("run {run} step {step} diagnostics: {e}")),
            }
        }
    }
    RunRecord {
        run,
        seed,
        steps,
        diagnostics,
        errors,
    }
}

#[allow(clippy::too_many_arguments)]
fn step_filter(
    posterior: &LmbDensity,
    births: &[BernoulliComponent],
    zs: &[DVector<f64>],
    motion: &rfs_fusion_core::lmb_filter::MotionModel,
    sensor: &SensorModel,
    cfg: &ScenarioConfig,
    update_cfg: &rfs_fusion_core::lmb_filter::LmbUpdateConfig,
) -> Result<(LmbDensity, Vec<f64>), SimError> {
    let predicted = lmb_predict(posterior, motion, births)?;
    let (updated, assoc) = lmb_update(&predicted, zs, sensor, update_cfg)?;
    Ok((reduce(&updated, cfg)?, assoc))
}

fn participant_config(cfg: &ScenarioConfig, participants: &[usize], weights: &[f64]) -> FusionConfig {
    let raw: Vec<f64> = participants.iter().map(|s| weights[*s]).collect();
    let total: f64 = raw.iter().sum();
    FusionConfig {
        weights: raw.iter().map(|w| w / total).collect(),
        max_hypotheses: cfg.fusion.max_hypotheses,
        weight_floor: cfg.fusion.weight_floor,
        eta_floor: cfg.fusion.eta_floor,
    }
}

fn fuse_robust(
    cfg: &ScenarioConfig,
    states: &[SensorState],
    home: usize,
    weights: &[f64],
) -> Result<LmbDensity, SimError> {
    let neighbours = cfg.neighbours(home);
    if neighbours.is_empty() {
        return Ok(states[home].posterior.clone());
    }
    let mut participants = vec![home];
    participants.extend(neighbours);
    let locals: Vec<LmbDensity> = participants
        .iter()
        .map(|s| states[*s].posterior.clone())
        .collect();
    let fusion_cfg = participant_config(cfg, &participants, weights);
    let fused = r_gci_lmb_fuse(&locals, &fusion_cfg, 0)?;
    reduce(&fused.to_lmb()?, cfg)
}

fn fuse_classical(
    cfg: &ScenarioConfig,
    states: &[SensorState],
    home: usize,
    weights: &[f64],
) -> Result<LmbDensity, SimError> {
    let neighbours = cfg.neighbours(home);
    if neighbours.is_empty() {
        return Ok(states[home].posterior.clone());
    }
    let mut acc = states[home].posterior.clone();
    let mut acc_w = weights[home];
    for nb in neighbours {
        let w = weights[nb];
        let total = acc_w + w;
        let pair = FusionConfig {
            weights: vec![acc_w / total, w / total],
            max_hypotheses: cfg.fusion.max_hypotheses,
            weight_floor: cfg.fusion.weight_floor,
            eta_floor: cfg.fusion.eta_floor,
        };
        acc = classical_gci_lmb_fuse(&acc, &states[nb].posterior, &pair)?;
        acc_w = total;
    }
    reduce(&acc, cfg)
}

/// Seed of run `run` under `base_seed`.
pub fn run_seed(base_seed: u64, run: u64) -> u64 {
    let mut s = RngStream::from_seed(base_seed).substream(purpose::RUN, run);
    s.next_u64()
}

/// Monte-Carlo execution: runs are independent and deterministic in
/// (base_seed, run index), so results are identical for any degree of
/// parallelism.
pub fn monte_carlo(
    cfg: &ScenarioConfig,
    runs: u64,
    base_seed: u64,
    estimators: &[EstimatorKind],
    jobs: usize,
) -> Result<Vec<RunRecord>, SimError> {
    if runs == 0 {
        return Err(SimError::Config("runs must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| SimError::Config(e.to_string()))?;
    let records: Vec<RunRecord> = pool.install(|| {
        (0..runs)
            .into_par_iter()
            .map(|r| run_network(cfg, run_seed(base_seed, r), r, estimators))
            .collect()
    });
    Ok(records)
}

/// Per-step aggregate over runs for one (estimator, sensor).
#[derive(Debug, Clone)]
pub struct AggregateRow {
    pub estimator: EstimatorKind,
    pub sensor: usize,
    pub step: u32,
    pub card_true: usize,
    pub card_mean: f64,
    pub card_std: f64,
    pub ospa_mean: f64,
    pub ospa_std: f64,
}

#[derive(Debug, Clone)]
pub struct SummaryRow {
    pub estimator: EstimatorKind,
    pub sensor: usize,
    /// Mean OSPA over the post-transient window.
    pub ospa_post_transient: f64,
    /// Mean |cardinality error| over the post-transient window.
    pub card_abs_error: f64,
}

#[derive(Debug, Clone)]
pub struct Aggregates {
    pub rows: Vec<AggregateRow>,
    pub summary: Vec<SummaryRow>,
    /// Steps included in the post-transient window.
    pub window: Vec<u32>,
    /// Birth/death event steps that seeded the exclusion zones.
    pub events: Vec<u32>,
}

/// Settling span excluded after every birth/death event.
pub const SETTLE_STEPS: u32 = 5;

/// Steps outside `[event, event + SETTLE_STEPS]` for all events.
pub fn post_transient_window(cfg: &ScenarioConfig) -> (Vec<u32>, Vec<u32>) {
    let mut events: Vec<u32> = cfg
        .tracks
        .iter()
        .flat_map(|t| [t.birth, t.death])
        .filter(|e| *e <= cfg.duration)
        .collect();
    events.sort_unstable();
    events.dedup();
    let window = (1..=cfg.duration)
        .filter(|step| !events.iter().any(|e| *step >= *e && *step <= e + SETTLE_STEPS))
        .collect();
    (window, events)
}

pub fn aggregate(
    cfg: &ScenarioConfig,
    records: &[RunRecord],
    estimators: &[EstimatorKind],
) -> Aggregates {
    let (window, events) = post_transient_window(cfg);
    let n_sensors = cfg.sensors.len();
    let n_runs = records.len().max(1) as f64;
    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for estimator in estimators {
        for sensor in 1..=n_sensors {
            let mut post_ospa = 0.0;
            let mut post_card_err = 0.0;
            let mut post_count = 0usize;
            for step in 1..=cfg.duration {
                let mut ospa_sum = 0.0;
                let mut ospa_sq = 0.0;
                let mut card_sum = 0.0;
                let mut card_sq = 0.0;
                let mut card_true = 0usize;
                let mut count = 0usize;
                for record in records {
                    for row in &record.steps {
                        if row.step == step
                            && row.sensor == sensor
                            && row.estimator == *estimator
                        {
                            ospa_sum += row.ospa;
                            ospa_sq += row.ospa * row.ospa;
                            card_sum += row.card_est as f64;
                            card_sq += row.card_est as f64 * row.card_est as f64;
                            card_true = row.card_true;
                            count += 1;
                            if window.contains(&step) {
                                post_ospa += row.ospa;
                                post_card_err += (row.card_est as f64 - row.card_true as f64).abs();
                                post_count += 1;
                            }
                        }
                    }
                }
                if count == 0 {
                    continue;
                }
                let cm = card_sum / n_runs;
                let om = ospa_sum / n_runs;
                rows.push(AggregateRow {
                    estimator: *estimator,
                    sensor,
                    step,
                    card_true,
                    card_mean: cm,
                    card_std: (card_sq / n_runs - cm * cm).max(0.0).sqrt(),
                    ospa_mean: om,
                    ospa_std: (ospa_sq / n_runs - om * om).max(0.0).sqrt(),
                });
            }
            summary.push(SummaryRow {
                estimator: *estimator,
                sensor,
                ospa_post_transient: if post_count > 0 {
                    post_ospa / post_count as f64
                } else {
                    f64::NAN
                },
                card_abs_error: if post_count > 0 {
                    post_card_err / post_count as f64
                } else {
                    f64::NAN
                },
            });
        }
    }
    Aggregates {
        rows,
        summary,
        window,
        events,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_scenario(sensors: usize) -> ScenarioConfig {
        let sensor_block = r#"
[[sensors]]
detection_probability = 0.98
measurement_noise_std = 10.0
clutter_rate = 2.0
"#
        .repeat(sensors);
        let text = format!(
            r#"
name = "tiny"
region = {{ min = [-500.0, -500.0], max = [500.0, 500.0] }}
duration = 12
[motion]
process_noise_std = 5.0
survival_probability = 0.98
[[tracks]]
birth = 1
death = 13
state = [0.0, 0.0, 5.0, -3.0]
[[tracks]]
birth = 3
death = 10
state = [-200.0, 200.0, 4.0, 0.0]
{sensor_block}
[birth]
variant = "adaptive"
expected_births = 0.8
max_existence = 0.3
position_var = 900.0
velocity_var = 400.0
"#
        );
        ScenarioConfig::from_toml_str(&text).unwrap()
    }

    #[test]
    fn truth_respects_birth_and_death() {
        let cfg = tiny_scenario(1);
        let truth = generate_truth(&cfg);
        assert_eq!(truth[0].len(), 1); // step 1: only track 1
        assert_eq!(truth[2].len(), 2); // step 3: both
        assert_eq!(truth[9].len(), 1); // step 10: track 2 died
        assert_eq!(truth[11].len(), 1);
    }

    #[test]
    fn truth_with_no_tracks_is_empty() {
        let mut cfg = tiny_scenario(1);
        cfg.tracks.clear();
        let truth = generate_truth(&cfg);
        assert!(truth.iter().all(|t| t.is_empty()));
    }

    #[test]
    fn stationary_track_stays_put() {
        let mut cfg = tiny_scenario(1);
        cfg.tracks.truncate(1);
        cfg.tracks[0].state = [10.0, -20.0, 0.0, 0.0];
        let truth = generate_truth(&cfg);
        for step in &truth {
            assert_eq!(step[0].1[0], 10.0);
            assert_eq!(step[0].1[1], -20.0);
        }
    }

    #[test]
    fn noise_free_measurements_track_objects() {
        let mut cfg = tiny_scenario(1);
        cfg.sensors[0].clutter_rate = 0.0;
        cfg.sensors[0].detection_probability = 1.0;
        cfg.sensors[0].measurement_noise_std = 1e-6;
        let sensor = cfg.sensor_model(0);
        let truth = generate_truth(&cfg);
        let stream = RngStream::from_seed(1).substream(purpose::SENSOR, 0);
        let zs = generate_measurements(&truth[0], &sensor, &cfg, &stream);
        assert_eq!(zs.len(), 1);
        assert!((zs[0][0] - truth[0][0].1[0]).abs() < 6e-6);
        assert!((zs[0][1] - truth[0][0].1[1]).abs() < 6e-6);
    }

    #[test]
    fn blind_sensor_sees_only_nothing() {
        let mut cfg = tiny_scenario(1);
        cfg.sensors[0].clutter_rate = 0.0;
        cfg.sensors[0].detection_probability = 0.0;
        let sensor = cfg.sensor_model(0);
        let truth = generate_truth(&cfg);
        let stream = RngStream::from_seed(1).substream(purpose::SENSOR, 0);
        assert!(generate_measurements(&truth[0], &sensor, &cfg, &stream).is_empty());
    }

    #[test]
    fn sensor_streams_are_independent() {
        // Changing sensor 2's model does not change sensor 1's
        // measurement draws.
        let cfg_a = tiny_scenario(2);
        let mut cfg_b = tiny_scenario(2);
        cfg_b.sensors[1].clutter_rate = 7.0;
        cfg_b.sensors[1].detection_probability = 0.5;
        let truth = generate_truth(&cfg_a);
        let root = RngStream::from_seed(13);
        for step in 1..=cfg_a.duration {
            let stream = root
                .substream(purpose::SENSOR, 0)
                .substream(purpose::STEP, step as u64);
            let za = generate_measurements(
                &truth[(step - 1) as usize],
                &cfg_a.sensor_model(0),
                &cfg_a,
                &stream,
            );
            let zb = generate_measurements(
                &truth[(step - 1) as usize],
                &cfg_b.sensor_model(0),
                &cfg_b,
                &stream,
            );
            assert_eq!(za, zb, "step {step}");
        }
    }

    #[test]
    fn run_is_deterministic() {
        let cfg = tiny_scenario(2);
        let estimators = [EstimatorKind::Local, EstimatorKind::RGci];
        let a = run_network(&cfg, 99, 0, &estimators);
        let b = run_network(&cfg, 99, 0, &estimators);
        assert_eq!(a.steps, b.steps);
        assert_eq!(a.errors, b.errors);
    }

    #[test]
    fn monte_carlo_is_job_count_invariant() {
        let cfg = tiny_scenario(2);
        let estimators = [EstimatorKind::Local, EstimatorKind::RGci];
        let serial = monte_carlo(&cfg, 4, 7, &estimators, 1).unwrap();
        let parallel = monte_carlo(&cfg, 4, 7, &estimators, 4).unwrap();
        for (a, b) in serial.iter().zip(&parallel) {
            assert_eq!(a.steps, b.steps);
        }
    }

    #[test]
    fn duplicate_sensors_fuse_to_local_quality() {
        // Two sensors with identical models and identical streams see
        // the same measurements; fusing their identical posteriors
        // must reproduce the local result wherever the posterior tracks
        // are mutually separated (the regime the pairwise expansion is
        // exact in). Aggressive merging keeps tracks single-Gaussian.
        let mut cfg = tiny_scenario(1);
        cfg.sensors.push(cfg.sensors[0]);
        cfg.filter.merge_threshold = 1e6;
        cfg.filter.max_components = 1;
        cfg.validate().unwrap();
        let motion = cfg.motion_model();
        let sensor = cfg.sensor_model(0);
        let update = cfg.update_config();
        let truth = generate_truth(&cfg);
        let root = RngStream::from_seed(5);
        let mut local = LmbDensity::empty();
        let mut pending: Vec<BernoulliComponent> = Vec::new();
        let birth = match cfg.birth_model() {
            BirthModel::Adaptive(p) => p,
            _ => unreachable!(),
        };
        let ospa_params = OspaParams::new(100.0, 1.0).unwrap();
        let mut separated_steps = 0usize;
        for step in 1..=cfg.duration {
            // One shared measurement stream.
            let stream = root
                .substream(purpose::SENSOR, 0)
                .substream(purpose::STEP, step as u64);
            let zs = generate_measurements(&truth[(step - 1) as usize], &sensor, &cfg, &stream);
            let predicted = lmb_predict(&local, &motion, &pending).unwrap();
            let (updated, assoc) = lmb_update(&predicted, &zs, &sensor, &update).unwrap();
            local = reduce(&updated, &cfg).unwrap();
            pending = adaptive_birth(&zs, &assoc, &birth, step + 1).unwrap();

            let fused = r_gci_lmb_fuse(
                &[local.clone(), local.clone()],
                &FusionConfig::uniform(2),
                0,
            )
            .unwrap();
            let fused_lmb = reduce(&fused.to_lmb().unwrap(), &cfg).unwrap();
            // Applicability: every pair of tracks separated by > 100 m.
            let means: Vec<DVector<f64>> = local
                .components()
                .map(|c| c.density.components()[0].1.mean().clone())
                .collect();
            let separated = means.iter().enumerate().all(|(i, a)| {
                means.iter().skip(i + 1).all(|b| {
                    let dx = a[0] - b[0];
                    let dy = a[1] - b[1];
                    (dx * dx + dy * dy).sqrt() > 100.0
                })
            });
            let est_local = extract_estimates(&local, 0.5).unwrap();
            let est_fused = extract_estimates(&fused_lmb, 0.5).unwrap();
            let (_, o1) = score(&est_local, &truth[(step - 1) as usize], &ospa_params);
            let (_, o2) = score(&est_fused, &truth[(step - 1) as usize], &ospa_params);
            if separated {
                separated_steps += 1;
                assert!(
                    (o1 - o2).abs() < 1e-6,
                    "step {step}: local {o1} vs fused {o2}"
                );
            }
        }
        assert!(separated_steps >= 6, "only {separated_steps} separated steps");
    }

    #[test]
    fn post_transient_window_excludes_settling() {
        let cfg = tiny_scenario(1);
        // Events at 1, 3, 10, 13 -> excluded 1..=6, 3..=8, 10..=15.
        let (window, events) = post_transient_window(&cfg);
        assert_eq!(events, vec![1, 3, 10]);
        assert_eq!(window, vec![9]);
    }
}
