//! Command-line interface: scenario simulation, file-level fusion,
//! diagnostics, OSPA and self-validation.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use rfs_fusion_core::diagnostics::yes_object_identity_residual;
use rfs_fusion_core::fusion::{
    construct_labeled_fused, gmb_to_mb_moment_match, r_gci_fuse_mb_chain, FusionConfig,
};
use rfs_fusion_core::labeled_rfs::{MbDensity, MultiObjectDensity};
use rfs_fusion_core::ospa::{ospa_distance, OspaParams};

use crate::density_fmt::{read_density, read_state_set, write_density, Density};
use crate::engine::{aggregate, monte_carlo, post_transient_window, LabeledInput, SETTLE_STEPS};
use crate::report::{self, Metadata};
use crate::scenario::{EstimatorKind, ScenarioConfig};
use crate::{fnv1a64, log_info, SimError};

#[derive(Debug, Parser)]
#[command(
    name = "rfs-fusion",
    about = "Distributed multi-object tracking with robust GCI fusion of labeled RFS posteriors"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run Monte-Carlo scenario simulations and write CSV outputs.
    Simulate(SimulateArgs),
    /// Fuse serialized labeled densities and write the fused density.
    Fuse(FuseArgs),
    /// Compute the label-inconsistency diagnostics of labeled density files.
    Diagnose(DiagnoseArgs),
    /// OSPA distance between two state-set files.
    Ospa(OspaArgs),
    /// Run the built-in invariant suites.
    Validate,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario TOML file.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub runs: u64,
    /// Worker threads (0 = all cores). Outputs are identical for any
    /// value.
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    /// Config overrides, dotted-key=value (repeatable). Array fields
    /// take numeric indices or `*`.
    #[arg(long = "set")]
    pub overrides: Vec<String>,
    /// Comma-separated estimator subset (local,r_gci,classical_gci).
    #[arg(long)]
    pub estimators: Option<String>,
}

#[derive(Debug, Args)]
pub struct FuseArgs {
    /// Comma-separated GCI weights, one per input, summing to one.
    #[arg(long)]
    pub weights: String,
    /// 1-based index of the home sensor (label provider).
    #[arg(long, default_value_t = 1)]
    pub home: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Density files (lmb or glmb JSON documents).
    #[arg(required = true, num_args = 2..)]
    pub files: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    /// Comma-separated GCI weights, one per input, summing to one.
    #[arg(long)]
    pub weights: String,
    /// Optional output directory for the diagnostics CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(required = true, num_args = 2..)]
    pub files: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OspaArgs {
    #[arg(long, default_value_t = 100.0)]
    pub cutoff: f64,
    #[arg(long, default_value_t = 1.0)]
    pub order: f64,
    pub file_a: PathBuf,
    pub file_b: PathBuf,
}

/// Runs a parsed command; the error message is the exit diagnostic.
pub fn run(cli: Cli) -> Result<(), SimError> {
    match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Fuse(args) => fuse(args),
        Command::Diagnose(args) => diagnose(args),
        Command::Ospa(args) => ospa(args),
        Command::Validate => validate(),
    }
}

fn parse_weights(text: &str, expected: usize) -> Result<Vec<f64>, SimError> {
    let weights: Vec<f64> = text
        .split(',')
        .map(|w| {
            w.trim()
                .parse::<f64>()
                .map_err(|_| SimError::Config(format!("bad weight '{w}'")))
        })
        .collect::<Result<_, _>>()?;
    if weights.len() != expected {
        return Err(SimError::Config(format!(
            "{} weights given for {} inputs",
            weights.len(),
            expected
        )));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 || weights.iter().any(|w| *w < 0.0) {
        return Err(SimError::Config(
            "weights must be nonnegative and sum to one".into(),
        ));
    }
    Ok(weights)
}

/// Applies one `dotted.path=value` override onto a TOML tree. The
/// addressed field must already exist; array segments accept an index
/// or `*`.
pub fn apply_override(root: &mut toml::Value, spec: &str) -> Result<(), SimError> {
    let (path, raw_value) = spec
        .split_once('=')
        .ok_or_else(|| SimError::Config(format!("override '{spec}' is not key=value")))?;
    let segments: Vec<&str> = path.trim().split('.').collect();
    let parsed: toml::Value = if let Ok(i) = raw_value.trim().parse::<i64>() {
        toml::Value::Integer(i)
    } else if let Ok(f) = raw_value.trim().parse::<f64>() {
        toml::Value::Float(f)
    } else if let Ok(b) = raw_value.trim().parse::<bool>() {
        toml::Value::Boolean(b)
    } else {
        toml::Value::String(raw_value.trim().to_string())
    };
    fn descend(
        node: &mut toml::Value,
        segments: &[&str],
        parsed: &toml::Value,
        full: &str,
    ) -> Result<(), SimError> {
        let head = segments[0];
        if segments.len() == 1 {
            match node {
                toml::Value::Table(table) => {
                    let slot = table.get_mut(head).ok_or_else(|| {
                        SimError::Config(format!("override '{full}': unknown key '{head}'"))
                    })?;
                    *slot = parsed.clone();
                    Ok(())
                }
                toml::Value::Array(items) => {
                    if head == "*" {
                        for item in items.iter_mut() {
                            *item = parsed.clone();
                        }
                        Ok(())
                    } else {
                        let idx: usize = head.parse().map_err(|_| {
                            SimError::Config(format!("override '{full}': bad index '{head}'"))
                        })?;
                        let slot = items.get_mut(idx).ok_or_else(|| {
                            SimError::Config(format!("override '{full}': index {idx} out of range"))
                        })?;
                        *slot = parsed.clone();
                        Ok(())
                    }
                }
                _ => Err(SimError::Config(format!(
                    "override '{full}': '{head}' does not address a table or array"
                ))),
            }
        } else {
            match node {
                toml::Value::Table(table) => {
                    let child = table.get_mut(head).ok_or_else(|| {
                        SimError::Config(format!("override '{full}': unknown key '{head}'"))
                    })?;
                    descend(child, &segments[1..], parsed, full)
                }
                toml::Value::Array(items) => {
                    if head == "*" {
                        for item in items.iter_mut() {
                            descend(item, &segments[1..], parsed, full)?;
                        }
                        Ok(())
                    } else {
                        let idx: usize = head.parse().map_err(|_| {
                            SimError::Config(format!("override '{full}': bad index '{head}'"))
                        })?;
                        let child = items.get_mut(idx).ok_or_else(|| {
                            SimError::Config(format!("override '{full}': index {idx} out of range"))
                        })?;
                        descend(child, &segments[1..], parsed, full)
                    }
                }
                _ => Err(SimError::Config(format!(
                    "override '{full}': '{head}' does not address a table or array"
                ))),
            }
        }
    }
    descend(root, &segments, &parsed, spec)
}

/// Loads a scenario file and applies `--set` overrides.
pub fn load_scenario(path: &Path, overrides: &[String]) -> Result<(ScenarioConfig, String), SimError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| SimError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut value: toml::Value =
        toml::from_str(&text).map_err(|e| SimError::Config(e.to_string()))?;
    for spec in overrides {
        apply_override(&mut value, spec)?;
    }
    let canonical =
        toml::to_string(&value).map_err(|e| SimError::Config(e.to_string()))?;
    let cfg = ScenarioConfig::from_toml_str(&canonical)?;
    Ok((cfg, canonical))
}

fn simulate(args: SimulateArgs) -> Result<(), SimError> {
    if args.runs == 0 {
        return Err(SimError::Config("runs must be at least 1".into()));
    }
    let (cfg, canonical) = load_scenario(&args.config, &args.overrides)?;
    let estimators: Vec<EstimatorKind> = match &args.estimators {
        Some(list) => list
            .split(',')
            .map(|s| s.trim().parse())
            .collect::<Result<_, _>>()?,
        None => cfg.estimators.clone(),
    };
    if estimators.is_empty() {
        return Err(SimError::Config("no estimators selected".into()));
    }
    log_info!(
        "simulate: scenario '{}', {} runs, seed {}",
        cfg.name,
        args.runs,
        args.seed
    );
    let records = monte_carlo(&cfg, args.runs, args.seed, &estimators, args.jobs)?;
    let aggregates = aggregate(&cfg, &records, &estimators);
    let (window, events) = post_transient_window(&cfg);
    let metadata = Metadata {
        scenario: cfg.name.clone(),
        seed: args.seed,
        runs: args.runs,
        jobs: args.jobs,
        config_hash: format!("{:016x}", fnv1a64(canonical.as_bytes())),
        overrides: args.overrides.clone(),
        estimators: estimators.iter().map(|e| e.as_str().to_string()).collect(),
        settle_steps: SETTLE_STEPS,
        transient_events: events,
        post_transient_steps: window,
        error_count: records.iter().map(|r| r.errors.len()).sum(),
    };
    report::write_outputs(
        &args.out,
        &records,
        &aggregates,
        &estimators,
        &metadata,
        cfg.diagnostics.enabled,
    )?;
    for record in &records {
        for error in &record.errors {
            log_info!("warning: {error}");
        }
    }
    println!(
        "wrote {} estimator file(s) plus aggregate, summary and metadata to {}",
        estimators.len(),
        args.out.display()
    );
    Ok(())
}

fn as_labeled_input(density: &Density, path: &Path) -> Result<LabeledInput, SimError> {
    match density {
        Density::Lmb(l) => Ok(LabeledInput::Lmb(l.clone())),
        Density::Glmb(g) => Ok(LabeledInput::Glmb(g.clone())),
        other => Err(SimError::Config(format!(
            "{}: expected a labeled density, got '{}'",
            path.display(),
            other.kind()
        ))),
    }
}

fn marginal_mb(density: &Density) -> Result<MbDensity, SimError> {
    Ok(match density {
        Density::Lmb(l) => l.to_mb(),
        Density::Glmb(g) => gmb_to_mb_moment_match(&g.to_gmb())?,
        Density::Gmb(g) => gmb_to_mb_moment_match(g)?,
        Density::Mb(m) => m.clone(),
    })
}

fn fuse(args: FuseArgs) -> Result<(), SimError> {
    let weights = parse_weights(&args.weights, args.files.len())?;
    if args.home == 0 || args.home > args.files.len() {
        return Err(SimError::Config("home index out of range".into()));
    }
    let densities: Vec<Density> = args
        .files
        .iter()
        .map(|p| read_density(p))
        .collect::<Result<_, _>>()?;
    let home = args.home - 1;
    // Labels come from the home sensor, which must be labeled.
    let home_labels = match &densities[home] {
        Density::Lmb(l) => l.sorted_labels(),
        Density::Glmb(g) => g.sorted_labels(),
        other => {
            return Err(SimError::Config(format!(
                "home density must be labeled, got '{}'",
                other.kind()
            )))
        }
    };
    let marginals: Vec<MbDensity> = densities
        .iter()
        .map(marginal_mb)
        .collect::<Result<_, _>>()?;
    let cfg = FusionConfig {
        weights: weights.clone(),
        ..FusionConfig::uniform(args.files.len())
    };
    let fused_gmb = r_gci_fuse_mb_chain(&marginals, &cfg, home)?;
    let fused = construct_labeled_fused(&fused_gmb, &home_labels)?;
    let p_yes = 1.0 - fused.no_object_probability();
    std::fs::create_dir_all(&args.out)?;
    write_density(&args.out.join("fused.json"), &Density::Glmb(fused))?;

    // Diagnostics row over the labeled inputs, when all are labeled.
    let labeled: Result<Vec<LabeledInput>, SimError> = densities
        .iter()
        .zip(&args.files)
        .map(|(d, p)| as_labeled_input(d, p))
        .collect();
    match labeled {
        Ok(inputs) => {
            let with_weights: Vec<(LabeledInput, f64)> =
                inputs.into_iter().zip(weights.iter().copied()).collect();
            if let Some(report) = crate::engine::diagnose_labeled(&with_weights, 64, 2)? {
                let csv = format!(
                    "{}\n{}\n",
                    report::DIAGNOSTICS_HEADER,
                    report::diagnostics_row_csv(0, &report)
                );
                std::fs::write(args.out.join("fuse_diagnostics.csv"), csv)?;
            }
        }
        Err(_) => log_info!("unlabeled inputs: skipping the diagnostics row"),
    }
    println!("fused yes-object probability: {p_yes}");
    println!("wrote {}", args.out.join("fused.json").display());
    Ok(())
}

fn diagnose(args: DiagnoseArgs) -> Result<(), SimError> {
    let weights = parse_weights(&args.weights, args.files.len())?;
    let inputs: Vec<(LabeledInput, f64)> = args
        .files
        .iter()
        .zip(weights)
        .map(|(path, w)| Ok((as_labeled_input(&read_density(path)?, path)?, w)))
        .collect::<Result<_, SimError>>()?;
    let report = crate::engine::diagnose_labeled(&inputs, 64, 2)?
        .ok_or_else(|| SimError::Config("all inputs are empty densities".into()))?;
    println!("{}", report::DIAGNOSTICS_HEADER);
    println!("{}", report::diagnostics_row_csv(0, &report));
    println!("yes-object identity residual: {}", yes_object_identity_residual(&report));
    if let Some(out) = args.out {
        std::fs::create_dir_all(&out)?;
        let csv = format!(
            "{}\n{}\n",
            report::DIAGNOSTICS_HEADER,
            report::diagnostics_row_csv(0, &report)
        );
        std::fs::write(out.join("diagnose.csv"), csv)?;
    }
    Ok(())
}

fn ospa(args: OspaArgs) -> Result<(), SimError> {
    let x = read_state_set(&args.file_a)?;
    let y = read_state_set(&args.file_b)?;
    let params = OspaParams::new(args.cutoff, args.order)?;
    let d = ospa_distance(&x, &y, &params)?;
    println!("{d}");
    Ok(())
}

fn validate() -> Result<(), SimError> {
    let suites: Vec<(&str, fn() -> Result<(), String>)> = vec![
        ("divergence-decomposition", crate::validate_suites::decomposition),
        ("divergence-bounds", crate::validate_suites::bounds),
        ("yes-object-identity", crate::validate_suites::yes_object_identity),
        ("fusion-map-counts", crate::validate_suites::fusion_map_counts),
        ("fusion-oracle-agreement", crate::validate_suites::fusion_oracle),
        ("moment-preservation", crate::validate_suites::moment_preservation),
        ("ospa-assignment-optimality", crate::validate_suites::ospa_oracle),
        ("simulation-determinism", crate::validate_suites::determinism),
    ];
    let mut failed = 0usize;
    for (name, suite) in suites {
        match suite() {
            Ok(()) => println!("{name}: ok"),
            Err(msg) => {
                failed += 1;
                println!("{name}: FAIL ({msg})");
            }
        }
    }
    if failed > 0 {
        return Err(SimError::Config(format!("{failed} invariant suite(s) failed")));
    }
    Ok(())
}
