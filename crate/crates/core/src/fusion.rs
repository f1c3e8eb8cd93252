//! Distributed GCI fusion of GLMB-family posteriors.
//!
//! The robust pipeline marginalizes each labeled posterior to its
//! unlabeled version, reduces to first-moment-matched multi-Bernoulli
//! form, fuses pairwise over ranked fusion-map hypotheses, and
//! transports the fused parameters back onto the home sensor's labels.
//! The classical label-wise LMB fusion is kept as the baseline it is:
//! labels missing on either side annihilate.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::assignment::{k_best_assignments, Choice, ItemOptions};
use crate::error::{Error, Result};
use crate::gaussian::{log_gci_fuse_gaussian_mixtures, GaussianMixture};
use crate::labeled_rfs::{
    BernoulliComponent, GlmbDensity, GlmbHypothesis, GmbDensity, GmbHypothesis, Label, LmbDensity,
    MbDensity,
};
use crate::math;

/// Guard for log-odds of existence probabilities at one.
const EXISTENCE_CLAMP: f64 = 1.0 - 1e-12;

/// Injective correspondence between two sensors' track index sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FusionMap {
    map: BTreeMap<usize, usize>,
}

impl FusionMap {
    pub fn new(pairs: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        let mut seen = BTreeSet::new();
        for (from, to) in pairs {
            if !seen.insert(to) {
                return Err(Error::InvalidParameter("fusion map must be injective"));
            }
            if map.insert(from, to).is_some() {
                return Err(Error::InvalidParameter("fusion map domain has duplicates"));
            }
        }
        Ok(Self { map })
    }

    pub fn domain(&self) -> impl Iterator<Item = &usize> {
        self.map.keys()
    }

    pub fn get(&self, from: usize) -> Option<usize> {
        self.map.get(&from).copied()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Fusion weights plus the truncation knobs of the fused hypothesis
/// enumeration.
#[derive(Debug, Clone)]
pub struct FusionConfig {
    /// Per-sensor GCI weights; nonnegative, summing to one.
    pub weights: Vec<f64>,
    /// Cap on retained fused hypotheses.
    pub max_hypotheses: usize,
    /// Fused hypotheses below `best * weight_floor` are dropped.
    pub weight_floor: f64,
    /// Pairwise eta values below this are treated as exact zero and
    /// their fusion maps skipped.
    pub eta_floor: f64,
}

impl FusionConfig {
    pub fn uniform(n_sensors: usize) -> Self {
        Self {
            weights: vec![1.0 / n_sensors as f64; n_sensors],
            max_hypotheses: 1000,
            weight_floor: 1e-6,
            eta_floor: 1e-30,
        }
    }

    pub fn with_weights(weights: Vec<f64>) -> Result<Self> {
        let cfg = Self {
            weights,
            max_hypotheses: 1000,
            weight_floor: 1e-6,
            eta_floor: 1e-30,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.weights.is_empty() {
            return Err(Error::InvalidParameter("fusion needs at least one weight"));
        }
        if self.weights.iter().any(|w| *w < 0.0 || !w.is_finite()) {
            return Err(Error::InvalidParameter("fusion weights must be >= 0"));
        }
        let total: f64 = self.weights.iter().sum();
        if math::abs(total - 1.0) > 1e-9 {
            return Err(Error::InvalidParameter("fusion weights must sum to one"));
        }
        if self.max_hypotheses == 0 {
            return Err(Error::InvalidParameter("hypothesis cap must be >= 1"));
        }
        Ok(())
    }

    fn pair(&self, w1: f64, w2: f64) -> Self {
        Self {
            weights: vec![w1, w2],
            max_hypotheses: self.max_hypotheses,
            weight_floor: self.weight_floor,
            eta_floor: self.eta_floor,
        }
    }
}

/// First-moment-matched MB reduction of a GMB density.
pub fn gmb_to_mb_moment_match(g: &GmbDensity) -> Result<MbDensity> {
    g.to_mb_moments()
}

/// All injective maps from `i1` onto `i2`; their number is the falling
/// factorial |i2|! / (|i2| - |i1|)!.
pub fn enumerate_fusion_maps(
    i1: &BTreeSet<usize>,
    i2: &BTreeSet<usize>,
) -> Result<Vec<FusionMap>> {
    if i1.len() > i2.len() {
        return Err(Error::OrientationError {
            left: i1.len(),
            right: i2.len(),
        });
    }
    let mut count = 1usize;
    for k in 0..i1.len() {
        count = count.saturating_mul(i2.len() - k);
        if count > 1_000_000 {
            return Err(Error::ProblemTooLarge("fusion map space"));
        }
    }
    let from: Vec<usize> = i1.iter().copied().collect();
    let to: Vec<usize> = i2.iter().copied().collect();
    let mut out = Vec::with_capacity(count);
    let mut used = vec![false; to.len()];
    let mut current: Vec<(usize, usize)> = Vec::with_capacity(from.len());
    fn rec(
        from: &[usize],
        to: &[usize],
        used: &mut [bool],
        current: &mut Vec<(usize, usize)>,
        out: &mut Vec<FusionMap>,
    ) {
        let depth = current.len();
        if depth == from.len() {
            out.push(FusionMap {
                map: current.iter().copied().collect(),
            });
            return;
        }
        for (b, target) in to.iter().enumerate() {
            if used[b] {
                continue;
            }
            used[b] = true;
            current.push((from[depth], *target));
            rec(from, to, used, current, out);
            current.pop();
            used[b] = false;
        }
    }
    rec(&from, &to, &mut used, &mut current, &mut out);
    Ok(out)
}

struct MbSide {
    indices: Vec<usize>,
    existences: Vec<f64>,
    densities: Vec<GaussianMixture>,
}

impl MbSide {
    fn from_mb(mb: &MbDensity) -> Self {
        let mut indices = Vec::with_capacity(mb.len());
        let mut existences = Vec::with_capacity(mb.len());
        let mut densities = Vec::with_capacity(mb.len());
        for (idx, (r, gm)) in mb.components() {
            indices.push(*idx);
            existences.push(r.clamp(0.0, EXISTENCE_CLAMP));
            densities.push(gm.clone());
        }
        Self {
            indices,
            existences,
            densities,
        }
    }
}

/// GCI fusion of two multi-Bernoulli densities into a fused GMB over
/// the first density's index space, enumerating (index set, fusion
/// map) hypotheses best-first.
pub fn gci_fuse_mb_pair(
    mb1: &MbDensity,
    mb2: &MbDensity,
    cfg: &FusionConfig,
) -> Result<GmbDensity> {
    cfg.validate()?;
    if cfg.weights.len() != 2 {
        return Err(Error::InvalidParameter("pairwise fusion needs exactly two weights"));
    }
    let (mut w1, mut w2) = (cfg.weights[0], cfg.weights[1]);
    if !(w1 > 0.0 && w2 > 0.0) {
        return Err(Error::InvalidParameter("pairwise fusion weights must be positive"));
    }
    let mut side1 = MbSide::from_mb(mb1);
    let mut side2 = MbSide::from_mb(mb2);
    // Fusion maps assume |I1| <= |I2|; swap and invert afterwards so
    // the output always lives on the first argument's index space.
    let swapped = side1.indices.len() > side2.indices.len();
    if swapped {
        core::mem::swap(&mut side1, &mut side2);
        core::mem::swap(&mut w1, &mut w2);
    }

    // Pairwise fused densities and normalizers.
    let n1 = side1.indices.len();
    let n2 = side2.indices.len();
    let log_eta_floor = math::ln(cfg.eta_floor);
    let mut pair_table: Vec<Option<(Arc<GaussianMixture>, f64)>> = Vec::with_capacity(n1 * n2);
    let mut best_log_eta = f64::NEG_INFINITY;
    for a in 0..n1 {
        for b in 0..n2 {
            let (fused, log_eta) =
                log_gci_fuse_gaussian_mixtures(&side1.densities[a], w1, &side2.densities[b], w2)?;
            best_log_eta = best_log_eta.max(log_eta);
            if log_eta < log_eta_floor {
                pair_table.push(None);
            } else {
                pair_table.push(Some((Arc::new(fused), log_eta)));
            }
        }
    }

    // Unmatched side-2 tracks contribute their non-existence factors.
    let base2: f64 = side2
        .existences
        .iter()
        .map(|r| w2 * math::ln(1.0 - r))
        .sum();
    let items: Vec<ItemOptions> = (0..n1)
        .map(|a| {
            let r1 = side1.existences[a];
            let skip = w1 * math::ln(1.0 - r1);
            let log_odds1 = if r1 > 0.0 {
                w1 * math::ln(r1)
            } else {
                f64::NEG_INFINITY
            };
            let columns = (0..n2)
                .filter_map(|b| {
                    let (_, log_eta) = pair_table[a * n2 + b].as_ref()?;
                    let r2 = side2.existences[b];
                    if r2 <= 0.0 {
                        return None;
                    }
                    let score =
                        log_odds1 + w2 * (math::ln(r2) - math::ln(1.0 - r2)) + log_eta;
                    Some((b, score))
                })
                .collect();
            ItemOptions {
                private: vec![skip],
                columns,
            }
        })
        .collect();
    let ranked = k_best_assignments(&items, cfg.max_hypotheses, cfg.weight_floor)?;

    let log_c = math::log_sum_exp(
        &ranked
            .iter()
            .map(|a| a.score + base2)
            .collect::<Vec<f64>>(),
    );
    if !log_c.is_finite() {
        return Err(Error::IncompatibleDensities {
            log_normalizer: log_c,
            best_log_eta,
        });
    }

    let mut hypotheses = Vec::with_capacity(ranked.len());
    for a in &ranked {
        let mut indices = BTreeSet::new();
        let mut densities = BTreeMap::new();
        for (slot, choice) in a.choices.iter().enumerate() {
            if let Choice::Column(b) = choice {
                let (fused, _) = pair_table[slot * n2 + b]
                    .as_ref()
                    .expect("matched pairs come from the table");
                // Under a swap the hypothesis is inverted on the fly:
                // the matched pair is keyed by the original side-1
                // index either way.
                let home_idx = if swapped {
                    side2.indices[*b]
                } else {
                    side1.indices[slot]
                };
                indices.insert(home_idx);
                densities.insert(home_idx, Arc::clone(fused));
            }
        }
        hypotheses.push(GmbHypothesis {
            indices,
            log_weight: a.score + base2 - log_c,
            densities,
        });
    }
    let index_space: BTreeSet<usize> = if swapped {
        side2.indices.iter().copied().collect()
    } else {
        side1.indices.iter().copied().collect()
    };
    GmbDensity::new(index_space, hypotheses)
}

/// GCI fusion of two GMB densities: both are first reduced to their
/// moment-matched MB form, then fused pairwise.
pub fn gci_fuse_gmb_pair(
    g1: &GmbDensity,
    g2: &GmbDensity,
    cfg: &FusionConfig,
) -> Result<GmbDensity> {
    let mb1 = gmb_to_mb_moment_match(g1)?;
    let mb2 = gmb_to_mb_moment_match(g2)?;
    gci_fuse_mb_pair(&mb1, &mb2, cfg)
}

/// Transports a fused GMB onto labels: index `i` becomes `labels[i]`.
/// Pure parameter relabeling; weights and densities are untouched.
pub fn construct_labeled_fused(fused: &GmbDensity, labels: &[Label]) -> Result<GlmbDensity> {
    for idx in fused.index_space() {
        if *idx >= labels.len() {
            return Err(Error::InvalidParameter("fused index outside the label list"));
        }
    }
    let hypotheses = fused
        .hypotheses()
        .iter()
        .map(|h| GlmbHypothesis {
            labels: h.indices.iter().map(|i| labels[*i]).collect(),
            log_weight: h.log_weight,
            densities: h
                .densities
                .iter()
                .map(|(i, gm)| (labels[*i], gm.clone()))
                .collect(),
        })
        .collect();
    GlmbDensity::new(labels.iter().copied().collect(), hypotheses)
}

fn chain_weights(cfg: &FusionConfig, n: usize, home: usize) -> Result<Vec<(usize, f64)>> {
    if cfg.weights.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: cfg.weights.len(),
        });
    }
    if home >= n {
        return Err(Error::InvalidParameter("home sensor index out of range"));
    }
    if n < 2 {
        return Err(Error::InvalidParameter("fusion needs at least two densities"));
    }
    // Sensors with zero weight are exactly ignored by the GCI rule.
    let mut order: Vec<(usize, f64)> = Vec::new();
    order.push((home, cfg.weights[home]));
    for (s, w) in cfg.weights.iter().enumerate() {
        if s != home && *w > 0.0 {
            order.push((s, *w));
        }
    }
    if cfg.weights[home] <= 0.0 {
        return Err(Error::InvalidParameter("home sensor weight must be positive"));
    }
    if order.len() < 2 {
        return Err(Error::InvalidParameter("fusion needs two positive weights"));
    }
    Ok(order)
}

/// Folds marginalized (MB-form) posteriors pairwise, starting from the
/// home density, accumulating the GCI weights so the chain realizes
/// the full weight vector. Returns the fused GMB over the home index
/// space.
pub fn r_gci_fuse_mb_chain(
    marginals: &[MbDensity],
    cfg: &FusionConfig,
    home: usize,
) -> Result<GmbDensity> {
    let order = chain_weights(cfg, marginals.len(), home)?;
    let mut acc_mb = marginals[home].clone();
    let mut acc_w = order[0].1;
    let mut fused: Option<GmbDensity> = None;
    for (s, w) in order.iter().skip(1) {
        let total = acc_w + w;
        let g = gci_fuse_mb_pair(&acc_mb, &marginals[*s], &cfg.pair(acc_w / total, w / total))?;
        acc_mb = gmb_to_mb_moment_match(&g)?;
        acc_w = total;
        fused = Some(g);
    }
    Ok(fused.expect("at least one pairwise fusion"))
}

/// Robust GCI fusion of GLMB posteriors: marginalize to GMB, reduce to
/// moment-matched MB form, fold pairwise starting from the home
/// sensor, relabel with the home sensor's labels.
pub fn r_gci_glmb_fuse(
    locals: &[GlmbDensity],
    cfg: &FusionConfig,
    home: usize,
) -> Result<GlmbDensity> {
    let home_labels = locals[home].sorted_labels();
    let marginals: Vec<MbDensity> = locals
        .iter()
        .map(|g| gmb_to_mb_moment_match(&g.to_gmb()))
        .collect::<Result<_>>()?;
    let fused = r_gci_fuse_mb_chain(&marginals, cfg, home)?;
    construct_labeled_fused(&fused, &home_labels)
}

/// Robust GCI fusion directly from LMB posteriors. The unlabeled
/// version of an LMB is already multi-Bernoulli, so no moment matching
/// is needed on the inputs.
pub fn r_gci_lmb_fuse(
    locals: &[LmbDensity],
    cfg: &FusionConfig,
    home: usize,
) -> Result<GlmbDensity> {
    let home_labels = locals[home].sorted_labels();
    let marginals: Vec<MbDensity> = locals.iter().map(|l| l.to_mb()).collect();
    let fused = r_gci_fuse_mb_chain(&marginals, cfg, home)?;
    construct_labeled_fused(&fused, &home_labels)
}

/// Classical label-wise GCI fusion of two LMB densities.
///
/// Labels present on both sides fuse per-label; a label missing on
/// either side is annihilated (fused existence zero) — precisely the
/// failure mode the robust pipeline avoids.
pub fn classical_gci_lmb_fuse(
    l1: &LmbDensity,
    l2: &LmbDensity,
    cfg: &FusionConfig,
) -> Result<LmbDensity> {
    cfg.validate()?;
    if cfg.weights.len() != 2 {
        return Err(Error::InvalidParameter("pairwise fusion needs exactly two weights"));
    }
    let (w1, w2) = (cfg.weights[0], cfg.weights[1]);
    if !(w1 > 0.0 && w2 > 0.0) {
        return Err(Error::InvalidParameter("pairwise fusion weights must be positive"));
    }
    let mut labels: BTreeSet<Label> = l1.labels().copied().collect();
    labels.extend(l2.labels().copied());
    let mut components = Vec::with_capacity(labels.len());
    for label in labels {
        match (l1.get(&label), l2.get(&label)) {
            (Some(a), Some(b)) => {
                let r1 = a.existence.clamp(0.0, EXISTENCE_CLAMP);
                let r2 = b.existence.clamp(0.0, EXISTENCE_CLAMP);
                if r1 <= 0.0 || r2 <= 0.0 {
                    let density = if r1 > 0.0 { &a.density } else { &b.density };
                    components.push(BernoulliComponent::new(label, 0.0, density.clone())?);
                    continue;
                }
                let (density, log_eta) =
                    log_gci_fuse_gaussian_mixtures(&a.density, w1, &b.density, w2)?;
                let log_num = w1 * math::ln(r1) + w2 * math::ln(r2) + log_eta;
                let log_den = w1 * math::ln(1.0 - r1) + w2 * math::ln(1.0 - r2);
                let r = math::exp(log_num - math::log_sum_exp(&[log_num, log_den]));
                components.push(BernoulliComponent::new(label, r.clamp(0.0, 1.0), density)?);
            }
            (Some(only), None) | (None, Some(only)) => {
                components.push(BernoulliComponent::new(label, 0.0, only.density.clone())?);
            }
            (None, None) => unreachable!("label came from the union"),
        }
    }
    LmbDensity::new(components)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labeled_rfs::MultiObjectDensity;
    use nalgebra::{DMatrix, DVector};

    fn gm1(mean: f64, var: f64) -> GaussianMixture {
        GaussianMixture::single(
            crate::gaussian::Gaussian::new(
                DVector::from_vec(vec![mean]),
                DMatrix::from_vec(1, 1, vec![var]),
            )
            .unwrap(),
        )
    }

    fn mb(entries: &[(usize, f64, f64)]) -> MbDensity {
        MbDensity::new(
            entries
                .iter()
                .map(|(i, r, mean)| (*i, (*r, gm1(*mean, 1.0))))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn fusion_map_count_is_falling_factorial() {
        for n1 in 0..=4usize {
            for n2 in n1..=6usize {
                let i1: BTreeSet<usize> = (0..n1).collect();
                let i2: BTreeSet<usize> = (100..100 + n2).collect();
                let maps = enumerate_fusion_maps(&i1, &i2).unwrap();
                let expected: usize = (0..n1).map(|k| n2 - k).product();
                assert_eq!(maps.len(), expected.max(1).min(expected.max(1)));
                let expected = if n1 == 0 { 1 } else { expected };
                assert_eq!(maps.len(), expected);
            }
        }
    }

    #[test]
    fn fusion_map_orientation_error() {
        let i1: BTreeSet<usize> = (0..3).collect();
        let i2: BTreeSet<usize> = (0..2).collect();
        assert!(matches!(
            enumerate_fusion_maps(&i1, &i2),
            Err(Error::OrientationError { .. })
        ));
    }

    #[test]
    fn fusion_map_rejects_non_injective() {
        assert!(FusionMap::new([(0, 1), (1, 1)]).is_err());
    }

    #[test]
    fn fuse_identical_single_bernoulli() {
        // Two identical single-Bernoulli MBs with identical Gaussian:
        // fused r stays r (eta = 1, two hypotheses 0.8 / 0.2).
        let a = mb(&[(0, 0.8, 0.0)]);
        let b = mb(&[(0, 0.8, 0.0)]);
        let fused = gci_fuse_mb_pair(&a, &b, &FusionConfig::uniform(2)).unwrap();
        let matched = fused.to_mb_moments().unwrap();
        assert!((matched.get(0).unwrap().0 - 0.8).abs() < 1e-9);
        assert!((fused.no_object_probability() - 0.2).abs() < 1e-9);
    }

    #[test]
    fn fuse_separated_mbs_is_identity_on_r() {
        let a = mb(&[(0, 0.9, 0.0), (1, 0.6, 200.0)]);
        let b = mb(&[(0, 0.9, 0.0), (1, 0.6, 200.0)]);
        let fused = gci_fuse_mb_pair(&a, &b, &FusionConfig::uniform(2)).unwrap();
        let matched = fused.to_mb_moments().unwrap();
        assert!((matched.get(0).unwrap().0 - 0.9).abs() < 1e-6);
        assert!((matched.get(1).unwrap().0 - 0.6).abs() < 1e-6);
        // Densities unchanged (Gaussian idempotence).
        let g = &matched.get(0).unwrap().1.components()[0].1;
        assert!((g.mean()[0] - 0.0).abs() < 1e-9);
        assert!((g.cov()[(0, 0)] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn fuse_empty_home_side_keeps_only_empty_hypothesis() {
        let a = MbDensity::empty();
        let b = mb(&[(0, 0.7, 0.0)]);
        let fused = gci_fuse_mb_pair(&a, &b, &FusionConfig::uniform(2)).unwrap();
        assert_eq!(fused.hypotheses().len(), 1);
        assert!(fused.hypotheses()[0].indices.is_empty());
        assert!((fused.no_object_probability() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fused_weights_are_normalized_after_truncation() {
        let a = mb(&[(0, 0.5, 0.0), (1, 0.5, 30.0), (2, 0.5, 60.0)]);
        let b = mb(&[(0, 0.5, 0.0), (1, 0.5, 30.0), (2, 0.5, 60.0)]);
        let mut cfg = FusionConfig::uniform(2);
        cfg.max_hypotheses = 5;
        let fused = gci_fuse_mb_pair(&a, &b, &cfg).unwrap();
        let total: f64 = (0..fused.hypotheses().len()).map(|i| fused.weight(i)).sum();
        assert!((total - 1.0).abs() < 1e-9);
        assert_eq!(fused.hypotheses().len(), 5);
    }

    #[test]
    fn orientation_swap_matches_unswapped_result() {
        // |I1| > |I2| forces the internal swap; fusing the mirrored
        // problem directly must agree.
        let big = mb(&[(0, 0.8, 0.0), (1, 0.6, 50.0), (2, 0.4, 100.0)]);
        let small = mb(&[(0, 0.7, 0.1), (1, 0.5, 50.2)]);
        let cfg = FusionConfig::uniform(2);
        let fused = gci_fuse_mb_pair(&big, &small, &cfg).unwrap();
        assert_eq!(
            fused.index_space().iter().copied().collect::<Vec<_>>(),
            vec![0, 1, 2]
        );
        // r of track 2 of `big` survives (nothing in `small` matches
        // index 2 strongly, but the skip branch keeps it alive).
        let matched = fused.to_mb_moments().unwrap();
        assert!(matched.get(0).is_some());
        // Mirror: weights swapped, sides swapped.
        let mirrored = gci_fuse_mb_pair(
            &small,
            &big,
            &FusionConfig {
                weights: vec![0.5, 0.5],
                ..FusionConfig::uniform(2)
            },
        )
        .unwrap();
        let m2 = mirrored.to_mb_moments().unwrap();
        // Cardinality distributions agree: same joint structure.
        let c1 = fused.cardinality_distribution();
        let c2 = mirrored.cardinality_distribution();
        for (p, q) in c1.iter().zip(c2.iter()) {
            assert!((p - q).abs() < 1e-9);
        }
        let _ = m2;
    }

    #[test]
    fn labeled_reconstruction_transports_weights() {
        let a = mb(&[(0, 0.8, 0.0), (1, 0.5, 60.0)]);
        let b = mb(&[(0, 0.75, 0.2), (1, 0.55, 59.5)]);
        let fused = gci_fuse_mb_pair(&a, &b, &FusionConfig::uniform(2)).unwrap();
        let labels = vec![Label::new(3, 0), Label::new(5, 1)];
        let glmb = construct_labeled_fused(&fused, &labels).unwrap();
        let cg = glmb.cardinality_distribution();
        let cf = fused.cardinality_distribution();
        assert_eq!(cg.len(), cf.len());
        for (p, q) in cg.iter().zip(cf.iter()) {
            assert!((p - q).abs() < 1e-12);
        }
        // PHD transported exactly: compare pointwise on a small grid.
        let phd_g = glmb.to_gmb().phd().unwrap();
        let phd_f = fused.phd().unwrap();
        for i in -5..=5 {
            let x = DVector::from_vec(vec![i as f64 * 10.0]);
            assert!((phd_g.eval(&x).unwrap() - phd_f.eval(&x).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn labeled_reconstruction_of_empty_fused_density() {
        let fused = gci_fuse_mb_pair(
            &MbDensity::empty(),
            &MbDensity::empty(),
            &FusionConfig::uniform(2),
        )
        .unwrap();
        let glmb = construct_labeled_fused(&fused, &[]).unwrap();
        assert!((glmb.no_object_probability() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn classical_fusion_is_idempotent_on_consistent_inputs() {
        let lmb = LmbDensity::new(vec![
            BernoulliComponent::new(Label::new(1, 1), 0.7, gm1(0.0, 2.0)).unwrap(),
            BernoulliComponent::new(Label::new(2, 1), 0.4, gm1(80.0, 2.0)).unwrap(),
        ])
        .unwrap();
        let fused = classical_gci_lmb_fuse(&lmb, &lmb, &FusionConfig::uniform(2)).unwrap();
        for c in lmb.components() {
            let f = fused.get(&c.label).unwrap();
            assert!((f.existence - c.existence).abs() < 1e-9);
            let g = &f.density.components()[0].1;
            let g0 = &c.density.components()[0].1;
            assert!((g.mean()[0] - g0.mean()[0]).abs() < 1e-9);
            assert!((g.cov()[(0, 0)] - g0.cov()[(0, 0)]).abs() < 1e-9);
        }
    }

    #[test]
    fn classical_fusion_annihilates_one_sided_labels() {
        let l1 = LmbDensity::new(vec![
            BernoulliComponent::new(Label::new(6, 1), 0.9, gm1(0.0, 1.0)).unwrap(),
        ])
        .unwrap();
        let l2 = LmbDensity::new(vec![
            BernoulliComponent::new(Label::new(4, 1), 0.9, gm1(0.0, 1.0)).unwrap(),
        ])
        .unwrap();
        let fused = classical_gci_lmb_fuse(&l1, &l2, &FusionConfig::uniform(2)).unwrap();
        assert_eq!(fused.get(&Label::new(6, 1)).unwrap().existence, 0.0);
        assert_eq!(fused.get(&Label::new(4, 1)).unwrap().existence, 0.0);
        assert!((fused.no_object_probability() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn robust_fusion_of_identical_locals_preserves_yes_object() {
        let lmb = LmbDensity::new(vec![
            BernoulliComponent::new(Label::new(1, 1), 0.9, gm1(0.0, 1.0)).unwrap(),
            BernoulliComponent::new(Label::new(2, 1), 0.7, gm1(100.0, 1.0)).unwrap(),
        ])
        .unwrap();
        let fused =
            r_gci_lmb_fuse(&[lmb.clone(), lmb.clone()], &FusionConfig::uniform(2), 0).unwrap();
        let p_yes = 1.0 - fused.no_object_probability();
        let expected = 1.0 - lmb.no_object_probability();
        assert!((p_yes - expected).abs() < 1e-6);
    }

    #[test]
    fn robust_fusion_survives_disjoint_labels() {
        // The Example-1 situation: same object, different birth-time
        // labels after pruning.
        let l1 = LmbDensity::new(vec![
            BernoulliComponent::new(Label::new(6, 1), 0.95, gm1(10.0, 4.0)).unwrap(),
        ])
        .unwrap();
        let l2 = LmbDensity::new(vec![
            BernoulliComponent::new(Label::new(4, 1), 0.93, gm1(10.5, 5.0)).unwrap(),
        ])
        .unwrap();
        let cfg = FusionConfig::uniform(2);
        let robust = r_gci_lmb_fuse(&[l1.clone(), l2.clone()], &cfg, 0).unwrap();
        assert!(1.0 - robust.no_object_probability() > 0.5);
        // Labels come from the home sensor.
        assert!(robust.label_space().contains(&Label::new(6, 1)));
        let classical = classical_gci_lmb_fuse(&l1, &l2, &cfg).unwrap();
        assert!(1.0 - classical.no_object_probability() < 1e-6);
    }

    #[test]
    fn robust_fusion_accepts_glmb_inputs() {
        // The GLMB entry point agrees with the LMB entry point when the
        // inputs are LMB-shaped.
        let lmb = LmbDensity::new(vec![
            BernoulliComponent::new(Label::new(1, 1), 0.9, gm1(0.0, 1.0)).unwrap(),
            BernoulliComponent::new(Label::new(2, 1), 0.6, gm1(120.0, 1.0)).unwrap(),
        ])
        .unwrap();
        let glmb = crate::labeled_rfs::GlmbDensity::from_lmb_exhaustive(&lmb).unwrap();
        let cfg = FusionConfig::uniform(2);
        let via_glmb = r_gci_glmb_fuse(&[glmb.clone(), glmb.clone()], &cfg, 0).unwrap();
        let via_lmb = r_gci_lmb_fuse(&[lmb.clone(), lmb.clone()], &cfg, 0).unwrap();
        let a = via_glmb.to_lmb().unwrap();
        let b = via_lmb.to_lmb().unwrap();
        for (ca, cb) in a.components().zip(b.components()) {
            assert_eq!(ca.label, cb.label);
            assert!((ca.existence - cb.existence).abs() < 1e-9);
        }
        let p_yes = 1.0 - via_glmb.no_object_probability();
        assert!((p_yes - (1.0 - lmb.no_object_probability())).abs() < 1e-6);
    }

    #[test]
    fn example1_disjoint_hypotheses_after_pruning() {
        // Each sensor keeps exactly one surviving label-set hypothesis,
        // with different birth-time labels: classical fusion infers no
        // object, the robust pipeline keeps it.
        use crate::labeled_rfs::{GlmbDensity, GlmbHypothesis};
        let mk = |label: Label, mean: f64| {
            let hyp = GlmbHypothesis {
                labels: [label].into_iter().collect(),
                log_weight: 0.0,
                densities: [(label, alloc::sync::Arc::new(gm1(mean, 4.0)))]
                    .into_iter()
                    .collect(),
            };
            GlmbDensity::new([label].into_iter().collect(), vec![hyp]).unwrap()
        };
        let g1d = mk(Label::new(6, 1), 10.0);
        let g2d = mk(Label::new(4, 1), 10.6);
        let cfg = FusionConfig::uniform(2);
        let robust = r_gci_glmb_fuse(&[g1d.clone(), g2d.clone()], &cfg, 0).unwrap();
        assert!(1.0 - robust.no_object_probability() > 0.5);
        let classical =
            classical_gci_lmb_fuse(&g1d.to_lmb().unwrap(), &g2d.to_lmb().unwrap(), &cfg).unwrap();
        assert!(1.0 - classical.no_object_probability() < 1e-9);
    }

    #[test]
    fn three_sensor_chain_order_is_irrelevant_under_separation() {
        let mk = |offsets: [f64; 2]| {
            LmbDensity::new(vec![
                BernoulliComponent::new(Label::new(1, 1), 0.9, gm1(offsets[0], 2.0)).unwrap(),
                BernoulliComponent::new(Label::new(2, 1), 0.8, gm1(150.0 + offsets[1], 2.0))
                    .unwrap(),
            ])
            .unwrap()
        };
        let locals = [mk([0.0, 0.0]), mk([0.4, -0.3]), mk([-0.2, 0.5])];
        let cfg = FusionConfig::uniform(3);
        let fused_a = r_gci_lmb_fuse(&locals, &cfg, 0).unwrap();
        // Permute the neighbour order by permuting the list (home
        // stays sensor 0's density).
        let permuted = [locals[0].clone(), locals[2].clone(), locals[1].clone()];
        let fused_b = r_gci_lmb_fuse(&permuted, &cfg, 0).unwrap();
        let lmb_a = fused_a.to_lmb().unwrap();
        let lmb_b = fused_b.to_lmb().unwrap();
        for (ca, cb) in lmb_a.components().zip(lmb_b.components()) {
            assert_eq!(ca.label, cb.label);
            assert!(
                (ca.existence - cb.existence).abs() < 1e-6,
                "r mismatch: {} vs {}",
                ca.existence,
                cb.existence
            );
        }
    }

    #[test]
    fn monotone_in_input_existence() {
        let cfg = FusionConfig::uniform(2);
        let mut last = 0.0;
        for i in 1..10 {
            let r = i as f64 / 10.0;
            let a = mb(&[(0, r, 0.0)]);
            let b = mb(&[(0, 0.6, 0.0)]);
            let fused = gci_fuse_mb_pair(&a, &b, &cfg).unwrap();
            let rf = fused.to_mb_moments().unwrap().get(0).map(|c| c.0).unwrap_or(0.0);
            assert!(rf > last, "fused r not increasing at r1={r}");
            last = rf;
        }
    }
}
