//! Labeled and unlabeled multi-object density types and the structural
//! transformations between them.
//!
//! * [`LmbDensity`] — labeled multi-Bernoulli: one `(r, p)` pair per
//!   label.
//! * [`GlmbDensity`] — generalized labeled multi-Bernoulli: a mixture
//!   over (label set, component) hypotheses with per-label densities.
//! * [`GmbDensity`] — the unlabeled marginal family of GLMB densities:
//!   hypotheses over opaque track indices.
//! * [`MbDensity`] — unlabeled multi-Bernoulli.
//!
//! Marginalizing a GLMB over labels transports its parameters into a
//! GMB; marginalizing an LMB gives an MB; both are lossless parameter
//! relabelings. The LMB approximation of a GLMB preserves the
//! first-order moment.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::gaussian::{Gaussian, GaussianMixture};
use crate::math;

/// Existence floor below which a marginalized track is dropped
/// (guards the division when renormalizing its mixed density).
pub const EXISTENCE_FLOOR: f64 = 1e-12;

/// Track label: birth time plus a per-step index, ordered
/// lexicographically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label {
    pub time: u32,
    pub index: u32,
}

impl Label {
    pub fn new(time: u32, index: u32) -> Self {
        Self { time, index }
    }
}

/// One labeled Bernoulli track: existence probability and a normalized
/// spatial density.
#[derive(Debug, Clone, PartialEq)]
pub struct BernoulliComponent {
    pub label: Label,
    pub existence: f64,
    pub density: GaussianMixture,
}

impl BernoulliComponent {
    pub fn new(label: Label, existence: f64, density: GaussianMixture) -> Result<Self> {
        if !(0.0..=1.0).contains(&existence) {
            return Err(Error::InvalidParameter("existence must be in [0, 1]"));
        }
        // Keep already-normalized densities bit-identical.
        let density = if density.is_normalized(1e-9) {
            density
        } else {
            density.normalize()?
        };
        Ok(Self {
            label,
            existence,
            density,
        })
    }
}

/// Labeled multi-Bernoulli density, keyed by label.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LmbDensity {
    components: BTreeMap<Label, BernoulliComponent>,
}

impl LmbDensity {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(components: Vec<BernoulliComponent>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for c in components {
            let label = c.label;
            if map.insert(label, c).is_some() {
                return Err(Error::LabelCollision {
                    time: label.time,
                    index: label.index,
                });
            }
        }
        Ok(Self { components: map })
    }

    pub fn components(&self) -> impl Iterator<Item = &BernoulliComponent> {
        self.components.values()
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn get(&self, label: &Label) -> Option<&BernoulliComponent> {
        self.components.get(label)
    }

    pub fn labels(&self) -> impl Iterator<Item = &Label> {
        self.components.keys()
    }

    /// Drops components with existence below `gamma_t`.
    pub fn truncate(&self, gamma_t: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&gamma_t) {
            return Err(Error::InvalidParameter("truncation threshold must be in [0, 1)"));
        }
        Ok(Self {
            components: self
                .components
                .iter()
                .filter(|(_, c)| c.existence >= gamma_t)
                .map(|(l, c)| (*l, c.clone()))
                .collect(),
        })
    }

    /// Drops the labels and returns the multi-Bernoulli with the same
    /// parameters (lossless: the unlabeled marginal of an LMB).
    pub fn to_mb(&self) -> MbDensity {
        MbDensity {
            components: self
                .components
                .values()
                .enumerate()
                .map(|(i, c)| (i, (c.existence, c.density.clone())))
                .collect(),
        }
    }

    /// Labels in sorted order; positions match [`LmbDensity::to_mb`]
    /// indices.
    pub fn sorted_labels(&self) -> Vec<Label> {
        self.components.keys().copied().collect()
    }
}

/// One GLMB hypothesis: a label set, its weight and one density per
/// label in the set.
#[derive(Debug, Clone, PartialEq)]
pub struct GlmbHypothesis {
    pub labels: BTreeSet<Label>,
    pub log_weight: f64,
    /// Shared per-label densities: hypotheses typically reference the
    /// same mixtures, so they are reference counted.
    pub densities: BTreeMap<Label, Arc<GaussianMixture>>,
}

/// Generalized labeled multi-Bernoulli density. Hypothesis weights are
/// kept in log domain and normalized at construction; the index of a
/// hypothesis in the list is its discrete component tag.
#[derive(Debug, Clone, PartialEq)]
pub struct GlmbDensity {
    label_space: BTreeSet<Label>,
    hypotheses: Vec<GlmbHypothesis>,
}

impl GlmbDensity {
    pub fn new(label_space: BTreeSet<Label>, mut hypotheses: Vec<GlmbHypothesis>) -> Result<Self> {
        if hypotheses.is_empty() {
            return Err(Error::InvalidParameter("a GLMB needs at least one hypothesis"));
        }
        for h in &hypotheses {
            if !h.labels.is_subset(&label_space) {
                return Err(Error::InvalidParameter("hypothesis labels outside label space"));
            }
            for l in &h.labels {
                if !h.densities.contains_key(l) {
                    return Err(Error::InvalidParameter("hypothesis misses a label density"));
                }
            }
        }
        let log_weights: Vec<f64> = hypotheses.iter().map(|h| h.log_weight).collect();
        let norm = math::log_sum_exp(&log_weights);
        if !norm.is_finite() {
            return Err(Error::DegenerateMixture);
        }
        for h in &mut hypotheses {
            h.log_weight -= norm;
            for gm in h.densities.values_mut() {
                if !gm.is_normalized(1e-12) {
                    *gm = Arc::new(gm.normalize()?);
                }
            }
        }
        Ok(Self {
            label_space,
            hypotheses,
        })
    }

    /// GLMB with probability one on the empty label set.
    pub fn empty_density() -> Self {
        Self {
            label_space: BTreeSet::new(),
            hypotheses: vec![GlmbHypothesis {
                labels: BTreeSet::new(),
                log_weight: 0.0,
                densities: BTreeMap::new(),
            }],
        }
    }

    /// An LMB expressed as a single-track-family GLMB is exponential in
    /// the number of labels, so this is only used for small densities
    /// (serialization fixtures, oracle checks).
    pub fn from_lmb_exhaustive(lmb: &LmbDensity) -> Result<Self> {
        let labels = lmb.sorted_labels();
        if labels.len() > 20 {
            return Err(Error::ProblemTooLarge("LMB has too many labels to expand"));
        }
        let mut hypotheses = Vec::new();
        for mask in 0u32..(1u32 << labels.len()) {
            let mut set = BTreeSet::new();
            let mut densities = BTreeMap::new();
            let mut log_w = 0.0;
            for (i, label) in labels.iter().enumerate() {
                let c = lmb.get(label).expect("label present");
                if mask & (1 << i) != 0 {
                    if c.existence <= 0.0 {
                        log_w = f64::NEG_INFINITY;
                        break;
                    }
                    log_w += math::ln(c.existence);
                    set.insert(*label);
                    densities.insert(*label, Arc::new(c.density.clone()));
                } else {
                    if c.existence >= 1.0 {
                        log_w = f64::NEG_INFINITY;
                        break;
                    }
                    log_w += math::ln(1.0 - c.existence);
                }
            }
            if log_w > f64::NEG_INFINITY {
                hypotheses.push(GlmbHypothesis {
                    labels: set,
                    log_weight: log_w,
                    densities,
                });
            }
        }
        Self::new(labels.into_iter().collect(), hypotheses)
    }

    pub fn label_space(&self) -> &BTreeSet<Label> {
        &self.label_space
    }

    pub fn hypotheses(&self) -> &[GlmbHypothesis] {
        &self.hypotheses
    }

    /// Linear-domain weight of hypothesis `i`.
    pub fn weight(&self, i: usize) -> f64 {
        math::exp(self.hypotheses[i].log_weight)
    }

    /// Marginalizes over labels: transports the parameters into a GMB
    /// over index space `0..n`, where index `i` stands for the `i`-th
    /// label of [`GlmbDensity::sorted_labels`]. Weight-preserving.
    pub fn to_gmb(&self) -> GmbDensity {
        let labels = self.sorted_labels();
        let pos: BTreeMap<Label, usize> = labels.iter().enumerate().map(|(i, l)| (*l, i)).collect();
        let hypotheses = self
            .hypotheses
            .iter()
            .map(|h| GmbHypothesis {
                indices: h.labels.iter().map(|l| pos[l]).collect(),
                log_weight: h.log_weight,
                densities: h.densities.iter().map(|(l, gm)| (pos[l], gm.clone())).collect(),
            })
            .collect();
        GmbDensity {
            index_space: (0..labels.len()).collect(),
            hypotheses,
        }
    }

    pub fn sorted_labels(&self) -> Vec<Label> {
        self.label_space.iter().copied().collect()
    }

    /// First-moment-preserving LMB approximation: per label, the
    /// existence is the summed weight of hypotheses containing it and
    /// the density the matching weight-mixed per-label density. Labels
    /// with existence below 1e-12 are dropped.
    pub fn to_lmb(&self) -> Result<LmbDensity> {
        let mut components = Vec::new();
        for label in &self.label_space {
            let mut r = 0.0;
            // Weight per distinct shared mixture (insertion order, so
            // the float accumulation stays deterministic), then expand
            // each mixture once.
            let mut by_mixture: Vec<(f64, Arc<GaussianMixture>)> = Vec::new();
            for h in &self.hypotheses {
                if !h.labels.contains(label) {
                    continue;
                }
                let w = math::exp(h.log_weight);
                r += w;
                let gm = &h.densities[label];
                match by_mixture.iter_mut().find(|(_, m)| Arc::ptr_eq(m, gm)) {
                    Some((acc, _)) => *acc += w,
                    None => by_mixture.push((w, Arc::clone(gm))),
                }
            }
            if r < EXISTENCE_FLOOR {
                continue;
            }
            let mut parts: Vec<(f64, Gaussian)> = Vec::new();
            for (w, gm) in &by_mixture {
                for (cw, g) in gm.components() {
                    parts.push((w * cw, g.clone()));
                }
            }
            let density = GaussianMixture::new(parts)?.coalesce_duplicates().normalize()?;
            components.push(BernoulliComponent::new(*label, r.min(1.0), density)?);
        }
        LmbDensity::new(components)
    }
}

/// One GMB hypothesis: an index set, its weight, and one density per
/// index in the set.
#[derive(Debug, Clone, PartialEq)]
pub struct GmbHypothesis {
    pub indices: BTreeSet<usize>,
    pub log_weight: f64,
    /// Shared per-index densities (see [`GlmbHypothesis::densities`]).
    pub densities: BTreeMap<usize, Arc<GaussianMixture>>,
}

/// Generalized multi-Bernoulli density over an opaque index space; the
/// unlabeled marginal family of the GLMB class.
#[derive(Debug, Clone, PartialEq)]
pub struct GmbDensity {
    index_space: BTreeSet<usize>,
    hypotheses: Vec<GmbHypothesis>,
}

impl GmbDensity {
    pub fn new(index_space: BTreeSet<usize>, mut hypotheses: Vec<GmbHypothesis>) -> Result<Self> {
        if hypotheses.is_empty() {
            return Err(Error::InvalidParameter("a GMB needs at least one hypothesis"));
        }
        for h in &hypotheses {
            if !h.indices.is_subset(&index_space) {
                return Err(Error::InvalidParameter("hypothesis indices outside index space"));
            }
            for i in &h.indices {
                if !h.densities.contains_key(i) {
                    return Err(Error::InvalidParameter("hypothesis misses an index density"));
                }
            }
        }
        let log_weights: Vec<f64> = hypotheses.iter().map(|h| h.log_weight).collect();
        let norm = math::log_sum_exp(&log_weights);
        if !norm.is_finite() {
            return Err(Error::DegenerateMixture);
        }
        for h in &mut hypotheses {
            h.log_weight -= norm;
            for gm in h.densities.values_mut() {
                if !gm.is_normalized(1e-12) {
                    *gm = Arc::new(gm.normalize()?);
                }
            }
        }
        Ok(Self {
            index_space,
            hypotheses,
        })
    }

    pub fn index_space(&self) -> &BTreeSet<usize> {
        &self.index_space
    }

    pub fn hypotheses(&self) -> &[GmbHypothesis] {
        &self.hypotheses
    }

    pub fn weight(&self, i: usize) -> f64 {
        math::exp(self.hypotheses[i].log_weight)
    }

    /// First-order moment v(x) = sum_i r_i p_i(x).
    pub fn phd(&self) -> Result<Intensity> {
        Ok(self.to_mb_moments()?.phd())
    }

    /// Per-index first-moment parameters (the reduction behind the MB
    /// approximation): r_i is the summed weight of hypotheses
    /// containing i, p_i the matching normalized mixture. Indices with
    /// existence below 1e-12 are dropped.
    pub fn to_mb_moments(&self) -> Result<MbDensity> {
        let mut components = BTreeMap::new();
        for idx in &self.index_space {
            let mut r = 0.0;
            let mut by_mixture: Vec<(f64, Arc<GaussianMixture>)> = Vec::new();
            for h in &self.hypotheses {
                if !h.indices.contains(idx) {
                    continue;
                }
                let w = math::exp(h.log_weight);
                r += w;
                let gm = &h.densities[idx];
                match by_mixture.iter_mut().find(|(_, m)| Arc::ptr_eq(m, gm)) {
                    Some((acc, _)) => *acc += w,
                    None => by_mixture.push((w, Arc::clone(gm))),
                }
            }
            if r < EXISTENCE_FLOOR {
                continue;
            }
            let mut parts: Vec<(f64, Gaussian)> = Vec::new();
            for (w, gm) in &by_mixture {
                for (cw, g) in gm.components() {
                    parts.push((w * cw, g.clone()));
                }
            }
            let density = GaussianMixture::new(parts)?.coalesce_duplicates().normalize()?;
            components.insert(*idx, (r.min(1.0), density));
        }
        Ok(MbDensity { components })
    }
}

/// Unlabeled multi-Bernoulli density keyed by opaque index.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MbDensity {
    components: BTreeMap<usize, (f64, GaussianMixture)>,
}

impl MbDensity {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(components: BTreeMap<usize, (f64, GaussianMixture)>) -> Result<Self> {
        for (r, gm) in components.values() {
            if !(0.0..=1.0).contains(r) {
                return Err(Error::InvalidParameter("existence must be in [0, 1]"));
            }
            if !gm.is_normalized(1e-6) {
                return Err(Error::InvalidParameter("MB densities must be normalized"));
            }
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> impl Iterator<Item = (&usize, &(f64, GaussianMixture))> {
        self.components.iter()
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn get(&self, idx: usize) -> Option<&(f64, GaussianMixture)> {
        self.components.get(&idx)
    }

    pub fn phd(&self) -> Intensity {
        let mut terms = Vec::new();
        for (r, gm) in self.components.values() {
            for (w, g) in gm.components() {
                terms.push((r * w, g.clone()));
            }
        }
        Intensity { terms }
    }
}

/// An intensity (PHD) function: an unnormalized, possibly empty sum of
/// weighted Gaussians. Its integral is the expected cardinality.
#[derive(Debug, Clone, PartialEq)]
pub struct Intensity {
    pub terms: Vec<(f64, Gaussian)>,
}

impl Intensity {
    pub fn eval(&self, x: &DVector<f64>) -> Result<f64> {
        let mut sum = 0.0;
        for (w, g) in &self.terms {
            sum += w * g.pdf(x)?;
        }
        Ok(sum)
    }

    pub fn mass(&self) -> f64 {
        self.terms.iter().map(|(w, _)| w).sum()
    }
}

/// Cardinality distribution and no-object probability, shared by every
/// density family in this module.
pub trait MultiObjectDensity {
    /// Probabilities of n = 0..=n_max objects; sums to one.
    fn cardinality_distribution(&self) -> Vec<f64>;

    /// pi(empty set): probability that no object exists.
    fn no_object_probability(&self) -> f64 {
        self.cardinality_distribution()[0]
    }

    fn expected_cardinality(&self) -> f64 {
        self.cardinality_distribution()
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum()
    }
}

fn bernoulli_cardinality(existences: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut dist = vec![1.0];
    for r in existences {
        let mut next = vec![0.0; dist.len() + 1];
        for (n, p) in dist.iter().enumerate() {
            next[n] += p * (1.0 - r);
            next[n + 1] += p * r;
        }
        dist = next;
    }
    dist
}

impl MultiObjectDensity for LmbDensity {
    fn cardinality_distribution(&self) -> Vec<f64> {
        bernoulli_cardinality(self.components.values().map(|c| c.existence))
    }

    fn no_object_probability(&self) -> f64 {
        self.components.values().map(|c| 1.0 - c.existence).product()
    }
}

impl MultiObjectDensity for MbDensity {
    fn cardinality_distribution(&self) -> Vec<f64> {
        bernoulli_cardinality(self.components.values().map(|(r, _)| *r))
    }

    fn no_object_probability(&self) -> f64 {
        self.components.values().map(|(r, _)| 1.0 - r).product()
    }
}

fn hypothesis_cardinality(sizes_weights: impl Iterator<Item = (usize, f64)>) -> Vec<f64> {
    let mut dist = vec![0.0];
    for (n, w) in sizes_weights {
        if n >= dist.len() {
            dist.resize(n + 1, 0.0);
        }
        dist[n] += w;
    }
    dist
}

impl MultiObjectDensity for GlmbDensity {
    fn cardinality_distribution(&self) -> Vec<f64> {
        hypothesis_cardinality(
            self.hypotheses
                .iter()
                .map(|h| (h.labels.len(), math::exp(h.log_weight))),
        )
    }
}

impl MultiObjectDensity for GmbDensity {
    fn cardinality_distribution(&self) -> Vec<f64> {
        hypothesis_cardinality(
            self.hypotheses
                .iter()
                .map(|h| (h.indices.len(), math::exp(h.log_weight))),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn raw_gm(mean: f64, var: f64) -> GaussianMixture {
        GaussianMixture::single(
            Gaussian::new(DVector::from_vec(vec![mean]), DMatrix::from_vec(1, 1, vec![var]))
                .unwrap(),
        )
    }

    fn gm(mean: f64, var: f64) -> Arc<GaussianMixture> {
        Arc::new(raw_gm(mean, var))
    }

    fn lmb2(r1: f64, r2: f64) -> LmbDensity {
        LmbDensity::new(vec![
            BernoulliComponent::new(Label::new(1, 1), r1, raw_gm(0.0, 1.0)).unwrap(),
            BernoulliComponent::new(Label::new(2, 1), r2, raw_gm(5.0, 1.0)).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn rejects_duplicate_labels() {
        let out = LmbDensity::new(vec![
            BernoulliComponent::new(Label::new(1, 1), 0.5, raw_gm(0.0, 1.0)).unwrap(),
            BernoulliComponent::new(Label::new(1, 1), 0.4, raw_gm(1.0, 1.0)).unwrap(),
        ]);
        assert!(matches!(out, Err(Error::LabelCollision { .. })));
    }

    #[test]
    fn lmb_to_mb_is_lossless() {
        let lmb = lmb2(0.5, 0.25);
        let mb = lmb.to_mb();
        assert_eq!(mb.len(), 2);
        assert_eq!(mb.get(0).unwrap().0, 0.5);
        assert_eq!(mb.get(1).unwrap().0, 0.25);
        assert_eq!(
            lmb.cardinality_distribution(),
            mb.cardinality_distribution()
        );
    }

    #[test]
    fn empty_lmb_has_sure_empty_set() {
        let lmb = LmbDensity::empty();
        assert_eq!(lmb.no_object_probability(), 1.0);
        assert_eq!(lmb.cardinality_distribution(), vec![1.0]);
        assert_eq!(lmb.to_mb().cardinality_distribution(), vec![1.0]);
    }

    #[test]
    fn bernoulli_convolution() {
        let lmb = lmb2(0.5, 0.5);
        let dist = lmb.cardinality_distribution();
        assert!((dist[0] - 0.25).abs() < 1e-15);
        assert!((dist[1] - 0.5).abs() < 1e-15);
        assert!((dist[2] - 0.25).abs() < 1e-15);
        assert!((lmb.no_object_probability() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn truncate_drops_small_existences() {
        let lmb = lmb2(1e-5, 0.5);
        let out = lmb.truncate(1e-4).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(lmb.truncate(0.0).unwrap().len(), 2);
    }

    #[test]
    fn glmb_single_hypothesis_to_gmb() {
        let label = Label::new(3, 1);
        let hyp = GlmbHypothesis {
            labels: [label].into_iter().collect(),
            log_weight: 0.0,
            densities: [(label, gm(1.0, 2.0))].into_iter().collect(),
        };
        let glmb = GlmbDensity::new([label].into_iter().collect(), vec![hyp]).unwrap();
        let gmb = glmb.to_gmb();
        assert_eq!(gmb.hypotheses().len(), 1);
        assert_eq!(gmb.hypotheses()[0].indices.len(), 1);
        assert!((gmb.weight(0) - 1.0).abs() < 1e-15);
        assert_eq!(
            glmb.cardinality_distribution(),
            gmb.cardinality_distribution()
        );
    }

    #[test]
    fn empty_glmb_to_gmb() {
        let glmb = GlmbDensity::empty_density();
        let gmb = glmb.to_gmb();
        assert_eq!(gmb.no_object_probability(), 1.0);
    }

    #[test]
    fn glmb_weight_read_through() {
        let label = Label::new(3, 1);
        let occupied = GlmbHypothesis {
            labels: [label].into_iter().collect(),
            log_weight: math::ln(0.9),
            densities: [(label, gm(1.0, 2.0))].into_iter().collect(),
        };
        let empty = GlmbHypothesis {
            labels: BTreeSet::new(),
            log_weight: math::ln(0.1),
            densities: BTreeMap::new(),
        };
        let glmb =
            GlmbDensity::new([label].into_iter().collect(), vec![occupied, empty]).unwrap();
        assert!((glmb.no_object_probability() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn glmb_to_lmb_on_lmb_shape_is_fixed_point() {
        let lmb = lmb2(0.3, 0.8);
        let glmb = GlmbDensity::from_lmb_exhaustive(&lmb).unwrap();
        let back = glmb.to_lmb().unwrap();
        for c in lmb.components() {
            let rc = back.get(&c.label).unwrap();
            assert!((rc.existence - c.existence).abs() < 1e-12);
            assert!(
                (rc.density.components()[0].1.mean()[0] - c.density.components()[0].1.mean()[0])
                    .abs()
                    < 1e-12
            );
        }
    }

    #[test]
    fn glmb_to_lmb_definition_arithmetic() {
        let label = Label::new(2, 1);
        let occupied = GlmbHypothesis {
            labels: [label].into_iter().collect(),
            log_weight: math::ln(0.3),
            densities: [(label, gm(0.0, 1.0))].into_iter().collect(),
        };
        let empty = GlmbHypothesis {
            labels: BTreeSet::new(),
            log_weight: math::ln(0.7),
            densities: BTreeMap::new(),
        };
        let glmb =
            GlmbDensity::new([label].into_iter().collect(), vec![occupied, empty]).unwrap();
        let lmb = glmb.to_lmb().unwrap();
        assert!((lmb.get(&label).unwrap().existence - 0.3).abs() < 1e-12);
    }

    #[test]
    fn glmb_to_lmb_preserves_r_sum() {
        let la = Label::new(1, 1);
        let lb = Label::new(1, 2);
        let h1 = GlmbHypothesis {
            labels: [la, lb].into_iter().collect(),
            log_weight: math::ln(0.4),
            densities: [(la, gm(0.0, 1.0)), (lb, gm(4.0, 1.0))].into_iter().collect(),
        };
        let h2 = GlmbHypothesis {
            labels: [la].into_iter().collect(),
            log_weight: math::ln(0.35),
            densities: [(la, gm(0.5, 2.0))].into_iter().collect(),
        };
        let h3 = GlmbHypothesis {
            labels: BTreeSet::new(),
            log_weight: math::ln(0.25),
            densities: BTreeMap::new(),
        };
        let glmb = GlmbDensity::new([la, lb].into_iter().collect(), vec![h1, h2, h3]).unwrap();
        let lmb = glmb.to_lmb().unwrap();
        let r_sum: f64 = lmb.components().map(|c| c.existence).sum();
        assert!((r_sum - glmb.expected_cardinality()).abs() < 1e-12);
    }

    #[test]
    fn phd_mass_is_expected_cardinality() {
        let lmb = lmb2(0.5, 0.25);
        let gmb = GlmbDensity::from_lmb_exhaustive(&lmb).unwrap().to_gmb();
        let phd = gmb.phd().unwrap();
        assert!((phd.mass() - gmb.expected_cardinality()).abs() < 1e-9);
    }

    #[test]
    fn phd_of_certain_bernoulli_is_its_density() {
        let mb = MbDensity::new(
            [(0usize, (1.0, raw_gm(2.0, 3.0)))].into_iter().collect(),
        )
        .unwrap();
        let phd = mb.phd();
        let x = DVector::from_vec(vec![2.0]);
        let direct = raw_gm(2.0, 3.0).pdf(&x).unwrap();
        assert!((phd.eval(&x).unwrap() - direct).abs() < 1e-12);
        assert!((phd.mass() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn phd_of_empty_density_is_zero() {
        let phd = MbDensity::empty().phd();
        assert_eq!(phd.mass(), 0.0);
        assert_eq!(phd.eval(&DVector::from_vec(vec![0.0])).unwrap(), 0.0);
    }

    #[test]
    fn no_object_probability_matches_cardinality_zero() {
        let lmb = lmb2(0.37, 0.81);
        assert!(
            (lmb.no_object_probability() - lmb.cardinality_distribution()[0]).abs() < 1e-12
        );
        let gmb = GlmbDensity::from_lmb_exhaustive(&lmb).unwrap().to_gmb();
        assert!(
            (gmb.no_object_probability() - gmb.cardinality_distribution()[0]).abs() < 1e-12
        );
    }
}
