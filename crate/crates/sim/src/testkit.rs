//! Randomized instance generators shared by the validation command and
//! the acceptance suite. Everything is deterministic in the stream.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use rfs_fusion_core::diagnostics::{DiscreteMultiObjectDensity, DiscreteSpace};
use rfs_fusion_core::gaussian::{Gaussian, GaussianMixture};
use rfs_fusion_core::labeled_rfs::{GmbDensity, GmbHypothesis, Label, MbDensity};

use crate::rng::RngStream;

/// A labeled grid: `n_cells` unit cells, labels (1, 1..=n_labels).
pub fn labeled_grid(n_cells: usize, n_labels: usize, max_card: usize) -> Arc<DiscreteSpace> {
    let cells = (0..n_cells)
        .map(|i| (DVector::from_vec(vec![i as f64]), 1.0))
        .collect();
    let labels = (1..=n_labels as u32).map(|i| Label::new(1, i)).collect();
    Arc::new(DiscreteSpace::labeled(cells, labels, max_card).expect("valid grid"))
}

/// A fully supported random labeled multi-object density: positive on
/// every distinct-label tuple, symmetric under permutation, normalized.
pub fn random_labeled_density(
    space: &Arc<DiscreteSpace>,
    stream: &mut RngStream,
) -> DiscreteMultiObjectDensity {
    let n_cells = space.n_cells();
    let m = space.n_points();
    let key = stream.next_u64();
    let raw = DiscreteMultiObjectDensity::tabulate(Arc::clone(space), |points| {
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                if points[i] / n_cells == points[j] / n_cells {
                    return 0.0;
                }
            }
        }
        // Symmetric by construction: the value depends on the sorted
        // tuple only.
        let mut sorted: Vec<usize> = points.to_vec();
        sorted.sort_unstable();
        let code = sorted
            .iter()
            .fold(1u64, |acc, p| acc.wrapping_mul(m as u64 + 1).wrapping_add(*p as u64 + 1));
        let mut s = RngStream::from_seed(key ^ code);
        0.05 + s.next_f64()
    })
    .expect("tabulation fits");
    raw.normalized().expect("positive mass")
}

/// Random fusion weights, strictly positive, summing to one.
pub fn random_weights(n: usize, stream: &mut RngStream) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| 0.1 + stream.next_f64()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

fn gaussian_1d(mean: f64, var: f64) -> Gaussian {
    Gaussian::new(DVector::from_vec(vec![mean]), DMatrix::from_vec(1, 1, vec![var])).unwrap()
}

/// A pair of 1-D multi-Bernoulli densities whose tracks sit on widely
/// separated slots (normalized slot spacing >= 30 sigma), plus grid
/// bounds that cover everything.
pub struct SeparatedMbPair {
    pub mb1: MbDensity,
    pub mb2: MbDensity,
    pub weight1: f64,
    pub lo: f64,
    pub hi: f64,
    pub n_tracks: usize,
}

pub fn random_separated_mb_pair(stream: &mut RngStream) -> SeparatedMbPair {
    let n_tracks = 1 + (stream.next_f64() * 2.0) as usize; // 1 or 2
    let spacing = 80.0;
    let mut c1 = BTreeMap::new();
    let mut c2 = BTreeMap::new();
    for t in 0..n_tracks {
        let center = spacing * t as f64;
        c1.insert(
            t,
            (
                0.2 + 0.75 * stream.next_f64(),
                GaussianMixture::single(gaussian_1d(
                    center + (stream.next_f64() - 0.5) * 3.0,
                    0.5 + 1.5 * stream.next_f64(),
                )),
            ),
        );
        c2.insert(
            t,
            (
                0.2 + 0.75 * stream.next_f64(),
                GaussianMixture::single(gaussian_1d(
                    center + (stream.next_f64() - 0.5) * 3.0,
                    0.5 + 1.5 * stream.next_f64(),
                )),
            ),
        );
    }
    SeparatedMbPair {
        mb1: MbDensity::new(c1).unwrap(),
        mb2: MbDensity::new(c2).unwrap(),
        weight1: 0.3 + 0.4 * stream.next_f64(),
        lo: -20.0,
        hi: spacing * (n_tracks - 1) as f64 + 20.0,
        n_tracks,
    }
}

/// Random GMB with 1-D Gaussian densities: a handful of hypotheses
/// over up to three indices.
pub fn random_gmb(stream: &mut RngStream) -> GmbDensity {
    let n_indices = 1 + (stream.next_f64() * 3.0) as usize; // 1..=3
    let index_space: std::collections::BTreeSet<usize> = (0..n_indices).collect();
    let n_hyps = 2 + (stream.next_f64() * 4.0) as usize;
    let mut hypotheses = Vec::with_capacity(n_hyps);
    for _ in 0..n_hyps {
        let mut indices = std::collections::BTreeSet::new();
        let mut densities = BTreeMap::new();
        for idx in 0..n_indices {
            if stream.next_f64() < 0.6 {
                indices.insert(idx);
                let mean = idx as f64 * 10.0 + (stream.next_f64() - 0.5) * 4.0;
                let comps = if stream.next_f64() < 0.3 { 2 } else { 1 };
                let parts: Vec<(f64, Gaussian)> = (0..comps)
                    .map(|_| {
                        (
                            0.2 + stream.next_f64(),
                            gaussian_1d(
                                mean + (stream.next_f64() - 0.5) * 2.0,
                                0.5 + stream.next_f64(),
                            ),
                        )
                    })
                    .collect();
                densities.insert(idx, std::sync::Arc::new(GaussianMixture::new(parts).unwrap().normalize().unwrap()));
            }
        }
        hypotheses.push(GmbHypothesis {
            indices,
            log_weight: (0.1 + stream.next_f64()).ln(),
            densities,
        });
    }
    // Make sure the empty hypothesis exists so weights stay proper.
    hypotheses.push(GmbHypothesis {
        indices: std::collections::BTreeSet::new(),
        log_weight: (0.1 + stream.next_f64()).ln(),
        densities: BTreeMap::new(),
    });
    GmbDensity::new(index_space, hypotheses).unwrap()
}

/// Evaluation grid for PHD comparisons.
pub fn phd_grid(lo: f64, hi: f64, n: usize) -> Vec<DVector<f64>> {
    (0..n)
        .map(|i| DVector::from_vec(vec![lo + (hi - lo) * i as f64 / (n - 1) as f64]))
        .collect()
}

/// OSPA by brute-force enumeration over all injections of the smaller
/// set into the larger; the independent oracle for the assignment
/// solver.
pub fn ospa_brute_force(
    x: &[DVector<f64>],
    y: &[DVector<f64>],
    params: &rfs_fusion_core::ospa::OspaParams,
) -> f64 {
    let (small, large) = if x.len() <= y.len() { (x, y) } else { (y, x) };
    if large.is_empty() {
        return 0.0;
    }
    let n = large.len();
    let m = small.len();
    let cut_pow = params.cutoff.powf(params.order);
    fn rec(
        small: &[DVector<f64>],
        large: &[DVector<f64>],
        depth: usize,
        used: &mut [bool],
        acc: f64,
        params: &rfs_fusion_core::ospa::OspaParams,
        best: &mut f64,
    ) {
        if depth == small.len() {
            *best = best.min(acc);
            return;
        }
        for j in 0..large.len() {
            if used[j] {
                continue;
            }
            let d = ((small[depth][0] - large[j][0]).powi(2)
                + (small[depth][1] - large[j][1]).powi(2))
            .sqrt()
            .min(params.cutoff);
            used[j] = true;
            rec(small, large, depth + 1, used, acc + d.powf(params.order), params, best);
            used[j] = false;
        }
    }
    let mut best = f64::INFINITY;
    let mut used = vec![false; n];
    rec(small, large, 0, &mut used, 0.0, params, &mut best);
    if m == 0 {
        best = 0.0;
    }
    ((best + cut_pow * (n - m) as f64) / n as f64).powf(1.0 / params.order)
}
