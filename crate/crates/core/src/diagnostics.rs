//! Exact multi-object calculus on finite discrete spaces.
//!
//! Multi-object densities are tabulated per cardinality on ordered
//! point tuples (points are cells, or cell-label pairs for labeled
//! densities), which makes set integrals, weighted geometric means,
//! GCI coefficients, conditional multi-label distributions and the
//! label inconsistency indicator exactly computable finite sums. This
//! module is the ground-truth oracle against which the Gaussian-mixture
//! fusion pipeline is checked.
//!
//! Intended scale: short 1-D grids (tens of cells), a handful of
//! labels, maximum cardinality two or three.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::labeled_rfs::{GlmbDensity, GmbDensity, Label, LmbDensity, MbDensity};
use crate::math;

/// Entry budget across all cardinality arrays of one density.
const MAX_ENTRIES: usize = 60_000_000;

/// Probability mass a grid must capture of every single-object density
/// it discretizes.
const COVERAGE_TOL: f64 = 1e-6;

/// Tolerance of the internal decomposition cross-check.
const DECOMPOSITION_TOL: f64 = 1e-9;

/// A finite grid: cell centers with measures, an optional label list,
/// and the maximum tabulated cardinality.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteSpace {
    cells: Vec<(DVector<f64>, f64)>,
    labels: Vec<Label>,
    max_cardinality: usize,
}

impl DiscreteSpace {
    pub fn unlabeled(cells: Vec<(DVector<f64>, f64)>, max_cardinality: usize) -> Result<Self> {
        Self::build(cells, Vec::new(), max_cardinality)
    }

    pub fn labeled(
        cells: Vec<(DVector<f64>, f64)>,
        labels: Vec<Label>,
        max_cardinality: usize,
    ) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidParameter("labeled space needs at least one label"));
        }
        Self::build(cells, labels, max_cardinality)
    }

    fn build(
        cells: Vec<(DVector<f64>, f64)>,
        labels: Vec<Label>,
        max_cardinality: usize,
    ) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::InvalidParameter("a space needs at least one cell"));
        }
        if cells.iter().any(|(_, m)| !(*m > 0.0)) {
            return Err(Error::InvalidParameter("cell measures must be positive"));
        }
        let space = Self {
            cells,
            labels,
            max_cardinality,
        };
        let mut total = 0usize;
        let m = space.n_points();
        let mut size = 1usize;
        for _ in 0..=max_cardinality {
            total = total.saturating_add(size);
            size = size.saturating_mul(m);
            if total > MAX_ENTRIES {
                return Err(Error::ProblemTooLarge("discrete space tuple arrays"));
            }
        }
        Ok(space)
    }

    /// Uniform 1-D grid of midpoint cells over [lo, hi].
    pub fn grid_1d(
        lo: f64,
        hi: f64,
        n_cells: usize,
        labels: Vec<Label>,
        max_cardinality: usize,
    ) -> Result<Self> {
        if !(hi > lo) || n_cells == 0 {
            return Err(Error::InvalidParameter("grid bounds must satisfy lo < hi"));
        }
        let width = (hi - lo) / n_cells as f64;
        let cells = (0..n_cells)
            .map(|i| {
                (
                    DVector::from_vec(vec![lo + (i as f64 + 0.5) * width]),
                    width,
                )
            })
            .collect();
        Self::build(cells, labels, max_cardinality)
    }

    pub fn cells(&self) -> &[(DVector<f64>, f64)] {
        &self.cells
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn max_cardinality(&self) -> usize {
        self.max_cardinality
    }

    pub fn is_labeled(&self) -> bool {
        !self.labels.is_empty()
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    /// Points are cells, or (cell, label) pairs on a labeled space.
    pub fn n_points(&self) -> usize {
        if self.is_labeled() {
            self.cells.len() * self.labels.len()
        } else {
            self.cells.len()
        }
    }

    fn point_cell(&self, point: usize) -> usize {
        point % self.cells.len()
    }

    fn point_measure(&self, point: usize) -> f64 {
        self.cells[self.point_cell(point)].1
    }

    /// The same grid without labels.
    pub fn unlabeled_version(&self) -> Result<Arc<Self>> {
        Ok(Arc::new(Self::unlabeled(
            self.cells.clone(),
            self.max_cardinality,
        )?))
    }
}

/// Advances a little-endian base-`base` counter; false on wrap-around.
fn next_tuple(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

/// A multi-object density tabulated on a [`DiscreteSpace`]:
/// `values[n]` holds the density on every ordered `n`-tuple of points
/// (row-major, little-endian point digits).
#[derive(Debug, Clone)]
pub struct DiscreteMultiObjectDensity {
    space: Arc<DiscreteSpace>,
    values: Vec<Vec<f64>>,
}

impl DiscreteMultiObjectDensity {
    pub fn from_values(space: Arc<DiscreteSpace>, values: Vec<Vec<f64>>) -> Result<Self> {
        if values.len() != space.max_cardinality + 1 {
            return Err(Error::DimensionMismatch {
                expected: space.max_cardinality + 1,
                got: values.len(),
            });
        }
        let m = space.n_points();
        let mut size = 1usize;
        for (n, arr) in values.iter().enumerate() {
            if arr.len() != size {
                return Err(Error::DimensionMismatch {
                    expected: size,
                    got: arr.len(),
                });
            }
            if arr.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::InvalidParameter("density values must be finite and >= 0"));
            }
            let _ = n;
            size *= m;
        }
        Ok(Self { space, values })
    }

    /// Builds the density by evaluating `f` on every ordered tuple of
    /// points (given as a slice of point indices).
    pub fn tabulate(
        space: Arc<DiscreteSpace>,
        mut f: impl FnMut(&[usize]) -> f64,
    ) -> Result<Self> {
        let m = space.n_points();
        let mut values = Vec::with_capacity(space.max_cardinality + 1);
        for n in 0..=space.max_cardinality {
            let len = m.checked_pow(n as u32).ok_or(Error::ProblemTooLarge("tuple array"))?;
            let mut arr = vec![0.0; len];
            let mut digits = vec![0usize; n];
            for slot in arr.iter_mut() {
                *slot = f(&digits);
                if n > 0 {
                    next_tuple(&mut digits, m);
                }
            }
            values.push(arr);
        }
        Self::from_values(space, values)
    }

    pub fn space(&self) -> &Arc<DiscreteSpace> {
        &self.space
    }

    pub fn values(&self, cardinality: usize) -> &[f64] {
        &self.values[cardinality]
    }

    pub fn empty_set_value(&self) -> f64 {
        self.values[0][0]
    }

    fn same_space(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.space, &other.space) || *self.space == *other.space
    }

    /// Product of the point measures along a tuple.
    fn tuple_measure(&self, digits: &[usize]) -> f64 {
        digits
            .iter()
            .map(|p| self.space.point_measure(*p))
            .product()
    }

    /// The set integral: sum_n (1/n!) sum_tuples value * measure^n.
    pub fn set_integral(&self) -> f64 {
        let m = self.space.n_points();
        let mut total = 0.0;
        let mut factorial = 1.0;
        for (n, arr) in self.values.iter().enumerate() {
            if n > 0 {
                factorial *= n as f64;
            }
            let mut digits = vec![0usize; n];
            let mut sum = 0.0;
            for v in arr {
                if *v != 0.0 {
                    sum += v * self.tuple_measure(&digits);
                }
                if n > 0 {
                    next_tuple(&mut digits, m);
                }
            }
            total += sum / factorial;
        }
        total
    }

    /// Rescales so the set integral is one.
    pub fn normalized(&self) -> Result<Self> {
        let c = self.set_integral();
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::DegenerateMixture);
        }
        Ok(Self {
            space: Arc::clone(&self.space),
            values: self
                .values
                .iter()
                .map(|arr| arr.iter().map(|v| v / c).collect())
                .collect(),
        })
    }

    /// Pointwise weighted geometric product prod_s pi_s^{omega_s}
    /// (unnormalized). Zero-weight factors are skipped exactly.
    pub fn weighted_geometric_product(inputs: &[(&Self, f64)]) -> Result<Self> {
        let (first, _) = inputs.first().ok_or(Error::InvalidParameter("empty input list"))?;
        for (d, w) in inputs {
            if !d.same_space(first) {
                return Err(Error::InvalidParameter("densities live on different spaces"));
            }
            if *w < 0.0 || !w.is_finite() {
                return Err(Error::InvalidParameter("weights must be >= 0"));
            }
        }
        let values = (0..first.values.len())
            .map(|n| {
                let len = first.values[n].len();
                let mut arr = vec![1.0; len];
                for (d, w) in inputs {
                    if *w == 0.0 {
                        continue;
                    }
                    for (slot, v) in arr.iter_mut().zip(&d.values[n]) {
                        *slot *= if *v == 0.0 { 0.0 } else { math::powf(*v, *w) };
                    }
                }
                arr
            })
            .collect();
        Self::from_values(Arc::clone(&first.space), values)
    }

    /// Unlabeled marginal: sums the labeled density over all ordered
    /// label assignments per cell tuple.
    pub fn marginal(&self) -> Result<Self> {
        if !self.space.is_labeled() {
            return Err(Error::InvalidParameter("marginal of an unlabeled density"));
        }
        let unlabeled = self.space.unlabeled_version()?;
        let n_cells = self.space.n_cells();
        let m = self.space.n_points();
        let mut values = Vec::with_capacity(self.values.len());
        for (n, arr) in self.values.iter().enumerate() {
            let len = n_cells.pow(n as u32);
            let mut out = vec![0.0; len];
            let mut digits = vec![0usize; n];
            for v in arr {
                if *v != 0.0 {
                    let mut cell_index = 0usize;
                    for d in digits.iter().rev() {
                        cell_index = cell_index * n_cells + self.space.point_cell(*d);
                    }
                    out[cell_index] += v;
                }
                if n > 0 {
                    next_tuple(&mut digits, m);
                }
            }
            values.push(out);
        }
        Self::from_values(unlabeled, values)
    }

    /// One half of the set integral of |a - b|.
    pub fn total_variation(a: &Self, b: &Self) -> Result<f64> {
        if !a.same_space(b) {
            return Err(Error::InvalidParameter("densities live on different spaces"));
        }
        let m = a.space.n_points();
        let mut total = 0.0;
        let mut factorial = 1.0;
        for n in 0..a.values.len() {
            if n > 0 {
                factorial *= n as f64;
            }
            let mut digits = vec![0usize; n];
            let mut sum = 0.0;
            for (va, vb) in a.values[n].iter().zip(&b.values[n]) {
                let diff = math::abs(va - vb);
                if diff != 0.0 {
                    sum += diff * a.tuple_measure(&digits);
                }
                if n > 0 {
                    next_tuple(&mut digits, m);
                }
            }
            total += sum / factorial;
        }
        Ok(0.5 * total)
    }
}

/// Set integral of a tabulated density.
pub fn set_integral(d: &DiscreteMultiObjectDensity) -> f64 {
    d.set_integral()
}

/// GCI coefficient c(Pi): the set integral of the weighted geometric
/// mean of the densities.
pub fn gci_coefficient(inputs: &[(&DiscreteMultiObjectDensity, f64)]) -> Result<f64> {
    Ok(DiscreteMultiObjectDensity::weighted_geometric_product(inputs)?.set_integral())
}

/// Exact GCI fusion on the grid: normalized weighted geometric mean.
pub fn gci_fuse_discrete(
    inputs: &[(&DiscreteMultiObjectDensity, f64)],
) -> Result<DiscreteMultiObjectDensity> {
    let product = DiscreteMultiObjectDensity::weighted_geometric_product(inputs)?;
    let c = product.set_integral();
    if !(c > 0.0) {
        return Err(Error::IncompatibleDensities {
            log_normalizer: f64::NEG_INFINITY,
            best_log_eta: f64::NEG_INFINITY,
        });
    }
    product.normalized()
}

/// GCI divergence; infinite when the densities have disjoint support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Divergence {
    Finite(f64),
    Infinite,
}

impl Divergence {
    pub fn as_f64(&self) -> f64 {
        match self {
            Divergence::Finite(v) => *v,
            Divergence::Infinite => f64::INFINITY,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Divergence::Infinite)
    }
}

/// G(Pi) = -log c(Pi).
pub fn gci_divergence(inputs: &[(&DiscreteMultiObjectDensity, f64)]) -> Result<Divergence> {
    let c = gci_coefficient(inputs)?;
    if c == 0.0 {
        Ok(Divergence::Infinite)
    } else {
        Ok(Divergence::Finite(-math::ln(c)))
    }
}

/// Conditional multi-label distribution of one labeled density:
/// varpi(labels | states) = labeled density / state marginal.
pub struct ConditionalMultiLabel {
    labeled: DiscreteMultiObjectDensity,
    marginal: DiscreteMultiObjectDensity,
}

impl ConditionalMultiLabel {
    pub fn new(labeled: &DiscreteMultiObjectDensity) -> Result<Self> {
        if !labeled.space.is_labeled() {
            return Err(Error::InvalidParameter("conditional needs a labeled density"));
        }
        Ok(Self {
            labeled: labeled.clone(),
            marginal: labeled.marginal()?,
        })
    }

    /// varpi of the label tuple given the cell tuple; errors where the
    /// state marginal vanishes. The empty tuple has varpi = 1.
    pub fn eval(&self, cells: &[usize], labels: &[usize]) -> Result<f64> {
        if cells.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: cells.len(),
                got: labels.len(),
            });
        }
        let n = cells.len();
        if n == 0 {
            return Ok(1.0);
        }
        let n_cells = self.labeled.space.n_cells();
        let m = self.labeled.space.n_points();
        let mut cell_index = 0usize;
        let mut point_index = 0usize;
        for i in (0..n).rev() {
            cell_index = cell_index * n_cells + cells[i];
            point_index = point_index * m + (labels[i] * n_cells + cells[i]);
        }
        let denom = self.marginal.values[n][cell_index];
        if denom == 0.0 {
            return Err(Error::UndefinedConditional);
        }
        Ok(self.labeled.values[n][point_index] / denom)
    }

    pub fn marginal(&self) -> &DiscreteMultiObjectDensity {
        &self.marginal
    }
}

/// The quantities behind the label-inconsistency analysis, one row of
/// the diagnostics CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsReport {
    /// GCI divergence of the labeled densities (nats).
    pub g_labeled: f64,
    /// GCI divergence of their unlabeled marginals (nats).
    pub g_unlabeled: f64,
    /// Label inconsistency indicator: g_labeled - g_unlabeled.
    pub d_g: f64,
    /// Upper bound -log pi_omega(empty).
    pub d_g_upper: f64,
    /// Yes-object probability of the labeled fusion.
    pub p_yes_labeled: f64,
    /// Yes-object probability of the unlabeled fusion.
    pub p_yes_unlabeled: f64,
}

/// Computes the label inconsistency indicator and its companions for a
/// set of labeled densities on one shared labeled space.
///
/// The indicator is computed twice: directly as G(labeled) -
/// G(unlabeled), and independently as -log E[mu] with mu the GCI
/// coefficient of the conditional multi-label distributions, by full
/// enumeration. The two routes must agree to 1e-9.
pub fn label_inconsistency_indicator(
    inputs: &[(&DiscreteMultiObjectDensity, f64)],
) -> Result<DiagnosticsReport> {
    if inputs.len() < 2 {
        return Err(Error::InvalidParameter("indicator needs at least two densities"));
    }
    let weight_sum: f64 = inputs.iter().map(|(_, w)| w).sum();
    if math::abs(weight_sum - 1.0) > 1e-9 {
        return Err(Error::InvalidParameter("fusion weights must sum to one"));
    }
    for (d, _) in inputs {
        if !d.space.is_labeled() {
            return Err(Error::InvalidParameter("indicator needs labeled densities"));
        }
        if math::abs(d.set_integral() - 1.0) > 1e-6 {
            return Err(Error::InvalidParameter("densities must be normalized"));
        }
    }

    // Direct route.
    let labeled_product = DiscreteMultiObjectDensity::weighted_geometric_product(inputs)?;
    let c_labeled = labeled_product.set_integral();
    if !(c_labeled > 0.0) {
        return Err(Error::IncompatibleDensities {
            log_normalizer: f64::NEG_INFINITY,
            best_log_eta: f64::NEG_INFINITY,
        });
    }
    let marginals: Vec<DiscreteMultiObjectDensity> = inputs
        .iter()
        .map(|(d, _)| d.marginal())
        .collect::<Result<_>>()?;
    let unlabeled_inputs: Vec<(&DiscreteMultiObjectDensity, f64)> = marginals
        .iter()
        .zip(inputs.iter())
        .map(|(m, (_, w))| (m, *w))
        .collect();
    let unlabeled_product =
        DiscreteMultiObjectDensity::weighted_geometric_product(&unlabeled_inputs)?;
    let c_unlabeled = unlabeled_product.set_integral();
    if !(c_unlabeled > 0.0) {
        return Err(Error::IncompatibleDensities {
            log_normalizer: f64::NEG_INFINITY,
            best_log_eta: f64::NEG_INFINITY,
        });
    }
    let g_labeled = -math::ln(c_labeled);
    let g_unlabeled = -math::ln(c_unlabeled);
    let d_g = g_labeled - g_unlabeled;

    // Independent route: E under the fused unlabeled density of the
    // GCI coefficient mu of the conditional label distributions.
    let fused_unlabeled = unlabeled_product.normalized()?;
    let weights: Vec<f64> = inputs.iter().map(|(_, w)| *w).collect();
    let e_mu = expected_mu(inputs, &marginals, &fused_unlabeled, &weights)?;
    let d_g_mu = if e_mu > 0.0 {
        -math::ln(e_mu)
    } else {
        f64::INFINITY
    };
    if math::abs(d_g - d_g_mu) > DECOMPOSITION_TOL {
        return Err(Error::DecompositionMismatch {
            direct: d_g,
            via_mu: d_g_mu,
        });
    }

    let p_no_unlabeled = fused_unlabeled.empty_set_value();
    let p_no_labeled = labeled_product.empty_set_value() / c_labeled;
    Ok(DiagnosticsReport {
        g_labeled,
        g_unlabeled,
        d_g,
        d_g_upper: -math::ln(p_no_unlabeled),
        p_yes_labeled: 1.0 - p_no_labeled,
        p_yes_unlabeled: 1.0 - p_no_unlabeled,
    })
}

/// E_{pi_omega}[mu(X)] by full enumeration over cell and label tuples.
fn expected_mu(
    inputs: &[(&DiscreteMultiObjectDensity, f64)],
    marginals: &[DiscreteMultiObjectDensity],
    fused_unlabeled: &DiscreteMultiObjectDensity,
    weights: &[f64],
) -> Result<f64> {
    let space = &inputs[0].0.space;
    let n_cells = space.n_cells();
    let n_labels = space.labels.len();
    let max_card = space.max_cardinality;
    let mut expectation = 0.0;
    let mut factorial = 1.0;
    for n in 0..=max_card {
        if n > 0 {
            factorial *= n as f64;
        }
        let mut cell_digits = vec![0usize; n];
        let n_cell_tuples = n_cells.pow(n as u32);
        for ct in 0..n_cell_tuples {
            let pi_omega = fused_unlabeled.values[n][ct];
            if pi_omega != 0.0 {
                let mut mu = if n == 0 { 1.0 } else { 0.0 };
                if n > 0 {
                    let mut label_digits = vec![0usize; n];
                    loop {
                        // varpi_s of this label tuple given the cell
                        // tuple, combined geometrically.
                        let mut point_index = 0usize;
                        for i in (0..n).rev() {
                            point_index = point_index * space.n_points()
                                + (label_digits[i] * n_cells + cell_digits[i]);
                        }
                        let mut term = 1.0;
                        for (s, (d, _)) in inputs.iter().enumerate() {
                            if weights[s] == 0.0 {
                                continue;
                            }
                            let denom = marginals[s].values[n][ct];
                            if denom == 0.0 {
                                // pi_omega > 0 forces every marginal
                                // positive; zero means a weight-0
                                // sensor, already skipped.
                                term = 0.0;
                                break;
                            }
                            let varpi = d.values[n][point_index] / denom;
                            if varpi == 0.0 {
                                term = 0.0;
                                break;
                            }
                            term *= math::powf(varpi, weights[s]);
                        }
                        mu += term;
                        if !next_tuple(&mut label_digits, n_labels) {
                            break;
                        }
                    }
                }
                let measure: f64 = cell_digits
                    .iter()
                    .map(|c| space.cells[*c].1)
                    .product();
                expectation += pi_omega * mu * measure / factorial;
            }
            if n > 0 {
                next_tuple(&mut cell_digits, n_cells);
            }
        }
    }
    Ok(expectation)
}

/// The independent route to the label inconsistency indicator:
/// -log E_{pi_omega}[mu(X)] by full enumeration, without touching the
/// labeled geometric product.
pub fn d_g_via_mu(inputs: &[(&DiscreteMultiObjectDensity, f64)]) -> Result<f64> {
    let marginals: Vec<DiscreteMultiObjectDensity> = inputs
        .iter()
        .map(|(d, _)| d.marginal())
        .collect::<Result<_>>()?;
    let unlabeled_inputs: Vec<(&DiscreteMultiObjectDensity, f64)> = marginals
        .iter()
        .zip(inputs.iter())
        .map(|(m, (_, w))| (m, *w))
        .collect();
    let fused_unlabeled =
        DiscreteMultiObjectDensity::weighted_geometric_product(&unlabeled_inputs)?.normalized()?;
    let weights: Vec<f64> = inputs.iter().map(|(_, w)| *w).collect();
    let e_mu = expected_mu(inputs, &marginals, &fused_unlabeled, &weights)?;
    Ok(if e_mu > 0.0 {
        -math::ln(e_mu)
    } else {
        f64::INFINITY
    })
}

/// Residual of the yes-object identity
/// P_y(labeled) = 1 - e^{d_G} (1 - P_y(unlabeled)).
pub fn yes_object_identity_residual(report: &DiagnosticsReport) -> f64 {
    math::abs(
        report.p_yes_labeled - (1.0 - math::exp(report.d_g) * (1.0 - report.p_yes_unlabeled)),
    )
}

/// The d_G value above which the labeled yes-object probability drops
/// below `tau`, given the unlabeled yes-object probability.
pub fn yes_object_threshold(p_yes_unlabeled: f64, tau: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&tau) || !(0.0..1.0).contains(&p_yes_unlabeled) {
        return Err(Error::InvalidParameter("probabilities must be in [0, 1)"));
    }
    Ok(math::ln((1.0 - tau) / (1.0 - p_yes_unlabeled)))
}

fn pdf_table(
    gm: &crate::gaussian::GaussianMixture,
    space: &DiscreteSpace,
) -> Result<Vec<f64>> {
    let mut table = Vec::with_capacity(space.n_cells());
    let mut mass = 0.0;
    for (center, measure) in &space.cells {
        let p = gm.pdf(center)?;
        mass += p * measure;
        table.push(p);
    }
    if mass < 1.0 - COVERAGE_TOL {
        return Err(Error::CoverageError { mass });
    }
    Ok(table)
}

/// Discretizes an LMB density on a labeled grid covering all of its
/// labels. Returns the renormalized tabulation together with the raw
/// set integral of the tabulation (its distance from one is the
/// quadrature error).
pub fn discretize_lmb(
    lmb: &LmbDensity,
    space: &Arc<DiscreteSpace>,
) -> Result<(DiscreteMultiObjectDensity, f64)> {
    if !space.is_labeled() {
        return Err(Error::InvalidParameter("LMB discretization needs a labeled space"));
    }
    // Per space label: existence and pdf table (absent labels have
    // existence zero and never contribute).
    let mut entries: Vec<Option<(f64, Vec<f64>)>> = Vec::with_capacity(space.labels.len());
    for label in &space.labels {
        match lmb.get(label) {
            Some(c) => entries.push(Some((c.existence, pdf_table(&c.density, space)?))),
            None => entries.push(None),
        }
    }
    for label in lmb.labels() {
        if !space.labels.contains(label) {
            return Err(Error::InvalidParameter("space is missing an LMB label"));
        }
    }
    let n_cells = space.n_cells();
    let raw = DiscreteMultiObjectDensity::tabulate(Arc::clone(space), |points| {
        // Distinct labels only.
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                if points[i] / n_cells == points[j] / n_cells {
                    return 0.0;
                }
            }
        }
        let mut value = 1.0;
        let mut in_tuple = vec![false; entries.len()];
        for p in points {
            let li = p / n_cells;
            let ci = p % n_cells;
            match &entries[li] {
                Some((r, table)) => {
                    value *= r * table[ci];
                    in_tuple[li] = true;
                }
                None => return 0.0,
            }
        }
        for (li, present) in in_tuple.iter().enumerate() {
            if !present {
                if let Some((r, _)) = &entries[li] {
                    value *= 1.0 - r;
                }
            }
        }
        value
    })?;
    let integral = raw.set_integral();
    Ok((raw.normalized()?, integral))
}

/// Discretizes a GLMB density on a labeled grid covering its label
/// space.
pub fn discretize_glmb(
    glmb: &GlmbDensity,
    space: &Arc<DiscreteSpace>,
) -> Result<(DiscreteMultiObjectDensity, f64)> {
    if !space.is_labeled() {
        return Err(Error::InvalidParameter("GLMB discretization needs a labeled space"));
    }
    for label in glmb.label_space() {
        if !space.labels.contains(label) {
            return Err(Error::InvalidParameter("space is missing a GLMB label"));
        }
    }
    // Hypotheses with per-space-label pdf tables.
    struct Hyp {
        weight: f64,
        labels: Vec<usize>,
        tables: Vec<Option<Vec<f64>>>,
    }
    let mut hyps = Vec::with_capacity(glmb.hypotheses().len());
    for h in glmb.hypotheses() {
        let mut labels = Vec::with_capacity(h.labels.len());
        let mut tables = vec![None; space.labels.len()];
        for l in &h.labels {
            let li = space.labels.iter().position(|s| s == l).expect("checked above");
            labels.push(li);
            tables[li] = Some(pdf_table(&h.densities[l], space)?);
        }
        labels.sort_unstable();
        hyps.push(Hyp {
            weight: math::exp(h.log_weight),
            labels,
            tables,
        });
    }
    let n_cells = space.n_cells();
    let raw = DiscreteMultiObjectDensity::tabulate(Arc::clone(space), |points| {
        let mut tuple_labels: Vec<usize> = points.iter().map(|p| p / n_cells).collect();
        tuple_labels.sort_unstable();
        if tuple_labels.windows(2).any(|w| w[0] == w[1]) {
            return 0.0;
        }
        let mut value = 0.0;
        'hyp: for h in &hyps {
            if h.labels != tuple_labels {
                continue;
            }
            let mut term = h.weight;
            for p in points {
                let li = p / n_cells;
                let ci = p % n_cells;
                match &h.tables[li] {
                    Some(table) => term *= table[ci],
                    None => continue 'hyp,
                }
            }
            value += term;
        }
        value
    })?;
    let integral = raw.set_integral();
    Ok((raw.normalized()?, integral))
}

/// Discretizes a GMB density on an unlabeled grid.
pub fn discretize_gmb(
    gmb: &GmbDensity,
    space: &Arc<DiscreteSpace>,
) -> Result<(DiscreteMultiObjectDensity, f64)> {
    if space.is_labeled() {
        return Err(Error::InvalidParameter("GMB discretization needs an unlabeled space"));
    }
    struct Hyp {
        weight: f64,
        tables: Vec<Vec<f64>>,
    }
    let mut hyps = Vec::with_capacity(gmb.hypotheses().len());
    for h in gmb.hypotheses() {
        let mut tables = Vec::with_capacity(h.indices.len());
        for idx in &h.indices {
            tables.push(pdf_table(&h.densities[idx], space)?);
        }
        hyps.push(Hyp {
            weight: math::exp(h.log_weight),
            tables,
        });
    }
    let raw = DiscreteMultiObjectDensity::tabulate(Arc::clone(space), |points| {
        let n = points.len();
        let mut value = 0.0;
        for h in &hyps {
            if h.tables.len() != n {
                continue;
            }
            value += h.weight * permanent_sum(&h.tables, points);
        }
        value
    })?;
    let integral = raw.set_integral();
    Ok((raw.normalized()?, integral))
}

/// Discretizes an MB density on an unlabeled grid by exhaustive subset
/// expansion (small component counts only).
pub fn discretize_mb(
    mb: &MbDensity,
    space: &Arc<DiscreteSpace>,
) -> Result<(DiscreteMultiObjectDensity, f64)> {
    if mb.len() > 20 {
        return Err(Error::ProblemTooLarge("MB has too many components to expand"));
    }
    if space.is_labeled() {
        return Err(Error::InvalidParameter("MB discretization needs an unlabeled space"));
    }
    let comps: Vec<(f64, Vec<f64>)> = mb
        .components()
        .map(|(_, (r, gm))| Ok((*r, pdf_table(gm, space)?)))
        .collect::<Result<_>>()?;
    let raw = DiscreteMultiObjectDensity::tabulate(Arc::clone(space), |points| {
        let n = points.len();
        let mut value = 0.0;
        for mask in 0u32..(1u32 << comps.len()) {
            if mask.count_ones() as usize != n {
                continue;
            }
            let mut weight = 1.0;
            let mut tables: Vec<&Vec<f64>> = Vec::with_capacity(n);
            for (i, (r, table)) in comps.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    weight *= r;
                    tables.push(table);
                } else {
                    weight *= 1.0 - r;
                }
            }
            if weight != 0.0 {
                value += weight * permanent_slices(&tables, points);
            }
        }
        value
    })?;
    let integral = raw.set_integral();
    Ok((raw.normalized()?, integral))
}

/// sum over permutations sigma of prod_i tables[i][points[sigma(i)]].
fn permanent_sum(tables: &[Vec<f64>], points: &[usize]) -> f64 {
    let refs: Vec<&Vec<f64>> = tables.iter().collect();
    permanent_slices(&refs, points)
}

fn permanent_slices(tables: &[&Vec<f64>], points: &[usize]) -> f64 {
    let n = points.len();
    debug_assert_eq!(tables.len(), n);
    if n == 0 {
        return 1.0;
    }
    let mut used = vec![false; n];
    permanent_rec(tables, points, 0, &mut used)
}

fn permanent_rec(tables: &[&Vec<f64>], points: &[usize], depth: usize, used: &mut [bool]) -> f64 {
    if depth == tables.len() {
        return 1.0;
    }
    let mut total = 0.0;
    for (j, point) in points.iter().enumerate() {
        if used[j] {
            continue;
        }
        let v = tables[depth][*point];
        if v == 0.0 {
            continue;
        }
        used[j] = true;
        total += v * permanent_rec(tables, points, depth + 1, used);
        used[j] = false;
    }
    total
}
