//! Gaussian and Gaussian-mixture primitives.
//!
//! Covers the single-object density operations the rest of the crate is
//! built on: normalization, fractional exponentiation, pairwise GCI
//! fusion, Kalman prediction/update and mixture reduction.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};
use crate::math;

/// Relative tolerance for the covariance symmetry check.
const SYMMETRY_TOL: f64 = 1e-9;

/// Tolerance accepted when an operation requires a normalized mixture.
const NORMALIZED_TOL: f64 = 1e-6;

/// Linear-domain floor below which a GCI normalizer signals
/// incompatible densities.
pub const ETA_FLOOR: f64 = 1e-300;

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    0.5 * (m + m.transpose())
}

/// A non-degenerate multivariate Gaussian.
#[derive(Debug, Clone, PartialEq)]
pub struct Gaussian {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl Gaussian {
    /// Builds a Gaussian, enforcing a square, symmetric (within 1e-9
    /// relative, then symmetrized) and positive-definite covariance.
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let d = mean.len();
        if d == 0 {
            return Err(Error::InvalidParameter("state dimension must be positive"));
        }
        if cov.nrows() != d || cov.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: cov.nrows().max(cov.ncols()),
            });
        }
        let scale = cov.iter().fold(1.0_f64, |acc, v| acc.max(math::abs(*v)));
        for i in 0..d {
            for j in (i + 1)..d {
                if math::abs(cov[(i, j)] - cov[(j, i)]) > SYMMETRY_TOL * scale {
                    return Err(Error::InvalidParameter("covariance is not symmetric"));
                }
            }
        }
        let cov = symmetrize(&cov);
        if cov.clone().cholesky().is_none() {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(Self { mean, cov })
    }

    /// Construction for internal paths whose covariance is positive
    /// definite by construction (scaled copies, information-form
    /// combinations, Joseph-form updates). Symmetrizes, skips the
    /// factorization check.
    pub(crate) fn from_validated(mean: DVector<f64>, cov: DMatrix<f64>) -> Self {
        Self {
            mean,
            cov: symmetrize(&cov),
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    fn cholesky(&self) -> Cholesky<f64, Dyn> {
        // PD established at construction.
        self.cov.clone().cholesky().expect("covariance stays PD")
    }

    /// log N(x; mean, cov)
    pub fn log_pdf(&self, x: &DVector<f64>) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let chol = self.cholesky();
        let diff = x - &self.mean;
        let solved = chol.solve(&diff);
        let maha = diff.dot(&solved);
        Ok(-0.5 * (self.dim() as f64 * math::LN_2PI + log_det(&chol) + maha))
    }

    pub fn pdf(&self, x: &DVector<f64>) -> Result<f64> {
        Ok(math::exp(self.log_pdf(x)?))
    }

    /// Squared Mahalanobis distance of `x` under this Gaussian.
    pub fn mahalanobis_sq(&self, x: &DVector<f64>) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let diff = x - &self.mean;
        let solved = self.cholesky().solve(&diff);
        Ok(diff.dot(&solved))
    }

    /// N(x; m, P)^omega = scale * N(x; m, P/omega), exactly.
    ///
    /// Returns the widened Gaussian together with the scalar `scale`.
    pub fn power(&self, omega: f64) -> Result<(Gaussian, f64)> {
        let (g, log_scale) = self.log_power(omega)?;
        Ok((g, math::exp(log_scale)))
    }

    /// Same as [`Gaussian::power`] with the scale kept in log domain.
    pub fn log_power(&self, omega: f64) -> Result<(Gaussian, f64)> {
        if !(omega > 0.0 && omega <= 1.0) {
            return Err(Error::InvalidParameter("power exponent must be in (0, 1]"));
        }
        if omega == 1.0 {
            return Ok((self.clone(), 0.0));
        }
        let d = self.dim() as f64;
        // scale = (2 pi)^{d (1-omega)/2} |P|^{(1-omega)/2} omega^{-d/2}
        let log_det_p = log_det(&self.cholesky());
        let log_scale =
            0.5 * (1.0 - omega) * (d * math::LN_2PI + log_det_p) - 0.5 * d * math::ln(omega);
        let widened = Gaussian::from_validated(self.mean.clone(), &self.cov / omega);
        Ok((widened, log_scale))
    }
}

fn log_det(chol: &Cholesky<f64, Dyn>) -> f64 {
    2.0 * chol.l().diagonal().iter().map(|v| math::ln(*v)).sum::<f64>()
}

/// N_a(x)^wa * N_b(x)^wb = exp(log_eta) * N(x; m, P).
///
/// P^{-1} = wa Pa^{-1} + wb Pb^{-1}, m the information-weighted mean,
/// and log_eta the log of the integral of the left-hand side.
pub fn log_gci_pair(a: &Gaussian, wa: f64, b: &Gaussian, wb: f64) -> Result<(Gaussian, f64)> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    let (ga, log_sa) = a.log_power(wa)?;
    let (gb, log_sb) = b.log_power(wb)?;
    // Product of the two widened Gaussians.
    let pa_inv = ga
        .cov
        .clone()
        .cholesky()
        .ok_or(Error::NotPositiveDefinite)?
        .inverse();
    let pb_inv = gb
        .cov
        .clone()
        .cholesky()
        .ok_or(Error::NotPositiveDefinite)?
        .inverse();
    let precision = symmetrize(&(pa_inv.clone() + pb_inv.clone()));
    let cov = symmetrize(
        &precision
            .clone()
            .cholesky()
            .ok_or(Error::NotPositiveDefinite)?
            .inverse(),
    );
    let mean = &cov * (pa_inv * &ga.mean + pb_inv * &gb.mean);
    let fused = Gaussian::from_validated(mean, cov);
    // Product normalizer: N(ma; mb, Pa + Pb) evaluated on the widened pair.
    let sum_cov = symmetrize(&(&ga.cov + &gb.cov));
    let sum_chol = sum_cov.clone().cholesky().ok_or(Error::NotPositiveDefinite)?;
    let diff = &ga.mean - &gb.mean;
    let maha = diff.dot(&sum_chol.solve(&diff));
    let log_norm = -0.5 * (ga.dim() as f64 * math::LN_2PI + log_det(&sum_chol) + maha);
    Ok((fused, log_sa + log_sb + log_norm))
}

/// A weighted sum of Gaussians. Weights are nonnegative and need not
/// sum to one until [`GaussianMixture::normalize`] is applied.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture {
    components: Vec<(f64, Gaussian)>,
}

impl GaussianMixture {
    pub fn new(components: Vec<(f64, Gaussian)>) -> Result<Self> {
        let dim = match components.first() {
            Some((_, g)) => g.dim(),
            None => return Err(Error::DegenerateMixture),
        };
        for (w, g) in &components {
            if !w.is_finite() || *w < 0.0 {
                return Err(Error::InvalidParameter("mixture weights must be >= 0"));
            }
            if g.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: g.dim(),
                });
            }
        }
        Ok(Self { components })
    }

    /// Single-component mixture with weight one.
    pub fn single(g: Gaussian) -> Self {
        Self {
            components: vec![(1.0, g)],
        }
    }

    pub fn components(&self) -> &[(f64, Gaussian)] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.components[0].1.dim()
    }

    pub fn total_weight(&self) -> f64 {
        self.components.iter().map(|(w, _)| w).sum()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        math::abs(self.total_weight() - 1.0) <= tol
    }

    /// Rescales weights to sum to one, preserving component order.
    pub fn normalize(&self) -> Result<Self> {
        let total = self.total_weight();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::DegenerateMixture);
        }
        Ok(Self {
            components: self
                .components
                .iter()
                .map(|(w, g)| (w / total, g.clone()))
                .collect(),
        })
    }

    pub fn pdf(&self, x: &DVector<f64>) -> Result<f64> {
        let mut sum = 0.0;
        for (w, g) in &self.components {
            sum += w * g.pdf(x)?;
        }
        Ok(sum)
    }

    /// Measurement-space log likelihood sum_i w_i N(z; H m_i, H P_i H' + R).
    pub fn log_measurement_likelihood(
        &self,
        z: &DVector<f64>,
        h: &DMatrix<f64>,
        r: &DMatrix<f64>,
    ) -> Result<f64> {
        let mut terms = Vec::with_capacity(self.components.len());
        for (w, g) in &self.components {
            if *w == 0.0 {
                continue;
            }
            let innov_cov = symmetrize(&(h * &g.cov * h.transpose() + r));
            let predicted = Gaussian::new(h * &g.mean, innov_cov)?;
            terms.push(math::ln(*w) + predicted.log_pdf(z)?);
        }
        Ok(math::log_sum_exp(&terms))
    }

    /// Componentwise fractional power: weights to the `omega` and each
    /// Gaussian widened, with the exponentiation scale folded into the
    /// weight. Result is unnormalized. Exact for one component; for
    /// several it is the standard well-separated approximation.
    pub fn power_scale(&self, omega: f64) -> Result<Self> {
        if !(omega > 0.0 && omega <= 1.0) {
            return Err(Error::InvalidParameter("power exponent must be in (0, 1]"));
        }
        if omega == 1.0 {
            return Ok(self.clone());
        }
        let components = self
            .components
            .iter()
            .map(|(w, g)| {
                let (widened, log_scale) = g.log_power(omega)?;
                Ok((math::powf(*w, omega) * math::exp(log_scale), widened))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(components)
    }

    /// Sums the weights of components with bitwise-identical mean and
    /// covariance. Lossless; duplicates arise structurally when
    /// hypothesis mixtures share one density table, and they break the
    /// componentwise fractional-power approximation if left in place.
    pub fn coalesce_duplicates(&self) -> Self {
        use alloc::collections::BTreeMap;
        let mut index: BTreeMap<Vec<u64>, usize> = BTreeMap::new();
        let mut out: Vec<(f64, Gaussian)> = Vec::new();
        for (w, g) in &self.components {
            let mut key: Vec<u64> = Vec::with_capacity(1 + g.dim() * (1 + g.dim()));
            key.push(g.dim() as u64);
            key.extend(g.mean.iter().map(|v| v.to_bits()));
            key.extend(g.cov.iter().map(|v| v.to_bits()));
            match index.get(&key) {
                Some(&i) => out[i].0 += w,
                None => {
                    index.insert(key, out.len());
                    out.push((*w, g.clone()));
                }
            }
        }
        Self { components: out }
    }

    /// Mixture mean and covariance.
    pub fn mean_cov(&self) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let normalized = self.normalize()?;
        let d = normalized.dim();
        let mut mean = DVector::zeros(d);
        for (w, g) in &normalized.components {
            mean += *w * &g.mean;
        }
        let mut cov = DMatrix::zeros(d, d);
        for (w, g) in &normalized.components {
            let diff = &g.mean - &mean;
            cov += *w * (&g.cov + &diff * diff.transpose());
        }
        Ok((mean, symmetrize(&cov)))
    }

    /// Prunes weights below `gamma_p`, merges components whose squared
    /// Mahalanobis distance to the dominant component is within
    /// `gamma_m`, caps the count at `n_max` and renormalizes.
    ///
    /// If pruning removes everything, the single largest-weight
    /// component is kept.
    pub fn prune_merge(&self, gamma_p: f64, gamma_m: f64, n_max: usize) -> Result<Self> {
        if gamma_p < 0.0 || gamma_m < 0.0 {
            return Err(Error::InvalidParameter("thresholds must be >= 0"));
        }
        if n_max == 0 {
            return Err(Error::InvalidParameter("component cap must be >= 1"));
        }
        let mut pool: Vec<(f64, Gaussian)> = self
            .components
            .iter()
            .filter(|(w, _)| *w >= gamma_p)
            .cloned()
            .collect();
        if pool.is_empty() {
            let best = self
                .components
                .iter()
                .cloned()
                .max_by(|a, b| a.0.total_cmp(&b.0))
                .ok_or(Error::DegenerateMixture)?;
            return GaussianMixture::new(vec![(1.0, best.1)]);
        }
        let mut merged: Vec<(f64, Gaussian)> = Vec::new();
        while !pool.is_empty() {
            let lead = pool
                .iter()
                .enumerate()
                .max_by(|a, b| a.1 .0.total_cmp(&b.1 .0))
                .map(|(i, _)| i)
                .expect("pool nonempty");
            let lead_mean = pool[lead].1.mean().clone();
            let mut cluster: Vec<(f64, Gaussian)> = Vec::new();
            let mut rest: Vec<(f64, Gaussian)> = Vec::new();
            for (i, comp) in pool.drain(..).enumerate() {
                // Distance measured in each candidate's own covariance.
                let take = i == lead || comp.1.mahalanobis_sq(&lead_mean)? <= gamma_m;
                if take {
                    cluster.push(comp);
                } else {
                    rest.push(comp);
                }
            }
            merged.push(merge_moment_preserving(&cluster)?);
            pool = rest;
        }
        merged.sort_by(|a, b| b.0.total_cmp(&a.0));
        merged.truncate(n_max);
        GaussianMixture::new(merged)?.normalize()
    }
}

fn merge_moment_preserving(cluster: &[(f64, Gaussian)]) -> Result<(f64, Gaussian)> {
    let total: f64 = cluster.iter().map(|(w, _)| w).sum();
    if !(total > 0.0) {
        return Err(Error::DegenerateMixture);
    }
    let d = cluster[0].1.dim();
    let mut mean = DVector::zeros(d);
    for (w, g) in cluster {
        mean += (*w / total) * g.mean();
    }
    let mut cov = DMatrix::zeros(d, d);
    for (w, g) in cluster {
        let diff = g.mean() - &mean;
        cov += (*w / total) * (g.cov() + &diff * diff.transpose());
    }
    Ok((total, Gaussian::new(mean, symmetrize(&cov))?))
}

/// Normalizes a mixture; degenerate total weight is an error.
pub fn gm_normalize(gm: &GaussianMixture) -> Result<GaussianMixture> {
    gm.normalize()
}

/// GCI fusion of two normalized mixtures with the scale kept in log
/// domain: returns the normalized fused mixture and log of the
/// normalizing integral of p1^w1 p2^w2.
pub fn log_gci_fuse_gaussian_mixtures(
    p1: &GaussianMixture,
    w1: f64,
    p2: &GaussianMixture,
    w2: f64,
) -> Result<(GaussianMixture, f64)> {
    if !(w1 > 0.0 && w1 < 1.0 && w2 > 0.0 && w2 < 1.0) {
        return Err(Error::InvalidParameter("fusion weights must be in (0, 1)"));
    }
    if math::abs(w1 + w2 - 1.0) > 1e-9 {
        return Err(Error::InvalidParameter("fusion weights must sum to one"));
    }
    if !p1.is_normalized(NORMALIZED_TOL) || !p2.is_normalized(NORMALIZED_TOL) {
        return Err(Error::InvalidParameter("inputs must be normalized mixtures"));
    }
    let mut log_terms = Vec::with_capacity(p1.len() * p2.len());
    let mut gaussians = Vec::with_capacity(p1.len() * p2.len());
    for (wa, ga) in p1.components() {
        for (wb, gb) in p2.components() {
            if *wa == 0.0 || *wb == 0.0 {
                continue;
            }
            let (fused, log_eta_pair) = log_gci_pair(ga, w1, gb, w2)?;
            log_terms.push(w1 * math::ln(*wa) + w2 * math::ln(*wb) + log_eta_pair);
            gaussians.push(fused);
        }
    }
    let log_eta = math::log_sum_exp(&log_terms);
    if !log_eta.is_finite() {
        return Err(Error::IncompatibleDensities {
            log_normalizer: log_eta,
            best_log_eta: log_terms.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        });
    }
    let weights = math::normalize_log_weights(&log_terms);
    let fused = GaussianMixture::new(weights.into_iter().zip(gaussians).collect())?;
    Ok((fused, log_eta))
}

/// GCI fusion of two normalized mixtures: the normalized mixture
/// proportional to p1^w1 p2^w2 and the normalizing integral eta.
///
/// An eta below 1e-300 signals numerically incompatible densities.
pub fn gci_fuse_gaussian_mixtures(
    p1: &GaussianMixture,
    w1: f64,
    p2: &GaussianMixture,
    w2: f64,
) -> Result<(GaussianMixture, f64)> {
    let (fused, log_eta) = log_gci_fuse_gaussian_mixtures(p1, w1, p2, w2)?;
    let eta = math::exp(log_eta);
    if eta < ETA_FLOOR {
        return Err(Error::IncompatibleDensities {
            log_normalizer: log_eta,
            best_log_eta: log_eta,
        });
    }
    Ok((fused, eta))
}

/// mean <- F mean, P <- F P F' + Q.
pub fn kalman_predict(g: &Gaussian, f: &DMatrix<f64>, q: &DMatrix<f64>) -> Result<Gaussian> {
    let d = g.dim();
    if f.nrows() != d || f.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: f.nrows().max(f.ncols()),
        });
    }
    if q.nrows() != d || q.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: q.nrows().max(q.ncols()),
        });
    }
    let mean = f * g.mean();
    let cov = symmetrize(&(f * g.cov() * f.transpose() + q));
    Gaussian::new(mean, cov)
}

/// Conjugate Gaussian measurement update.
///
/// Returns the posterior and the predictive likelihood
/// N(z; H m, H P H' + R). The covariance uses the Joseph form.
pub fn kalman_update(
    g: &Gaussian,
    z: &DVector<f64>,
    h: &DMatrix<f64>,
    r: &DMatrix<f64>,
) -> Result<(Gaussian, f64)> {
    let (posterior, log_lik) = kalman_update_log(g, z, h, r)?;
    Ok((posterior, math::exp(log_lik)))
}

/// [`kalman_update`] with the likelihood in log domain.
pub fn kalman_update_log(
    g: &Gaussian,
    z: &DVector<f64>,
    h: &DMatrix<f64>,
    r: &DMatrix<f64>,
) -> Result<(Gaussian, f64)> {
    let d = g.dim();
    let m = z.len();
    if h.nrows() != m || h.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: h.ncols(),
        });
    }
    if r.nrows() != m || r.ncols() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            got: r.nrows(),
        });
    }
    let innov_cov = symmetrize(&(h * g.cov() * h.transpose() + r));
    let chol = innov_cov.clone().cholesky().ok_or(Error::SingularMatrix)?;
    let predicted_z = h * g.mean();
    let innovation = z - &predicted_z;
    let gain = (chol.solve(&(h * g.cov()))).transpose();
    let mean = g.mean() + &gain * &innovation;
    let eye = DMatrix::identity(d, d);
    let ikh = &eye - &gain * h;
    let cov = &ikh * g.cov() * ikh.transpose() + &gain * r * gain.transpose();
    let maha = innovation.dot(&chol.solve(&innovation));
    let log_lik = -0.5 * (m as f64 * math::LN_2PI + log_det(&chol) + maha);
    Ok((Gaussian::from_validated(mean, cov), log_lik))
}
