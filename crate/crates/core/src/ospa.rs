//! Optimal sub-pattern assignment (OSPA) distance between finite sets
//! of state vectors.
//!
//! Base distance is Euclidean on the position components (the first
//! two state entries); the optimal pairing is solved exactly.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DVector;

use crate::assignment::hungarian;
use crate::error::{Error, Result};
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OspaParams {
    /// Cut-off distance (m).
    pub cutoff: f64,
    /// Order parameter, >= 1.
    pub order: f64,
}

impl OspaParams {
    pub fn new(cutoff: f64, order: f64) -> Result<Self> {
        if !(cutoff > 0.0) {
            return Err(Error::InvalidParameter("OSPA cutoff must be positive"));
        }
        if !(order >= 1.0) {
            return Err(Error::InvalidParameter("OSPA order must be >= 1"));
        }
        Ok(Self { cutoff, order })
    }
}

fn position_distance(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let d = a.len().min(b.len()).min(2);
    let mut sq = 0.0;
    for i in 0..d {
        let diff = a[i] - b[i];
        sq += diff * diff;
    }
    math::sqrt(sq)
}

/// OSPA distance: optimal assignment of the smaller set into the
/// larger under the cut-off distance, cardinality mismatches penalized
/// at the cut-off, normalized by the larger cardinality. Both sets
/// empty gives zero by convention.
pub fn ospa_distance(x: &[DVector<f64>], y: &[DVector<f64>], params: &OspaParams) -> Result<f64> {
    for v in x.iter().chain(y.iter()) {
        if v.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidParameter("OSPA inputs must be finite"));
        }
    }
    if x.is_empty() && y.is_empty() {
        return Ok(0.0);
    }
    let n = x.len().max(y.len());
    let cut_pow = math::powf(params.cutoff, params.order);
    // Square matrix padded with cut-off^p for unmatched slots.
    let mut costs = vec![cut_pow; n * n];
    for (i, xi) in x.iter().enumerate() {
        for (j, yj) in y.iter().enumerate() {
            let d = position_distance(xi, yj).min(params.cutoff);
            costs[i * n + j] = math::powf(d, params.order);
        }
    }
    let assignment = hungarian(&costs, n)?;
    // Summing the chosen costs in sorted order keeps the result exactly
    // symmetric in the arguments.
    let mut chosen: Vec<f64> = assignment
        .iter()
        .enumerate()
        .map(|(i, &j)| costs[i * n + j])
        .collect();
    chosen.sort_by(f64::total_cmp);
    let total: f64 = chosen.iter().sum();
    Ok(math::powf(total / n as f64, 1.0 / params.order))
}
