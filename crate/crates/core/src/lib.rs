//! Multi-object densities over labeled random finite sets, local
//! labeled multi-Bernoulli (LMB) filtering, and distributed fusion by
//! Generalized Covariance Intersection (GCI).
//!
//! The crate provides:
//!
//! * Gaussian / Gaussian-mixture primitives including fractional
//!   exponentiation and pairwise GCI fusion ([`gaussian`]);
//! * the LMB / GLMB / GMB / MB density family and the structural
//!   transformations between them ([`labeled_rfs`]);
//! * a Gaussian-mixture LMB tracker ([`lmb_filter`]);
//! * robust label-free GCI fusion of GLMB-family posteriors with
//!   labeled reconstruction, plus the classical label-wise LMB fusion
//!   baseline ([`fusion`]);
//! * an exact finite-grid multi-object calculus used as the ground
//!   truth for GCI coefficients, divergences and the label
//!   inconsistency indicator ([`diagnostics`]);
//! * the OSPA metric ([`ospa`]).
//!
//! Everything is `no_std` + `alloc`; scalar math is routed through
//! `libm` so results are bit-identical across platforms.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod assignment;
pub mod diagnostics;
pub mod error;
pub mod fusion;
pub mod gaussian;
pub mod labeled_rfs;
pub mod lmb_filter;
pub mod math;
pub mod ospa;

pub use error::{Error, Result};
