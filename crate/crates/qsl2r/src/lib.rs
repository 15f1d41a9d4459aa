//! Truncated matrix models for the two-parameter deformation of SL(2,R).
//!
//! The deformation is parametrized by a quantization parameter `q > 0` and a
//! Mackey parameter `t`, with effective deformation parameter `q^t`.  Away
//! from the boundary lines `q = 1` and `t = 0` the fiber is the q-deformed
//! reduced group C*-algebra of SL(2,R); the boundary fibers are the classical
//! group, its motion group, and the transformation groupoid of SO(2) acting
//! on the 2-sphere.  Everything here is realized at "desk scale": finite
//! windows of K-types carrying banded generator matrices, with numerically
//! certified invariants.
//!
//! Module map:
//! - [`scalars`]: q-integers, the analytic coefficient eta, chart maps.
//! - [`modgen`]: builders for all five truncated module families.
//! - [`algcheck`]: defining-relation and unitarity verification.
//! - [`afield`]: the analytic family of induced modules and its
//!   specializations at boundary points.
//! - [`paramspace`]: the parameter space S, constraint blocks, J maps,
//!   spectrum enumeration, closure graphs.
//! - [`fieldsec`]: generator sections of the continuous field and their
//!   continuity / vanishing / equivariance certificates.
//! - [`mackey`]: the Mackey embedding, the bijection mu and its checks.
//! - [`ktheory`]: minimal-K-type strata and the K-theory bookkeeping.

pub mod afield;
pub mod algcheck;
pub mod fieldsec;
pub mod ktheory;
pub mod linalg;
pub mod mackey;
pub mod modgen;
pub mod paramspace;
pub mod scalars;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain violation: {0}")]
    Domain(String),

    #[error("ill-conditioned change of variables at K-type {ktype}: condition number {cond:.3e}")]
    IllConditioned { ktype: i64, cond: f64 },

    #[error("submodule invariance violated at K-type {ktype}: leakage {leakage:.3e} exceeds {tol:.3e}")]
    InvarianceViolation { ktype: i64, leakage: f64, tol: f64 },

    #[error("family mismatch: expected {expected}, got {got}")]
    FamilyMismatch { expected: String, got: String },

    #[error("invalid spectral point: {0}")]
    InvalidPoint(String),

    #[error("invalid spectrum label: {0}")]
    InvalidLabel(String),

    #[error("chart violation: {0}")]
    ChartViolation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
