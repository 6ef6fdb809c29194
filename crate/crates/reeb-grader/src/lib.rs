//! Graded ranks of cylindrical contact homology for quasi-regular contact
//! manifolds presented as circle (orbi)bundles over toric or homogeneous
//! symplectic bases.
//!
//! The pipeline: model the symplectic base ([`orbifold_base`]), grade Reeb
//! orbit spaces by their Maslov indices ([`boothby_wang`]), certify that the
//! differential vanishes ([`moduli`]), and assemble the graded ranks
//! ([`homology_engine`]). An independent numeric index engine for paths of
//! symplectic matrices lives in [`symplectic_paths`].
//!
//! Everything downstream of the base model is exact integer/rational
//! arithmetic; floating point appears only inside the path index engine.

pub mod boothby_wang;
pub mod cli;
pub mod homology_engine;
pub mod moduli;
pub mod orbifold_base;
pub mod symplectic_paths;

use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),

    /// det(Phi(t) - I) vanishes on an interval; the path must be perturbed
    /// by the caller before the index is meaningful.
    #[error("degenerate path: determinant of Phi(t) - I vanishes on an interval around t = {t}; perturb the path to one with regular crossings")]
    DegeneratePath { t: f64 },

    #[error("degenerate endpoint: det(Phi(T) - I) = 0; use rs_index")]
    DegenerateEndpoint,

    #[error("integrality violation on stratum '{stratum}': 2*{m}*{pairing}/{gamma} is not an integer (inconsistent base data)")]
    IntegralityViolation {
        stratum: String,
        m: u64,
        pairing: num_rational::Rational64,
        gamma: u64,
    },

    #[error("non-integral anticanonical weights: {0}")]
    NonIntegralWeights(String),

    #[error("well-definedness gate failed: sum of anticanonical weights {sum} <= 1 (pass the override flag to compute anyway; the result is not a contact invariant)")]
    GateFailed { sum: num_rational::Rational64 },

    #[error("non-terminating enumeration: stratum '{0}' has chern_pairing <= 0")]
    NonTerminating(String),

    #[error("base validation failed:\n{}", .0.join("\n"))]
    Validation(Vec<String>),

    #[error("config error:\n{}", .0.join("\n"))]
    Config(Vec<String>),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
