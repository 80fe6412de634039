//! Numerical harmonic analysis on dual pairs of locally compact abelian
//! groups: Fourier transforms of complex measures, averages against
//! sequences of probability measures, Wiener-type atom detection,
//! Koopman–von Neumann equivalence probes, and spectral limit checks for
//! contraction semigroups on finite-dimensional Hilbert spaces.
//!
//! The supported groups are the circle/integer pair, the self-dual real
//! line, finite cyclic groups, and finite products of these. Everything
//! here works at "desk scale": limits are probed along explicit schedules
//! of `N` values and reported as convergence verdicts, never asserted as
//! proved.

pub mod groups;
pub mod koopman;
pub mod linalg;
pub mod measures;
pub mod operators;
pub mod sequences;
pub mod wiener;

mod numeric;

pub use groups::{DualPair, GroupElement, Side};
pub use measures::ComplexMeasure;
pub use sequences::{ConvergenceVerdict, MeasureSequence, Schedule, VerdictStatus};

/// Errors shared by all modules.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("element `{element}` does not belong to the {side} side of pair {pair}")]
    ModelMismatch {
        pair: String,
        side: Side,
        element: String,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("oscillation budget exceeded: frequency {frequency} beyond declared band limit {band_limit}")]
    Oscillation { frequency: f64, band_limit: f64 },
    #[error("integrand overflow at {at}: |value| = {value:e}")]
    UnboundedIntegrand { at: String, value: f64 },
    #[error("function value {value} at {at} outside declared bound [0, {bound}]")]
    BoundViolation { at: String, value: f64, bound: f64 },
    #[error("c-value did not converge for required quotient {quotient}; sequence not verified good on the needed set")]
    NotGood { quotient: String },
    #[error("support violation: {0}")]
    SupportViolation(String),
    #[error("numerical instability: {0}")]
    NumericalInstability(String),
    #[error("eigenvalue clusters closer than twice the merge tolerance {tol:e}: {details}")]
    ClusterAmbiguity { tol: f64, details: String },
    #[error("precondition `{probe}` failed: {details}")]
    Precondition { probe: String, details: String },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
