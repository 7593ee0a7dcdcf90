//! Error type shared by every module of the crate.

use crate::copula::Family;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A model or margin was constructed with parameters outside its range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A function argument fell outside its mathematical domain.
    #[error("{name} = {value} is outside {range}")]
    OutOfDomain {
        name: &'static str,
        value: f64,
        range: &'static str,
    },

    /// The operation is undefined for this dependence structure
    /// (e.g. generator evaluation on a comonotonic model).
    #[error("operation is not defined for the {family} copula")]
    UnsupportedFamily { family: Family },

    /// Joint survival evaluation expands into 2^d inclusion-exclusion terms.
    #[error("dimension {dim} exceeds the survival-evaluation cap of {max}")]
    DimensionTooLarge { dim: usize, max: usize },

    /// No tabulated closed form exists for this (family, dimension) pair.
    #[error("no closed-form Value-at-Risk for {family} in dimension {dim}")]
    NoClosedForm { family: Family, dim: usize },

    /// A root-finding target lies outside the attainable range.
    #[error("no solution: {0}")]
    NoSolution(String),

    /// A sample matrix on the wrong scale was supplied.
    #[error("expected a {expected}-scale sample matrix")]
    ScaleMismatch { expected: &'static str },

    /// Too few Monte Carlo draws landed in the conditioning band.
    #[error(
        "band starvation: {rows} draws in a band of width {band} at level {alpha} \
         after {doublings} widenings (need at least 200)"
    )]
    BandStarvation {
        alpha: f64,
        band: f64,
        rows: usize,
        doublings: u32,
    },
}
