use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite complex value {0}")]
    NonFinite(String),

    #[error("point {z} lies outside the closed unit disk (|z| = {modulus})")]
    OutsideDisk { z: String, modulus: f64 },

    #[error("point {z} must lie in the open unit disk (|z| = {modulus})")]
    NotInOpenDisk { z: String, modulus: f64 },

    #[error("Blaschke factor parameter must satisfy |a| < 1, got |a| = {0}")]
    FactorOutsideDisk(f64),

    #[error("degenerate arc: normalized length must lie in (0, 1]")]
    DegenerateArc,

    #[error("invalid family parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("{name} must be at least {min}, got {got}")]
    TooSmall {
        name: &'static str,
        min: usize,
        got: usize,
    },

    #[error("hypothesis not met ({criterion}): {reason}")]
    HypothesisNotMet {
        criterion: &'static str,
        reason: String,
    },

    #[error("composition degree {required} exceeds the degree cap {cap}")]
    DegreeCapExceeded { required: u128, cap: u64 },

    #[error("quadrature did not reach tolerance {tolerance:e} within {max_nodes} nodes")]
    QuadratureNotConverged { tolerance: f64, max_nodes: usize },
}
