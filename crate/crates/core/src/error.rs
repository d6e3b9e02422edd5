use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid equation: {0}")]
    InvalidEquation(String),

    #[error("invalid planar system: {0}")]
    InvalidSystem(String),

    #[error("leading coefficient is not certified non-vanishing on [0, omega] (certified min |P_n| = {certified_min:.6e})")]
    VanishingLeading { certified_min: f64 },

    #[error("step limit of {max_steps} exceeded at t = {t}")]
    StepLimitExceeded { t: f64, max_steps: usize },

    #[error("|z| = {modulus} lies inside the disk of radius rho = {rho}")]
    InsideDisk { modulus: f64, rho: f64 },

    #[error("solution starting at {c} escapes before the end of the horizon")]
    EscapedDomain { c: String },

    #[error("a contour point leaves the domain of the displacement map")]
    EscapeOnContour,

    #[error("displacement vanishes (|q| = {abs_q:.3e}) on the contour")]
    ZeroOnContour { abs_q: f64 },

    #[error("Newton iteration diverged: {0}")]
    Diverged(String),

    #[error("derivative of the displacement is numerically singular (|q'| = {abs_dq:.3e}) at {c}")]
    SingularDerivative { c: String, abs_dq: f64 },

    #[error("K must be positive, got {0}")]
    NonpositiveK(f64),

    #[error("K = {k} must exceed max |P0| = {p0_max}")]
    BadK { k: f64, p0_max: f64 },

    #[error("{what} does not support degree n = {n}")]
    UnsupportedDegree { what: String, n: usize },

    #[error("C = {0} is outside the admissible range C > 1")]
    BadC(f64),

    #[error("R_(n-1) changes sign on the unit circle (certified min |R| = {certified_min:.6e})")]
    IndefiniteLeading { certified_min: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
