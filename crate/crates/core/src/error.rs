use thiserror::Error;

/// Errors raised by the kinematic solvers and the geometry loader.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum KinematicsError {
    #[error("missing geometry key `{0}`")]
    MissingKey(String),

    #[error("unknown geometry key `{0}`")]
    UnknownKey(String),

    #[error("duplicate geometry key `{0}`")]
    DuplicateKey(String),

    #[error("line {line}: expected `name = value`, got `{text}`")]
    MalformedLine { line: usize, text: String },

    #[error("non-numeric value for `{key}`: `{value}`")]
    NonNumeric { key: String, value: String },

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("polynomial has degree 0 after trimming")]
    ConstantPolynomial,

    #[error("non-finite polynomial coefficient at index {0}")]
    NonFiniteCoefficient(usize),

    #[error(
        "sampled function is not a polynomial of degree <= {degree} (tail/head ratio {ratio:e})"
    )]
    InterpolationFailure { degree: usize, ratio: f64 },

    #[error("negative radicand {value:e} for leg {leg}")]
    NegativeRadicand { leg: &'static str, value: f64 },

    #[error("configuration index s1 = {given} contradicts the leg I sign rule")]
    SignRuleViolation { given: i8 },

    #[error(
        "orientation {alpha} does not satisfy the coupling constraint (residual {residual:e})"
    )]
    CouplingViolated { alpha: f64, residual: f64 },

    #[error("orientation is singular: R1 cos(alpha) = r1")]
    SingularOrientation,

    #[error("degenerate elimination denominator {value:e}")]
    DegenerateDenominator { value: f64 },

    #[error("leg offsets coincide: D1 - d1 = D2 - d2")]
    CoincidentOffsets,

    #[error("orientation {alpha} makes the coupling ellipse degenerate (sin(alpha) = 0)")]
    DegenerateOrientation { alpha: f64 },

    #[error("orientation {alpha} is unreachable by leg I")]
    UnreachableOrientation { alpha: f64 },
}

pub type Result<T> = std::result::Result<T, KinematicsError>;

/// More than one candidate survived a working-mode filter.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{} solutions survive the selection filters", survivors.len())]
pub struct Ambiguous<T: std::fmt::Debug> {
    pub survivors: Vec<T>,
}

pub type Selection<T> = std::result::Result<Option<T>, Ambiguous<T>>;
