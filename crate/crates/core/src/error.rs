use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid modulus sample `{name}`: {reason}")]
    InvalidSample { name: String, reason: String },

    #[error("invalid coordinate {index}: {reason}")]
    InvalidCoordinate { index: usize, reason: String },

    #[error("invalid family: {0}")]
    InvalidFamily(String),

    #[error("point vectors have length {x} and {y}, family has {n} coordinates")]
    LengthMismatch { x: usize, y: usize, n: usize },

    #[error("label `{label}` is not a point of coordinate {index}")]
    UnknownLabel { index: usize, label: String },

    #[error("point sets differ: {0}")]
    PointSetMismatch(String),

    #[error("sample is empty")]
    EmptySample,

    #[error("diagonal violation: psi({label},{label}) = {value}")]
    DiagonalViolation { label: String, value: f64 },

    #[error("quasi-constant must be at least 1, got {0}")]
    ConstantBelowOne(f64),

    #[error("{which} quasi-constant is infinite (witness {witness}); psi does not induce an equivalence relation")]
    InfiniteConstant { which: &'static str, witness: String },

    #[error("level sets are not nested at level {0}")]
    NotNested(usize),

    #[error("overlapping blocks: label `{0}` appears twice")]
    OverlappingBlocks(String),

    #[error("empty integer window")]
    EmptyWindow,

    #[error("weight stream for level {level} exhausted after coordinate {consumed} before the block sum reached 1")]
    StreamExhausted { level: u32, consumed: usize },

    #[error("negative value {value} at ({row},{col})")]
    NegativeValue { row: usize, col: usize, value: f64 },

    #[error("contraction ratio {0} outside [1/4, 1/2]")]
    RatioOutOfRange(f64),

    #[error("resolution guard violated: 4^-depth = {resolution} is not below min |s-t| = {min_gap}")]
    ResolutionGuard { resolution: f64, min_gap: f64 },

    #[error("pair ({s}, {t}) does not lie in a single window [i-1, i+1]")]
    PairOutsideWindow { s: f64, t: f64 },

    #[error("invalid piecewise modulus: {0}")]
    InvalidPiecewise(String),

    #[error("invalid Example-4 spec: {0}")]
    InvalidExample(String),

    #[error("modulus evaluates to {value} at t = {t}")]
    NegativeModulus { t: f64, value: f64 },

    #[error("f(b_{n}) = {value} is too small to form a ratio")]
    DegenerateRatio { n: usize, value: f64 },

    #[error("index {index} out of range (max {max})")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
