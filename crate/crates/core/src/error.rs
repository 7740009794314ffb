//! Crate-wide error type.

/// Everything that can go wrong across the crate, from shape checks on
/// tensor blocks to malformed input files.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("depth mismatch: expected {expected}, got {got}")]
    DepthMismatch { expected: usize, got: usize },

    #[error("level {level} out of range for depth {depth}")]
    LevelOutOfRange { level: usize, depth: usize },

    #[error("a level-{level} block over {dim} letters is too large to allocate")]
    BlockTooLarge { dim: usize, level: usize },

    #[error("coefficient count {got} does not match d^n = {expected}")]
    BlockSizeMismatch { expected: usize, got: usize },

    #[error("letter {letter} out of range 1..={dim}")]
    LetterOutOfRange { letter: usize, dim: usize },

    #[error("path length must be positive, got {0}")]
    NonPositiveLength(f64),

    #[error("a path needs at least two distinct vertices")]
    DegeneratePath,

    #[error("cannot normalise a vector of zero length")]
    ZeroVector,

    #[error("insertion position {position} out of range 1..={max}")]
    PositionOutOfRange { position: usize, max: usize },

    #[error("signature level is numerically zero; the insertion problem is degenerate")]
    DegenerateSignature,

    #[error("minimiser is not unique: the contraction is numerically zero")]
    AmbiguousMinimum,

    #[error("insertion matrix would need {entries} entries, over the limit of {limit}")]
    MatrixTooLarge { entries: u128, limit: u128 },

    #[error("theta must lie strictly between 0 and 1, got {0}")]
    ThetaOutOfRange(f64),

    #[error("need 0 <= s < t <= 1, got s = {s}, t = {t}")]
    BadInterval { s: f64, t: f64 },

    #[error("turning angle must be nonzero")]
    ZeroAngle,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("level {level} of the signature is zero; cannot estimate a length from it")]
    ZeroLevel { level: usize },

    #[error("line {line}: expected {expected} fields, got {got}")]
    WrongFieldCount { line: usize, expected: usize, got: usize },

    #[error("line {line}, field {column}: cannot parse {text:?} as a number")]
    BadNumber { line: usize, column: usize, text: String },

    #[error("all points coincide; nothing to normalise")]
    AllPointsEqual,

    #[error("unsupported signature file version {0:?}")]
    UnsupportedVersion(String),

    #[error("malformed signature file: {0}")]
    MalformedSignature(String),

    #[error("level {level}: expected {expected} coefficients, got {got}")]
    LevelSizeMismatch { level: usize, expected: usize, got: usize },

    #[error("level {level} contains a non-finite coefficient")]
    NonFinite { level: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
