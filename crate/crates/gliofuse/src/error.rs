//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    // Volume / NIfTI parsing
    #[error("file truncated: need {needed} bytes, got {got}")]
    TruncatedFile { needed: usize, got: usize },
    #[error("bad magic bytes {0:?}, expected \"n+1\\0\" or \"ni1\\0\"")]
    BadMagic([u8; 4]),
    #[error("unsupported NIfTI datatype code {0}")]
    UnsupportedDatatype(i16),
    #[error("volume has {0} non-singleton dimensions, at most 3 supported")]
    DimOverflow(usize),
    #[error("empty volume")]
    EmptyVolume,
    #[error("volume contains non-finite values")]
    NonFiniteData,

    // Wavelet / fusion
    #[error("empty slice")]
    EmptySlice,
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("expected 4 inputs, got {0}")]
    WrongArity(usize),

    // ROI handling
    #[error("ROI{0} is empty")]
    EmptyRoi(u8),
    #[error("empty mask")]
    EmptyMask,

    // PCA
    #[error("need at least 2 rows to fit, got {0}")]
    TooFewRows(usize),
    #[error("requested {requested} components, model has {available}")]
    KTooLarge { requested: usize, available: usize },

    // Classifiers
    #[error("training labels contain a single class")]
    DegenerateLabels,
    #[error("input has {got} features, model expects {expected}")]
    WidthMismatch { expected: usize, got: usize },

    // Evaluation
    #[error("prediction and truth lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("need both classes present")]
    OneClassOnly,
    #[error("zero variance input")]
    ZeroVariance,
    #[error("need at least {needed} values, got {got}")]
    TooFew { needed: usize, got: usize },
    #[error("class with {size} members cannot be split into {k} folds")]
    ClassTooSmall { size: usize, k: usize },

    // Pipeline / I/O
    #[error("feature table header does not match the feature manifest: {0}")]
    SchemaMismatch(String),
    #[error("missing input: {0}")]
    MissingInput(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}
