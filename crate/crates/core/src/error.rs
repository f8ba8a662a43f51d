use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("variable index {var} out of range for {nvars} variables")]
    VarOutOfRange { var: usize, nvars: usize },

    #[error("product of an empty list of polynomials")]
    EmptyProduct,

    #[error("scale must be positive, got {0}")]
    NonPositiveScale(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("ambiguous classification: boundary polynomials {indices:?} are not separated at this point")]
    Ambiguous { indices: Vec<usize> },

    #[error("region is not certified: {0}")]
    Uncertified(String),

    #[error("region Euler characteristic did not stabilize up to resolution {max_res} (last values {last:?})")]
    EulerNotConverged { max_res: usize, last: Vec<i64> },

    #[error("basis matrix is rank deficient ({0}); try a lower degree")]
    RankDeficient(String),

    #[error("could not choose T: grid maximum of the boundary product is {0}, region has empty interior")]
    EmptyInterior(f64),

    #[error("vertical spec invalid, condition ({condition}): {message}")]
    InvalidVerticalSpec { condition: u8, message: String },

    #[error("sampling converged for only {got} of {requested} seeds")]
    LowYield { got: usize, requested: usize },

    #[error("surface touches the bounding box boundary; enlarge the box")]
    TouchesBoundary,

    #[error("non-manifold edge ({0}, {1}) with {2} incident triangles")]
    NonManifoldEdge(usize, usize, usize),

    #[error("empty mesh")]
    EmptyMesh,

    #[error("sweep is not generic near x1 = {at}: {message}; rotate the sweep axis")]
    NonGenericSweep { at: f64, message: String },

    #[error("not supported: {0}")]
    NotSupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
