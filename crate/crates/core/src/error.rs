use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("cohomology classes live in different algebras (k = {left} vs k = {right})")]
    ContextMismatch { left: usize, right: usize },

    #[error("invalid generator index list {indices:?}: {reason}")]
    InvalidIndices { indices: Vec<usize>, reason: &'static str },

    #[error("matrix is not unitary: max |U U* - I| = {defect:e} exceeds {tol:e}")]
    NotUnitary { defect: f64, tol: f64 },

    #[error("matrix is not Hermitian: max |A - A*| = {defect:e} exceeds {tol:e}")]
    NotHermitian { defect: f64, tol: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: String, found: String },

    #[error("eigen-residual {residual:e} exceeds {tol:e}")]
    Residual { residual: f64, tol: f64 },

    #[error("eigenvalue {eigenvalue} lies within {tol:e} of the window edge ±{epsilon}; perturb epsilon")]
    BoundaryAmbiguity { eigenvalue: f64, epsilon: f64, tol: f64 },

    #[error("step {from} -> {to} has operator-norm jump {jump} >= eta = {eta}; refine the path")]
    RefinementRequired {
        from: String,
        to: String,
        jump: f64,
        eta: f64,
    },

    #[error("endpoint {id} has eigenvalue {eigenvalue} inside [-{eta}, {eta}]")]
    EndpointDegeneracy { id: String, eigenvalue: f64, eta: f64 },

    #[error("grid of {points} points exceeds the limit of {limit}")]
    GridTooLarge { points: u128, limit: u128 },

    #[error("unknown point id {0:?}")]
    UnknownId(String),

    #[error("at grid point {id}: {source}")]
    AtPoint {
        id: String,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn at_point(id: impl Into<String>, source: Error) -> Self {
        Error::AtPoint {
            id: id.into(),
            source: Box::new(source),
        }
    }
}
