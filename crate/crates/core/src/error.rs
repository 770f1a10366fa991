use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("singular Gramian{}", index.map(|i| format!(" at grid index {i}")).unwrap_or_default())]
    SingularGramian { index: Option<usize> },

    #[error("spectral parameter {z} lies on a pole of the dressing factor")]
    PoleEvaluation { z: num_complex::Complex64 },

    #[error("degenerate soliton parameters: pairs {0} and {1} coincide")]
    DegenerateParams(usize, usize),

    #[error("seed potential outside the small-data regime: {0}")]
    SeedTooLarge(String),

    #[error("field does not decay at the grid edges (edge/max = {ratio:.3e}, allowed {allowed:.1e})")]
    EdgeDecay { ratio: f64, allowed: f64 },

    #[error("vector {index} is not an eigenfunction (ZS residual {residual:.3e})")]
    NotAnEigenfunction { index: usize, residual: f64 },

    #[error("time step {dt} violates the stability bound {bound:.3e}")]
    CflViolation { dt: f64, bound: f64 },

    #[error("boundary contamination at t = {t}: edge level {level:.3e}")]
    BoundaryContamination { t: f64, level: f64 },

    #[error("eigenvalue count mismatch: Newton found {newton}, winding number {winding}")]
    CountMismatch { newton: usize, winding: i64 },

    #[error("{z} is not an eigenvalue (|a| = {residual:.3e})")]
    NotAnEigenvalue { z: num_complex::Complex64, residual: f64 },

    #[error("degenerate eigenvalues {0} and {1}")]
    DegenerateEigenvalues(usize, usize),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("malformed field file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at(stage: &'static str) -> impl FnOnce(Error) -> Error {
        move |source| Error::Stage {
            stage,
            source: Box::new(source),
        }
    }

    /// Innermost error, looking through stage labels.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }

    /// Whether the error reflects bad input rather than a numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self.root(),
            Error::InvalidInput(_)
                | Error::GridMismatch(_)
                | Error::Format(_)
                | Error::Io(_)
                | Error::DegenerateParams(..)
                | Error::CflViolation { .. }
                | Error::EdgeDecay { .. }
                | Error::SeedTooLarge(_)
                | Error::InsufficientData(_)
        )
    }
}
