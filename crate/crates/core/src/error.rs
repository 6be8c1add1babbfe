use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised anywhere in the solver pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("quadtree: {0}")]
    Quadtree(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("model error: {0}")]
    Model(String),

    #[error("ill-conditioned element {element}: {message}")]
    IllConditioned { element: usize, message: String },

    #[error("element decomposition failed: {0}")]
    Decomposition(String),

    #[error("mass matrix solve failed: {0}")]
    MassSolve(String),

    #[error("singular system: {0}")]
    SingularSystem(String),

    #[error("solver failure: {0}")]
    Solver(String),

    #[error("point ({x}, {y}) is outside every element")]
    Location { x: f64, y: f64 },

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("verification: {0}")]
    Verification(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}
