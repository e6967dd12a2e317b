use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid material: {0}")]
    InvalidMaterial(String),

    #[error("invalid defect configuration: {0}")]
    InvalidDefects(String),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("evaluation at {x:?} is within {radius:e} of a defect at {defect:?}")]
    NearDefect { x: [f64; 2], defect: [f64; 2], radius: f64 },

    #[error("point {0:?} lies outside the mesh")]
    OutsideMesh([f64; 2]),

    #[error("mesh generation failed: {0}")]
    Mesh(String),

    #[error("unknown boundary loop {0}")]
    UnknownLoop(usize),

    #[error("linear solve failed: {0}")]
    Solver(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),

    #[error("unknown channel `{0}`")]
    UnknownChannel(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("field table: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Fmt(#[from] std::fmt::Error),
}
