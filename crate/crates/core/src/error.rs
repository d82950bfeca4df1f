use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("field lives on grid {field:#018x}, expected grid {grid:#018x}")]
    GridMismatch { field: u64, grid: u64 },

    #[error("shifted potential drops to {value} < 1 at r = {radius}; the shift V0 is too small")]
    ShiftViolation { radius: f64, value: f64 },

    #[error("nonlinearity `{0}` depends on the direction of x and cannot enter a radial solve")]
    NonRadial(String),

    #[error("H-matrix factorization failed at row {row} (pivot {pivot})")]
    LinearSolve { row: usize, pivot: f64 },

    #[error("no negative-energy point found for t <= {t_max}")]
    NegativeEnergyNotFound { t_max: f64 },

    #[error("mountain-pass path collapsed: path maximum {max_level} fell below eta/2 = {threshold}")]
    PathCollapse { max_level: f64, threshold: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
