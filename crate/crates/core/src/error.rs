use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("rotation angle {0} is too close to π for the principal logarithm")]
    AngleNearPi(f64),
    #[error("time step {0} s is outside (0, 0.1]")]
    InvalidTimeStep(f64),
    #[error("non-finite input: {0}")]
    NonFiniteInput(&'static str),
    #[error("innovation matrix is numerically singular (condition number {0:.3e})")]
    SingularInnovation(f64),
    #[error("measurement update needs at least one row")]
    NoMeasurements,
    #[error("invalid measurement noise variance {0}")]
    InvalidNoise(f64),
    #[error("gravity direction is at the antipode of the chart (z = {0})")]
    AntipodeSingularity(f64),
    #[error("gravity directions are antipodal")]
    AntipodalPair,
    #[error("pose samples do not cover t = {0}")]
    MissingPoseCoverage(f64),
    #[error("map holds {have} points but {need} were requested")]
    InsufficientMap { have: usize, need: usize },
    #[error("support points are degenerate (collinear or coincident)")]
    DegenerateCloud,
    #[error("residual {0:.3} m exceeds the innovation gate")]
    GatedOutlier(f64),
    #[error("plane fit is not valid for a measurement")]
    InvalidPlane,
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("dataset is corrupt: {0}")]
    DatasetCorrupt(String),
    #[error("filter diverged at t = {t:.3} s (position error {error:.1} m)")]
    FilterDiverged { t: f64, error: f64 },
    #[error("configurations refer to different datasets: {0} vs {1}")]
    MismatchedDataset(String, String),
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
