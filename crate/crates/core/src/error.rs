use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("unknown chart {0}")]
    UnknownChart(usize),
    #[error("point {coords:?} outside the domain of chart {chart}")]
    DomainViolation { chart: usize, coords: Vec<f64> },
    #[error("valence mismatch: {0}")]
    ValenceMismatch(String),
    #[error("metric is singular at the sample point")]
    SingularMetric,
    #[error("weight is not positive: h = {0}")]
    InvalidWeight(f64),
    #[error("vertical distribution is not 2-dimensional (singular values {0:?})")]
    DegenerateVerticalDistribution(Vec<f64>),
    #[error("restriction of the 2-form to the horizontal space is degenerate")]
    DegenerateHorizontal,
    #[error("gauge data disagree across charts: residual {0:e}")]
    GaugeInconsistency(f64),
    #[error("curvature form is not J-invariant: residual {0:e}")]
    NonInvariantCurvature(f64),
    #[error("Kuo hypothesis violated: {name} residual {residual:e}")]
    KuoHypothesisViolated { name: String, residual: f64 },
    #[error("sphere parameter has norm {0}, expected 1")]
    NotUnitSphereParameter(f64),
    #[error("calibration failed: residuals {0:?} for kappa in {{1, 2}}")]
    CalibrationFailure(Vec<f64>),
    #[error("unsupported dimension parameter n = {0}")]
    UnsupportedDimension(usize),
    #[error("unknown model '{0}'")]
    UnknownModel(String),
    #[error("unknown suite '{0}'")]
    UnknownSuite(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("i/o failure: {0}")]
    IoFailure(String),
}

pub type Result<T> = std::result::Result<T, GeomError>;
