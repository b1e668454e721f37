use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point at distance {distance:.3e} is outside the tubular neighborhood (radius {radius:.3e})")]
    OutsideTubularNeighborhood { distance: f64, radius: f64 },
    #[error("vector is not tangent: normal component {normal:.3e}")]
    NotTangent { normal: f64 },
    #[error("chart radius {radius} exceeds the Fermi radius {fermi_radius}")]
    RadiusTooLarge { radius: f64, fermi_radius: f64 },
    #[error("invalid mesh resolution h = {0}")]
    InvalidResolution(f64),
    #[error("dirichlet traces differ by {0:.3e}")]
    TraceMismatch(f64),
    #[error("map is not approximately harmonic: residual {0:.3e}")]
    NotApproxHarmonic(f64),
    #[error("window [{lo}, {hi}] is outside [{min}, {max}]")]
    WindowOutOfRange { lo: f64, hi: f64, min: f64, max: f64 },
    #[error("window is empty")]
    EmptyWindow,
    #[error("window too short: need length {need:.3}, have {have:.3}")]
    WindowTooShort { need: f64, have: f64 },
    #[error("solver did not converge in {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("energy {energy:.4} exceeds the gate {gate:.4}")]
    EnergyGateExceeded { energy: f64, gate: f64 },
    #[error("generalized balls {0} and {1} are not disjoint")]
    BallsNotDisjoint(usize, usize),
    #[error("trace length {length:.4} exceeds {bound:.4}")]
    TraceTooLong { length: f64, bound: f64 },
    #[error("trace leaves the Fermi chart")]
    OutsideFermiChart,
    #[error("traces are too far apart: {0:.3e}")]
    TracesTooFar(f64),
    #[error("gate violated: {0}")]
    GateViolation(String),
    #[error("mollification scale {0} is too large")]
    ScaleTooLarge(f64),
    #[error("interval cover failed: {0}")]
    CoverFailure(String),
    #[error("iteration budget exhausted")]
    BudgetExhausted,
    #[error("boundary trace leaves Gamma by {0:.3e}")]
    TraceOffGamma(f64),
    #[error("no valid blow-up radius above the mesh floor")]
    NoValidRadius,
    #[error("invalid config: {key}: {reason}")]
    Config { key: String, reason: String },
    #[error("io: {0}")]
    Io(String),
    #[error("parse: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
