use thiserror::Error;

/// Errors surfaced by every pipeline in the crate.
///
/// Each variant carries a stable machine-readable code (see [`Error::code`])
/// which the command-line front end prints alongside the message.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("zero polynomial")]
    ZeroPolynomial,
    #[error("root iteration did not converge after {iterations} iterations at {prec_bits} bits")]
    NonConvergence { iterations: usize, prec_bits: u32 },
    #[error("degenerate map: {0}")]
    DegenerateMap(String),
    #[error("empty coefficient list")]
    EmptyInput,
    #[error("degree budget exceeded: {needed} > {cap}")]
    BudgetExceeded { needed: usize, cap: usize },
    #[error("orbit matching ambiguous near {0}")]
    OrbitMatchingAmbiguous(String),
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("fixed point is not repelling (|multiplier| = {0})")]
    NotRepelling(f64),
    #[error("Poincare series tail bound fails at order {0}")]
    SeriesDiverged(usize),
    #[error("no backward orbit entered the linearization domain within depth {0}")]
    DepthExceeded(usize),
    #[error("orbit passes within the exclusion radius of a critical point at index {0}")]
    CriticalCollision(usize),
    #[error("no good return time found up to index {0}")]
    NoReturnFound(usize),
    #[error("inverse branch tracking lost: {0}")]
    BranchLost(String),
    #[error("inverse iteration and Newton disagree at period {period} (distance {distance:e})")]
    NewtonDisagreement { period: usize, distance: f64 },
    #[error("asymptotic fit unstable: {0}")]
    FitUnstable(String),
    #[error("horseshoe branches overlap: {0}")]
    BranchOverlap(String),
    #[error("family is identically zero")]
    ZeroFamily,
    #[error("no rescaling candidate validated (base change hints: {hints:?})")]
    NoCandidates { hints: Vec<u32> },
    #[error("bad input: {0}")]
    BadInput(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::ZeroPolynomial => "ZeroPolynomial",
            Error::NonConvergence { .. } => "NonConvergence",
            Error::DegenerateMap(_) => "DegenerateMap",
            Error::EmptyInput => "EmptyInput",
            Error::BudgetExceeded { .. } => "BudgetExceeded",
            Error::OrbitMatchingAmbiguous(_) => "OrbitMatchingAmbiguous",
            Error::BadParameter(_) => "BadParameter",
            Error::NotRepelling(_) => "NotRepelling",
            Error::SeriesDiverged(_) => "SeriesDiverged",
            Error::DepthExceeded(_) => "DepthExceeded",
            Error::CriticalCollision(_) => "CriticalCollision",
            Error::NoReturnFound(_) => "NoReturnFound",
            Error::BranchLost(_) => "BranchLost",
            Error::NewtonDisagreement { .. } => "NewtonDisagreement",
            Error::FitUnstable(_) => "FitUnstable",
            Error::BranchOverlap(_) => "BranchOverlap",
            Error::ZeroFamily => "ZeroFamily",
            Error::NoCandidates { .. } => "NoCandidates",
            Error::BadInput(_) => "BadInput",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
