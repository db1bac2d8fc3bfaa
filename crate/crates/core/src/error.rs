use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrobError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("denominator contains D at position {pos}")]
    DenominatorContainsD { pos: usize },
    #[error("leading coefficient vanishes at t = 0")]
    ZeroLeadingCoeffAtOrigin,
    #[error("operator is not divisible by (t - {0})")]
    NotDivisible(String),
    #[error("exponents {0} and {1} differ by an integer within tolerance but not exactly")]
    AmbiguousExponentLattice(String, String),
    #[error("exponent {0} is not admissible: I(rho + {1}) = 0")]
    ExponentNotAdmissible(String, usize),
    #[error("precision underflow: {0}")]
    PrecisionUnderflow(String),
    #[error("point lies outside the disk of convergence (|t| = {t}, radius = {radius})")]
    OutsideConvergenceDisk { t: f64, radius: f64 },
    #[error("series truncation insufficient: tail estimate {0:e}")]
    TruncationInsufficient(f64),
    #[error("path passes too close to the singularity {0}")]
    PathTooCloseToSingularity(String),
    #[error("step size underflow near {0}")]
    StepUnderflow(String),
    #[error("not a reflection point: variation rank {0}")]
    NotReflectionPoint(usize),
    #[error("normalization impossible: {0}")]
    NormalizationImpossible(String),
    #[error("singular point {0} is not regular singular")]
    NotRegularSingular(String),
    #[error("sign condition violated in coefficient tail ({0} sign changes)")]
    SignConditionViolated(usize),
    #[error("coefficient ratio sequence diverges for k = {0}")]
    DivergentRatio(usize),
    #[error("irreducibility violated: alpha_{0} - beta_{1} is an integer")]
    IrreducibilityViolated(usize, usize),
    #[error("rank detection ambiguous: singular values {0:e} and {1:e} straddle the threshold")]
    RankDetectionAmbiguous(f64, f64),
    #[error("gamma integral does not converge at s = {0}")]
    ConvergenceDomainViolated(String),
    #[error("quadrature stagnated with error {0:e}")]
    QuadratureStagnation(f64),
    #[error("leading coefficient of the series is zero")]
    LeadingCoefficientZero,
    #[error("reflection hypothesis fails: {0}")]
    ReflectionHypothesisFails(String),
    #[error("precision insufficient: confidence {0} bits")]
    PrecisionInsufficient(i64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unknown catalog entry {0}")]
    UnknownCatalog(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, FrobError>;
