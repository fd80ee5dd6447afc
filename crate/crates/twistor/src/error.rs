use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
#[error("syntax error at byte {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum EvalError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("denominator below floor")]
    DenominatorFloor,
    #[error("fractional power of negative base {0}")]
    NegativeFractionalPower(f64),
    #[error("evaluation too close to a branch cut")]
    BranchCut,
    #[error("logarithm of non-positive value {0}")]
    LogDomain(f64),
    #[error("non-finite intermediate value")]
    NonFinite,
    #[error("path integral endpoint has a non-real coordinate")]
    ComplexPathIntegral,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("domain guard violation: {0}")]
    Guard(String),
    #[error("frame construction failed: {0}")]
    Frame(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("expression-size budget exceeded: {0}")]
    Budget(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
