use thiserror::Error;

/// Syntax error with a byte offset into the source.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

impl ParseError {
    pub fn new(pos: usize, msg: impl Into<String>) -> Self {
        ParseError { pos, msg: msg.into() }
    }
}

/// Errors raised by model construction, law checking and (co)recursion.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NomError {
    #[error("unknown property `{0}`")]
    UnknownProperty(String),
    #[error("recursor id {0} out of range")]
    BadRecursor(usize),
    #[error("no corecursor with id {0}")]
    BadCorecursor(usize),
    #[error("model `{model}` lacks operation `{op}` needed by {needed_by}")]
    MissingOp { model: String, op: &'static str, needed_by: String },
    #[error("model `{0}` has no support oracle; finiteness properties cannot be decided")]
    MissingSupport(String),
    #[error("alpha-instability: recursion result differs on an alpha-variant of {0}")]
    AlphaInstability(String),
    #[error("cannot pick a fresh variable: {0}")]
    NoFreshVar(String),
    #[error("exact mode requires regular coterms")]
    NotRegular,
    #[error("coterm spec: {0}")]
    Spec(String),
    #[error("state space limit exceeded while materialising a coterm")]
    StateLimit,
    #[error("{0}")]
    Unsupported(String),
}
