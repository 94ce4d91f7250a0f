//! Error types shared across the workbench.

use thiserror::Error;

/// Errors arising while loading or validating structures, teams, and
/// quantifier files.
#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {msg}")]
    Invalid { path: String, msg: String },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl LoadError {
    pub fn invalid(path: impl Into<String>, msg: impl Into<String>) -> Self {
        LoadError::Invalid {
            path: path.into(),
            msg: msg.into(),
        }
    }
}

/// Errors from term evaluation and Tarskian satisfaction.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("arity mismatch for `{symbol}`: expected {expected}, got {got}")]
    ArityMismatch {
        symbol: String,
        expected: usize,
        got: usize,
    },
    #[error("element `{0}` is not in the universe")]
    UnknownElement(String),
    #[error("formula is not first-order in this sense: {0}")]
    WrongLogic(String),
    #[error("unknown quantifier `{0}`")]
    UnknownQuantifier(String),
    #[error("quantifier `{name}` has type {ty:?}, which this engine does not support: {why}")]
    UnsupportedQuantifierType {
        name: String,
        ty: Vec<usize>,
        why: String,
    },
    #[error("free variable `{0}` is outside the requested domain")]
    FreeVariableOutsideDomain(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("search space too large: {0}")]
    TooLarge(String),
    #[error(transparent)]
    Team(#[from] TeamError),
}

/// Errors from team construction and team operations.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TeamError {
    #[error("team over {vars} variables with universe size {universe} needs {slots} assignment slots; at most {max} are supported")]
    TooLarge {
        vars: usize,
        universe: usize,
        slots: u32,
        max: u32,
    },
    #[error("domains differ: {0:?} vs {1:?}")]
    DomainMismatch(Vec<String>, Vec<String>),
    #[error("universes differ")]
    UniverseMismatch,
    #[error("variable tuple {0:?} is not contained in the team domain")]
    VariablesOutsideDomain(Vec<String>),
    #[error("tuple length {got} does not match expected {expected}")]
    TupleLength { expected: usize, got: usize },
    #[error("repeated variable `{0}` in tuple")]
    RepeatedVariable(String),
    #[error("function is undefined on a row of the team")]
    UndefinedOnRow,
    #[error("element `{0}` is not in the universe")]
    UnknownElement(String),
}
