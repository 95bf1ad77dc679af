use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by model construction and by the estimation/verification
/// operations. Empty result sets are legal values, never errors.
#[derive(Debug, Error)]
pub enum Error {
    #[error("duplicate {kind} name `{name}`")]
    DuplicateName { kind: &'static str, name: String },

    #[error("invalid {kind} name `{name}`: use letters, digits, `_` or `-`")]
    InvalidName { kind: &'static str, name: String },

    #[error("unknown state `{0}`")]
    UnknownState(String),

    #[error("unknown event `{0}`")]
    UnknownEvent(String),

    #[error("automaton has no initial state")]
    NoInitialState,

    #[error("invalid observation architecture: {0}")]
    Architecture(String),

    #[error("event `{0}` is observed by no site")]
    NotObservable(String),

    #[error("absorbing transition is undefined: SI-state {si} is critical, cannot record `{event}`")]
    AbsorbUndefined { si: String, event: String },

    #[error("corrupted SI-state: component {site} holds {len} events, threshold is {kappa}")]
    CorruptedSiState { site: usize, len: usize, kappa: usize },

    #[error("cannot parse SI-state `{text}`: {reason}")]
    SiStateParse { text: String, reason: String },

    #[error("trace is not in the plant language")]
    NotInLanguage,

    #[error("`{0}` is not a critical SI-state of this structure")]
    NotCritical(String),

    #[error("CSI-state `{0}` is outside the observer alphabet")]
    OutsideAlphabet(String),

    #[error("seed set is empty")]
    EmptySeeds,

    #[error("model: {0}")]
    Model(String),

    #[error("golden facts failed: {0}")]
    FactsFailed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
