use thiserror::Error;

/// Failure while loading or validating a model file.
#[derive(Debug, Error)]
pub enum LoadError {
    #[error("model is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("rule for `{rule}`: {message}")]
    Rule { rule: String, message: String },
    #[error("{0}")]
    Schema(String),
}

/// Runtime failure of an engine operation.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("stimulus `{0}` is not enabled in this state")]
    NotEnabled(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("unknown stimulus `{0}`")]
    UnknownStimulus(String),
    #[error("internal cascade exceeded {0} steps; the model likely loops")]
    CascadeDivergence(usize),
    #[error("fault target `{0}` never fires from this state")]
    InapplicableFault(String),
    #[error("{0}")]
    Invalid(String),
}
