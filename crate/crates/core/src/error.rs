use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("incompatible outcome spaces: {0}")]
    IncompatibleSpaces(String),

    #[error("no compensating outcome")]
    NoCompensation,

    #[error("ill-conditioned matrix (condition number {0:.3e})")]
    IllConditioned(f64),

    #[error("invalid outcome: {0}")]
    InvalidOutcome(String),

    #[error("invalid menu: {0}")]
    InvalidMenu(String),

    #[error("invalid action id {0:?}")]
    InvalidActionId(String),

    #[error("empty product: power requires n >= 1")]
    EmptyPower,

    #[error("unsupported outcome space for {0}")]
    UnsupportedSpace(String),

    #[error("rule not positive at probe")]
    NotPositiveAtProbe,

    #[error("non-positive probability in corpus (menu {menu}, action {action})")]
    NonPositiveProbability { menu: String, action: String },

    #[error("singular probe system (condition number {0:.3e})")]
    SingularProbe(f64),

    #[error("menu too large: {actions} actions exceeds guard of {limit}")]
    SizeGuard { actions: u128, limit: u128 },

    #[error("quadrature failure: {0}")]
    Quadrature(String),

    #[error("negative input: {0}")]
    NegativeInput(String),

    #[error("menus are not equivalent")]
    NotEquivalent,

    #[error("outcomes must be integers: {0}")]
    NonInteger(String),

    #[error("unknown action {0}")]
    UnknownAction(String),

    #[error("invalid rule: {0}")]
    InvalidRule(String),

    #[error("invalid corpus: {0}")]
    InvalidCorpus(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
