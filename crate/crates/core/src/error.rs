use thiserror::Error;

/// Errors raised by the model, controllers and harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A precondition on shapes or values did not hold.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Invalid controller, extension or scenario configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// A belief or action became non-finite.
    #[error("{controller} diverged on joint {joint} at step {step} (t = {time:.6} s)")]
    Divergence {
        controller: &'static str,
        joint: usize,
        step: u64,
        time: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}
