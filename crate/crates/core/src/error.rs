use crate::pws::State;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// Input outside the domain of an operation (non-finite state, off-manifold point, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A documented precondition of the operation does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The normal projection does not depend on the convex-combination parameter.
    #[error("degenerate sliding: normal projection is independent of lambda")]
    Degenerate,

    #[error("pole of rational expression at x = {0}")]
    Pole(f64),

    /// Step size collapsed, typically at a tangency with the switching manifold.
    #[error("step size underflow at t = {time} (state {state:?})")]
    Tangency { time: f64, state: State },

    #[error("trajectory entered a sliding segment at {0:?}")]
    SlidingEncountered(State),

    #[error("no return within t_max = {0}")]
    Timeout(f64),

    #[error("newton iteration did not converge after {iterations} iterations (last iterate {last:?}, residual {residual:e})")]
    NoConvergence {
        iterations: usize,
        last: State,
        residual: f64,
    },

    #[error("no sign change in bracket [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("invalid bracket: {0}")]
    InvalidBracket(String),

    #[error("event limit of {0} exceeded (chattering)")]
    Chattering(usize),
}
