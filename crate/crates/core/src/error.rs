use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("formula domain error: tqd_count_formula requires n >= 2 and m >= 2, got {n}x{m}")]
    FormulaDomain { n: usize, m: usize },

    #[error("invalid spin index: {0}")]
    InvalidSpin(String),

    #[error("more than one exchange axis active in a single segment")]
    MultipleActiveAxes,

    #[error("invalid frame: {0}")]
    InvalidFrame(String),

    #[error("no route through live axes: {0}")]
    NoRoute(String),

    #[error("unreachable exchange: required J = {required_hz:.6e} Hz needs barrier {barrier_v:.6} V outside [{min_v}, {max_v}] V")]
    UnreachableExchange {
        required_hz: f64,
        barrier_v: f64,
        min_v: f64,
        max_v: f64,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("fit did not converge after {iterations} iterations (relative residual change {last_rel_change:.3e}, rss {rss:.6e})")]
    FitNonConvergence {
        iterations: usize,
        rss: f64,
        last_rel_change: f64,
    },

    #[error("degenerate fit data: {0}")]
    DegenerateData(String),
}

pub type Result<T> = std::result::Result<T, Error>;
