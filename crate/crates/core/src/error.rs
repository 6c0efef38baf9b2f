use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(usize),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("eigensolver failed to converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("capacity exceeded: {what} = {value} (limit {limit})")]
    Capacity {
        what: &'static str,
        value: usize,
        limit: usize,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("near-diagonal evaluation: |z - w| = {gap:e} < {guard:e}")]
    NearDiagonal { gap: f64, guard: f64 },

    #[error("evaluation point within {distance:e} of an eigenvalue")]
    NearPole { distance: f64 },

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("at node ({z_node}, {w_node}): {source}")]
    AtNode {
        z_node: usize,
        w_node: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// True for failures of numerical routines, as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::NoConvergence { .. } | Error::NearPole { .. } | Error::NearDiagonal { .. } => {
                true
            }
            Error::AtNode { source, .. } => source.is_numeric(),
            _ => false,
        }
    }
}
