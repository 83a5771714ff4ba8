use thiserror::Error;

/// Errors raised by table construction, tracing and orbit search.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the documented domain of an operation.
    #[error("domain error in {op}: {msg}")]
    Domain { op: &'static str, msg: String },

    /// A ray arrived (almost) tangent to the boundary.
    #[error("grazing incidence at bounce {bounce}: normal component {normal:.3e}")]
    Grazing { bounce: usize, normal: f64 },

    /// The geometry became inconsistent, e.g. a ray escaped the table.
    #[error("geometry integrity violated: {0}")]
    Integrity(String),

    /// An iterative search did not converge.
    #[error("search failure: {0}")]
    SearchFailure(String),

    /// Orbit search converged, but to an orbit of a different type.
    #[error("converged to a ({found_n},{found_k}) orbit while searching for ({n},{k})")]
    WrongOrbit {
        n: usize,
        k: usize,
        found_n: usize,
        found_k: usize,
    },

    /// Input or output of a data file failed.
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(op: &'static str, msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain {
        op,
        msg: msg.into(),
    })
}
