use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("registry has no modes")]
    EmptyRegistry,

    #[error("mode {0} is declared twice")]
    DuplicateMode(String),

    #[error("mode {0} is not registered")]
    UnknownMode(String),

    #[error("path '{0}' has no H/V mode pair registered")]
    UnknownPath(String),

    #[error("states live on different mode registries")]
    RegistryMismatch,

    #[error("{name} = {value} is outside its domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("element '{name}' is unphysical: {reason}")]
    Unphysical { name: String, reason: String },

    #[error("mode list is malformed: {0}")]
    BadModes(String),

    #[error("detection precondition violated: {0}")]
    Detection(String),

    #[error("signal amplitudes are not normalized: |alpha|^2 + |beta|^2 = {0}")]
    NotNormalized(f64),

    #[error("state norm^2 = {0} exceeds 1 beyond tolerance")]
    NormOverflow(f64),

    #[error("{0}")]
    Circuit(String),

    #[error("{line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, domain: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            domain,
        }
    }
}
