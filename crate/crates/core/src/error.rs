use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    Parameter { field: String, reason: String },

    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("quadrature did not converge after {subdivisions} subdivisions (partial estimate {partial:e}, error estimate {error:e})")]
    Integration {
        partial: f64,
        error: f64,
        subdivisions: usize,
    },

    #[error("rational extrapolation unstable at tableau column {column}")]
    Instability { column: usize },

    #[error("cannot parse distribution spec `{spec}`: {reason}")]
    Spec { spec: String, reason: String },
}

impl Error {
    pub(crate) fn parameter(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Parameter {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
