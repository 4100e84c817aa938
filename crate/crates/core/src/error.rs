use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("infeasible quota: {num_subcarriers} subcarriers cannot serve {num_users} users")]
    InfeasibleQuota {
        num_users: usize,
        num_subcarriers: usize,
    },

    #[error("unknown fixture `{0}` (expected table4, table5 or table6)")]
    UnknownFixture(String),

    #[error("method not applicable: {0}")]
    MethodInapplicable(String),

    #[error("numerical failure: {message}")]
    Numerical {
        message: String,
        /// Residual bracket `(lo, f(lo), hi, f(hi))` when a root search failed to bracket.
        bracket: Option<(f64, f64, f64, f64)>,
    },

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("line {line}: key `{key}`: {message}")]
    Parse {
        line: usize,
        key: String,
        message: String,
    },

    #[error("{0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical {
            message: msg.into(),
            bracket: None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
