use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A row of an input file could not be read.
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// FRED marks missing observations with ".".
    #[error("missing values (\".\") on {}", join_lines(.0))]
    MissingValues(Vec<usize>),

    /// A series violates one of its structural invariants.
    #[error("invalid series: {0}")]
    InvalidSeries(String),

    /// Two inputs that must agree (grids, lengths, periods) do not.
    #[error("mismatch: {0}")]
    Mismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The input is well formed but carries no information for the
    /// requested statistic (zero variance, constant path, ...).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn join_lines(lines: &[usize]) -> String {
    let label = if lines.len() == 1 { "line " } else { "lines " };
    let list = lines
        .iter()
        .map(|l| l.to_string())
        .collect::<Vec<_>>()
        .join(", ");
    format!("{label}{list}")
}

pub(crate) fn invalid_param(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
