use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Everything that can go wrong while building inputs or running a test.
///
/// Variants split into two families: validation failures (malformed or
/// inconsistent input) and infeasibility (valid input that the requested
/// method cannot handle). [`Error::is_infeasible`] tells them apart.
#[derive(Debug, Error)]
pub enum Error {
    #[error("row {row}, column {column}: item `{item}` appears more than once")]
    DuplicateItem {
        row: usize,
        column: usize,
        item: String,
    },

    #[error("row {row}, column {column}: unknown item `{item}`")]
    UnknownItem {
        row: usize,
        column: usize,
        item: String,
    },

    #[error("row {row}, column {column}: missing item")]
    MissingItem { row: usize, column: usize },

    #[error("row {row}: expected {expected} cells, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("row {row}, column {column}: {message}")]
    BadCell {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("row {row}: round is not the previous round minus exactly one item")]
    NonNestedRound { row: usize },

    #[error("item `{0}` does not belong to the study")]
    UnknownItemId(String),

    #[error("expected {expected} items, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("score vector is not admissible: mean {mean:e}, sum of squares {sum_sq}")]
    NotAdmissible { mean: f64, sum_sq: f64 },

    #[error("invalid preference ranking: {0}")]
    InvalidRanking(String),

    #[error("all rank sums are equal; every admissible score vector attains L* = 0")]
    DegenerateScores,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("N/K! = {ratio:.3} is below the minimum of 2; rerun with force to override")]
    TooFewOrderings { ratio: f64 },

    #[error("{what} would need {count} candidates, above the cap of {cap}")]
    CapExceeded { what: String, count: u128, cap: u128 },

    #[error("{0}")]
    Infeasible(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True when the input was valid but the method cannot be applied to it.
    pub fn is_infeasible(&self) -> bool {
        matches!(
            self,
            Error::TooFewOrderings { .. } | Error::CapExceeded { .. } | Error::Infeasible(_)
        )
    }

    /// Moves row/column coordinates so they point into a file rather than
    /// into the in-memory row list.
    pub(crate) fn shifted(self, row_offset: usize, column_offset: usize) -> Self {
        match self {
            Error::DuplicateItem { row, column, item } => Error::DuplicateItem {
                row: row + row_offset,
                column: column + column_offset,
                item,
            },
            Error::UnknownItem { row, column, item } => Error::UnknownItem {
                row: row + row_offset,
                column: column + column_offset,
                item,
            },
            Error::MissingItem { row, column } => Error::MissingItem {
                row: row + row_offset,
                column: column + column_offset,
            },
            Error::RaggedRow {
                row,
                expected,
                found,
            } => Error::RaggedRow {
                row: row + row_offset,
                expected,
                found,
            },
            Error::BadCell {
                row,
                column,
                message,
            } => Error::BadCell {
                row: row + row_offset,
                column: column + column_offset,
                message,
            },
            Error::NonNestedRound { row } => Error::NonNestedRound {
                row: row + row_offset,
            },
            other => other,
        }
    }
}
