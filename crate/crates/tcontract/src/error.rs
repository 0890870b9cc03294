use thiserror::Error;

/// Errors surfaced by tensor construction, contraction planning and the
/// contraction entry points.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("total element count overflows usize")]
    SizeOverflow,

    #[error("index {index} out of range for dimension {axis} of length {len}")]
    IndexOutOfBounds { axis: usize, index: usize, len: usize },

    #[error("label count {labels} does not match tensor order {order}")]
    OrderMismatch { labels: usize, order: usize },

    #[error("label '{0}' repeats within one tensor (traces/diagonals are unsupported)")]
    RepeatedLabel(char),

    #[error("label '{0}' cannot be classified: it must appear in exactly two of A, B, C")]
    LabelClassification(char),

    #[error("length mismatch for label '{label}': {left} vs {right}")]
    LengthMismatch { label: char, left: usize, right: usize },

    #[error("matrix extents do not conform: A is {am}x{ak}, B is {bk}x{bn}, C is {cm}x{cn}")]
    ShapeMismatch { am: usize, ak: usize, bk: usize, bn: usize, cm: usize, cn: usize },

    #[error("invalid blocking configuration: {0}")]
    InvalidConfig(String),

    #[error("cannot split a communicator of size {size} {ways} ways")]
    IndivisibleSplit { size: usize, ways: usize },

    #[error(
        "partition range out of bounds: rows {rows:?} cols {cols:?} of {extent_rows}x{extent_cols}"
    )]
    RangeOutOfBounds {
        rows: (usize, usize),
        cols: (usize, usize),
        extent_rows: usize,
        extent_cols: usize,
    },

    #[error("buffer too small: need {need} elements, have {have}")]
    BufferTooSmall { need: usize, have: usize },

    #[error("workspace allocation of {elements} elements failed")]
    Resource { elements: usize },

    #[error("unsupported: {0}")]
    Unsupported(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
