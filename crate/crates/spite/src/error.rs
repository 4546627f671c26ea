//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration's length does not match the robot's DOF count.
    #[error("configuration has {got} values, robot has {expected} DOFs")]
    DimensionMismatch { expected: usize, got: usize },

    /// An operation that needs at least one input point received none.
    #[error("empty point set")]
    EmptyPointSet,

    /// An obstacle id that does not exist in the environment.
    #[error("unknown obstacle id {0}")]
    UnknownObstacle(u32),

    /// A roadmap element id that does not exist.
    #[error("element {0:?} out of range")]
    UnknownElement(crate::roadmap::ElementId),

    /// Start or goal could not be connected to the roadmap.
    #[error("no connectable neighbor for query attachment")]
    Unconnectable,

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed roadmap or scene file. serde_json errors carry line and
    /// column of the offending field.
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("file format version {got} not supported (expected {expected})")]
    Version { expected: u32, got: u32 },

    #[error("{0}")]
    Invalid(String),
}
