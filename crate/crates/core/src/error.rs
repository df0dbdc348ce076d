use thiserror::Error;

use crate::voxel::GridCoord;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VoxelError {
    #[error("block id {0} is outside 0..=6")]
    InvalidBlockId(i64),
    #[error("coordinate ({x}, {y}, {z}) is outside the 11x9x11 zone")]
    OutOfBounds { x: i64, y: i64, z: i64 },
    #[error("duplicate coordinate {0}")]
    DuplicateCoord(GridCoord),
    #[error("air entries are not allowed in a block list")]
    AirEntry,
    #[error("dense grid must have 1089 cells, got {0}")]
    WrongLength(usize),
}

#[derive(Debug, Error)]
pub enum TaskError {
    #[error("failed to parse task document: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("task {task} segment {segment} field `{field}`: {source}")]
    Block {
        task: String,
        segment: usize,
        field: &'static str,
        #[source]
        source: VoxelError,
    },
    #[error("task {task} segment {segment} field `{field}`: {message}")]
    Schema {
        task: String,
        segment: usize,
        field: &'static str,
        message: String,
    },
    #[error("task {task}: {message}")]
    Task { task: String, message: String },
    #[error("advance called on an incomplete segment {0}")]
    IncompleteSegment(usize),
    #[error("segment index {index} out of range for task with {len} segments")]
    SegmentOutOfRange { index: usize, len: usize },
    #[error("session already finished")]
    Finished,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("failed to parse config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("step called after the episode finished; call reset first")]
    EpisodeDone,
    #[error("step called before reset")]
    NotReset,
    #[error(transparent)]
    Task(#[from] TaskError),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Task(#[from] TaskError),
    #[error("unknown agent {0:?}")]
    UnknownAgent(String),
    #[error("corrupt action log {path}: {message}")]
    CorruptLog { path: String, message: String },
    #[error("config digest mismatch in {path}: log has {logged}, replay has {actual}")]
    DigestMismatch {
        path: String,
        logged: String,
        actual: String,
    },
}
