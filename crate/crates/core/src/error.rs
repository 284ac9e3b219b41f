use thiserror::Error;

use crate::router::StallDump;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("channel count {0} must be a power of two and at least 2")]
    InvalidChannelCount(usize),

    #[error("size mismatch: {left} channels vs {right} channels")]
    SizeMismatch { left: usize, right: usize },

    #[error("not a permutation: {0}")]
    NotAPermutation(String),

    #[error("switch layer has {got} switches, expected {expected}")]
    LayerLength { got: usize, expected: usize },

    #[error("network needs at least one stage")]
    NoStages,

    #[error("stage {stage} out of range 1..={stages}")]
    StageOutOfRange { stage: usize, stages: usize },

    #[error("switch {switch} out of range 0..{switches}")]
    SwitchOutOfRange { switch: usize, switches: usize },

    #[error("channel {channel} out of range for {n} channels")]
    ChannelOutOfRange { channel: usize, n: usize },

    #[error("malformed matrix: {0}")]
    MalformedMatrix(String),

    #[error("unknown shuffle kind `{0}`")]
    UnknownShuffleKind(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("fundamental arrangement search for n={n} ({kind}) exhausted after {nodes} nodes")]
    SearchExhausted { n: usize, kind: String, nodes: u64 },

    #[error("not a fundamental arrangement: {0}")]
    NotAnFa(String),

    #[error("routing stalled: no stage holds a usable pair\n{0}")]
    Stalled(Box<StallDump>),

    #[error("routing exceeded its step bound\n{0}")]
    StepOverflow(Box<StallDump>),

    #[error("routing lost placed channels between passes\n{0}")]
    ProgressViolation(Box<StallDump>),

    #[error("prior trace does not lead from the fundamental arrangement to this network")]
    TraceMismatch,

    #[error("network is not derivable from the fundamental arrangement by a router trace; supply the prior trace or use reset mode")]
    ModeMismatch,

    #[error("network and fundamental arrangement disagree on {0}")]
    ShapeMismatch(String),

    #[error("instance too large for exhaustive enumeration: 2^{bits} settings exceeds 2^{limit}")]
    TooLarge { bits: usize, limit: usize },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

/// Checks that `n` is a power of two with `n >= 2`.
pub fn check_channel_count(n: usize) -> Result<()> {
    if n >= 2 && n.is_power_of_two() {
        Ok(())
    } else {
        Err(Error::InvalidChannelCount(n))
    }
}
