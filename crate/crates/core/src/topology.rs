//! Static shuffle stages for the four classic MIN routing schemes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_channel_count, Error, Result};
use crate::permutation::Permutation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShuffleKind {
    PerfectShuffle,
    ReversePerfectShuffle,
    Crossover,
    Banyan,
}

impl ShuffleKind {
    pub const ALL: [ShuffleKind; 4] =
        [ShuffleKind::PerfectShuffle, ShuffleKind::ReversePerfectShuffle, ShuffleKind::Crossover, ShuffleKind::Banyan];

    pub fn name(self) -> &'static str {
        match self {
            ShuffleKind::PerfectShuffle => "perfect-shuffle",
            ShuffleKind::ReversePerfectShuffle => "reverse-perfect-shuffle",
            ShuffleKind::Crossover => "crossover",
            ShuffleKind::Banyan => "banyan",
        }
    }

    /// Number of stages after which the generator repeats itself.
    pub fn stage_cycle(self, n: usize) -> usize {
        match self {
            ShuffleKind::PerfectShuffle | ShuffleKind::ReversePerfectShuffle => 1,
            ShuffleKind::Crossover | ShuffleKind::Banyan => (log2(n) - 1).max(1),
        }
    }
}

impl fmt::Display for ShuffleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ShuffleKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ShuffleKind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| Error::UnknownShuffleKind(s.to_string()))
    }
}

pub fn log2(n: usize) -> usize {
    n.trailing_zeros() as usize
}

/// Card-deck interleave of one block: output `2i` takes input `i`, output
/// `2i+1` takes input `i + size/2`.
fn interleave(mapping: &mut [usize], base: usize, size: usize) {
    for i in 0..size / 2 {
        mapping[base + 2 * i] = base + i;
        mapping[base + 2 * i + 1] = base + i + size / 2;
    }
}

/// Crossover interleave of one block: output `2i` takes input `i`, output
/// `2i+1` takes input `size-1-i`.
fn cross(mapping: &mut [usize], base: usize, size: usize) {
    for i in 0..size / 2 {
        mapping[base + 2 * i] = base + i;
        mapping[base + 2 * i + 1] = base + size - 1 - i;
    }
}

/// The static routing permutation of stage `stage` (1-based).
///
/// For `n = 2` every scheme degenerates to the identity: the only shuffle
/// would cross channels that already share a switch.
pub fn stage_permutation(kind: ShuffleKind, n: usize, stage: usize) -> Result<Permutation> {
    check_channel_count(n)?;
    if stage == 0 {
        return Err(Error::StageOutOfRange { stage, stages: usize::MAX });
    }
    if n == 2 {
        return Permutation::identity(2);
    }
    let cycle_pos = (stage - 1) % kind.stage_cycle(n);
    let mut mapping = vec![0; n];
    match kind {
        ShuffleKind::PerfectShuffle => interleave(&mut mapping, 0, n),
        ShuffleKind::ReversePerfectShuffle => {
            interleave(&mut mapping, 0, n);
            return Ok(Permutation::from_vec(mapping)?.inverse());
        }
        ShuffleKind::Crossover => {
            let size = n >> cycle_pos;
            for base in (0..n).step_by(size) {
                cross(&mut mapping, base, size);
            }
        }
        ShuffleKind::Banyan => {
            let size = 4 << cycle_pos;
            for base in (0..n).step_by(size) {
                interleave(&mut mapping, base, size);
            }
        }
    }
    Permutation::from_vec(mapping)
}

/// Smallest `k >= 1` such that stages `1..=k` with all switches in bypass
/// compose to the identity.  `None` if no such `k` shows up within `n^2`
/// stages.
pub fn shuffle_period(kind: ShuffleKind, n: usize) -> Result<Option<usize>> {
    check_channel_count(n)?;
    let mut acc = Permutation::identity(n)?;
    for k in 1..=n * n {
        acc = acc.compose(&stage_permutation(kind, n, k)?)?;
        if acc.is_identity() {
            return Ok(Some(k));
        }
    }
    Ok(None)
}
