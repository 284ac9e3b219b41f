//! Channel permutations, switch layers and their 0/1 matrix view.
//!
//! A [`Permutation`] is stored in "pull" form: `mapping[j] = i` means the
//! channel at input position `i` ends up at output position `j`.  Applied to
//! the identity channel vector, the mapping therefore *is* the output vector
//! of channel labels.  Indices are 0-based internally; the 1-based labels
//! used in files and on the command line only exist in [`fmt::Display`] and
//! [`FromStr`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_channel_count, Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    mapping: Vec<usize>,
}

impl Permutation {
    pub fn identity(n: usize) -> Result<Self> {
        check_channel_count(n)?;
        Ok(Permutation { mapping: (0..n).collect() })
    }

    /// Builds a permutation from a 0-based pull mapping.
    pub fn from_vec(mapping: Vec<usize>) -> Result<Self> {
        check_channel_count(mapping.len())?;
        let n = mapping.len();
        let mut seen = vec![false; n];
        for &m in &mapping {
            if m >= n {
                return Err(Error::NotAPermutation(format!("index {} out of range 0..{n}", m + 1)));
            }
            if seen[m] {
                return Err(Error::NotAPermutation(format!("channel {} appears twice", m + 1)));
            }
            seen[m] = true;
        }
        Ok(Permutation { mapping })
    }

    /// Builds a permutation from 1-based channel labels.
    pub fn from_one_based(labels: &[usize]) -> Result<Self> {
        let mut mapping = Vec::with_capacity(labels.len());
        for &l in labels {
            if l == 0 {
                return Err(Error::NotAPermutation("channel labels start at 1".into()));
            }
            mapping.push(l - 1);
        }
        Self::from_vec(mapping)
    }

    /// The permutation exchanging channels at positions `a` and `b`.
    pub fn transposition(n: usize, a: usize, b: usize) -> Result<Self> {
        let mut p = Self::identity(n)?;
        for &c in &[a, b] {
            if c >= n {
                return Err(Error::ChannelOutOfRange { channel: c, n });
            }
        }
        p.mapping.swap(a, b);
        Ok(p)
    }

    pub fn len(&self) -> usize {
        self.mapping.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mapping.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.mapping
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.mapping
    }

    /// Input position whose content lands at output position `j`.
    pub fn source(&self, j: usize) -> usize {
        self.mapping[j]
    }

    pub fn is_identity(&self) -> bool {
        self.mapping.iter().enumerate().all(|(i, &m)| i == m)
    }

    /// Moves `input` through the permutation: `out[j] = input[mapping[j]]`.
    pub fn apply<T: Clone>(&self, input: &[T]) -> Vec<T> {
        assert_eq!(input.len(), self.len(), "vector length must match permutation size");
        self.mapping.iter().map(|&i| input[i].clone()).collect()
    }

    /// Applying the result equals applying `self` then `second`.
    pub fn compose(&self, second: &Permutation) -> Result<Permutation> {
        if self.len() != second.len() {
            return Err(Error::SizeMismatch { left: self.len(), right: second.len() });
        }
        Ok(Permutation { mapping: second.mapping.iter().map(|&j| self.mapping[j]).collect() })
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.len()];
        for (j, &i) in self.mapping.iter().enumerate() {
            inv[i] = j;
        }
        Permutation { mapping: inv }
    }

    /// Position of each value: `positions()[mapping[j]] == j`.
    pub fn positions(&self) -> Vec<usize> {
        self.inverse().mapping
    }

    /// Returns `self` with the *values* `a` and `b` exchanged.
    pub fn swap_values(&self, a: usize, b: usize) -> Permutation {
        let mapping = self
            .mapping
            .iter()
            .map(|&v| {
                if v == a {
                    b
                } else if v == b {
                    a
                } else {
                    v
                }
            })
            .collect();
        Permutation { mapping }
    }

    pub fn to_matrix(&self) -> RoutingMatrix {
        let n = self.len();
        let mut entries = vec![0u8; n * n];
        for (row, &col) in self.mapping.iter().enumerate() {
            entries[row * n + col] = 1;
        }
        RoutingMatrix { n, entries }
    }

    pub fn from_matrix(m: &RoutingMatrix) -> Result<Permutation> {
        let n = m.size();
        let mut mapping = Vec::with_capacity(n);
        for row in 0..n {
            let ones: Vec<usize> = (0..n).filter(|&c| m.get(row, c) == 1).collect();
            match ones.as_slice() {
                [c] => mapping.push(*c),
                [] => return Err(Error::MalformedMatrix(format!("row {row} has no 1"))),
                _ => return Err(Error::MalformedMatrix(format!("row {row} has {} ones", ones.len()))),
            }
        }
        Permutation::from_vec(mapping)
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Permutation::from_vec(v)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.mapping
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, m) in self.mapping.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", m + 1)?;
        }
        Ok(())
    }
}

/// Parses a 1-based comma-separated list such as `1,3,5,7,2,4,6,8`.
impl FromStr for Permutation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let labels = s
            .split(',')
            .map(|t| {
                let t = t.trim();
                t.parse::<usize>().map_err(|_| Error::Parse(format!("bad channel label `{t}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Permutation::from_one_based(&labels)
    }
}

/// One dynamic stage: `n/2` bypass (`false`) / exchange (`true`) switches.
/// Switch `k` spans positions `2k` and `2k+1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SwitchLayer {
    states: Vec<bool>,
}

impl SwitchLayer {
    pub fn new(states: Vec<bool>) -> Result<Self> {
        check_channel_count(states.len() * 2)?;
        Ok(SwitchLayer { states })
    }

    /// A layer of `n/2` switches, all in bypass.
    pub fn bypass(n: usize) -> Result<Self> {
        check_channel_count(n)?;
        Ok(SwitchLayer { states: vec![false; n / 2] })
    }

    /// Channel count served by this layer.
    pub fn channels(&self) -> usize {
        self.states.len() * 2
    }

    pub fn switches(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[bool] {
        &self.states
    }

    pub fn is_exchange(&self, switch: usize) -> bool {
        self.states[switch]
    }

    pub fn is_all_bypass(&self) -> bool {
        self.states.iter().all(|s| !s)
    }

    pub fn toggled(&self, switch: usize) -> Result<Self> {
        if switch >= self.switches() {
            return Err(Error::SwitchOutOfRange { switch, switches: self.switches() });
        }
        let mut states = self.states.clone();
        states[switch] = !states[switch];
        Ok(SwitchLayer { states })
    }

    pub fn to_permutation(&self) -> Permutation {
        let mut mapping: Vec<usize> = (0..self.channels()).collect();
        for (k, &x) in self.states.iter().enumerate() {
            if x {
                mapping.swap(2 * k, 2 * k + 1);
            }
        }
        Permutation { mapping }
    }
}

/// Square 0/1 grid.  Row index is the output channel, column index the
/// input channel.  Arbitrary binary grids are representable so that
/// [`validate_switch_matrix`] can report what is wrong with them.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RoutingMatrix {
    n: usize,
    entries: Vec<u8>,
}

impl RoutingMatrix {
    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::MalformedMatrix("empty matrix".into()));
        }
        let mut entries = Vec::with_capacity(n * n);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::MalformedMatrix(format!("row {r} has {} entries, expected {n}", row.len())));
            }
            if let Some(v) = row.iter().find(|&&v| v > 1) {
                return Err(Error::MalformedMatrix(format!("row {r} contains non-binary value {v}")));
            }
            entries.extend_from_slice(row);
        }
        Ok(RoutingMatrix { n, entries })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.entries[row * self.n + col]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u8]> {
        self.entries.chunks(self.n)
    }

    pub fn ones(&self) -> usize {
        self.entries.iter().filter(|&&v| v == 1).count()
    }

    /// Integer matrix-vector product.
    pub fn mul_vec(&self, v: &[u64]) -> Vec<u64> {
        assert_eq!(v.len(), self.n);
        self.rows().map(|row| row.iter().zip(v).map(|(&m, &x)| m as u64 * x).sum()).collect()
    }

    /// Boolean matrix product `self * rhs`; entries saturate at 1.
    pub fn mul(&self, rhs: &RoutingMatrix) -> Result<RoutingMatrix> {
        if self.n != rhs.n {
            return Err(Error::SizeMismatch { left: self.n, right: rhs.n });
        }
        let n = self.n;
        let mut entries = vec![0u8; n * n];
        for r in 0..n {
            for k in 0..n {
                if self.get(r, k) == 1 {
                    for c in 0..n {
                        entries[r * n + c] |= rhs.get(k, c);
                    }
                }
            }
        }
        Ok(RoutingMatrix { n, entries })
    }

    /// Block-diagonal matrix of 2x2 bypass/exchange blocks, built directly
    /// from the switch states.
    pub fn block_diagonal(states: &[bool]) -> RoutingMatrix {
        let n = states.len() * 2;
        let mut entries = vec![0u8; n * n];
        for (k, &x) in states.iter().enumerate() {
            let (a, b) = (2 * k, 2 * k + 1);
            if x {
                entries[a * n + b] = 1;
                entries[b * n + a] = 1;
            } else {
                entries[a * n + a] = 1;
                entries[b * n + b] = 1;
            }
        }
        RoutingMatrix { n, entries }
    }

    pub fn is_permutation_matrix(&self) -> bool {
        let n = self.n;
        (0..n).all(|r| (0..n).filter(|&c| self.get(r, c) == 1).count() == 1)
            && (0..n).all(|c| (0..n).filter(|&r| self.get(r, c) == 1).count() == 1)
    }
}

impl fmt::Display for RoutingMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.rows() {
            let line: Vec<&str> = row.iter().map(|&v| if v == 1 { "1" } else { "0" }).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InvalidReason {
    OddSize(usize),
    DuplicateInRow(usize),
    DuplicateInColumn(usize),
    EmptyRow(usize),
    /// A 1 outside the 2x2 blocks on the main diagonal.
    OffDiagonalBlock {
        row: usize,
        col: usize,
    },
}

impl fmt::Display for InvalidReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InvalidReason::OddSize(n) => write!(f, "size {n} cannot be split into 2x2 blocks"),
            InvalidReason::DuplicateInRow(r) => write!(f, "row {r} has more than one 1"),
            InvalidReason::DuplicateInColumn(c) => write!(f, "column {c} has more than one 1"),
            InvalidReason::EmptyRow(r) => write!(f, "row {r} has no 1"),
            InvalidReason::OffDiagonalBlock { row, col } => {
                write!(f, "entry ({row},{col}) lies outside the diagonal 2x2 blocks")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SwitchMatrixVerdict {
    Valid(SwitchLayer),
    Invalid(InvalidReason),
}

impl SwitchMatrixVerdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, SwitchMatrixVerdict::Valid(_))
    }
}

/// Accepts exactly the block-diagonal matrices made of 2x2 bypass and
/// exchange blocks, returning the switch layer they encode.
pub fn validate_switch_matrix(m: &RoutingMatrix) -> SwitchMatrixVerdict {
    use SwitchMatrixVerdict::Invalid;
    let n = m.size();
    if !n.is_multiple_of(2) {
        return Invalid(InvalidReason::OddSize(n));
    }
    for r in 0..n {
        match (0..n).filter(|&c| m.get(r, c) == 1).count() {
            0 => return Invalid(InvalidReason::EmptyRow(r)),
            1 => {}
            _ => return Invalid(InvalidReason::DuplicateInRow(r)),
        }
    }
    for c in 0..n {
        if (0..n).filter(|&r| m.get(r, c) == 1).count() > 1 {
            return Invalid(InvalidReason::DuplicateInColumn(c));
        }
    }
    for r in 0..n {
        for c in 0..n {
            if m.get(r, c) == 1 && r / 2 != c / 2 {
                return Invalid(InvalidReason::OffDiagonalBlock { row: r, col: c });
            }
        }
    }
    // Each block now holds exactly two 1s in distinct rows and columns, so it
    // is either the bypass or the exchange block.
    let states = (0..n / 2).map(|k| m.get(2 * k, 2 * k + 1) == 1).collect();
    SwitchMatrixVerdict::Valid(SwitchLayer { states })
}
