//! Brute-force checks kept independent of the permutation fast path:
//! exhaustive reachability through the 0/1 matrix formulation, relabeling
//! search between shuffle kinds, all-bypass partner counts and the crossbar
//! baseline.

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::error::{check_channel_count, Error, Result};
use crate::fabric::NetworkConfig;
use crate::permutation::{Permutation, RoutingMatrix};
use crate::topology::{log2, stage_permutation, ShuffleKind};

/// Largest enumeration accepted, as a power of two of switch settings.
pub const ENUMERATION_LIMIT_BITS: usize = 24;

fn enumeration_bits(n: usize, stages: usize) -> Result<usize> {
    let bits = stages * n / 2;
    if bits > ENUMERATION_LIMIT_BITS {
        Err(Error::TooLarge { bits, limit: ENUMERATION_LIMIT_BITS })
    } else {
        Ok(bits)
    }
}

/// Evaluates a network as a product of 0/1 matrices applied to the channel
/// label vector.  Switch matrices are assembled from 2x2 blocks directly.
pub fn matrix_evaluate(cfg: &NetworkConfig) -> Permutation {
    let shuffles: Vec<RoutingMatrix> =
        (1..=cfg.stages()).map(|s| stage_permutation(cfg.kind(), cfg.n(), s).expect("valid").to_matrix()).collect();
    let layers: Vec<Vec<bool>> = cfg.layers().iter().map(|l| l.states().to_vec()).collect();
    matrix_path(&shuffles, &layers)
}

fn matrix_path(shuffles: &[RoutingMatrix], layers: &[Vec<bool>]) -> Permutation {
    let n = shuffles[0].size();
    let mut v: Vec<u64> = (0..n as u64).collect();
    for (shuffle, states) in shuffles.iter().zip(layers) {
        v = shuffle.mul_vec(&v);
        v = RoutingMatrix::block_diagonal(states).mul_vec(&v);
    }
    Permutation::from_vec(v.into_iter().map(|x| x as usize).collect()).expect("matrix path preserves a bijection")
}

fn settings_to_layers(bits: u64, n: usize, stages: usize) -> Vec<Vec<bool>> {
    let half = n / 2;
    (0..stages).map(|s| (0..half).map(|k| bits >> (s * half + k) & 1 == 1).collect()).collect()
}

/// Every output reachable by some switch setting, via [`matrix_evaluate`]'s
/// matrix path.
pub fn reachable_set(n: usize, kind: ShuffleKind, stages: usize) -> Result<BTreeSet<Permutation>> {
    check_channel_count(n)?;
    if stages == 0 {
        return Err(Error::NoStages);
    }
    let bits = enumeration_bits(n, stages)?;
    let shuffles: Vec<RoutingMatrix> =
        (1..=stages).map(|s| stage_permutation(kind, n, s).map(|p| p.to_matrix())).collect::<Result<_>>()?;
    let set = (0..1u64 << bits)
        .into_par_iter()
        .fold(BTreeSet::new, |mut acc, setting| {
            acc.insert(matrix_path(&shuffles, &settings_to_layers(setting, n, stages)));
            acc
        })
        .reduce(BTreeSet::new, |mut a, mut b| {
            a.append(&mut b);
            a
        });
    Ok(set)
}

/// Settings where the matrix path and [`NetworkConfig::evaluate`] disagree,
/// over all `2^(stages*n/2)` switch settings.
pub fn oracle_mismatches(n: usize, kind: ShuffleKind, stages: usize) -> Result<Vec<NetworkConfig>> {
    check_channel_count(n)?;
    let bits = enumeration_bits(n, stages)?;
    let mismatches = (0..1u64 << bits)
        .into_par_iter()
        .filter_map(|setting| {
            let cfg = NetworkConfig::from_bits(n, kind, &settings_to_layers(setting, n, stages)).expect("valid shape");
            (cfg.evaluate() != matrix_evaluate(&cfg)).then_some(cfg)
        })
        .collect();
    Ok(mismatches)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Relabeling {
    /// `input` then the original network then `output` reproduces the other set.
    Found {
        input: Permutation,
        output: Permutation,
    },
    NotFound,
    /// Search skipped; only done for `n = 4`.
    NotSearched,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KindEvidence {
    pub kind: ShuffleKind,
    pub reachable: usize,
    /// Relabeling from the perfect-shuffle set onto this kind's set.
    pub relabeling: Relabeling,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalenceReport {
    pub n: usize,
    pub stages: usize,
    pub kinds: Vec<KindEvidence>,
}

impl EquivalenceReport {
    pub fn sizes_agree(&self) -> bool {
        self.kinds.windows(2).all(|w| w[0].reachable == w[1].reachable)
    }

    /// Every searched kind has a relabeling onto the perfect-shuffle set.
    pub fn relabelings_found(&self) -> bool {
        self.kinds.iter().all(|k| !matches!(k.relabeling, Relabeling::NotFound))
    }
}

/// All permutations of `0..n` in lexicographic order.
pub fn all_permutations(n: usize) -> Vec<Permutation> {
    let mut v: Vec<usize> = (0..n).collect();
    let mut out = vec![];
    loop {
        out.push(Permutation::from_vec(v.clone()).expect("valid"));
        let Some(i) = (1..n).rev().find(|&i| v[i - 1] < v[i]) else { break };
        let j = (i..n).rev().find(|&j| v[j] > v[i - 1]).expect("pivot exists");
        v.swap(i - 1, j);
        v[i..].reverse();
    }
    out
}

fn find_relabeling(from: &BTreeSet<Permutation>, to: &BTreeSet<Permutation>, n: usize) -> Result<Relabeling> {
    if from.len() != to.len() {
        return Ok(Relabeling::NotFound);
    }
    let all = all_permutations(n);
    for input in &all {
        for output in &all {
            let mut hit = true;
            for p in from {
                if !to.contains(&input.compose(p)?.compose(output)?) {
                    hit = false;
                    break;
                }
            }
            if hit {
                return Ok(Relabeling::Found { input: input.clone(), output: output.clone() });
            }
        }
    }
    Ok(Relabeling::NotFound)
}

/// Reachable-set sizes of the four kinds at equal depth, plus an exhaustive
/// relabeling search against perfect shuffle when `n = 4`.
pub fn equivalence_evidence(n: usize, stages: usize) -> Result<EquivalenceReport> {
    let base = reachable_set(n, ShuffleKind::PerfectShuffle, stages)?;
    let mut kinds = vec![];
    for kind in ShuffleKind::ALL {
        let set = reachable_set(n, kind, stages)?;
        let relabeling = if n == 4 { find_relabeling(&base, &set, n)? } else { Relabeling::NotSearched };
        kinds.push(KindEvidence { kind, reachable: set.len(), relabeling });
    }
    Ok(EquivalenceReport { n, stages, kinds })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnbReport {
    pub n: usize,
    pub depth: usize,
    /// Distinct switch partners of each channel.
    pub partner_counts: Vec<usize>,
    /// Channels each channel never meets, `n - 1 - partners`.
    pub never_met: Vec<usize>,
}

impl SnbReport {
    /// Every channel meets exactly `log2(n)` others.
    pub fn holds(&self) -> bool {
        self.partner_counts.iter().all(|&c| c == log2(self.n))
    }
}

/// Partner counts in an all-bypass perfect-shuffle network `n*log2(n)`
/// stages deep.
pub fn snb_impossibility_evidence(n: usize) -> Result<SnbReport> {
    check_channel_count(n)?;
    if n < 4 {
        return Err(Error::InvalidChannelCount(n));
    }
    let depth = n * log2(n);
    let cfg = NetworkConfig::all_bypass(n, ShuffleKind::PerfectShuffle, depth)?;
    let mut met = vec![BTreeSet::new(); n];
    for (_, _, (a, b)) in cfg.stage_pairings().iter() {
        met[a].insert(b);
        met[b].insert(a);
    }
    let partner_counts: Vec<usize> = met.iter().map(BTreeSet::len).collect();
    let never_met = partner_counts.iter().map(|&c| n - 1 - c).collect();
    Ok(SnbReport { n, depth, partner_counts, never_met })
}

/// One-stage crossbar grid realising `target`: crosspoint (output j,
/// input c) closed when `target` delivers input `c` to output `j`.
pub fn crossbar_reference(target: &Permutation) -> RoutingMatrix {
    let n = target.len();
    let labels: Vec<usize> = (0..n).collect();
    let delivered = target.apply(&labels);
    let rows: Vec<Vec<u8>> =
        (0..n).map(|out| (0..n).map(|input| u8::from(delivered[out] == input)).collect()).collect();
    RoutingMatrix::from_rows(&rows).expect("square binary grid")
}
