//! Fundamental arrangements: `n-1` stage switch settings in which every
//! unordered pair of channels shares a switch at exactly one stage.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use crate::error::{check_channel_count, Error, Result};
use crate::fabric::{canonical, NetworkConfig};
use crate::io::{self, NetworkDocument};
use crate::topology::{stage_permutation, ShuffleKind};

/// Environment variable naming the directory of cached arrangements.
pub const CACHE_DIR_ENV: &str = "OMEGA_FA_CACHE_DIR";

/// Default node budget for [`build_fa`].
pub const DEFAULT_SEARCH_BUDGET: u64 = 2_000_000;

/// Unordered channel pairs, stored smaller label first.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PairSet {
    members: BTreeSet<(usize, usize)>,
}

impl PairSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts `{a, b}`; returns whether it was new.  Self-pairs are ignored.
    pub fn insert(&mut self, a: usize, b: usize) -> bool {
        a != b && self.members.insert(canonical(a, b))
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.members.contains(&canonical(a, b))
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Holds all `n(n-1)/2` pairs of `0..n`.
    pub fn is_complete(&self, n: usize) -> bool {
        self.members.len() == n * (n - 1) / 2 && self.members.iter().all(|&(_, b)| b < n)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.members.iter().copied()
    }
}

impl FromIterator<(usize, usize)> for PairSet {
    fn from_iter<I: IntoIterator<Item = (usize, usize)>>(iter: I) -> Self {
        let mut s = PairSet::new();
        for (a, b) in iter {
            s.insert(a, b);
        }
        s
    }
}

pub fn total_pairs(n: usize) -> usize {
    n * (n - 1) / 2
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageReport {
    pub pairs: PairSet,
    /// Pairs first seen at each stage.
    pub new_pairs_per_stage: Vec<usize>,
    /// All `n(n-1)/2` pairs met somewhere.
    pub complete: bool,
    /// Every stage met only pairs not seen at an earlier stage.
    pub all_fresh: bool,
}

/// Union of the network's stage pairings, computed from
/// [`NetworkConfig::stage_pairings`] alone.
pub fn verify_coverage(cfg: &NetworkConfig) -> CoverageReport {
    let pairing = cfg.stage_pairings();
    let mut pairs = PairSet::new();
    let mut new_pairs_per_stage = Vec::with_capacity(cfg.stages());
    for s in 1..=pairing.stages() {
        let fresh = pairing.stage(s).iter().filter(|&&(a, b)| pairs.insert(a, b)).count();
        new_pairs_per_stage.push(fresh);
    }
    let half = cfg.n() / 2;
    CoverageReport {
        complete: pairs.is_complete(cfg.n()),
        all_fresh: new_pairs_per_stage.iter().all(|&c| c == half),
        pairs,
        new_pairs_per_stage,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FundamentalArrangement {
    cfg: NetworkConfig,
    coverage: PairSet,
    new_pairs_per_stage: Vec<usize>,
}

impl FundamentalArrangement {
    /// Accepts `cfg` only if it has `n-1` stages, each meeting `n/2` pairs
    /// never met before.
    pub fn from_config(cfg: NetworkConfig) -> Result<Self> {
        let n = cfg.n();
        if cfg.stages() != n - 1 {
            return Err(Error::NotAnFa(format!("{} stages, expected {}", cfg.stages(), n - 1)));
        }
        let report = verify_coverage(&cfg);
        if !report.complete || !report.all_fresh {
            return Err(Error::NotAnFa(format!(
                "covers {}/{} pairs, new pairs per stage {:?}",
                report.pairs.len(),
                total_pairs(n),
                report.new_pairs_per_stage
            )));
        }
        Ok(FundamentalArrangement { cfg, coverage: report.pairs, new_pairs_per_stage: report.new_pairs_per_stage })
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.cfg
    }

    pub fn into_config(self) -> NetworkConfig {
        self.cfg
    }

    pub fn n(&self) -> usize {
        self.cfg.n()
    }

    pub fn kind(&self) -> ShuffleKind {
        self.cfg.kind()
    }

    pub fn coverage(&self) -> &PairSet {
        &self.coverage
    }

    pub fn new_pairs_per_stage(&self) -> &[usize] {
        &self.new_pairs_per_stage
    }

    /// Stage (1-based) at which channels `a` and `b` meet.
    pub fn meeting_stage(&self, a: usize, b: usize) -> Option<usize> {
        self.cfg.stage_pairings().locate(a, b).map(|(s, _)| s)
    }

    pub fn to_document(&self) -> NetworkDocument {
        NetworkDocument {
            cfg: self.cfg.clone(),
            coverage_complete: Some(true),
            new_pairs_per_stage: Some(self.new_pairs_per_stage.clone()),
        }
    }
}

/// Layer pattern `k -> parity(k & mask)`.  Odd-parity masks give
/// anti-symmetric layers: switch `k` and its mirror `n/2-1-k` always differ.
fn mask_layer(switches: usize, mask: usize) -> Vec<bool> {
    (0..switches).map(|k| (k & mask).count_ones() % 2 == 1).collect()
}

fn is_anti_symmetric(states: &[bool]) -> bool {
    let h = states.len();
    (0..h).all(|k| states[k] != states[h - 1 - k])
}

/// Mask candidates: anti-symmetric patterns first, each group ascending.
fn candidate_masks(switches: usize) -> Vec<usize> {
    let (mut anti, mut rest): (Vec<usize>, Vec<usize>) =
        (0..switches).partition(|&m| is_anti_symmetric(&mask_layer(switches, m)));
    anti.append(&mut rest);
    anti
}

struct Search {
    n: usize,
    shuffles: Vec<Vec<usize>>,
    patterns: Vec<Vec<bool>>,
    seen: Vec<bool>,
    chosen: Vec<usize>,
    nodes: u64,
    budget: u64,
}

impl Search {
    fn mark(&mut self, channels: &[usize], value: bool) {
        for c in channels.chunks(2) {
            self.seen[c[0] * self.n + c[1]] = value;
            self.seen[c[1] * self.n + c[0]] = value;
        }
    }

    fn fresh(&self, channels: &[usize]) -> bool {
        channels.chunks(2).all(|c| !self.seen[c[0] * self.n + c[1]])
    }

    /// `channels` holds the switch inputs of stage `stage` (1-based),
    /// already marked as seen.
    fn extend(&mut self, stage: usize, channels: &[usize]) -> Option<bool> {
        if stage == self.n - 1 {
            return Some(true);
        }
        // repeating the previous stage's pattern is tried first
        let previous = self.chosen.last().copied();
        let order = previous.into_iter().chain((0..self.patterns.len()).filter(|&i| Some(i) != previous));
        for idx in order {
            self.nodes += 1;
            if self.nodes > self.budget {
                return None;
            }
            let mut switched = channels.to_vec();
            for (k, &x) in self.patterns[idx].iter().enumerate() {
                if x {
                    switched.swap(2 * k, 2 * k + 1);
                }
            }
            let next: Vec<usize> = self.shuffles[stage].iter().map(|&i| switched[i]).collect();
            if !self.fresh(&next) {
                continue;
            }
            self.mark(&next, true);
            self.chosen.push(idx);
            match self.extend(stage + 1, &next) {
                Some(true) => return Some(true),
                None => return None,
                Some(false) => {}
            }
            self.chosen.pop();
            self.mark(&next, false);
        }
        Some(false)
    }
}

/// Switch-by-switch backtracking over unrestricted layers.  A pair at stage
/// `s+1` is checked as soon as both stage-`s` switches feeding it are set.
struct BitSearch {
    n: usize,
    shuffles: Vec<Vec<usize>>,
    /// `ready[s][k]`: next-stage switches whose inputs are settled once
    /// switch `k` of stage `s+1` is set.
    ready: Vec<Vec<Vec<usize>>>,
    seen: Vec<bool>,
    /// Switch inputs per stage, filled stage by stage.
    inputs: Vec<Vec<usize>>,
    bits: Vec<Vec<bool>>,
    nodes: u64,
    budget: u64,
}

impl BitSearch {
    fn new(n: usize, shuffles: Vec<Vec<usize>>, budget: u64) -> Self {
        let half = n / 2;
        let ready = (1..n - 1)
            .map(|s| {
                let next = &shuffles[s];
                let mut r = vec![vec![]; half];
                for k in 0..half {
                    let last = (next[2 * k] / 2).max(next[2 * k + 1] / 2);
                    r[last].push(k);
                }
                r
            })
            .collect();
        let first = shuffles[0].clone();
        let mut search = BitSearch {
            n,
            shuffles,
            ready,
            seen: vec![false; n * n],
            inputs: vec![first],
            bits: vec![vec![false; half]; n - 2],
            nodes: 0,
            budget,
        };
        let first = search.inputs[0].clone();
        for c in first.chunks(2) {
            search.set_seen(c[0], c[1], true);
        }
        search
    }

    fn set_seen(&mut self, a: usize, b: usize, v: bool) {
        self.seen[a * self.n + b] = v;
        self.seen[b * self.n + a] = v;
    }

    /// Channel leaving position `pos` of stage `stage` (0-based index).
    fn switched(&self, stage: usize, pos: usize) -> usize {
        let x = self.bits[stage][pos / 2];
        self.inputs[stage][pos ^ usize::from(x)]
    }

    fn next_pair(&self, stage: usize, k: usize) -> (usize, usize) {
        let next = &self.shuffles[stage + 1];
        (self.switched(stage, next[2 * k]), self.switched(stage, next[2 * k + 1]))
    }

    fn assign(&mut self, stage: usize, k: usize) -> Option<bool> {
        let half = self.n / 2;
        if stage == self.n - 2 {
            return Some(true);
        }
        let mirror = half - 1 - k;
        let preferred = if mirror < k { !self.bits[stage][mirror] } else { false };
        for value in [preferred, !preferred] {
            self.nodes += 1;
            if self.nodes > self.budget {
                return None;
            }
            self.bits[stage][k] = value;
            let checks = self.ready[stage][k].clone();
            let mut marked = vec![];
            let mut ok = true;
            for &nk in &checks {
                let (a, b) = self.next_pair(stage, nk);
                if self.seen[a * self.n + b] {
                    ok = false;
                    break;
                }
                self.set_seen(a, b, true);
                marked.push((a, b));
            }
            if ok {
                let done = if k + 1 < half {
                    self.assign(stage, k + 1)
                } else {
                    let next: Vec<usize> =
                        (0..self.n).map(|p| self.switched(stage, self.shuffles[stage + 1][p])).collect();
                    self.inputs.push(next);
                    let r = self.assign(stage + 1, 0);
                    if r != Some(true) {
                        self.inputs.pop();
                    }
                    r
                };
                match done {
                    Some(true) => return Some(true),
                    None => return None,
                    Some(false) => {}
                }
            }
            for (a, b) in marked {
                self.set_seen(a, b, false);
            }
        }
        self.bits[stage][k] = false;
        Some(false)
    }
}

/// Builds a fundamental arrangement with the default search budget.
pub fn build_fa(n: usize, kind: ShuffleKind) -> Result<FundamentalArrangement> {
    build_fa_with_budget(n, kind, DEFAULT_SEARCH_BUDGET)
}

/// Search in three rounds sharing one node budget.  Layers are first drawn
/// from the parity-mask patterns `k -> parity(k & mask)`, anti-symmetric
/// masks first: round one repeats a single mask at every stage, round two
/// backtracks stage by stage, trying the previous stage's mask first.  A
/// candidate survives if every pair it brings to the next stage is new.
/// For perfect shuffle round one succeeds.  Round three searches
/// unrestricted layers switch by switch.  The last layer influences no
/// pairing and is left in bypass.
pub fn build_fa_with_budget(n: usize, kind: ShuffleKind, budget: u64) -> Result<FundamentalArrangement> {
    check_channel_count(n)?;
    if n < 4 {
        return Err(Error::InvalidChannelCount(n));
    }
    let shuffles = (1..n).map(|s| stage_permutation(kind, n, s).map(|p| p.into_vec())).collect::<Result<Vec<_>>>()?;
    let masks = candidate_masks(n / 2);
    let patterns: Vec<Vec<bool>> = masks.iter().map(|&m| mask_layer(n / 2, m)).collect();
    let exhausted = |nodes: u64| Error::SearchExhausted { n, kind: kind.to_string(), nodes: nodes.min(budget) };
    for (tried, pattern) in patterns.iter().enumerate() {
        if tried as u64 >= budget {
            return Err(exhausted(tried as u64));
        }
        let mut rows = vec![pattern.clone(); n - 2];
        rows.push(vec![false; n / 2]);
        if let Ok(fa) = FundamentalArrangement::from_config(NetworkConfig::from_bits(n, kind, &rows)?) {
            return Ok(fa);
        }
    }
    let mut search = Search {
        n,
        shuffles: shuffles.clone(),
        patterns,
        seen: vec![false; n * n],
        chosen: vec![],
        nodes: masks.len() as u64,
        budget,
    };

    let first: Vec<usize> = search.shuffles[0].clone();
    search.mark(&first, true);
    let mut rows: Vec<Vec<bool>> = match search.extend(1, &first) {
        Some(true) => search.chosen.iter().map(|&i| search.patterns[i].clone()).collect(),
        _ => {
            let spent = search.nodes.min(budget);
            let mut bits = BitSearch::new(n, shuffles, budget - spent);
            match bits.assign(0, 0) {
                Some(true) => bits.bits,
                _ => return Err(exhausted(spent + bits.nodes)),
            }
        }
    };
    rows.push(vec![false; n / 2]);
    FundamentalArrangement::from_config(NetworkConfig::from_bits(n, kind, &rows)?)
}

/// Directory of arrangement files keyed by `(n, kind)`.
#[derive(Debug, Clone)]
pub struct FaCache {
    dir: PathBuf,
}

impl FaCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        FaCache { dir: dir.into() }
    }

    /// Cache rooted at `$OMEGA_FA_CACHE_DIR`, if set.
    pub fn from_env() -> Option<Self> {
        std::env::var_os(CACHE_DIR_ENV).filter(|v| !v.is_empty()).map(FaCache::new)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, n: usize, kind: ShuffleKind) -> PathBuf {
        self.dir.join(format!("fa-{kind}-{n}.toml"))
    }

    /// Loads the cached arrangement, re-verifying it, or builds and stores one.
    pub fn get_or_build(&self, n: usize, kind: ShuffleKind) -> Result<FundamentalArrangement> {
        let path = self.path_for(n, kind);
        if let Ok(text) = std::fs::read_to_string(&path) {
            if let Ok(doc) = io::parse_network(&text) {
                if doc.cfg.n() == n && doc.cfg.kind() == kind {
                    if let Ok(fa) = FundamentalArrangement::from_config(doc.cfg) {
                        return Ok(fa);
                    }
                }
            }
        }
        let fa = build_fa(n, kind)?;
        std::fs::create_dir_all(&self.dir)?;
        std::fs::write(&path, io::write_network(&fa.to_document()))?;
        Ok(fa)
    }
}

/// Uses the environment cache when configured, otherwise builds directly.
pub fn load_or_build(n: usize, kind: ShuffleKind) -> Result<FundamentalArrangement> {
    match FaCache::from_env() {
        Some(cache) => cache.get_or_build(n, kind),
        None => build_fa(n, kind),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_set_is_canonical() {
        let mut s = PairSet::new();
        assert!(s.insert(3, 1));
        assert!(!s.insert(1, 3));
        assert!(!s.insert(2, 2));
        assert!(s.contains(1, 3));
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![(1, 3)]);
    }

    #[test]
    fn mask_layers() {
        assert_eq!(mask_layer(4, 1), vec![false, true, false, true]);
        assert!(is_anti_symmetric(&mask_layer(4, 1)));
        assert!(!is_anti_symmetric(&mask_layer(4, 3)));
        assert_eq!(candidate_masks(4), vec![1, 2, 0, 3]);
    }

    #[test]
    fn small_arrangements() {
        let fa = build_fa(4, ShuffleKind::PerfectShuffle).unwrap();
        assert_eq!(fa.config().stages(), 3);
        assert_eq!(fa.coverage().len(), 6);
        let fa = build_fa(8, ShuffleKind::PerfectShuffle).unwrap();
        assert_eq!(fa.config().stages(), 7);
        assert_eq!(fa.coverage().len(), 28);
        assert_eq!(fa.new_pairs_per_stage(), &[4; 7]);
    }

    #[test]
    fn deterministic() {
        assert_eq!(
            build_fa(16, ShuffleKind::PerfectShuffle).unwrap(),
            build_fa(16, ShuffleKind::PerfectShuffle).unwrap()
        );
    }

    #[test]
    fn all_bypass_is_not_an_fa() {
        let cfg = NetworkConfig::all_bypass(8, ShuffleKind::PerfectShuffle, 7).unwrap();
        let r = verify_coverage(&cfg);
        assert!(!r.complete);
        assert!(r.pairs.len() <= 8 * 3);
        assert!(FundamentalArrangement::from_config(cfg).is_err());
    }

    #[test]
    fn single_stage_coverage() {
        let cfg = NetworkConfig::all_bypass(16, ShuffleKind::Banyan, 1).unwrap();
        let r = verify_coverage(&cfg);
        assert_eq!(r.pairs.len(), 8);
        assert_eq!(r.new_pairs_per_stage, vec![8]);
    }

    #[test]
    fn wrong_depth_is_rejected() {
        let fa = build_fa(8, ShuffleKind::PerfectShuffle).unwrap();
        let mut layers = fa.config().layers().to_vec();
        layers.push(crate::permutation::SwitchLayer::bypass(8).unwrap());
        let cfg = NetworkConfig::new(8, ShuffleKind::PerfectShuffle, layers).unwrap();
        assert!(matches!(FundamentalArrangement::from_config(cfg), Err(Error::NotAnFa(_))));
    }

    #[test]
    fn other_kinds() {
        for (n, kind) in [(4, ShuffleKind::Banyan), (8, ShuffleKind::Crossover), (16, ShuffleKind::Banyan)] {
            assert_eq!(build_fa(n, kind).unwrap().coverage().len(), total_pairs(n));
        }
        // the whole space is searched well inside the budget and holds nothing
        assert!(
            matches!(build_fa(8, ShuffleKind::Banyan), Err(Error::SearchExhausted { n: 8, nodes, .. }) if nodes < DEFAULT_SEARCH_BUDGET)
        );
    }

    #[test]
    fn unrestricted_search_alone() {
        for kind in [ShuffleKind::PerfectShuffle, ShuffleKind::Crossover] {
            let shuffles = (1..8).map(|s| stage_permutation(kind, 8, s).unwrap().into_vec()).collect();
            let mut search = BitSearch::new(8, shuffles, DEFAULT_SEARCH_BUDGET);
            assert_eq!(search.assign(0, 0), Some(true));
            let mut rows = search.bits;
            rows.push(vec![false; 4]);
            FundamentalArrangement::from_config(NetworkConfig::from_bits(8, kind, &rows).unwrap()).unwrap();
        }
    }

    #[test]
    fn tiny_budget_reports_exhaustion() {
        assert!(matches!(
            build_fa_with_budget(16, ShuffleKind::PerfectShuffle, 0),
            Err(Error::SearchExhausted { n: 16, .. })
        ));
    }

    #[test]
    fn cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let cache = FaCache::new(dir.path());
        let built = cache.get_or_build(8, ShuffleKind::PerfectShuffle).unwrap();
        assert!(cache.path_for(8, ShuffleKind::PerfectShuffle).exists());
        let loaded = cache.get_or_build(8, ShuffleKind::PerfectShuffle).unwrap();
        assert_eq!(built, loaded);
    }
}
