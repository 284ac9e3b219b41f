//! Rearrangement routing from a fundamental arrangement.
//!
//! Flipping a switch at stage `s` that holds channels `{a, b}` exchanges the
//! whole downstream paths of `a` and `b`, so it swaps exactly those two
//! channels in the network output.  Routing is therefore sorting the output
//! by transpositions drawn from the pairs currently meeting at switches.
//!
//! The router compares the current output with the target, collects the
//! *required pairs* `{current[j], target[j]}` of every misplaced position,
//! scans the stages from the first one upward and flips every switch of the
//! first matching stage whose pair is required.  Flips invalidate the
//! downstream pairings, so after each pass the pairings are recomputed and
//! the scan restarts at stage 1.
//!
//! Direct pairs alone can run dry: once a flip relabels later switches, a
//! needed pair may only survive as an indirect connection.  With
//! [`PairRule::CycleSplit`] (the default) a stage also matches when it holds
//! two channels of the same cycle of the output-to-target discrepancy; if
//! that stage has no required pair, its first such switch is flipped.  Every
//! flip of either kind splits one discrepancy cycle, so a route from an
//! arrangement never takes more than `n - 1` flips.

use std::fmt;

use crate::error::{Error, Result};
use crate::fa::{verify_coverage, FundamentalArrangement, PairSet};
use crate::fabric::{canonical, NetworkConfig, StagePairing};
use crate::io::format_trace_line;
use crate::permutation::Permutation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PairRule {
    /// Only `{current[j], target[j]}` pairs are flipped.  Can stall.
    Literal,
    /// Falls back to cycle-splitting pairs when no direct pair is available.
    #[default]
    CycleSplit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToggleReason {
    /// The switch held a required pair.
    Required,
    /// The switch held two channels of the same discrepancy cycle.
    CycleSplit,
    /// Undoing a recorded trace on the way back to the arrangement.
    Unwind,
    /// Resetting a switch that differs from the arrangement.
    Reset,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Toggle {
    /// 1-based stage.
    pub stage: usize,
    /// 0-based switch.
    pub switch: usize,
    /// Channels that met at the switch before the flip.
    pub pair: (usize, usize),
    pub reason: ToggleReason,
    /// Network output right after the flip.
    pub output: Permutation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RouteTrace {
    pub start: NetworkConfig,
    pub end: NetworkConfig,
    pub toggles: Vec<Toggle>,
    /// Flips spent returning to the arrangement (any-to-any routes).
    pub phase_a_steps: usize,
    /// Phase A used reset mode, which is not step-bounded.
    pub reset_used: bool,
}

impl RouteTrace {
    fn empty(start: NetworkConfig) -> Self {
        RouteTrace { end: start.clone(), start, toggles: vec![], phase_a_steps: 0, reset_used: false }
    }

    pub fn total_steps(&self) -> usize {
        self.toggles.len()
    }

    pub fn final_output(&self) -> Permutation {
        self.toggles.last().map(|t| t.output.clone()).unwrap_or_else(|| self.start.evaluate())
    }

    /// Re-applies the flips from `start`, checking each recorded output and
    /// the recorded end config.
    pub fn replay(&self) -> Result<NetworkConfig> {
        let mut cfg = self.start.clone();
        for t in &self.toggles {
            cfg.toggle_in_place(t.stage, t.switch)?;
            if cfg.evaluate() != t.output {
                return Err(Error::TraceMismatch);
            }
        }
        if cfg != self.end {
            return Err(Error::TraceMismatch);
        }
        Ok(cfg)
    }

    /// Rebuilds a trace from `(stage, switch, output)` records, verifying
    /// every output along the way.
    pub fn from_records(start: NetworkConfig, records: &[(usize, usize, Permutation)]) -> Result<Self> {
        let mut cfg = start.clone();
        let mut toggles = Vec::with_capacity(records.len());
        for (stage, switch, output) in records {
            let next = cfg.toggle(*stage, *switch)?;
            let pair = cfg.stage_pairings().pair(*stage, *switch);
            cfg = next;
            let actual = cfg.evaluate();
            if &actual != output {
                return Err(Error::TraceMismatch);
            }
            toggles.push(Toggle {
                stage: *stage,
                switch: *switch,
                pair,
                reason: ToggleReason::Required,
                output: actual,
            });
        }
        Ok(RouteTrace { start, end: cfg, toggles, phase_a_steps: 0, reset_used: false })
    }

    /// Trace file text, one `step <i>: stage <s> switch <k> -> output <list>`
    /// line per flip.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, t) in self.toggles.iter().enumerate() {
            out.push_str(&format_trace_line(i + 1, t.stage, t.switch, &t.output));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequiredPairs {
    pub pairs: PairSet,
}

impl RequiredPairs {
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// `{current[j], target[j]}` over every mismatched output position `j`.
pub fn required_pairs(current: &Permutation, target: &Permutation) -> Result<RequiredPairs> {
    if current.len() != target.len() {
        return Err(Error::SizeMismatch { left: current.len(), right: target.len() });
    }
    let pairs =
        current.as_slice().iter().zip(target.as_slice()).filter(|(c, t)| c != t).map(|(&c, &t)| (c, t)).collect();
    Ok(RequiredPairs { pairs })
}

/// Cycle id of every channel in the map "channel -> channel occupying its
/// target position".  Placed channels get `None`.
fn discrepancy_cycles(current: &Permutation, target: &Permutation) -> Vec<Option<usize>> {
    let n = current.len();
    let target_pos = target.positions();
    let mut cycle = vec![None; n];
    for start in 0..n {
        if cycle[start].is_some() || current.source(target_pos[start]) == start {
            continue;
        }
        let mut c = start;
        while cycle[c].is_none() {
            cycle[c] = Some(start);
            c = current.source(target_pos[c]);
        }
    }
    cycle
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StallDump {
    pub target: Permutation,
    pub current: Permutation,
    pub required: Vec<(usize, usize)>,
    pub pairings: StagePairing,
    pub steps: usize,
}

impl fmt::Display for StallDump {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "target:  {}", self.target)?;
        writeln!(f, "current: {}", self.current)?;
        writeln!(f, "steps so far: {}", self.steps)?;
        let req: Vec<String> = self.required.iter().map(|(a, b)| format!("{}-{}", a + 1, b + 1)).collect();
        writeln!(f, "required pairs: {}", req.join(" "))?;
        for s in 1..=self.pairings.stages() {
            let pairs: Vec<String> =
                self.pairings.stage(s).iter().map(|(a, b)| format!("{}-{}", a + 1, b + 1)).collect();
            writeln!(f, "stage {s}: {}", pairs.join(" "))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RouteRequest {
    pub network: NetworkConfig,
    pub target: Permutation,
}

impl RouteRequest {
    pub fn new(network: NetworkConfig, target: Permutation) -> Result<Self> {
        if network.n() != target.len() {
            return Err(Error::SizeMismatch { left: network.n(), right: target.len() });
        }
        Ok(RouteRequest { network, target })
    }
}

pub fn route_from_fa(req: &RouteRequest) -> Result<RouteTrace> {
    route_from_fa_with(req, PairRule::default())
}

pub fn route_from_fa_with(req: &RouteRequest, rule: PairRule) -> Result<RouteTrace> {
    let coverage = verify_coverage(&req.network);
    if !coverage.complete {
        return Err(Error::NotAnFa(format!(
            "network covers {}/{} pairs",
            coverage.pairs.len(),
            crate::fa::total_pairs(req.network.n())
        )));
    }
    route_pairs(req.network.clone(), &req.target, rule)
}

fn route_pairs(start: NetworkConfig, target: &Permutation, rule: PairRule) -> Result<RouteTrace> {
    let n = start.n();
    let bound = 2 * (n - 1);
    let mut trace = RouteTrace::empty(start);
    let mut cfg = trace.start.clone();
    let mut placed_before = 0;
    loop {
        let (current, pairings) = cfg.run();
        if &current == target {
            break;
        }
        let placed = (0..n).filter(|&j| current.source(j) == target.source(j)).count();
        let required = required_pairs(&current, target)?;
        let dump = |steps| {
            Box::new(StallDump {
                target: target.clone(),
                current: current.clone(),
                required: required.pairs.iter().collect(),
                pairings: pairings.clone(),
                steps,
            })
        };
        if placed < placed_before {
            return Err(Error::ProgressViolation(dump(trace.total_steps())));
        }
        placed_before = placed;

        let cycles = discrepancy_cycles(&current, target);
        let splits = |(a, b): (usize, usize)| cycles[a].is_some() && cycles[a] == cycles[b];
        let mut flips: Vec<(usize, usize, ToggleReason)> = vec![];
        for s in 1..=pairings.stages() {
            let pairs = pairings.stage(s);
            let direct: Vec<usize> =
                (0..pairs.len()).filter(|&k| required.pairs.contains(pairs[k].0, pairs[k].1)).collect();
            if !direct.is_empty() {
                flips = direct.into_iter().map(|k| (s, k, ToggleReason::Required)).collect();
                break;
            }
            if rule == PairRule::CycleSplit {
                if let Some(k) = (0..pairs.len()).find(|&k| splits(pairs[k])) {
                    flips = vec![(s, k, ToggleReason::CycleSplit)];
                    break;
                }
            }
        }
        if flips.is_empty() {
            return Err(Error::Stalled(dump(trace.total_steps())));
        }
        for (stage, switch, reason) in flips {
            let pair = pairings.pair(stage, switch);
            cfg.toggle_in_place(stage, switch)?;
            trace.toggles.push(Toggle { stage, switch, pair, reason, output: cfg.evaluate() });
        }
        if trace.total_steps() > bound {
            return Err(Error::StepOverflow(dump(trace.total_steps())));
        }
    }
    trace.end = cfg;
    Ok(trace)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RouteMode {
    /// Return to the arrangement by undoing a router trace.
    Reverse,
    /// Return to the arrangement by flipping every differing switch.
    Reset,
}

/// Routes `network` to `target` through the arrangement: first back to
/// `fa` (phase A), then forward with [`route_from_fa`] (phase B).
///
/// In reverse mode phase A undoes `prior_trace`, or, without one, the trace
/// the router itself would produce from `fa` to the network's current
/// output.  The latter only works for networks the router produced.
pub fn route_any_to_any(
    network: &NetworkConfig,
    fa: &FundamentalArrangement,
    target: &Permutation,
    prior_trace: Option<&RouteTrace>,
    mode: RouteMode,
) -> Result<RouteTrace> {
    let fa_cfg = fa.config();
    if network.n() != fa_cfg.n() || network.kind() != fa_cfg.kind() || network.stages() != fa_cfg.stages() {
        return Err(Error::ShapeMismatch(format!(
            "network is {} x {} ({}), arrangement is {} x {} ({})",
            network.n(),
            network.stages(),
            network.kind(),
            fa_cfg.n(),
            fa_cfg.stages(),
            fa_cfg.kind()
        )));
    }
    if target.len() != network.n() {
        return Err(Error::SizeMismatch { left: network.n(), right: target.len() });
    }
    let mut trace = RouteTrace::empty(network.clone());
    if &network.evaluate() == target {
        return Ok(trace);
    }

    let mut cfg = network.clone();
    match mode {
        RouteMode::Reverse => {
            let fresh;
            let down = match prior_trace {
                Some(t) => {
                    if &t.start != fa_cfg || &t.end != network {
                        return Err(Error::TraceMismatch);
                    }
                    t
                }
                None => {
                    fresh = route_from_fa(&RouteRequest::new(fa_cfg.clone(), network.evaluate())?)?;
                    if &fresh.end != network {
                        return Err(Error::ModeMismatch);
                    }
                    &fresh
                }
            };
            for t in down.toggles.iter().rev() {
                let pair = cfg.stage_pairings().pair(t.stage, t.switch);
                cfg.toggle_in_place(t.stage, t.switch)?;
                trace.toggles.push(Toggle {
                    stage: t.stage,
                    switch: t.switch,
                    pair,
                    reason: ToggleReason::Unwind,
                    output: cfg.evaluate(),
                });
            }
        }
        RouteMode::Reset => {
            for (stage, switch) in network.differences(fa_cfg)? {
                let pair = cfg.stage_pairings().pair(stage, switch);
                cfg.toggle_in_place(stage, switch)?;
                trace.toggles.push(Toggle { stage, switch, pair, reason: ToggleReason::Reset, output: cfg.evaluate() });
            }
            trace.reset_used = true;
        }
    }
    debug_assert_eq!(&cfg, fa_cfg);
    trace.phase_a_steps = trace.toggles.len();

    let forward = route_pairs(cfg, target, PairRule::default())?;
    trace.toggles.extend(forward.toggles);
    trace.end = forward.end;
    Ok(trace)
}

/// How a follow-up swap relates to an earlier flip in the arrangement.
/// Channels are 0-based; stages 1-based and taken from the untouched
/// arrangement unless noted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainCase {
    /// The request shares no channel with the earlier flip; its switch is
    /// unaffected.
    Disjoint { request_stage: usize },
    /// The request is the earlier pair itself.
    SamePair { stage: usize },
    /// The request's switch comes before the earlier flip and survives it.
    MeetsEarlier { prior_stage: usize, request_stage: usize },
    /// Request and partner switches both follow the earlier flip; they
    /// trade places, so the request is still served by a single switch.
    BothLater { prior_stage: usize, request_stage: usize, partner_stage: usize },
    /// The request switch follows the flip but the partner precedes it:
    /// after the flip the partner pair meets twice and the request pair
    /// nowhere, so it can only be reached by chaining through the later
    /// partner switch and undone with the earlier one.
    NeedsChaining { prior_stage: usize, earlier_partner_stage: usize, later_partner_stage: usize },
}

/// Classifies swapping `request` after the switch holding `prior` has been
/// flipped in `fa`.
pub fn chain_analysis(
    fa: &FundamentalArrangement,
    prior: (usize, usize),
    request: (usize, usize),
) -> Result<ChainCase> {
    let n = fa.n();
    for c in [prior.0, prior.1, request.0, request.1] {
        if c >= n {
            return Err(Error::ChannelOutOfRange { channel: c, n });
        }
    }
    if prior.0 == prior.1 || request.0 == request.1 {
        return Err(Error::Parse("pairs need two distinct channels".into()));
    }
    let pairing = fa.config().stage_pairings();
    let stage_of = |a, b| pairing.locate(a, b).expect("arrangement covers every pair").0;
    let (prior, request) = (canonical(prior.0, prior.1), canonical(request.0, request.1));
    let prior_stage = stage_of(prior.0, prior.1);
    if prior == request {
        return Ok(ChainCase::SamePair { stage: prior_stage });
    }

    let shared = [request.0, request.1].into_iter().find(|&c| c == prior.0 || c == prior.1);
    let Some(shared) = shared else {
        return Ok(ChainCase::Disjoint { request_stage: stage_of(request.0, request.1) });
    };
    let other_prior = if prior.0 == shared { prior.1 } else { prior.0 };
    let other_request = if request.0 == shared { request.1 } else { request.0 };
    let request_stage = stage_of(shared, other_request);
    let partner_stage = stage_of(other_prior, other_request);
    if request_stage < prior_stage {
        Ok(ChainCase::MeetsEarlier { prior_stage, request_stage })
    } else if partner_stage > prior_stage {
        Ok(ChainCase::BothLater { prior_stage, request_stage, partner_stage })
    } else {
        Ok(ChainCase::NeedsChaining {
            prior_stage,
            earlier_partner_stage: partner_stage,
            later_partner_stage: request_stage,
        })
    }
}
