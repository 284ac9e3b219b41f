//! A complete omega-2 network: `M` stages, each a static shuffle followed
//! by a layer of bypass/exchange switches.

use std::fmt::Write as _;

use crate::error::{check_channel_count, Error, Result};
use crate::permutation::{Permutation, RoutingMatrix, SwitchLayer};
use crate::topology::{log2, stage_permutation, ShuffleKind};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NetworkConfig {
    n: usize,
    kind: ShuffleKind,
    layers: Vec<SwitchLayer>,
}

impl NetworkConfig {
    pub fn new(n: usize, kind: ShuffleKind, layers: Vec<SwitchLayer>) -> Result<Self> {
        check_channel_count(n)?;
        if layers.is_empty() {
            return Err(Error::NoStages);
        }
        for l in &layers {
            if l.channels() != n {
                return Err(Error::LayerLength { got: l.switches(), expected: n / 2 });
            }
        }
        Ok(NetworkConfig { n, kind, layers })
    }

    pub fn all_bypass(n: usize, kind: ShuffleKind, stages: usize) -> Result<Self> {
        let layer = SwitchLayer::bypass(n)?;
        Self::new(n, kind, vec![layer; stages])
    }

    /// Builds a config from rows of switch bits.
    pub fn from_bits(n: usize, kind: ShuffleKind, rows: &[Vec<bool>]) -> Result<Self> {
        let layers = rows.iter().map(|r| SwitchLayer::new(r.clone())).collect::<Result<Vec<_>>>()?;
        Self::new(n, kind, layers)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> ShuffleKind {
        self.kind
    }

    pub fn stages(&self) -> usize {
        self.layers.len()
    }

    pub fn switches_per_stage(&self) -> usize {
        self.n / 2
    }

    pub fn layers(&self) -> &[SwitchLayer] {
        &self.layers
    }

    /// Layer of the 1-based `stage`.
    pub fn layer(&self, stage: usize) -> &SwitchLayer {
        &self.layers[stage - 1]
    }

    pub fn shuffle(&self, stage: usize) -> Permutation {
        stage_permutation(self.kind, self.n, stage).expect("config invariants guarantee a valid shuffle")
    }

    /// Input-to-output mapping of the whole network.  The result, read as a
    /// vector, lists the input channel found at each output position.
    pub fn evaluate(&self) -> Permutation {
        self.run().0
    }

    /// Channel pairs entering each switch, after each stage's shuffle.
    pub fn stage_pairings(&self) -> StagePairing {
        self.run().1
    }

    /// Output and pairings from a single sweep.
    pub fn run(&self) -> (Permutation, StagePairing) {
        let mut channels: Vec<usize> = (0..self.n).collect();
        let mut stages = Vec::with_capacity(self.layers.len());
        for (s, layer) in self.layers.iter().enumerate() {
            channels = self.shuffle(s + 1).apply(&channels);
            let pairs = channels.chunks(2).map(|c| canonical(c[0], c[1])).collect();
            stages.push(pairs);
            for (k, &x) in layer.states().iter().enumerate() {
                if x {
                    channels.swap(2 * k, 2 * k + 1);
                }
            }
        }
        let out = Permutation::from_vec(channels).expect("stage maps are bijections");
        (out, StagePairing { stages })
    }

    /// Same network with one switch flipped.  `stage` is 1-based, `switch`
    /// 0-based.
    pub fn toggle(&self, stage: usize, switch: usize) -> Result<NetworkConfig> {
        self.check_position(stage, switch)?;
        let mut next = self.clone();
        next.layers[stage - 1] = self.layers[stage - 1].toggled(switch)?;
        Ok(next)
    }

    /// In-place variant of [`NetworkConfig::toggle`].
    pub fn toggle_in_place(&mut self, stage: usize, switch: usize) -> Result<()> {
        self.check_position(stage, switch)?;
        self.layers[stage - 1] = self.layers[stage - 1].toggled(switch)?;
        Ok(())
    }

    fn check_position(&self, stage: usize, switch: usize) -> Result<()> {
        if stage == 0 || stage > self.stages() {
            return Err(Error::StageOutOfRange { stage, stages: self.stages() });
        }
        if switch >= self.switches_per_stage() {
            return Err(Error::SwitchOutOfRange { switch, switches: self.switches_per_stage() });
        }
        Ok(())
    }

    /// Positions `(stage, switch)` whose state differs between the configs.
    pub fn differences(&self, other: &NetworkConfig) -> Result<Vec<(usize, usize)>> {
        if self.n != other.n || self.kind != other.kind || self.stages() != other.stages() {
            return Err(Error::ShapeMismatch("channel count, kind or stage count".into()));
        }
        let mut diff = vec![];
        for (s, (a, b)) in self.layers.iter().zip(&other.layers).enumerate() {
            for (k, (x, y)) in a.states().iter().zip(b.states()).enumerate() {
                if x != y {
                    diff.push((s + 1, k));
                }
            }
        }
        Ok(diff)
    }

    /// First run of `log2(n)` consecutive all-bypass stages, if any.
    pub fn wsnb_hazard(&self) -> HazardVerdict {
        let window = log2(self.n);
        let mut run = 0;
        for (s, layer) in self.layers.iter().enumerate() {
            run = if layer.is_all_bypass() { run + 1 } else { 0 };
            if run == window {
                return HazardVerdict { window, first: Some((s + 2 - window, s + 1)) };
            }
        }
        HazardVerdict { window, first: None }
    }

    /// Combined routing matrix (shuffle, then switches) of each stage.
    pub fn stage_matrices(&self) -> Vec<RoutingMatrix> {
        (1..=self.stages())
            .map(|s| {
                let stage = self.shuffle(s).compose(&self.layer(s).to_permutation()).expect("equal sizes");
                stage.to_matrix()
            })
            .collect()
    }

    pub fn matrix_text(&self) -> String {
        let mut out = String::new();
        for (s, m) in self.stage_matrices().iter().enumerate() {
            let _ = writeln!(out, "# stage {}", s + 1);
            out.push_str(&m.to_string());
        }
        out
    }

    /// Graphviz rendering: one column per stage, switch nodes `s<stage>.<switch>`,
    /// edges labelled with the (1-based) channel they carry.
    pub fn to_dot(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "digraph omega {{");
        let _ = writeln!(out, "  rankdir=LR;");
        let _ = writeln!(out, "  node [shape=box];");
        let _ = writeln!(out, "  subgraph cluster_inputs {{");
        let _ = writeln!(out, "    label=\"inputs\";");
        for c in 0..self.n {
            let _ = writeln!(out, "    \"in{}\" [shape=plaintext, label=\"{}\"];", c + 1, c + 1);
        }
        let _ = writeln!(out, "  }}");
        for s in 1..=self.stages() {
            let _ = writeln!(out, "  subgraph cluster_stage{s} {{");
            let _ = writeln!(out, "    label=\"stage {s}\";");
            for (k, &x) in self.layer(s).states().iter().enumerate() {
                let style = if x { ", style=filled, fillcolor=lightgrey" } else { "" };
                let _ = writeln!(out, "    \"s{s}.{k}\" [label=\"s{s}.{k}\"{style}];");
            }
            let _ = writeln!(out, "  }}");
        }
        let _ = writeln!(out, "  subgraph cluster_outputs {{");
        let _ = writeln!(out, "    label=\"outputs\";");
        for j in 0..self.n {
            let _ = writeln!(out, "    \"out{}\" [shape=plaintext, label=\"{}\"];", j + 1, j + 1);
        }
        let _ = writeln!(out, "  }}");

        // node currently holding each channel
        let mut holder: Vec<String> = (0..self.n).map(|c| format!("in{}", c + 1)).collect();
        let mut channels: Vec<usize> = (0..self.n).collect();
        for s in 1..=self.stages() {
            channels = self.shuffle(s).apply(&channels);
            for (p, &c) in channels.iter().enumerate() {
                let node = format!("s{s}.{}", p / 2);
                let _ = writeln!(out, "  \"{}\" -> \"{}\" [label=\"{}\"];", holder[c], node, c + 1);
                holder[c] = node;
            }
            for (k, &x) in self.layer(s).states().iter().enumerate() {
                if x {
                    channels.swap(2 * k, 2 * k + 1);
                }
            }
        }
        for (j, &c) in channels.iter().enumerate() {
            let _ = writeln!(out, "  \"{}\" -> \"out{}\" [label=\"{}\"];", holder[c], j + 1, c + 1);
        }
        out.push_str("}\n");
        out
    }
}

pub fn canonical(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// For each stage, the unordered (smaller first, 0-based) channel pair at
/// each switch input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StagePairing {
    stages: Vec<Vec<(usize, usize)>>,
}

impl StagePairing {
    pub fn stages(&self) -> usize {
        self.stages.len()
    }

    /// Pairs of the 1-based `stage`.
    pub fn stage(&self, stage: usize) -> &[(usize, usize)] {
        &self.stages[stage - 1]
    }

    pub fn pair(&self, stage: usize, switch: usize) -> (usize, usize) {
        self.stages[stage - 1][switch]
    }

    /// `(stage, switch)` holding the pair `{a, b}` at its earliest stage.
    pub fn locate(&self, a: usize, b: usize) -> Option<(usize, usize)> {
        let want = canonical(a, b);
        self.iter().find(|&(_, _, p)| p == want).map(|(s, k, _)| (s, k))
    }

    /// All stages holding `{a, b}`, in order.
    pub fn stages_of(&self, a: usize, b: usize) -> Vec<usize> {
        let want = canonical(a, b);
        self.iter().filter(|&(_, _, p)| p == want).map(|(s, _, _)| s).collect()
    }

    /// `(stage, switch, pair)` triples, stages 1-based.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, (usize, usize))> + '_ {
        self.stages.iter().enumerate().flat_map(|(s, pairs)| pairs.iter().enumerate().map(move |(k, &p)| (s + 1, k, p)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HazardVerdict {
    /// Window length, `log2(n)`.
    pub window: usize,
    /// First and last stage (1-based, inclusive) of the first all-bypass window.
    pub first: Option<(usize, usize)>,
}

impl HazardVerdict {
    pub fn is_hazard(&self) -> bool {
        self.first.is_some()
    }
}
