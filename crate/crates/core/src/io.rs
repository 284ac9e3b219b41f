//! Text formats: network/arrangement files (TOML) and route traces.
//!
//! Network file:
//!
//! ```toml
//! indexing = "one-based"
//! n = 4
//! kind = "perfect-shuffle"
//! layers = [[0, 1], [1, 0], [0, 0]]
//! coverage_complete = true          # arrangement files only
//! new_pairs_per_stage = [2, 2, 2]   # arrangement files only
//! ```
//!
//! `layers` rows list switch states, `0` = bypass and `1` = exchange.
//! Trace files hold one line per toggle:
//! `step <i>: stage <s> switch <k> -> output <list>`, with 1-based stages,
//! 0-based switches and 1-based channel lists.

use std::fmt::Write as _;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::fabric::NetworkConfig;
use crate::permutation::{Permutation, SwitchLayer};
use crate::topology::ShuffleKind;

pub const INDEXING: &str = "one-based";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkDocument {
    pub cfg: NetworkConfig,
    pub coverage_complete: Option<bool>,
    pub new_pairs_per_stage: Option<Vec<usize>>,
}

impl From<NetworkConfig> for NetworkDocument {
    fn from(cfg: NetworkConfig) -> Self {
        NetworkDocument { cfg, coverage_complete: None, new_pairs_per_stage: None }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkFile {
    #[serde(default = "default_indexing")]
    indexing: String,
    n: usize,
    kind: ShuffleKind,
    layers: Vec<Vec<u8>>,
    #[serde(default)]
    coverage_complete: Option<bool>,
    #[serde(default)]
    new_pairs_per_stage: Option<Vec<usize>>,
}

fn default_indexing() -> String {
    INDEXING.to_string()
}

pub fn write_network(doc: &NetworkDocument) -> String {
    let file = NetworkFile {
        indexing: INDEXING.to_string(),
        n: doc.cfg.n(),
        kind: doc.cfg.kind(),
        layers: doc.cfg.layers().iter().map(|l| l.states().iter().map(|&x| x as u8).collect()).collect(),
        coverage_complete: doc.coverage_complete,
        new_pairs_per_stage: doc.new_pairs_per_stage.clone(),
    };
    // layer rows read best one per line
    let mut out = String::new();
    let _ = writeln!(out, "indexing = \"{}\"", file.indexing);
    let _ = writeln!(out, "n = {}", file.n);
    let _ = writeln!(out, "kind = \"{}\"", file.kind);
    out.push_str("layers = [\n");
    for row in &file.layers {
        let cells: Vec<String> = row.iter().map(|b| b.to_string()).collect();
        let _ = writeln!(out, "  [{}],", cells.join(", "));
    }
    out.push_str("]\n");
    if let Some(c) = file.coverage_complete {
        let _ = writeln!(out, "coverage_complete = {c}");
    }
    if let Some(counts) = &file.new_pairs_per_stage {
        let cells: Vec<String> = counts.iter().map(|b| b.to_string()).collect();
        let _ = writeln!(out, "new_pairs_per_stage = [{}]", cells.join(", "));
    }
    out
}

pub fn parse_network(text: &str) -> Result<NetworkDocument> {
    let file: NetworkFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    if file.indexing != INDEXING {
        return Err(Error::Parse(format!("unsupported indexing `{}`", file.indexing)));
    }
    let layers = file
        .layers
        .iter()
        .enumerate()
        .map(|(s, row)| {
            let states = row
                .iter()
                .map(|&b| match b {
                    0 => Ok(false),
                    1 => Ok(true),
                    v => Err(Error::Parse(format!("layer {} holds switch state {v}, expected 0 or 1", s + 1))),
                })
                .collect::<Result<Vec<_>>>()?;
            SwitchLayer::new(states)
        })
        .collect::<Result<Vec<_>>>()?;
    let cfg = NetworkConfig::new(file.n, file.kind, layers)?;
    Ok(NetworkDocument {
        cfg,
        coverage_complete: file.coverage_complete,
        new_pairs_per_stage: file.new_pairs_per_stage,
    })
}

/// One parsed trace line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceLine {
    pub step: usize,
    pub stage: usize,
    pub switch: usize,
    pub output: Permutation,
}

pub fn format_trace_line(step: usize, stage: usize, switch: usize, output: &Permutation) -> String {
    format!("step {step}: stage {stage} switch {switch} -> output {output}")
}

pub fn parse_trace(text: &str) -> Result<Vec<TraceLine>> {
    text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).map(parse_trace_line).collect()
}

fn parse_trace_line(line: &str) -> Result<TraceLine> {
    let bad = || Error::Parse(format!("malformed trace line `{line}`"));
    let words: Vec<&str> = line.split_whitespace().collect();
    match words.as_slice() {
        ["step", step, "stage", stage, "switch", switch, "->", "output", list] => {
            let step = step.strip_suffix(':').ok_or_else(bad)?.parse().map_err(|_| bad())?;
            Ok(TraceLine {
                step,
                stage: stage.parse().map_err(|_| bad())?,
                switch: switch.parse().map_err(|_| bad())?,
                output: list.parse()?,
            })
        }
        _ => Err(bad()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn network_round_trip() {
        let cfg = NetworkConfig::from_bits(
            4,
            ShuffleKind::Crossover,
            &[vec![false, true], vec![true, true], vec![false, false]],
        )
        .unwrap();
        let doc = NetworkDocument { cfg, coverage_complete: Some(false), new_pairs_per_stage: Some(vec![2, 2, 1]) };
        let text = write_network(&doc);
        assert!(text.contains("kind = \"crossover\""));
        assert_eq!(parse_network(&text).unwrap(), doc);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(parse_network("n = 4\nkind = \"banyan\"\nlayers = [[0, 2]]\n").is_err());
        assert!(parse_network("n = 4\nkind = \"omega\"\nlayers = [[0, 0]]\n").is_err());
        assert!(parse_network("n = 4\nkind = \"banyan\"\nlayers = [[0, 0, 0]]\n").is_err());
        assert!(parse_network("n = 4\nkind = \"banyan\"\nlayers = []\n").is_err());
        assert!(parse_network("indexing = \"zero-based\"\nn = 4\nkind = \"banyan\"\nlayers = [[0, 0]]\n").is_err());
        // indexing defaults to one-based
        assert!(parse_network("n = 4\nkind = \"banyan\"\nlayers = [[0, 0]]\n").is_ok());
    }

    #[test]
    fn trace_lines() {
        let out: Permutation = "2,1,3,4".parse().unwrap();
        let line = format_trace_line(1, 3, 0, &out);
        assert_eq!(line, "step 1: stage 3 switch 0 -> output 2,1,3,4");
        let parsed = parse_trace(&format!("# header\n{line}\n\n")).unwrap();
        assert_eq!(parsed, vec![TraceLine { step: 1, stage: 3, switch: 0, output: out }]);
        assert!(parse_trace("step one: stage 3 switch 0 -> output 1,2").is_err());
    }
}
