//! Omega-2 multistage interconnection networks built from static shuffle
//! stages and 2x2 bypass/exchange switches.
//!
//! The crate constructs *fundamental arrangements*, `n-1` stage switch
//! settings in which every pair of channels meets at some switch, and routes
//! from such an arrangement to any output order in at most `n-1` switch
//! flips (any order to any order in at most `2(n-1)`).
//!
//! Channel indices are 0-based in the API.  Text formats and `Display`
//! output use 1-based channel labels.

pub mod error;
pub mod fa;
pub mod fabric;
pub mod io;
pub mod oracle;
pub mod permutation;
pub mod router;
pub mod topology;

pub use error::{Error, Result};
pub use fa::{build_fa, verify_coverage, CoverageReport, FaCache, FundamentalArrangement, PairSet};
pub use fabric::{HazardVerdict, NetworkConfig, StagePairing};
pub use permutation::{validate_switch_matrix, Permutation, RoutingMatrix, SwitchLayer, SwitchMatrixVerdict};
pub use router::{
    chain_analysis, required_pairs, route_any_to_any, route_from_fa, ChainCase, PairRule, RouteMode, RouteRequest,
    RouteTrace,
};
pub use topology::{shuffle_period, stage_permutation, ShuffleKind};
