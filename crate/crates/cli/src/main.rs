use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use omega_fa::fa::{load_or_build, total_pairs};
use omega_fa::io::{parse_network, parse_trace, write_network, NetworkDocument};
use omega_fa::oracle::{
    equivalence_evidence, matrix_evaluate, oracle_mismatches, reachable_set, snb_impossibility_evidence, Relabeling,
};
use omega_fa::topology::log2;
use omega_fa::{
    route_any_to_any, route_from_fa, Error, FundamentalArrangement, NetworkConfig, Permutation, RouteMode,
    RouteRequest, RouteTrace, ShuffleKind,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PHASE_A_HEADER: &str = "# phase-a-steps:";

#[derive(Parser)]
#[command(name = "omega-fa", version, about = "Omega-2 networks: fundamental arrangements and rearrangement routing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fundamental arrangements.
    #[command(subcommand)]
    Fa(FaCommand),
    /// Route a network to a target output order.
    Route(RouteArgs),
    /// Render a network as Graphviz or per-stage matrices.
    Export(ExportArgs),
    /// Brute-force checks.  The last line is PASS, FAIL or SKIP (too large).
    #[command(subcommand)]
    Verify(VerifyCommand),
}

#[derive(Subcommand)]
enum FaCommand {
    /// Build (or load from the cache directory) an arrangement.
    Build {
        #[arg(short, value_parser = parse_channels)]
        n: usize,
        #[arg(long, value_parser = parse_kind)]
        arch: ShuffleKind,
        /// Output file; the arrangement goes to stdout when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Reverse,
    Reset,
}

#[derive(Args)]
struct RouteArgs {
    #[arg(long)]
    network: PathBuf,
    /// 1-based comma-separated output order, e.g. 1,3,5,7,2,4,6,8.
    #[arg(long, value_parser = parse_target)]
    target: Permutation,
    /// Write the toggle trace here.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Return to the canonical arrangement first, by undoing a trace
    /// (reverse, the default) or by resetting differing switches.  Without
    /// this flag or a prior trace, a network that is itself an arrangement
    /// is routed directly.
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Trace that produced the network from the arrangement (reverse mode).
    #[arg(long)]
    prior_trace: Option<PathBuf>,
    /// Write the resulting network here.
    #[arg(long)]
    save: Option<PathBuf>,
    /// Where to write the diagnostic if routing stalls.
    #[arg(long)]
    dump: Option<PathBuf>,
}

#[derive(Args)]
#[group(required = true, multiple = false, id = "format")]
struct ExportFormat {
    #[arg(long)]
    dot: bool,
    #[arg(long)]
    matrix: bool,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    network: PathBuf,
    #[command(flatten)]
    format: ExportFormat,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum VerifyCommand {
    /// Count the outputs reachable at a given depth; PASS if all n! are.
    Reachability {
        #[arg(short, value_parser = parse_channels)]
        n: usize,
        #[arg(long, value_parser = parse_kind, default_value = "perfect-shuffle")]
        arch: ShuffleKind,
        /// Defaults to n-1.
        #[arg(long)]
        stages: Option<usize>,
    },
    /// Compare reachable sets of the four shuffle kinds.
    Equivalence {
        #[arg(short, value_parser = parse_channels)]
        n: usize,
        #[arg(long)]
        stages: Option<usize>,
    },
    /// Partner counts of an all-bypass perfect-shuffle network n*log2(n) deep.
    Snb {
        #[arg(short, value_parser = parse_channels)]
        n: usize,
    },
    /// Matrix-product evaluation against permutation evaluation.
    OracleMatch {
        #[arg(short, value_parser = parse_channels)]
        n: usize,
        #[arg(long, value_parser = parse_kind, default_value = "perfect-shuffle")]
        arch: ShuffleKind,
        #[arg(long)]
        stages: Option<usize>,
        /// Check this many random settings instead of all of them.
        #[arg(long, requires = "seed")]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Look for log2(n) consecutive all-bypass stages.
    Hazard {
        #[arg(long)]
        network: PathBuf,
    },
}

fn parse_channels(s: &str) -> Result<usize, String> {
    let n: usize = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if n < 4 || !n.is_power_of_two() {
        return Err(format!("{n} is not a power of two of at least 4"));
    }
    Ok(n)
}

fn parse_kind(s: &str) -> Result<ShuffleKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_target(s: &str) -> Result<Permutation, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Failure carrying its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn check(message: impl Into<String>) -> Self {
        Failure { code: 1, message: message.into() }
    }

    fn usage(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidChannelCount(_)
            | Error::SizeMismatch { .. }
            | Error::NotAPermutation(_)
            | Error::LayerLength { .. }
            | Error::NoStages
            | Error::StageOutOfRange { .. }
            | Error::SwitchOutOfRange { .. }
            | Error::ChannelOutOfRange { .. }
            | Error::MalformedMatrix(_)
            | Error::UnknownShuffleKind(_)
            | Error::Parse(_)
            | Error::Io(_)
            | Error::ShapeMismatch(_) => 2,
            Error::TooLarge { .. } => 3,
            _ => 1,
        };
        Failure { code, message: e.to_string() }
    }
}

type Outcome = Result<ExitCode, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::check(format!("{}: {e}", path.display())))
}

fn emit(output: Option<&Path>, text: &str) -> Result<(), Failure> {
    match output {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_network(path: &Path) -> Result<NetworkConfig, Failure> {
    Ok(parse_network(&read(path)?)?.cfg)
}

fn fa_build(n: usize, kind: ShuffleKind, output: Option<PathBuf>) -> Outcome {
    let fa = load_or_build(n, kind)?;
    let got = fa.coverage().len();
    let summary = format!("pairs: {got}/{}", total_pairs(n));
    let text = write_network(&fa.to_document());
    match &output {
        Some(p) => {
            write(p, &text)?;
            println!("{summary}");
        }
        None => {
            print!("{text}");
            eprintln!("{summary}");
        }
    }
    Ok(if got == total_pairs(n) { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

/// Rebuilds a prior trace from its file.  Lines after a phase-A header are
/// the part that starts from the arrangement.
fn load_prior_trace(path: &Path, fa: &FundamentalArrangement) -> Result<RouteTrace, Failure> {
    let text = read(path)?;
    let skip = text
        .lines()
        .find_map(|l| l.strip_prefix(PHASE_A_HEADER))
        .map(|v| {
            v.trim().parse::<usize>().map_err(|_| Failure::usage(format!("{}: bad phase-a header", path.display())))
        })
        .transpose()?
        .unwrap_or(0);
    let records: Vec<(usize, usize, Permutation)> =
        parse_trace(&text)?.into_iter().skip(skip).map(|l| (l.stage, l.switch, l.output)).collect();
    Ok(RouteTrace::from_records(fa.config().clone(), &records)?)
}

fn trace_text(trace: &RouteTrace) -> String {
    let mut text = String::new();
    if trace.phase_a_steps > 0 {
        text.push_str(&format!("{PHASE_A_HEADER} {}\n", trace.phase_a_steps));
    }
    text + &trace.to_text()
}

fn route(args: RouteArgs) -> Outcome {
    let network = load_network(&args.network)?;
    let n = network.n();
    if args.target.len() != n {
        return Err(Failure::usage(format!("target has {} channels, network has {n}", args.target.len())));
    }
    let direct = args.mode.is_none()
        && args.prior_trace.is_none()
        && FundamentalArrangement::from_config(network.clone()).is_ok();
    let result = if direct {
        route_from_fa(&RouteRequest::new(network.clone(), args.target.clone())?)
    } else {
        let fa = load_or_build(n, network.kind())?;
        match args.mode.unwrap_or(Mode::Reverse) {
            Mode::Reverse => {
                let prior = args.prior_trace.as_deref().map(|p| load_prior_trace(p, &fa)).transpose()?;
                route_any_to_any(&network, &fa, &args.target, prior.as_ref(), RouteMode::Reverse)
            }
            Mode::Reset => route_any_to_any(&network, &fa, &args.target, None, RouteMode::Reset),
        }
    };
    let trace = match result {
        Ok(t) => t,
        Err(Error::Stalled(d) | Error::StepOverflow(d) | Error::ProgressViolation(d)) => {
            let path = args.dump.unwrap_or_else(|| args.network.with_extension("stall.txt"));
            write(&path, &d.to_string())?;
            println!("routing failed after {} steps", d.steps);
            println!("dump: {}", path.display());
            return Ok(ExitCode::from(1));
        }
        Err(e) => return Err(e.into()),
    };

    println!("steps: {} (bound: {})", trace.total_steps(), 2 * (n - 1));
    if trace.phase_a_steps > 0 || trace.reset_used {
        let mode = if trace.reset_used { "reset" } else { "reverse" };
        println!("phase a: {} ({mode}), phase b: {}", trace.phase_a_steps, trace.total_steps() - trace.phase_a_steps);
    }
    println!("output: {}", trace.final_output());
    if let Some(p) = &args.trace {
        write(p, &trace_text(&trace))?;
    }
    if let Some(p) = &args.save {
        write(p, &write_network(&NetworkDocument::from(trace.end.clone())))?;
    }
    Ok(if trace.final_output() == args.target { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn export(args: ExportArgs) -> Outcome {
    let cfg = load_network(&args.network)?;
    let text = if args.format.dot { cfg.to_dot() } else { cfg.matrix_text() };
    emit(args.output.as_deref(), &text)?;
    Ok(ExitCode::SUCCESS)
}

fn verdict(pass: bool) -> Outcome {
    println!("{}", if pass { "PASS" } else { "FAIL" });
    Ok(if pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

/// Runs a check whose enumeration may be refused by the size guard.
fn guarded(check: impl FnOnce() -> Result<bool, Failure>) -> Outcome {
    match check() {
        Ok(pass) => verdict(pass),
        Err(Failure { code: 3, message }) => {
            println!("{message}");
            println!("SKIP (too large)");
            Ok(ExitCode::from(3))
        }
        Err(f) => Err(f),
    }
}

fn verify(command: VerifyCommand) -> Outcome {
    match command {
        VerifyCommand::Reachability { n, arch, stages } => guarded(|| {
            let stages = stages.unwrap_or(n - 1);
            let set = reachable_set(n, arch, stages)?;
            let all: usize = (1..=n).product();
            println!("network: n={n} kind={arch} stages={stages}");
            println!("reachable: {}/{all}", set.len());
            Ok(set.len() == all)
        }),
        VerifyCommand::Equivalence { n, stages } => guarded(|| {
            let stages = stages.unwrap_or(n - 1);
            let r = equivalence_evidence(n, stages)?;
            println!("network: n={n} stages={stages}");
            for k in &r.kinds {
                let relabel = match &k.relabeling {
                    Relabeling::Found { input, output } => format!("relabeling found (input {input}, output {output})"),
                    Relabeling::NotFound => "no relabeling".to_string(),
                    Relabeling::NotSearched => "relabeling not searched".to_string(),
                };
                println!("{}: reachable {}, {relabel}", k.kind, k.reachable);
            }
            Ok(r.sizes_agree() && r.relabelings_found())
        }),
        VerifyCommand::Snb { n } => {
            let r = snb_impossibility_evidence(n)?;
            println!("all-bypass perfect shuffle: n={n} depth={}", r.depth);
            for (c, (&met, &missed)) in r.partner_counts.iter().zip(&r.never_met).enumerate() {
                println!("channel {}: partners {met}, never met {missed}", c + 1);
            }
            println!("expected partners per channel: {}", log2(n));
            verdict(r.holds())
        }
        VerifyCommand::OracleMatch { n, arch, stages, samples, seed } => {
            let stages = stages.unwrap_or(n - 1);
            println!("network: n={n} kind={arch} stages={stages}");
            match samples {
                None => guarded(|| {
                    let bad = oracle_mismatches(n, arch, stages)?;
                    println!("settings: {} exhaustive, mismatches: {}", 1u64 << (stages * n / 2), bad.len());
                    Ok(bad.is_empty())
                }),
                Some(count) => {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or_default());
                    let mut bad = 0;
                    for _ in 0..count {
                        let rows: Vec<Vec<bool>> =
                            (0..stages).map(|_| (0..n / 2).map(|_| rng.gen()).collect()).collect();
                        let cfg = NetworkConfig::from_bits(n, arch, &rows)?;
                        bad += usize::from(cfg.evaluate() != matrix_evaluate(&cfg));
                    }
                    println!("settings: {count} sampled, mismatches: {bad}");
                    verdict(bad == 0)
                }
            }
        }
        VerifyCommand::Hazard { network } => {
            let cfg = load_network(&network)?;
            let v = cfg.wsnb_hazard();
            println!("network: n={} kind={} stages={}", cfg.n(), cfg.kind(), cfg.stages());
            println!("window: {} stages", v.window);
            // independent scan over every window
            let first = (1..=cfg.stages().saturating_sub(v.window - 1))
                .find(|&a| (a..a + v.window).all(|s| cfg.layer(s).is_all_bypass()))
                .map(|a| (a, a + v.window - 1));
            match v.first {
                Some((a, b)) => {
                    println!("hazard: all-bypass stages {a}-{b}");
                    if cfg.kind() == ShuffleKind::PerfectShuffle {
                        let window = NetworkConfig::all_bypass(cfg.n(), cfg.kind(), v.window)?;
                        println!("window output is the input order: {}", window.evaluate().is_identity());
                    }
                }
                None => println!("hazard: none"),
            }
            verdict(first == v.first)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Fa(FaCommand::Build { n, arch, output }) => fa_build(n, arch, output),
        Command::Route(args) => route(args),
        Command::Export(args) => export(args),
        Command::Verify(command) => verify(command),
    };
    match outcome {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
