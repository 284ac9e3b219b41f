use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_omega-fa"))
        .args(args)
        .current_dir(dir)
        .env_remove("OMEGA_FA_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn last_line(o: &Output) -> String {
    stdout(o).lines().last().unwrap_or_default().to_string()
}

fn build(dir: &Path, n: usize) -> String {
    let file = format!("fa{n}.toml");
    let o = run(dir, &["fa", "build", "-n", &n.to_string(), "--arch", "perfect-shuffle", "-o", &file]);
    assert_eq!(o.status.code(), Some(0));
    file
}

#[test]
fn fa_build_reports_coverage() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["fa", "build", "-n", "8", "--arch", "perfect-shuffle", "-o", "fa.toml"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "pairs: 28/28");
    let text = std::fs::read_to_string(dir.path().join("fa.toml")).unwrap();
    assert!(text.contains("coverage_complete = true"));

    let o = run(dir.path(), &["fa", "build", "-n", "64", "--arch", "perfect-shuffle"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("pairs: 2016/2016"));
    assert!(stdout(&o).contains("n = 64"));
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["fa", "build", "-n", "6", "--arch", "perfect-shuffle"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["fa", "build", "-n", "8", "--arch", "omega"]).status.code(), Some(2));
    let fa = build(dir.path(), 8);
    let o = run(dir.path(), &["route", "--network", &fa, "--target", "1,1,3,4,5,6,7,8"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(dir.path(), &["route", "--network", &fa, "--target", "1,2,3,4"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(dir.path(), &["route", "--network", "missing.toml", "--target", "1,2,3,4"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(dir.path(), &["export", "--network", &fa]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn route_from_the_arrangement() {
    let dir = tempfile::tempdir().unwrap();
    let fa = build(dir.path(), 8);
    let o = run(dir.path(), &["route", "--network", &fa, "--target", "1,3,5,7,2,4,6,8", "--trace", "t.txt"]);
    assert_eq!(o.status.code(), Some(0));
    let first = stdout(&o).lines().next().unwrap().to_string();
    let steps: usize = first.strip_prefix("steps: ").unwrap().split(' ').next().unwrap().parse().unwrap();
    assert!(steps <= 7);
    assert!(first.ends_with("(bound: 14)"));
    let trace = std::fs::read_to_string(dir.path().join("t.txt")).unwrap();
    assert_eq!(trace.lines().count(), steps);
    assert!(trace.lines().last().unwrap().ends_with("-> output 1,3,5,7,2,4,6,8"));

    // the arrangement's own output needs no flips
    let doc = std::fs::read_to_string(dir.path().join(&fa)).unwrap();
    let cfg = omega_fa::io::parse_network(&doc).unwrap().cfg;
    let own_output = cfg.evaluate().to_string();
    let o = run(dir.path(), &["route", "--network", &fa, "--target", &own_output]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("steps: 0 "));
}

#[test]
fn chained_routes() {
    let dir = tempfile::tempdir().unwrap();
    let fa = build(dir.path(), 8);
    let p = dir.path();
    let o = run(p, &["route", "--network", &fa, "--target", "8,7,6,5,4,3,2,1", "--trace", "a.txt", "--save", "a.toml"]);
    assert_eq!(o.status.code(), Some(0));
    let o = run(
        p,
        &["route", "--network", "a.toml", "--target", "2,4,6,8,1,3,5,7", "--prior-trace", "a.txt", "--trace", "b.txt"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("phase a:"));
    let steps: usize = stdout(&o).lines().next().unwrap()[7..].split(' ').next().unwrap().parse().unwrap();
    assert!(steps <= 14);
    let b = std::fs::read_to_string(p.join("b.txt")).unwrap();
    assert!(b.starts_with("# phase-a-steps: "));

    let o = run(p, &["route", "--network", "a.toml", "--target", "2,4,6,8,1,3,5,7", "--mode", "reset"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("(reset)"));

    // a prior trace that does not lead to the network is refused
    let o = run(p, &["route", "--network", &fa, "--target", "1,2,3,4,5,6,7,8", "--save", "c.toml"]);
    assert_eq!(o.status.code(), Some(0));
    let o = run(p, &["route", "--network", "c.toml", "--target", "2,1,3,4,5,6,7,8", "--prior-trace", "a.txt"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn exports() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    std::fs::write(p.join("x.toml"), "n = 2\nkind = \"perfect-shuffle\"\nlayers = [[1]]\n").unwrap();
    let o = run(p, &["export", "--network", "x.toml", "--matrix"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "# stage 1\n0 1\n1 0\n");

    let fa = build(p, 8);
    let o = run(p, &["export", "--network", &fa, "--matrix", "-o", "m.txt"]);
    assert_eq!(o.status.code(), Some(0));
    let m = std::fs::read_to_string(p.join("m.txt")).unwrap();
    let rows: Vec<&str> = m.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 7 * 8);
    assert!(rows.iter().all(|r| r.split(' ').filter(|&c| c == "1").count() == 1));

    let o = run(p, &["export", "--network", &fa, "--dot"]);
    let dot = stdout(&o);
    assert!(dot.starts_with("digraph omega {") && dot.trim_end().ends_with('}'));
    assert_eq!(dot.matches('{').count(), dot.matches('}').count());
    assert!(dot.contains("\"s7.3\""));
    assert_eq!(dot.matches(" -> ").count(), 8 * 8);
}

#[test]
fn verify_commands() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let o = run(p, &["verify", "snb", "-n", "8"]);
    assert_eq!((o.status.code(), last_line(&o)), (Some(0), "PASS".into()));
    assert_eq!(stdout(&o).matches("partners 3,").count(), 8);

    let o = run(p, &["verify", "reachability", "-n", "4", "--stages", "3"]);
    assert_eq!((o.status.code(), last_line(&o)), (Some(0), "PASS".into()));
    assert!(stdout(&o).contains("reachable: 24/24"));
    let o = run(p, &["verify", "reachability", "-n", "4", "--stages", "2"]);
    assert_eq!((o.status.code(), last_line(&o)), (Some(1), "FAIL".into()));
    let o = run(p, &["verify", "reachability", "-n", "8"]);
    assert_eq!((o.status.code(), last_line(&o)), (Some(3), "SKIP (too large)".into()));

    let o = run(p, &["verify", "equivalence", "-n", "4", "--stages", "2"]);
    assert_eq!((o.status.code(), last_line(&o)), (Some(0), "PASS".into()));

    let o = run(p, &["verify", "oracle-match", "-n", "4", "--stages", "3"]);
    assert_eq!((o.status.code(), last_line(&o)), (Some(0), "PASS".into()));
    let o = run(p, &["verify", "oracle-match", "-n", "8", "--samples", "50", "--seed", "9"]);
    assert_eq!((o.status.code(), last_line(&o)), (Some(0), "PASS".into()));
    assert_eq!(run(p, &["verify", "oracle-match", "-n", "8", "--samples", "50"]).status.code(), Some(2));

    std::fs::write(p.join("b.toml"), "n = 8\nkind = \"perfect-shuffle\"\nlayers = [[0,0,0,0],[0,0,0,0],[0,0,0,0]]\n")
        .unwrap();
    let o = run(p, &["verify", "hazard", "--network", "b.toml"]);
    assert_eq!((o.status.code(), last_line(&o)), (Some(0), "PASS".into()));
    assert!(stdout(&o).contains("hazard: all-bypass stages 1-3"));
}

#[test]
fn cache_directory_is_used() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    std::fs::create_dir(&cache).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_omega-fa"))
        .args(["fa", "build", "-n", "16", "--arch", "perfect-shuffle", "-o", "fa.toml"])
        .current_dir(dir.path())
        .env("OMEGA_FA_CACHE_DIR", &cache)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(cache.join("fa-perfect-shuffle-16.toml").exists());
}
