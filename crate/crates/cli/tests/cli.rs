use std::fs;
use std::path::Path;
use std::process::Command;

use relex_cli::{run, Config, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_DIVERGENCE, EXIT_OK};

fn relex(args: &[&str]) -> i32 {
    run(std::iter::once("relex").chain(args.iter().copied()))
}

fn config_path(name: &str) -> String {
    format!("{}/configs/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn echo_line(path: &Path) -> String {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .to_string()
}

#[test]
fn compare_writes_both_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let code = relex(&[
        "compare",
        "--config",
        &config_path("kappa_sweep.toml"),
        "--set",
        "steps=200",
        "--set",
        "replicates=3",
        "--out",
        out,
    ]);
    assert_eq!(code, EXIT_OK);
    let best = fs::read_to_string(dir.path().join("bestsofar.csv")).unwrap();
    let lines: Vec<&str> = best.lines().collect();
    assert!(lines[0].starts_with("# config: "));
    assert_eq!(lines[1], "iteration,algorithm,seed,best_so_far");
    // 3 algorithms × 3 seeds × 21 stored iterations.
    assert_eq!(lines.len(), 2 + 3 * 3 * 21);
    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(
        summary.lines().nth(1),
        Some("iteration,algorithm,median,q25,q75")
    );
    assert!(summary.contains(",replica-exchange,"));
}

#[test]
fn override_is_visible_in_config_echo() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let code = relex(&[
        "compare",
        "--config",
        &config_path("kappa_sweep.toml"),
        "--set",
        "eta=0.005",
        "--set",
        "steps=50",
        "--set",
        "replicates=2",
        "--seed",
        "7",
        "--out",
        out,
    ]);
    assert_eq!(code, EXIT_OK);
    let echo = echo_line(&dir.path().join("summary.csv"));
    assert!(echo.contains(" dynamics.eta=0.005 "), "{echo}");
    assert!(echo.contains(" run.seed=7 "), "{echo}");
    let parsed = Config::from_canonical(echo.trim_start_matches("# config: ")).unwrap();
    assert_eq!(parsed.dynamics.eta, 0.005);
}

#[test]
fn later_overrides_win() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let code = relex(&[
        "compare",
        "--set",
        "steps=10",
        "--set",
        "steps=20",
        "--set",
        "replicates=1",
        "--out",
        out,
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(echo_line(&dir.path().join("summary.csv")).contains("dynamics.steps=20"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(relex(&["frobnicate"]), EXIT_CONFIG);
    assert_eq!(relex(&["compare", "--bogus"]), EXIT_CONFIG);
    assert_eq!(relex(&["compare", "--set", "no_such_key=1"]), EXIT_CONFIG);
    assert_eq!(relex(&["compare", "--set", "tau1=2.0"]), EXIT_CONFIG);
    assert_eq!(
        relex(&["compare", "--config", "/nonexistent/relex.toml"]),
        EXIT_CONFIG
    );
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[dynamics]\nstepsize = 0.1\n").unwrap();
    assert_eq!(
        relex(&["compare", "--config", bad.to_str().unwrap()]),
        EXIT_CONFIG
    );
}

#[test]
fn usage_errors_print_diagnostics() {
    let output = Command::new(env!("CARGO_BIN_EXE_relex"))
        .args(["compare", "--set", "no_such_key=1"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(EXIT_CONFIG));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("no_such_key"), "{stderr}");
    let output = Command::new(env!("CARGO_BIN_EXE_relex"))
        .arg("nope")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(EXIT_CONFIG));
    assert!(!output.stderr.is_empty());
}

#[test]
fn divergence_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let code = relex(&[
        "compare",
        "--set",
        "kind=quadratic",
        "--set",
        "objective.dimension=1",
        "--set",
        "init_point=[1.0]",
        "--set",
        "eta=2.5",
        "--set",
        "steps=500",
        "--set",
        "replicates=2",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_DIVERGENCE);
}

#[test]
fn canonical_form_ignores_key_order_and_tracks_overrides() {
    let a = Config::from_toml("[dynamics]\neta = 0.02\ntau1 = 0.05\n[run]\nseed = 3\n").unwrap();
    let b = Config::from_toml("[run]\nseed = 3\n[dynamics]\ntau1 = 0.05\neta = 0.02\n").unwrap();
    assert_eq!(a.canonical(), b.canonical());
    assert_eq!(a.canonical(), a.clone().canonical());

    let mut c = a.clone();
    c.apply_override("intensity=2.5").unwrap();
    let before: Vec<String> = a.canonical().split(' ').map(String::from).collect();
    let after: Vec<String> = c.canonical().split(' ').map(String::from).collect();
    let changed: Vec<(&String, &String)> =
        before.iter().zip(&after).filter(|(x, y)| x != y).collect();
    assert_eq!(changed.len(), 1);
    assert_eq!(changed[0].1, "dynamics.intensity=2.5");
}

#[test]
fn shipped_configs_round_trip() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut seen = 0;
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let c = Config::load(&path).unwrap();
        assert_eq!(
            Config::from_canonical(&c.canonical()).unwrap(),
            c,
            "{}",
            path.display()
        );
        seen += 1;
    }
    assert_eq!(seen, 6);
}

#[test]
fn gradcheck_passes_on_benchmark() {
    assert_eq!(relex(&["gradcheck", "--check"]), EXIT_OK);
    assert_eq!(
        relex(&["gradcheck", "--set", "kind=double-well", "--check"]),
        EXIT_OK
    );
}

#[test]
fn check_flag_reports_failed_ordering() {
    let dir = tempfile::tempdir().unwrap();
    // Without swaps the replica-exchange iterate is the low-temperature chain,
    // so the medians tie and the ordering holds.
    let common = [
        "--set",
        "steps=300",
        "--set",
        "replicates=5",
        "--out",
        dir.path().to_str().unwrap(),
    ];
    let mut args = vec!["compare", "--check", "--set", "intensity=0"];
    args.extend(common);
    assert_eq!(relex(&args), EXIT_OK);
    // With the finest stepsize as its own reference only one error is
    // nonzero, so no slope can be fitted and the check fails.
    let mut args = vec![
        "discerr",
        "--check",
        "--set",
        "kind=double-well",
        "--set",
        "discretization.ensemble=20",
        "--set",
        "etas=[0.04, 0.01]",
        "--set",
        "refinement=1",
    ];
    args.extend(common);
    assert_eq!(relex(&args), EXIT_CHECK_FAILED);
}

#[test]
fn check_subcommand_follows_exit_contract() {
    let output = Command::new(env!("CARGO_BIN_EXE_relex"))
        .arg("check")
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&output.stdout);
    let passes = stdout.lines().filter(|l| l.starts_with("[PASS]")).count();
    let fails = stdout.lines().filter(|l| l.starts_with("[FAIL]")).count();
    assert_eq!(passes + fails, 9, "{stdout}");
    let expected = if fails == 0 {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    };
    assert_eq!(output.status.code(), Some(expected), "{stdout}");
}
