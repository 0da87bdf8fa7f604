use std::path::PathBuf;
use std::process::{Command, Output};

fn mcsic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mcsic")).args(args).output().expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mcsic-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn list_scenarios_names_every_preset() {
    let out = mcsic(&["list-scenarios"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in mcsic::harness::PRESET_NAMES {
        assert!(text.lines().any(|l| l == name), "{name} missing");
    }
}

#[test]
fn unknown_scenario_is_a_config_error() {
    let out = mcsic(&["run", "--scenario", "fig99"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_config_is_a_config_error() {
    let path = scratch("bad.cfg");
    std::fs::write(&path, "K = [4, oops]\n").unwrap();
    let out = mcsic(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let out = mcsic(&["run", "--config", scratch("missing.cfg").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn run_writes_csv_and_plot_note() {
    let cfg = scratch("small.cfg");
    std::fs::write(
        &cfg,
        "name = small\nK = [4]\nebn0_db = [5]\nmax_symbols = 3000\ntrial_symbols = 1000\nwarmup = 50\ntarget_errors = 0\n",
    )
    .unwrap();
    let csv = scratch("small.csv");
    let out = mcsic(&["run", "--config", cfg.to_str().unwrap(), "--out", csv.to_str().unwrap(), "--workers", "2", "--quiet"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(mcsic::harness::scenario::CSV_HEADER));
    assert_eq!(lines.count(), 6);
    let plot = std::fs::read_to_string(csv.with_extension("plot.txt")).unwrap();
    assert!(plot.contains("x = ebn0_db") || plot.contains("x = mu"));
}

#[test]
fn seeded_runs_are_byte_identical() {
    let a = scratch("a.csv");
    let b = scratch("b.csv");
    for (p, w) in [(&a, "1"), (&b, "3")] {
        let out = mcsic(&[
            "run", "--scenario", "fig4", "--seed", "42", "--max-symbols", "2000", "--target-errors", "0",
            "--out", p.to_str().unwrap(), "--workers", w, "--quiet",
        ]);
        assert!(out.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn divergence_over_threshold_exits_3() {
    let cfg = scratch("diverge.cfg");
    std::fs::write(
        &cfg,
        "name = diverge\nK = [8]\nreceivers = ASIC\ncombiners = MRC\nmu = [50]\nmax_symbols = 2000\ntrial_symbols = 1000\nwarmup = 10\ntarget_errors = 0\n",
    )
    .unwrap();
    let out = mcsic(&["run", "--config", cfg.to_str().unwrap(), "--quiet", "--out", scratch("d.csv").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));

    let tolerant = scratch("tolerant.cfg");
    std::fs::write(&tolerant, std::fs::read_to_string(&cfg).unwrap() + "max_faults = 1000\n").unwrap();
    let out = mcsic(&["run", "--config", tolerant.to_str().unwrap(), "--quiet", "--out", scratch("t.csv").to_str().unwrap()]);
    assert!(out.status.success());
}

#[test]
fn validate_passes() {
    let out = mcsic(&["validate"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{text}");
    assert!(text.contains("0 failed"));
}
