use std::path::Path;
use std::process::{Command, Output};

fn risnoise(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_risnoise"))
        .args(args)
        .env_remove("RISNOISE_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const SMALL_SWEEP: &str = r#"
name = "small"
axis = "transmit_power_dbw"
start = -70.0
stop = -60.0
points = 3
modes = ["analytic_lb", "mc_ub"]

[fixed]
ris_noise = "aggregate"

[monte_carlo]
trials = 20000
seed = 11
"#;

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.display().to_string()
}

#[test]
fn presets_are_listed_and_printable() {
    let o = risnoise(&["presets"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for name in ["fig1-n5", "fig1-n10", "fig2-5m", "fig2-8m", "fig3-128db-30m", "table2"] {
        assert!(text.contains(name), "{name} missing from\n{text}");
    }
    let shown = stdout(&risnoise(&["presets", "fig2-8m"]));
    assert!(shown.contains("d_nd = 8.0"));
}

#[test]
fn table2_prints_thirty_cells() {
    let text = stdout(&risnoise(&["table2"]));
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], "alpha,n_elements,ris_noise_dbw");
    assert_eq!(lines.len(), 31);
    assert!(lines.contains(&"1.0,20,-117.9566"));
}

#[test]
fn sweep_writes_csv_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.toml", SMALL_SWEEP);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let gp = dir.path().join("a.gp");
    for (out, threads) in [(&a, "1"), (&b, "3")] {
        let o = Command::new(env!("CARGO_BIN_EXE_risnoise"))
            .args(["sweep", "--config", &cfg, "--out", out.to_str().unwrap(), "--gnuplot", gp.to_str().unwrap()])
            .env("RISNOISE_THREADS", threads)
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());
    let text = String::from_utf8(bytes).unwrap();
    assert!(!text.contains('\r'));
    assert_eq!(text.lines().count(), 1 + 3 * 2);
    assert!(std::fs::read_to_string(gp).unwrap().contains("plot for"));
}

#[test]
fn flags_override_the_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.toml", SMALL_SWEEP);
    let run = |extra: &[&str]| {
        let mut args = vec!["sweep", "--config", cfg.as_str()];
        args.extend_from_slice(extra);
        stdout(&risnoise(&args))
    };
    let base = run(&[]);
    assert_ne!(base, run(&["--seed", "12"]));
    let only_asym = run(&["--modes", "asymptotic"]);
    assert!(only_asym.lines().skip(1).all(|l| l.split(',').nth(1) == Some("asymptotic")));
    let few = risnoise(&["sweep", "--config", &cfg, "--trials", "10"]);
    assert_eq!(few.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&few.stderr).contains("trials"));
}

#[test]
fn config_errors_name_lines() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "axis = \"transmit_power_dbw\"\nstart = -70\nstop = -60\npoints = 3\nmodes = []\n");
    let o = risnoise(&["sweep", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 5") && err.contains("at least one mode"), "{err}");
}

#[test]
fn unknown_config_is_reported() {
    let o = risnoise(&["sweep", "--config", "no-such-thing"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn validate_fast_passes_and_detects_a_bad_constant() {
    let ok = risnoise(&["validate"]);
    assert!(ok.status.success(), "{}", stdout(&ok));
    let bad = risnoise(&["validate", "--boltzmann", "1.3938e-23"]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains("FAIL noise_table"));
}
