use risnoise::sweep::{
    evaluate_sweep, parse_sweep, preset, run_sweep, write_sweep_csv, write_table2_csv, Experiment, Mode, SweepRow,
    CSV_HEADER, PRESETS,
};
use risnoise::validate::REFERENCE_NOISE_TABLE;
use risnoise::{Error, Execution};

fn sweep_preset(name: &str) -> risnoise::sweep::SweepGrid {
    match preset(name).unwrap().experiment().unwrap() {
        Experiment::Sweep(g) => g,
        other => panic!("{name} is not a sweep: {other:?}"),
    }
}

/// Transmit power at which the rows of `mode` cross `level`, interpolating
/// log-outage linearly between grid points.
fn crossing(rows: &[SweepRow], mode: Mode, level: f64) -> Option<f64> {
    let pts: Vec<_> = rows.iter().filter(|r| r.mode == mode).map(|r| (r.axis_value, r.outage)).collect();
    pts.windows(2).find_map(|w| {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        (y0 >= level && y1 < level).then(|| {
            let (l0, l1, l) = (y0.ln(), y1.ln(), level.ln());
            x0 + (x1 - x0) * (l0 - l) / (l0 - l1)
        })
    })
}

#[test]
fn golden_header() {
    assert_eq!(
        CSV_HEADER.join(","),
        "axis_value,mode,outage,ci_lo,ci_hi,throughput,lambda,delta,zeta,reliability_flag"
    );
    let mut buf = Vec::new();
    write_sweep_csv(&[], &mut buf).unwrap();
    assert_eq!(buf, b"axis_value,mode,outage,ci_lo,ci_hi,throughput,lambda,delta,zeta,reliability_flag\n");
}

#[test]
fn fig1_preset_crosses_near_minus_59() {
    let g = sweep_preset("fig1-n5").with_modes(vec![Mode::AnalyticLb]);
    let rows = evaluate_sweep(&g, Execution::Parallel).unwrap();
    let x = crossing(&rows, Mode::AnalyticLb, 1e-3).expect("curve crosses 1e-3");
    assert!((x - -59.0).abs() <= 1.0, "{x}");
}

#[test]
fn table2_preset_reproduces_the_published_values() {
    let Experiment::Table2 { boltzmann } = preset("table2").unwrap().experiment().unwrap() else { panic!() };
    let mut buf = Vec::new();
    write_table2_csv(boltzmann, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let values: Vec<f64> = text.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    let want: Vec<f64> = REFERENCE_NOISE_TABLE.iter().flatten().copied().collect();
    assert_eq!(values, want);
}

#[test]
fn empty_modes_is_a_config_error() {
    let src = "axis = \"element_count\"\nstart = 1\nstop = 20\npoints = 20\nmodes = []\n";
    assert!(matches!(parse_sweep(src), Err(Error::Config(_))));
}

#[test]
fn presets_rerun_byte_identical() {
    for p in PRESETS.iter().filter(|p| p.name != "table2") {
        let mut g = sweep_preset(p.name);
        g.monte_carlo.trials = 100_000;
        let render = || {
            let mut buf = Vec::new();
            write_sweep_csv(&evaluate_sweep(&g, Execution::Parallel).unwrap(), &mut buf).unwrap();
            buf
        };
        let first = render();
        assert_eq!(first, render(), "{}", p.name);
        let text = String::from_utf8(first).unwrap();
        assert_eq!(text.lines().count(), 1 + g.points * g.modes.len(), "{}", p.name);
        assert!(text.is_ascii() && !text.contains('\r'));
    }
}

#[test]
fn unwritable_output_is_an_io_error() {
    let g = sweep_preset("fig1-n5").with_modes(vec![Mode::Asymptotic]);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("out.csv");
    assert!(matches!(run_sweep(&g, &path, Execution::Sequential), Err(Error::Io(_))));
}
