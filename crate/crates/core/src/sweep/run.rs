//! Sweep evaluation and CSV emission.

use std::io::Write;
use std::path::Path;

use crate::error::Result;
use crate::exec::Execution;
use crate::mc::{estimate_outage_curve, McEstimate, SinrKind};
use crate::noise::{table2_with, RisNoise, SystemParams, TABLE2_ALPHAS, TABLE2_SIZES};
use crate::outage::{throughput_from, OutageReport};

use super::config::{Mode, SweepGrid};

/// Column names of the sweep CSV, in order.
pub const CSV_HEADER: [&str; 10] =
    ["axis_value", "mode", "outage", "ci_lo", "ci_hi", "throughput", "lambda", "delta", "zeta", "reliability_flag"];

pub const TABLE2_HEADER: [&str; 3] = ["alpha", "n_elements", "ris_noise_dbw"];

/// A Monte Carlo row is flagged unreliable when its 95%-style interval is
/// wider than the estimate itself (fewer than a handful of events).
const MC_RELATIVE_WIDTH: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub axis_value: f64,
    pub mode: Mode,
    pub outage: f64,
    /// Present for Monte Carlo modes only.
    pub ci: Option<(f64, f64)>,
    pub throughput: f64,
    pub lambda: f64,
    pub delta: f64,
    pub zeta: f64,
    pub reliable: bool,
}

fn analytic_row(axis_value: f64, mode: Mode, r: &OutageReport, outage: f64, rate: f64) -> SweepRow {
    SweepRow {
        axis_value,
        mode,
        outage,
        ci: None,
        throughput: throughput_from(outage, rate),
        lambda: r.lambda,
        delta: r.delta,
        zeta: r.zeta,
        reliable: r.reliable,
    }
}

fn mc_row(axis_value: f64, mode: Mode, e: &McEstimate, r: &OutageReport, rate: f64) -> SweepRow {
    SweepRow {
        axis_value,
        mode,
        outage: e.p_hat,
        ci: Some((e.ci_lo, e.ci_hi)),
        throughput: throughput_from(e.p_hat, rate),
        lambda: r.lambda,
        delta: r.delta,
        zeta: r.zeta,
        reliable: e.events > 0 && e.ci_width() <= MC_RELATIVE_WIDTH * e.p_hat,
    }
}

fn sinr_kind(mode: Mode) -> Option<SinrKind> {
    match mode {
        Mode::McExact => Some(SinrKind::Exact),
        Mode::McLb => Some(SinrKind::Lower),
        Mode::McUb => Some(SinrKind::Upper),
        _ => None,
    }
}

/// Evaluates every mode at every grid point. Rows come back grouped by grid
/// point in axis order, and by mode order within a point.
pub fn evaluate_sweep(grid: &SweepGrid, execution: Execution) -> Result<Vec<SweepRow>> {
    grid.validate()?;
    let values = grid.axis_values();
    let params = grid.grid_params();

    let needs_noiseless = grid.modes.contains(&Mode::NoiselessVariant);
    let analytic = execution.map_indexed(params.len(), |i| -> Result<_> {
        let report = OutageReport::analyze(&params[i])?;
        let quiet = if needs_noiseless {
            Some(OutageReport::analyze(&SystemParams { ris_noise: RisNoise::Off, ..params[i] })?)
        } else {
            None
        };
        Ok((report, quiet))
    });
    let analytic: Vec<_> = analytic.into_iter().collect::<Result<_>>()?;

    // Points with the same element count share one set of draws.
    let kinds: Vec<SinrKind> = grid.modes.iter().filter_map(|&m| sinr_kind(m)).collect();
    let mut mc: Vec<Vec<McEstimate>> = vec![Vec::new(); params.len()];
    if !kinds.is_empty() {
        let cfg = crate::mc::McConfig { execution, ..grid.monte_carlo };
        let mut sizes: Vec<u32> = params.iter().map(|p| p.n_elements).collect();
        sizes.sort_unstable();
        sizes.dedup();
        for n in sizes {
            let idx: Vec<usize> = (0..params.len()).filter(|&i| params[i].n_elements == n).collect();
            let group: Vec<SystemParams> = idx.iter().map(|&i| params[i]).collect();
            for (i, row) in idx.into_iter().zip(estimate_outage_curve(&group, &cfg, &kinds)?) {
                mc[i] = row;
            }
        }
    }

    let mut rows = Vec::with_capacity(params.len() * grid.modes.len());
    for (i, (&v, p)) in values.iter().zip(&params).enumerate() {
        let (report, quiet) = &analytic[i];
        let rate = p.target_rate_bps;
        let mut mc_iter = mc[i].iter();
        for &mode in &grid.modes {
            let row = match mode {
                Mode::AnalyticLb => analytic_row(v, mode, report, report.outage_lb, rate),
                Mode::AnalyticUb => analytic_row(v, mode, report, report.outage_ub, rate),
                Mode::Asymptotic => analytic_row(v, mode, report, report.outage_asym, rate),
                Mode::NoiselessVariant => {
                    let q = quiet.as_ref().expect("computed when requested");
                    analytic_row(v, mode, q, q.outage_lb, rate)
                }
                Mode::McExact | Mode::McLb | Mode::McUb => {
                    mc_row(v, mode, mc_iter.next().expect("one estimate per requested kind"), report, rate)
                }
            };
            rows.push(row);
        }
    }
    Ok(rows)
}

fn num(x: f64) -> String {
    if x == 0.0 || (1e-3..1e7).contains(&x.abs()) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Writes rows as CSV (UTF-8, LF, `.` decimals). Interval columns are left
/// empty for closed-form modes.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        let (lo, hi) = r.ci.map(|(a, b)| (num(a), num(b))).unwrap_or_default();
        w.write_record([
            num(r.axis_value),
            r.mode.name().to_string(),
            num(r.outage),
            lo,
            hi,
            num(r.throughput),
            num(r.lambda),
            num(r.delta),
            num(r.zeta),
            r.reliable.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Evaluates the sweep and writes its CSV to `path`.
pub fn run_sweep(grid: &SweepGrid, path: &Path, execution: Execution) -> Result<Vec<SweepRow>> {
    let rows = evaluate_sweep(grid, execution)?;
    let file = std::fs::File::create(path)?;
    write_sweep_csv(&rows, std::io::BufWriter::new(file))?;
    Ok(rows)
}

/// Writes the α × N table of surface noise powers, one row per cell, with
/// four decimals as in the published table.
pub fn write_table2_csv<W: Write>(boltzmann: f64, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(TABLE2_HEADER)?;
    for (row, alpha) in table2_with(boltzmann).iter().zip(TABLE2_ALPHAS) {
        for (cell, n) in row.iter().zip(TABLE2_SIZES) {
            w.write_record([format!("{alpha:.1}"), n.to_string(), format!("{cell:.4}")])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// A gnuplot script plotting outage (or throughput for throughput-only
/// configurations) of every mode against the axis.
pub fn gnuplot_script(grid: &SweepGrid, csv_name: &str) -> String {
    let modes: Vec<_> = grid.modes.iter().map(|m| m.name()).collect();
    let column = if grid.name.starts_with("fig3") { 6 } else { 3 };
    let ylabel = if column == 6 { "throughput (bit/s)" } else { "outage probability" };
    let mut s = String::new();
    s.push_str("set datafile separator ','\n");
    s.push_str(&format!("set xlabel '{}'\n", grid.axis.name()));
    s.push_str(&format!("set ylabel '{ylabel}'\n"));
    if column == 3 {
        s.push_str("set logscale y\nset format y '10^{%L}'\n");
    }
    s.push_str("set key outside right\nset grid\n");
    if !grid.name.is_empty() {
        s.push_str(&format!("set title '{}'\n", grid.name));
    }
    s.push_str(&format!(
        "plot for [m in \"{}\"] '{csv_name}' using 1:(strcol(2) eq m ? ${column} : NaN) skip 1 with linespoints title m\n",
        modes.join(" ")
    ));
    s
}
