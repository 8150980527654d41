//! Self-check suites behind `risnoise validate`.
//!
//! The fast level runs deterministic identities and the noise table in a
//! few seconds. The full level adds the Monte Carlo agreement checks.
//! Every check carries a stable name so a failure points at the invariant
//! that broke.

use std::fmt;

use crate::error::Result;
use crate::fading::{cascade_moments, CascadeApprox};
use crate::mc::{
    count_sandwich_violations, estimate_cascade_moments, estimate_outage, estimate_outage_curve, McConfig, SinrKind,
};
use crate::noise::{
    build_noise_budget, db_to_linear, receiver_noise_power_dbw, table2_with, RisNoise, SystemParams,
    BOLTZMANN_ROUNDED,
};
use crate::outage::{outage_lb, series_term, xi1_closed, xi1_oracle, xi2};
use crate::specfun::{
    integrate, kummer_1f1, ln_meijer_g_2_1_1_2, meijer_g_1_1_1_2, meijer_g_2_1_1_2, MeijerG212Params,
};

/// Published J_R values in dBW; rows α = 0.1..1.0, columns N = 5, 10, 20.
pub const REFERENCE_NOISE_TABLE: [[f64; 3]; 10] = [
    [-133.9772, -130.9669, -127.9566],
    [-130.9669, -127.9566, -124.9463],
    [-129.2060, -126.1957, -123.1854],
    [-127.9566, -124.9463, -121.9360],
    [-126.9875, -123.9772, -120.9669],
    [-126.1957, -123.1854, -120.1751],
    [-125.5262, -122.5159, -119.5056],
    [-124.9463, -121.9360, -118.9257],
    [-124.4348, -121.4245, -118.4142],
    [-123.9772, -120.9669, -117.9566],
];

/// Tolerance on every cell of the noise table, in dB.
pub const NOISE_TABLE_TOL_DB: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Fast,
    Full,
}

/// Knobs for fault injection and run time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidateOptions {
    /// Boltzmann constant used to rebuild the noise table.
    pub boltzmann: f64,
    /// Draws per Monte Carlo check at the full level.
    pub trials: u64,
    pub seed: u64,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self { boltzmann: BOLTZMANN_ROUNDED, trials: 1_000_000, seed: 0x5eed }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: impl Into<String>) -> Self {
        Self { name, passed, detail: detail.into() }
    }

    fn from_result(name: &'static str, r: Result<(bool, String)>) -> Self {
        match r {
            Ok((passed, detail)) => Self::new(name, passed, detail),
            Err(e) => Self::new(name, false, format!("error: {e}")),
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        let failed = self.failures().count();
        write!(f, "{} checks, {} failed", self.checks.len(), failed)
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

pub fn check_noise_table(boltzmann: f64) -> Check {
    let table = table2_with(boltzmann);
    let worst = table
        .iter()
        .flatten()
        .zip(REFERENCE_NOISE_TABLE.iter().flatten())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Check::new(
        "noise_table",
        worst <= NOISE_TABLE_TOL_DB,
        format!("largest deviation {worst:.2e} dB (tolerance {NOISE_TABLE_TOL_DB:e} dB, k = {boltzmann:e})"),
    )
}

fn check_receiver_floor() -> Check {
    Check::from_result(
        "receiver_noise_floor",
        receiver_noise_power_dbw(290.0, 20e6, db_to_linear(3.0)).map(|dbw| {
            ((dbw + 128.0).abs() <= 0.1, format!("kTB·NF = {dbw:.4} dBW against -128 dBW"))
        }),
    )
}

fn check_noiseless_reduction() -> Check {
    Check::from_result(
        "noiseless_reduction",
        (|| {
            let mut mismatches = 0;
            let mut count = 0;
            for n in [5, 10, 20, 40] {
                for d in [1.0, 2.0, 5.0] {
                    for pb in [-80.0, -70.0, -60.0, -50.0, -40.0] {
                        let p = SystemParams { n_elements: n, d_nd: d, ris_noise: RisNoise::Off, ..Default::default() }
                            .with_tx_power_dbw(pb);
                        let a = CascadeApprox::from_params(&p)?;
                        let lb = outage_lb(&p)?;
                        mismatches += usize::from(lb != xi2(&a, &build_noise_budget(&p)?)?);
                        count += 1;
                    }
                }
            }
            Ok((mismatches == 0, format!("{mismatches} of {count} points differ")))
        })(),
    )
}

fn check_incomplete_gamma() -> Check {
    Check::from_result(
        "incomplete_gamma_integral",
        (|| {
            let mut worst = 0.0_f64;
            for s in [0.5, 1.7, 10.0, 17.8, 35.6] {
                for frac in [0.2, 0.8, 1.0, 1.5] {
                    let x = s * frac;
                    let f = |t: f64| if t == 0.0 { 0.0 } else { ((s - 1.0) * t.ln() - t).exp() };
                    let q = integrate(f, 0.0, x, 1e-13, 0.0, 64)?;
                    worst = worst.max(rel_err(meijer_g_1_1_1_2(s, x)?, q.value));
                }
            }
            Ok((worst <= 1e-9, format!("worst relative error {worst:.2e} (tolerance 1e-9)")))
        })(),
    )
}

fn check_kummer() -> Check {
    Check::from_result(
        "kummer_transform",
        (|| {
            let mut worst = 0.0_f64;
            for a in [-2.5, 0.5, 2.0, 7.3, 20.0] {
                for b in [0.5, 1.5, 3.0, 12.0] {
                    for z in [-2.5, -1.0, 0.3, 1.0, 4.0, 15.0] {
                        let lhs = kummer_1f1(a, b, z)?;
                        let rhs = z.exp() * kummer_1f1(b - a, b, -z)?;
                        if lhs.abs() > 1e-280 {
                            worst = worst.max((lhs - rhs).abs() / lhs.abs().max(1e-300));
                        }
                    }
                }
            }
            Ok((worst <= 1e-10, format!("worst relative residual {worst:.2e} (tolerance 1e-10)")))
        })(),
    )
}

fn check_meijer_routes() -> Check {
    Check::from_result(
        "meijer_residue_vs_ladder",
        (|| {
            let mut worst = 0.0_f64;
            for s in [0.3, 1.0, 2.5, 9.0, 17.8, 20.0] {
                for z in [0.01, 0.1, 0.5, 1.0] {
                    let p = MeijerG212Params::shifted_half(s);
                    let direct = meijer_g_2_1_1_2(p, z)?;
                    let ladder = ln_meijer_g_2_1_1_2(p, z)?.exp();
                    worst = worst.max(rel_err(direct, ladder));
                }
            }
            Ok((worst <= 1e-9, format!("worst relative difference {worst:.2e} (tolerance 1e-9)")))
        })(),
    )
}

fn check_series_normalisation() -> Check {
    Check::from_result(
        "series_normalisation",
        (|| {
            let mut worst = 0.0_f64;
            for (z, k) in [(0.2, 10.0), (1.0, 10.0), (8.8, 40.0), (25.0, 20.0), (0.01, 40.0)] {
                let mut total = 0.0;
                for q in 0..4000 {
                    let t = series_term(q as f64, z, k)?;
                    total += t;
                    if q > 50 && t < 1e-20 * total {
                        break;
                    }
                }
                worst = worst.max((total - 1.0).abs());
            }
            Ok((worst <= 1e-12, format!("largest |Σ T(q) - 1| = {worst:.2e}")))
        })(),
    )
}

fn xi1_pair(p: &SystemParams) -> Result<(f64, f64)> {
    let a = CascadeApprox::from_params(p)?;
    let b = build_noise_budget(p)?;
    let omega = p.omega_nd()?;
    Ok((xi1_closed(&a, &b, p.m_nd, omega, p.n_elements)?, xi1_oracle(&a, &b, p.m_nd, omega, p.n_elements)?))
}

fn check_xi1_oracle(name: &'static str, sizes: &[u32], distances: &[f64], powers: &[f64]) -> Check {
    Check::from_result(
        name,
        (|| {
            let mut worst = (0.0_f64, String::new());
            for &n in sizes {
                for &d in distances {
                    for &pb in powers {
                        let p = SystemParams { n_elements: n, d_nd: d, ..Default::default() }.with_tx_power_dbw(pb);
                        let (closed, oracle) = xi1_pair(&p)?;
                        let e = rel_err(closed, oracle);
                        if e > worst.0 {
                            worst = (e, format!("N = {n}, D = {d} m, P_b = {pb} dBW"));
                        }
                    }
                }
            }
            Ok((worst.0 <= 1e-3, format!("worst relative error {:.2e} at {} (tolerance 1e-3)", worst.0, worst.1)))
        })(),
    )
}

fn check_sandwich(name: &'static str, trials: u64, seed: u64) -> Check {
    let cfg = McConfig::default().with_trials(trials).with_seed(seed);
    Check::from_result(
        name,
        count_sandwich_violations(&SystemParams::default(), &cfg)
            .map(|v| (v == 0, format!("{v} violations in {trials} draws"))),
    )
}

fn check_moments(opts: &ValidateOptions) -> Check {
    Check::from_result(
        "cascade_moments_mc",
        (|| {
            let cfg = McConfig::default().with_trials(opts.trials).with_seed(opts.seed);
            let mut worst = 0.0_f64;
            for n in [5, 10, 20] {
                let p = SystemParams { n_elements: n, ..Default::default() };
                let (mu, var) = cascade_moments(p.m_bn, p.omega_bn()?, p.m_nd, p.omega_nd()?, n)?;
                let est = estimate_cascade_moments(&p, &cfg)?;
                worst = worst.max((est.mean - mu).abs() / est.se_mean);
                worst = worst.max((est.variance - var).abs() / est.se_variance);
            }
            Ok((worst <= 3.0, format!("largest deviation {worst:.2} standard errors (tolerance 3)")))
        })(),
    )
}

fn check_noiseless_mc(opts: &ValidateOptions) -> Check {
    Check::from_result(
        "noiseless_mc_agreement",
        (|| {
            let cfg = McConfig::default().with_trials(opts.trials).with_seed(opts.seed);
            let mut outside = Vec::new();
            let mut tested = 0;
            for n in [5, 10] {
                let pts: Vec<_> = (0..16)
                    .map(|i| {
                        SystemParams { n_elements: n, ris_noise: RisNoise::Off, ..Default::default() }
                            .with_tx_power_dbw(-80.0 + 1.0 * i as f64)
                    })
                    .collect();
                let curve = estimate_outage_curve(&pts, &cfg, &[SinrKind::Exact])?;
                for (p, row) in pts.iter().zip(curve) {
                    let analytic = xi2(&CascadeApprox::from_params(p)?, &build_noise_budget(p)?)?;
                    if analytic < 1e-4 || analytic > 1.0 - 1e-4 {
                        continue;
                    }
                    tested += 1;
                    if !row[0].contains(analytic) {
                        outside.push(format!("N={n} P_b={:.0}", p.tx_power_dbw()));
                    }
                }
            }
            Ok((outside.is_empty(), format!("{} of {tested} points outside the interval {outside:?}", outside.len())))
        })(),
    )
}

fn check_analytic_vs_mc(opts: &ValidateOptions) -> Check {
    Check::from_result(
        "analytic_vs_mc_upper_sinr",
        (|| {
            let cfg = McConfig::default().with_trials(opts.trials).with_seed(opts.seed);
            let mut outside = Vec::new();
            let mut tested = 0;
            for n in [5, 10] {
                let pts: Vec<_> = (0..31)
                    .map(|i| SystemParams { n_elements: n, ..Default::default() }.with_tx_power_dbw(-80.0 + i as f64))
                    .collect();
                let curve = estimate_outage_curve(&pts, &cfg, &[SinrKind::Upper])?;
                for (p, row) in pts.iter().zip(curve) {
                    let lb = outage_lb(p)?;
                    if lb < 1e-5 {
                        continue;
                    }
                    tested += 1;
                    if !row[0].contains(lb) {
                        outside.push(format!("N={n} P_b={:.0}", p.tx_power_dbw()));
                    }
                }
            }
            Ok((outside.is_empty(), format!("{} of {tested} points outside the interval {outside:?}", outside.len())))
        })(),
    )
}

fn check_ci_scaling(opts: &ValidateOptions) -> Check {
    Check::from_result(
        "ci_width_scaling",
        (|| {
            let p = SystemParams::default().with_tx_power_dbw(-66.0);
            let half = (opts.trials / 2).max(crate::mc::MIN_TRIALS);
            let cfg = McConfig::default().with_seed(opts.seed);
            let a = estimate_outage(&p, &cfg.with_trials(half), SinrKind::Exact)?;
            let b = estimate_outage(&p, &cfg.with_trials(2 * half), SinrKind::Exact)?;
            let ratio = a.ci_width() / b.ci_width();
            let ok = (ratio / std::f64::consts::SQRT_2 - 1.0).abs() <= 0.1;
            Ok((ok, format!("width ratio {ratio:.4} when doubling trials (expected √2 ± 10%)")))
        })(),
    )
}

/// Largest throughput gap between the noisy and noiseless surface over a
/// transmit-power sweep, with the Monte Carlo interval width at that point.
pub fn throughput_gap(sigma_d2_dbw: f64, d_nd: f64, cfg: &McConfig) -> Result<(f64, f64, f64)> {
    let base = SystemParams {
        n_elements: 10,
        d_nd,
        sigma_d2_override_w: Some(db_to_linear(sigma_d2_dbw)),
        ris_noise: RisNoise::Aggregate,
        ..Default::default()
    };
    let powers: Vec<f64> = (0..41).map(|i| -90.0 + i as f64).collect();
    let noisy: Vec<_> = powers.iter().map(|&pb| base.with_tx_power_dbw(pb)).collect();
    let quiet: Vec<_> = noisy.iter().map(|p| SystemParams { ris_noise: RisNoise::Off, ..*p }).collect();
    let a = estimate_outage_curve(&noisy, cfg, &[SinrKind::Exact])?;
    let b = estimate_outage_curve(&quiet, cfg, &[SinrKind::Exact])?;
    let rate = base.target_rate_bps;
    let mut best = (0.0, 0.0, 0.0);
    for (i, (x, y)) in a.iter().zip(&b).enumerate() {
        let gap = (x[0].p_hat - y[0].p_hat).abs() * rate;
        if gap > best.0 {
            best = (gap, x[0].ci_width().max(y[0].ci_width()) * rate, powers[i]);
        }
    }
    Ok(best)
}

fn check_noise_relevance(opts: &ValidateOptions) -> Check {
    Check::from_result(
        "throughput_noise_relevance",
        (|| {
            let cfg = McConfig::default().with_trials(opts.trials).with_seed(opts.seed);
            let rate = SystemParams::default().target_rate_bps;
            let (near_gap, near_ci, near_pb) = throughput_gap(-128.0, 30.0, &cfg)?;
            let (far_gap, _, _) = throughput_gap(-110.0, 15.0, &cfg)?;
            let ok = near_gap > near_ci && far_gap < 0.01 * rate;
            Ok((
                ok,
                format!(
                    "-128 dBW, 30 m: gap {near_gap:.3e} bit/s vs interval {near_ci:.3e} at {near_pb} dBW; -110 dBW, 15 m: gap {:.3}% of R",
                    100.0 * far_gap / rate
                ),
            ))
        })(),
    )
}

pub fn run(level: Level, opts: &ValidateOptions) -> Report {
    let mut checks = vec![
        check_noise_table(opts.boltzmann),
        check_receiver_floor(),
        check_noiseless_reduction(),
        check_incomplete_gamma(),
        check_kummer(),
        check_meijer_routes(),
        check_series_normalisation(),
        check_xi1_oracle("xi1_series_vs_quadrature", &[5, 10], &[2.0], &[-70.0, -60.0, -50.0]),
        check_sandwich("sandwich_sample", 10_000, opts.seed),
    ];
    if level == Level::Full {
        let powers: Vec<f64> = (0..6).map(|i| -75.0 + 5.0 * i as f64).collect();
        checks.extend([
            check_xi1_oracle("xi1_oracle_grid", &[5, 10, 20], &[2.0, 3.5, 5.0], &powers),
            check_sandwich("sandwich_full", opts.trials, opts.seed),
            check_moments(opts),
            check_noiseless_mc(opts),
            check_analytic_vs_mc(opts),
            check_ci_scaling(opts),
            check_noise_relevance(opts),
        ]);
    }
    Report { checks }
}
