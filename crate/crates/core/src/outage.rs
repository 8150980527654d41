//! Closed-form, asymptotic and quadrature outage probabilities.
//!
//! Outage is split into two events evaluated under the SINR upper bound
//! `min(ψX/(λY), ψX)`:
//!
//! * `ξ2 = P[ψX < Υ]`, the receiver-noise-limited event;
//! * `ξ1 = P[ψX < λΥY]`, the event limited by noise re-radiated by the
//!   surface, `ξ1 = ∫ f_Y(y) F_X(λΥy/ψ) dy`.
//!
//! and recombined as `1 - (1 - ξ1)(1 - ξ2)`. Replacing Υ by 2Υ turns the
//! resulting lower bound on outage into an upper bound.
//!
//! ## Series for ξ1
//!
//! Expanding `F_X` and integrating term by term against the Gamma density of
//! `Y` gives terms
//!
//! ```text
//! T(q) = (4z)^{q/2} G^{2,1}_{1,2}(z | 1-k-q/2; 0, 1/2) / (Γ(q+1) √π Γ(k)),
//! z = λ Ω_nd Υ / (4 ψ m_nd ζ²),  k = m_nd N,
//! ```
//!
//! which sum to one over `q = 0, 1, 2, …`. For integer δ the event
//! probability is `1 - Σ_{p<δ} T(p)`; [`xi1_finite_sum`] evaluates exactly
//! that with δ rounded to the nearest integer. [`xi1_closed`] instead sums
//! the complementary tail `Σ_{j≥0} T(δ + j)` at the real shape δ. All its
//! terms are positive, so nothing cancels near zero, and it matches the
//! integral without any rounding error.

use std::sync::atomic::{AtomicU64, Ordering};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fading::{cdf_x, ln_pdf_y, CascadeApprox};
use crate::noise::{build_noise_budget, NoiseBudget, SystemParams};
use crate::specfun::{integrate_semi_infinite_scaled, ln_gamma, ln_tricomi_half_ladder, reg_lower_gamma};

/// λ below which [`xi1_closed`] logs that the series regime is degenerate.
pub const LAMBDA_FLOOR: f64 = 1e-6;
/// λ below which an [`OutageReport`] is marked unreliable.
pub const RELIABLE_LAMBDA: f64 = 1e-2;

const SERIES_EPS: f64 = 1e-17;
const MAX_SERIES_TERMS: usize = 1 << 16;
const ORACLE_REL_TOL: f64 = 1e-10;

static CLAMP_EVENTS: AtomicU64 = AtomicU64::new(0);

/// Number of composite probabilities that fell outside `[0, 1]` by round-off
/// and were clamped, since process start.
pub fn clamp_events() -> u64 {
    CLAMP_EVENTS.load(Ordering::Relaxed)
}

fn clamp_probability(p: f64) -> f64 {
    if (0.0..=1.0).contains(&p) {
        p
    } else {
        CLAMP_EVENTS.fetch_add(1, Ordering::Relaxed);
        p.clamp(0.0, 1.0)
    }
}

/// `1 - (1 - a)(1 - b)` without losing small probabilities.
fn union_of_independent(a: f64, b: f64) -> f64 {
    clamp_probability(-((-a).ln_1p() + (-b).ln_1p()).exp_m1())
}

fn check_budget(b: &NoiseBudget) -> Result<()> {
    if !(b.psi > 0.0) || !b.psi.is_finite() {
        return Err(Error::domain(format!("ψ must be positive and finite, got {}", b.psi)));
    }
    if !(b.lambda >= 0.0) || !(b.ups_th >= 0.0) {
        return Err(Error::domain("λ and Υ_th must be non-negative"));
    }
    Ok(())
}

/// `ξ2 = P(δ, √(Υ/ψ)/ζ)` with the real shape δ.
pub fn xi2(approx: &CascadeApprox, budget: &NoiseBudget) -> Result<f64> {
    check_budget(budget)?;
    reg_lower_gamma(approx.delta, (budget.ups_th / budget.psi).sqrt() / approx.zeta)
}

/// Argument `z = λ Ω_nd Υ / (4 ψ m_nd ζ²)` of the series terms.
pub fn series_argument(approx: &CascadeApprox, budget: &NoiseBudget, m_nd: f64, omega_nd: f64) -> f64 {
    budget.lambda * omega_nd * budget.ups_th / (4.0 * budget.psi * m_nd * approx.zeta * approx.zeta)
}

/// `ln T(q0 + j)` for `j < count`.
fn ln_series_terms(q0: f64, count: usize, z: f64, k: f64) -> Result<Vec<f64>> {
    // Γ(s)Γ(s+1/2) = 2^{1-2s} √π Γ(2s) folds the (4z)^{q/2} power of two
    // into the duplication factor.
    let ladder = ln_tricomi_half_ladder(k + 0.5 * q0, count, z)?;
    let ln_z = z.ln();
    let head = (1.0 - 2.0 * k) * std::f64::consts::LN_2 - ln_gamma(k);
    Ok(ladder
        .iter()
        .enumerate()
        .map(|(j, ln_u)| {
            let q = q0 + j as f64;
            let power = if q == 0.0 { 0.0 } else { 0.5 * q * ln_z };
            head + power + ln_gamma(2.0 * k + q) - ln_gamma(q + 1.0) + ln_u
        })
        .collect())
}

/// Sums `Σ_{j≥0} T(q0 + j)`, extending the ladder until the tail is
/// negligible.
fn series_tail(q0: f64, z: f64, k: f64) -> Result<f64> {
    let mut count = 64;
    loop {
        let terms = ln_series_terms(q0, count, z, k)?;
        let peak = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let last = terms[count - 1];
        let falling = count >= 2 && last < terms[count - 2];
        if falling && last - peak < SERIES_EPS.ln() - (count as f64).ln() {
            let scaled: f64 = terms.iter().map(|t| (t - peak).exp()).sum();
            return Ok(peak.exp() * scaled);
        }
        count *= 2;
        if count > MAX_SERIES_TERMS {
            return Err(Error::NonConvergence("ξ1 tail series"));
        }
    }
}

/// ξ1 from the complementary tail series at the real shape δ.
///
/// Returns exactly 0 when λ = 0.
pub fn xi1_closed(approx: &CascadeApprox, budget: &NoiseBudget, m_nd: f64, omega_nd: f64, n: u32) -> Result<f64> {
    check_budget(budget)?;
    if budget.lambda == 0.0 || budget.ups_th == 0.0 {
        return Ok(0.0);
    }
    if budget.lambda < LAMBDA_FLOOR {
        log::warn!("λ = {:e} is below {LAMBDA_FLOOR:e}; the series approximation is unreliable", budget.lambda);
    }
    let z = series_argument(approx, budget, m_nd, omega_nd);
    let k = m_nd * n as f64;
    Ok(clamp_probability(series_tail(approx.delta, z, k)?))
}

/// ξ1 as `1 - Σ_{p < δ_int} T(p)` with δ rounded to the nearest integer.
pub fn xi1_finite_sum(approx: &CascadeApprox, budget: &NoiseBudget, m_nd: f64, omega_nd: f64, n: u32) -> Result<f64> {
    check_budget(budget)?;
    if budget.lambda == 0.0 || budget.ups_th == 0.0 {
        return Ok(0.0);
    }
    let z = series_argument(approx, budget, m_nd, omega_nd);
    let k = m_nd * n as f64;
    let head: f64 = ln_series_terms(0.0, approx.delta_int as usize, z, k)?.iter().map(|t| t.exp()).sum();
    if head < 0.5 {
        return Ok(clamp_probability(1.0 - head));
    }
    // The terms sum to one, so the complement is the tail from δ_int; summing
    // it directly avoids cancellation when ξ1 is small.
    Ok(clamp_probability(series_tail(approx.delta_int as f64, z, k)?))
}

/// Reference ξ1 by adaptive quadrature of `∫ f_Y(y) F_X(λΥy/ψ) dy`.
pub fn xi1_oracle(approx: &CascadeApprox, budget: &NoiseBudget, m_nd: f64, omega_nd: f64, n: u32) -> Result<f64> {
    check_budget(budget)?;
    if budget.lambda == 0.0 || budget.ups_th == 0.0 {
        return Ok(0.0);
    }
    let c = budget.lambda * budget.ups_th / budget.psi;
    let integrand = |y: f64| {
        let f = cdf_x(c * y, approx).unwrap_or(f64::NAN);
        if f == 0.0 {
            return 0.0;
        }
        (ln_pdf_y(y, m_nd, omega_nd, n).unwrap_or(f64::NAN) + f.ln()).exp()
    };
    let mean_y = n as f64 * omega_nd;
    let q = integrate_semi_infinite_scaled(integrand, 0.0, mean_y, ORACLE_REL_TOL)?;
    Ok(clamp_probability(q.value))
}

/// Which evaluation of ξ1 feeds the composite outage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Xi1Method {
    #[default]
    TailSeries,
    FiniteSum,
    Quadrature,
}

impl Xi1Method {
    pub fn eval(self, approx: &CascadeApprox, budget: &NoiseBudget, p: &SystemParams) -> Result<f64> {
        let omega_nd = p.omega_nd()?;
        let f = match self {
            Xi1Method::TailSeries => xi1_closed,
            Xi1Method::FiniteSum => xi1_finite_sum,
            Xi1Method::Quadrature => xi1_oracle,
        };
        f(approx, budget, p.m_nd, omega_nd, p.n_elements)
    }
}

fn doubled(budget: &NoiseBudget) -> NoiseBudget {
    NoiseBudget { ups_th: 2.0 * budget.ups_th, ..*budget }
}

fn compose(approx: &CascadeApprox, budget: &NoiseBudget, p: &SystemParams, method: Xi1Method) -> Result<f64> {
    if budget.lambda == 0.0 {
        // Noiseless surface: the composite reduces to ξ2 alone.
        return xi2(approx, budget);
    }
    let x1 = method.eval(approx, budget, p)?;
    let x2 = xi2(approx, budget)?;
    Ok(union_of_independent(x1, x2))
}

/// Outage under the SINR upper bound, i.e. a lower bound on outage.
pub fn outage_lb(p: &SystemParams) -> Result<f64> {
    outage_lb_with(p, Xi1Method::default())
}

pub fn outage_lb_with(p: &SystemParams, method: Xi1Method) -> Result<f64> {
    let approx = CascadeApprox::from_params(p)?;
    compose(&approx, &build_noise_budget(p)?, p, method)
}

/// Outage with the threshold doubled, an upper bound on outage.
pub fn outage_ub(p: &SystemParams) -> Result<f64> {
    outage_ub_with(p, Xi1Method::default())
}

pub fn outage_ub_with(p: &SystemParams, method: Xi1Method) -> Result<f64> {
    let approx = CascadeApprox::from_params(p)?;
    compose(&approx, &doubled(&build_noise_budget(p)?), p, method)
}

/// `ln ξ1∞` (−∞ when λ or Υ vanish).
pub fn ln_xi1_asymptotic(approx: &CascadeApprox, budget: &NoiseBudget, m_nd: f64, omega_nd: f64, n: u32) -> f64 {
    if budget.lambda == 0.0 || budget.ups_th == 0.0 {
        return f64::NEG_INFINITY;
    }
    let d = approx.delta;
    let k = m_nd * n as f64;
    -0.5 * d * (m_nd / omega_nd).ln() + ln_gamma(k + 0.5 * d)
        - d.ln()
        - ln_gamma(d)
        - ln_gamma(k)
        + d * (0.5 * (budget.ups_th * budget.lambda / budget.psi).ln() - approx.zeta.ln())
}

/// `ln ξ2∞`. The small-argument expansion of `P(δ, √(Υ/ψ)/ζ)` involves Υ/ψ
/// only; λ does not enter.
pub fn ln_xi2_asymptotic(approx: &CascadeApprox, budget: &NoiseBudget) -> f64 {
    if budget.ups_th == 0.0 {
        return f64::NEG_INFINITY;
    }
    let d = approx.delta;
    -d.ln() - ln_gamma(d) + d * (0.5 * (budget.ups_th / budget.psi).ln() - approx.zeta.ln())
}

/// High-SNR outage `1 - (1 - ξ1∞)(1 - ξ2∞)`, with each term capped at one.
pub fn outage_asymptotic(p: &SystemParams) -> Result<f64> {
    let approx = CascadeApprox::from_params(p)?;
    let budget = build_noise_budget(p)?;
    check_budget(&budget)?;
    let x1 = ln_xi1_asymptotic(&approx, &budget, p.m_nd, p.omega_nd()?, p.n_elements).exp().min(1.0);
    let x2 = ln_xi2_asymptotic(&approx, &budget).exp().min(1.0);
    Ok(union_of_independent(x1, x2))
}

/// High-SNR slope δ/2 of outage versus ρ on log-log axes.
pub fn diversity_order(approx: &CascadeApprox) -> f64 {
    0.5 * approx.delta
}

/// Throughput `(1 - P_out) R` in bit/s from the outage lower bound.
pub fn throughput(p: &SystemParams) -> Result<f64> {
    Ok(throughput_from(outage_lb(p)?, p.target_rate_bps))
}

pub fn throughput_from(outage: f64, rate_bps: f64) -> f64 {
    (1.0 - outage) * rate_bps
}

/// All analytic quantities for one operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutageReport {
    pub xi1: f64,
    pub xi2: f64,
    pub outage_lb: f64,
    pub outage_ub: f64,
    pub outage_asym: f64,
    pub throughput: f64,
    pub diversity_order: f64,
    pub lambda: f64,
    pub delta: f64,
    pub zeta: f64,
    /// False when λ is small enough that the closed form should be
    /// cross-checked against [`xi1_oracle`].
    pub reliable: bool,
}

impl OutageReport {
    pub fn analyze(p: &SystemParams) -> Result<Self> {
        let approx = CascadeApprox::from_params(p)?;
        let budget = build_noise_budget(p)?;
        let omega_nd = p.omega_nd()?;
        let xi1 = xi1_closed(&approx, &budget, p.m_nd, omega_nd, p.n_elements)?;
        let xi2 = xi2(&approx, &budget)?;
        let outage_lb = compose(&approx, &budget, p, Xi1Method::TailSeries)?;
        let outage_ub = compose(&approx, &doubled(&budget), p, Xi1Method::TailSeries)?;
        Ok(Self {
            xi1,
            xi2,
            outage_lb,
            outage_ub,
            outage_asym: outage_asymptotic(p)?,
            throughput: throughput_from(outage_lb, p.target_rate_bps),
            diversity_order: diversity_order(&approx),
            lambda: budget.lambda,
            delta: approx.delta,
            zeta: approx.zeta,
            reliable: budget.lambda == 0.0 || budget.lambda >= RELIABLE_LAMBDA,
        })
    }
}

/// `T(q)` for a single index; exposed for diagnostics and tests.
pub fn series_term(q: f64, z: f64, k: f64) -> Result<f64> {
    if z == 0.0 {
        return Ok(if q == 0.0 { 1.0 } else { 0.0 });
    }
    Ok(ln_series_terms(q, 1, z, k)?[0].exp())
}
