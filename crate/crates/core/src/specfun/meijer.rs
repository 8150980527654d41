//! Meijer G-functions of the few shapes the outage expressions need.
//!
//! The workhorse is `G^{2,1}_{1,2}(z | 1-s; 0, 1/2) = Γ(s) Γ(s+1/2) U(s, 1/2, z)`,
//! with `U` the Tricomi confluent hypergeometric function. Two routes are used:
//!
//! * the residue sum `√π [Γ(s) M(s,1/2,z) - 2 Γ(s+1/2) √z M(s+1/2,3/2,z)]`,
//!   which is cheap but cancels catastrophically once `s·z` grows;
//! * a ladder over the parabolic cylinder functions
//!   `U(a, 1/2, z) = 2^a e^{z/2} D_{-2a}(√(2z))`. `D_ν` is the minimal
//!   solution of its three-term recurrence as `ν → -∞`, so its ratios are
//!   obtained by Miller's backward algorithm and anchored at a base order
//!   `a_f ∈ [0, 1/2)` where `U` is evaluated directly.

use std::f64::consts::{LN_2, PI};

use super::gamma::{ln_gamma, lower_gamma};
use super::hyper::kummer_1f1;
use super::quad::integrate_semi_infinite_scaled;
use crate::error::{Error, Result};

/// Residue cancellation factor above which the ladder is used instead.
const MAX_RESIDUE_CANCELLATION: f64 = 1e4;
const LADDER_TOL: f64 = 1e-14;
const MAX_MILLER_DEPTH: usize = 1 << 22;

/// Parameters of `G^{2,1}_{1,2}(z | a1; b1, b2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeijerG212Params {
    pub a1: f64,
    pub b1: f64,
    pub b2: f64,
}

impl MeijerG212Params {
    /// The `(1 - s; 0, 1/2)` shape.
    pub fn shifted_half(s: f64) -> Self {
        Self { a1: 1.0 - s, b1: 0.0, b2: 0.5 }
    }

    /// Returns `s = 1 - a1` after checking that the shape is supported.
    fn order(&self) -> Result<f64> {
        // Γ(b1 - t) Γ(b2 - t) has coinciding poles whenever b1 - b2 is an
        // integer, which would call for a logarithmic residue sum. Only the
        // (0, 1/2) lower pair is implemented, so that case never arises.
        if self.b1 != 0.0 || self.b2 != 0.5 {
            return Err(Error::UnsupportedShape(format!(
                "G^(2,1)_(1,2) is implemented for lower parameters (0, 1/2), got ({}, {})",
                self.b1, self.b2
            )));
        }
        let s = 1.0 - self.a1;
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::domain(format!("G^(2,1)_(1,2) requires 1 - a1 > 0, got a1 = {}", self.a1)));
        }
        Ok(s)
    }
}

/// `G^{2,1}_{1,2}(z | a1; b1, b2)` for `z ≥ 0`.
pub fn meijer_g_2_1_1_2(params: MeijerG212Params, z: f64) -> Result<f64> {
    let s = params.order()?;
    check_z(z)?;
    if let Some(v) = residue_value(s, z) {
        return Ok(v);
    }
    let ln = ln_meijer_g_2_1_1_2(params, z)?;
    if ln > f64::MAX.ln() {
        return Err(Error::domain(format!("G^(2,1)_(1,2) overflows (ln G = {ln})")));
    }
    Ok(ln.exp())
}

/// Natural log of `G^{2,1}_{1,2}(z | a1; b1, b2)`; the function is positive
/// on the supported shape.
pub fn ln_meijer_g_2_1_1_2(params: MeijerG212Params, z: f64) -> Result<f64> {
    let s = params.order()?;
    check_z(z)?;
    Ok(ln_gamma(s) + ln_gamma(s + 0.5) + ln_tricomi_u_half(s, z)?)
}

/// `G^{1,1}_{1,2}(x | 1; δ, 0) = γ(δ, x)`.
pub fn meijer_g_1_1_1_2(delta: f64, x: f64) -> Result<f64> {
    lower_gamma(delta, x)
}

/// `G^{2,0}_{0,2}(z | -; 0, 1/2) = √π e^{-2√z}`.
pub fn meijer_g_2_0_0_2(z: f64) -> Result<f64> {
    check_z(z)?;
    Ok(PI.sqrt() * (-2.0 * z.sqrt()).exp())
}

fn check_z(z: f64) -> Result<()> {
    if !(z >= 0.0) || !z.is_finite() {
        return Err(Error::domain(format!("Meijer G argument must be finite and non-negative, got {z}")));
    }
    Ok(())
}

/// Residue-sum value of `G^{2,1}_{1,2}(z | 1-s; 0, 1/2)`, or `None` if it
/// overflows or cancels too badly to trust.
fn residue_value(s: f64, z: f64) -> Option<f64> {
    if z == 0.0 {
        let v = (0.5 * PI.ln() + ln_gamma(s)).exp();
        return v.is_finite().then_some(v);
    }
    let (a, b) = residue_terms(s, z).ok()?;
    let v = PI.sqrt() * (a - b);
    let ok = a.is_finite() && b.is_finite() && v > 0.0 && a / (a - b) <= MAX_RESIDUE_CANCELLATION;
    ok.then_some(v)
}

/// The two residue series `Γ(s) M(s,1/2,z)` and `2 Γ(s+1/2) √z M(s+1/2,3/2,z)`.
fn residue_terms(s: f64, z: f64) -> Result<(f64, f64)> {
    let a = ln_gamma(s).exp() * kummer_1f1(s, 0.5, z)?;
    let b = 2.0 * ln_gamma(s + 0.5).exp() * z.sqrt() * kummer_1f1(s + 0.5, 1.5, z)?;
    Ok((a, b))
}

/// `U(a, 1/2, z)`.
pub fn tricomi_u_half(a: f64, z: f64) -> Result<f64> {
    ln_tricomi_u_half(a, z).map(f64::exp)
}

/// `ln U(a, 1/2, z)` for `a ≥ 0`, `z ≥ 0`.
pub fn ln_tricomi_u_half(a: f64, z: f64) -> Result<f64> {
    Ok(ln_tricomi_half_ladder(a, 1, z)?[0])
}

/// `ln U(a_start + j/2, 1/2, z)` for `j = 0, 1, …, count - 1`.
pub fn ln_tricomi_half_ladder(a_start: f64, count: usize, z: f64) -> Result<Vec<f64>> {
    if !(a_start >= 0.0) || !a_start.is_finite() {
        return Err(Error::domain(format!("ladder start must be finite and non-negative, got {a_start}")));
    }
    check_z(z)?;
    if count == 0 {
        return Ok(Vec::new());
    }
    if z == 0.0 {
        // U(a, b, 0) = Γ(1-b)/Γ(a-b+1) for b < 1.
        return Ok((0..count)
            .map(|j| {
                let a = a_start + 0.5 * j as f64;
                0.5 * PI.ln() - ln_gamma(a + 0.5)
            })
            .collect());
    }

    let two_a = 2.0 * a_start;
    let offset = two_a.floor();
    let a_base = 0.5 * (two_a - offset);
    let ln_u_base = ln_u_direct(a_base, z)?;

    // Orders ν_i = ν_f - i with ν_f = -2 a_base ∈ (-1, 0].
    let first = offset as usize;
    let steps = first + count - 1;
    let x = (2.0 * z).sqrt();
    let nu_f = -2.0 * a_base;
    let ratios = if miller_depth(steps, x) <= MAX_MILLER_DEPTH {
        miller_ratios(nu_f, steps, x)?
    } else {
        // D_{ν_f} / D_{ν_f - 1} = √2 U(a_f) / U(a_f + 1/2)
        let r0 = (0.5 * LN_2 + ln_u_base - ln_u_direct(a_base + 0.5, z)?).exp();
        forward_ratios(nu_f, steps, x, r0)
    };

    let mut out = Vec::with_capacity(count);
    let mut ln_d = 0.0; // ln(D_{ν_i} / D_{ν_f})
    for i in 0..=steps {
        if i >= first {
            out.push(ln_u_base + 0.5 * i as f64 * LN_2 + ln_d);
        }
        if i < steps {
            ln_d -= ratios[i].ln();
        }
    }
    Ok(out)
}

/// Start depth below the last needed order at which Miller's algorithm has
/// converged to double precision. A start error is damped by roughly
/// `1 - x/√|ν|` per step, i.e. by `exp(-2x(√L - √steps))` overall.
fn miller_depth(steps: usize, x: f64) -> usize {
    let root = (steps as f64).sqrt() + 20.0 / x;
    (root * root - steps as f64).min(usize::MAX as f64 / 4.0) as usize
}

/// Ratios `R_i = D_{ν_f - i} / D_{ν_f - i - 1}` for `i < steps`.
///
/// The upward map `R_{ν+1} = x + |ν| / R_ν` only adds positive terms, so a
/// crude start far below the needed range converges onto the minimal
/// solution. The start depth is doubled until two passes agree.
fn miller_ratios(nu_f: f64, steps: usize, x: f64) -> Result<Vec<f64>> {
    if steps == 0 {
        return Ok(Vec::new());
    }
    let run = |extra: usize| -> Vec<f64> {
        let depth = steps + extra;
        let nu0 = nu_f - depth as f64;
        let mag = -nu0;
        // Fixed point of R = x + |ν|/R with |ν| frozen.
        let mut r = 0.5 * (x + (x * x + 4.0 * mag).sqrt());
        let mut out = vec![0.0; steps];
        for l in (0..depth).rev() {
            // r currently holds R at order ν_f - l - 1; step up to ν_f - l.
            let nu = nu_f - (l + 1) as f64;
            r = x + (-nu) / r;
            if l < steps {
                out[l] = r;
            }
        }
        out
    };
    let mut extra = miller_depth(steps, x).max(64) / 2;
    let mut prev = run(extra);
    loop {
        extra *= 2;
        if steps + extra > 2 * MAX_MILLER_DEPTH {
            return Err(Error::NonConvergence("parabolic cylinder ratio recurrence"));
        }
        let next = run(extra);
        // Compare cumulative log products, which is what the caller uses.
        let mut worst = 0.0_f64;
        let (mut acc_p, mut acc_n) = (0.0_f64, 0.0_f64);
        for (p, n) in prev.iter().zip(&next) {
            acc_p += p.ln();
            acc_n += n.ln();
            worst = worst.max((acc_p - acc_n).abs() / acc_n.abs().max(1.0));
        }
        if worst <= LADDER_TOL {
            return Ok(next);
        }
        prev = next;
    }
}

/// Ratios by the downward map `R_ν = |ν| / (R_{ν+1} - x)` from a known
/// first ratio. Errors grow like `exp(2x√steps)`, which is harmless in the
/// small-`x` regime where Miller's algorithm would need an impractical
/// start depth.
fn forward_ratios(nu_f: f64, steps: usize, x: f64, r0: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(steps);
    let mut r = r0;
    for i in 0..steps {
        out.push(r);
        r = (i as f64 + 1.0 - nu_f) / (r - x);
    }
    out
}

/// `ln U(a, 1/2, z)` for `a ∈ [0, 1)` and `z > 0`.
fn ln_u_direct(a: f64, z: f64) -> Result<f64> {
    if a == 0.0 {
        return Ok(0.0);
    }
    if z <= 2.0 {
        let (p, q) = residue_terms(a, z)?;
        let g = PI.sqrt() * (p - q);
        return Ok(g.ln() - ln_gamma(a) - ln_gamma(a + 0.5));
    }
    // U(a,b,z) = z^{-a}/Γ(a) ∫ e^{-w} w^{a-1} (1 + w/z)^{b-a-1} dw. Splitting
    // off the constant part of the last factor leaves a bounded integrand.
    let expo = -(a + 0.5);
    let integrand = |w: f64| {
        if w == 0.0 {
            return 0.0;
        }
        let g_minus_one = (expo * (w / z).ln_1p()).exp_m1();
        (-w).exp() * w.powf(a - 1.0) * g_minus_one
    };
    let q = integrate_semi_infinite_scaled(integrand, 0.0, 1.0, 1e-13)
        .or_else(|e| match e {
            Error::Accuracy { estimate, error } if error <= 1e-12 * estimate.abs().max(1.0) => {
                Ok(super::quad::Quadrature { value: estimate, error, evaluations: 0 })
            }
            other => Err(other),
        })?;
    let correction = q.value * (-ln_gamma(a)).exp();
    Ok(-a * z.ln() + correction.ln_1p())
}
