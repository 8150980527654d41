//! Nakagami-m cascade statistics.
//!
//! With ideal phase alignment the received amplitude is `√X = Σ|g_bn||g_nd|`,
//! a sum of products of Nakagami amplitudes. Its first two moments are
//! exact; `√X` itself is approximated by a Gamma law with the same mean and
//! variance. `Y = Σ|g_nd|²` is exactly Gamma distributed.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::noise::SystemParams;
use crate::specfun::{ln_gamma, reg_lower_gamma};

/// Moment-matched Gamma model of the aligned cascade amplitude `√X`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CascadeApprox {
    pub mu_d: f64,
    pub sigma_d2: f64,
    /// Shape δ = μ²/σ².
    pub delta: f64,
    /// Scale ζ = σ²/μ.
    pub zeta: f64,
    /// δ rounded to the nearest integer, at least 1.
    pub delta_int: u32,
}

impl CascadeApprox {
    pub fn from_params(p: &SystemParams) -> Result<Self> {
        let (mu, var) = cascade_moments(p.m_bn, p.omega_bn()?, p.m_nd, p.omega_nd()?, p.n_elements)?;
        gamma_approx(mu, var)
    }
}

fn check_shape(name: &str, m: f64) -> Result<()> {
    if m >= 0.5 && m.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be a finite Nakagami shape >= 0.5, got {m}")))
    }
}

fn check_power(name: &str, omega: f64) -> Result<()> {
    if omega > 0.0 && omega.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be positive and finite, got {omega}")))
    }
}

/// `Γ(m_bn+½) Γ(m_nd+½) / (Γ(m_bn) Γ(m_nd))`, the product of the two
/// normalised amplitude means times √(m_bn m_nd).
fn amplitude_ratio(m_bn: f64, m_nd: f64) -> f64 {
    (ln_gamma(m_bn + 0.5) - ln_gamma(m_bn) + ln_gamma(m_nd + 0.5) - ln_gamma(m_nd)).exp()
}

/// Mean and variance of `Σ|g_bn||g_nd|` over `n` independent element pairs.
pub fn cascade_moments(m_bn: f64, omega_bn: f64, m_nd: f64, omega_nd: f64, n: u32) -> Result<(f64, f64)> {
    check_shape("m_bn", m_bn)?;
    check_shape("m_nd", m_nd)?;
    check_power("omega_bn", omega_bn)?;
    check_power("omega_nd", omega_nd)?;
    if n == 0 {
        return Err(Error::domain("element count must be at least 1"));
    }
    let r = amplitude_ratio(m_bn, m_nd);
    let n = n as f64;
    let mean = r * (omega_bn * omega_nd / (m_bn * m_nd)).sqrt() * n;
    let var = n * omega_bn * omega_nd * (1.0 - r * r / (m_bn * m_nd));
    Ok((mean, var))
}

pub fn gamma_approx(mu_d: f64, sigma_d2: f64) -> Result<CascadeApprox> {
    if !(mu_d > 0.0 && sigma_d2 > 0.0) || !(mu_d.is_finite() && sigma_d2.is_finite()) {
        return Err(Error::domain(format!(
            "moment matching needs a positive mean and variance, got ({mu_d}, {sigma_d2})"
        )));
    }
    let delta = mu_d * mu_d / sigma_d2;
    Ok(CascadeApprox {
        mu_d,
        sigma_d2,
        delta,
        zeta: sigma_d2 / mu_d,
        delta_int: (delta.round() as u32).max(1),
    })
}

/// `F_X(x) = P(δ, √x / ζ)` with the real shape δ.
pub fn cdf_x(x: f64, approx: &CascadeApprox) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::domain(format!("cdf_x argument must be non-negative, got {x}")));
    }
    reg_lower_gamma(approx.delta, x.sqrt() / approx.zeta)
}

/// Log-density of `Y`, a Gamma law with shape `m_nd·N` and rate `m_nd/Ω_nd`.
pub fn ln_pdf_y(y: f64, m_nd: f64, omega_nd: f64, n: u32) -> Result<f64> {
    check_shape("m_nd", m_nd)?;
    check_power("omega_nd", omega_nd)?;
    if !(y >= 0.0) {
        return Err(Error::domain(format!("pdf_y argument must be non-negative, got {y}")));
    }
    let k = m_nd * n as f64;
    let rate = m_nd / omega_nd;
    if y == 0.0 {
        return Ok(match k.partial_cmp(&1.0) {
            Some(std::cmp::Ordering::Greater) => f64::NEG_INFINITY,
            Some(std::cmp::Ordering::Equal) => rate.ln(),
            _ => f64::INFINITY,
        });
    }
    Ok(k * rate.ln() + (k - 1.0) * y.ln() - rate * y - ln_gamma(k))
}

pub fn pdf_y(y: f64, m_nd: f64, omega_nd: f64, n: u32) -> Result<f64> {
    ln_pdf_y(y, m_nd, omega_nd, n).map(f64::exp)
}

/// Draws Nakagami-m amplitudes `√G`, `G ~ Gamma(shape m, mean Ω)`.
#[derive(Debug, Clone, Copy)]
pub struct NakagamiSampler {
    power: Gamma<f64>,
}

impl NakagamiSampler {
    pub fn new(m: f64, omega: f64) -> Result<Self> {
        check_shape("Nakagami shape", m)?;
        check_power("Nakagami spread", omega)?;
        let power = Gamma::new(m, omega / m).map_err(|e| Error::domain(e.to_string()))?;
        Ok(Self { power })
    }

    /// Squared amplitude, i.e. the instantaneous power gain.
    #[inline]
    pub fn sample_power<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.power.sample(rng)
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.sample_power(rng).sqrt()
    }
}

/// One Nakagami-m amplitude.
pub fn sample_nakagami<R: Rng + ?Sized>(m: f64, omega: f64, rng: &mut R) -> Result<f64> {
    Ok(NakagamiSampler::new(m, omega)?.sample(rng))
}
