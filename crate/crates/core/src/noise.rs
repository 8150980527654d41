//! Physical constants, thermal-noise powers, path loss and the SINR
//! threshold, plus the derived [`NoiseBudget`] that the outage engine and
//! the simulator consume.
//!
//! Powers in dB are dBW throughout. All internal arithmetic is linear.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Boltzmann constant in J/K (exact SI value).
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// The three-digit Boltzmann constant used to tabulate the published
/// RIS-noise table; only [`table2`] uses it.
pub const BOLTZMANN_ROUNDED: f64 = 1.38e-23;
/// Default noise temperature in kelvin.
pub const T0: f64 = 290.0;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// How the thermal noise re-radiated by the surface enters λ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RisNoise {
    /// σ_r² = kTB, the noise of one element.
    #[default]
    PerElement,
    /// σ_r² = J_R = NαkTB, the total power re-radiated by the surface.
    Aggregate,
    /// σ_r² = 0 (noiseless surface).
    Off,
}

/// Full description of one deployment. The defaults reproduce the
/// baseline simulation parameters: m = 2 on both hops, 100 m and 2 m legs
/// with exponents 3.2 and 2, B = 20 MHz, R = 15 Mbit/s, α = 0.9,
/// NF = 3 dB, T = 290 K, N = 5 and P_b = -59 dBW.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemParams {
    pub n_elements: u32,
    pub alpha: f64,
    pub m_bn: f64,
    pub m_nd: f64,
    pub d_bn: f64,
    pub d_nd: f64,
    pub tau_bn: f64,
    pub tau_nd: f64,
    pub phi_ref: f64,
    pub bandwidth_hz: f64,
    pub temperature_k: f64,
    /// Linear receiver noise figure.
    pub noise_figure: f64,
    /// Replaces kTB·NF as the receiver noise power when set.
    pub sigma_d2_override_w: Option<f64>,
    pub tx_power_w: f64,
    pub target_rate_bps: f64,
    pub ris_noise: RisNoise,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            n_elements: 5,
            alpha: 0.9,
            m_bn: 2.0,
            m_nd: 2.0,
            d_bn: 100.0,
            d_nd: 2.0,
            tau_bn: 3.2,
            tau_nd: 2.0,
            phi_ref: 1.0,
            bandwidth_hz: 20e6,
            temperature_k: T0,
            noise_figure: db_to_linear(3.0),
            sigma_d2_override_w: None,
            tx_power_w: db_to_linear(-59.0),
            target_rate_bps: 15e6,
            ris_noise: RisNoise::PerElement,
        }
    }
}

impl SystemParams {
    pub fn with_tx_power_dbw(mut self, dbw: f64) -> Self {
        self.tx_power_w = db_to_linear(dbw);
        self
    }

    pub fn tx_power_dbw(&self) -> f64 {
        linear_to_db(self.tx_power_w)
    }

    /// Checks every field against its physical range and reports all
    /// violations at once.
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        let mut need = |ok: bool, msg: String| {
            if !ok {
                bad.push(msg);
            }
        };
        need(self.n_elements >= 1, format!("n_elements must be at least 1, got {}", self.n_elements));
        need(self.alpha > 0.0 && self.alpha <= 1.0, format!("alpha must lie in (0, 1], got {}", self.alpha));
        for (name, m) in [("m_bn", self.m_bn), ("m_nd", self.m_nd)] {
            need(m >= 0.5 && m.is_finite(), format!("{name} must be a finite Nakagami shape >= 0.5, got {m}"));
        }
        for (name, v) in [
            ("d_bn", self.d_bn),
            ("d_nd", self.d_nd),
            ("tau_bn", self.tau_bn),
            ("tau_nd", self.tau_nd),
            ("phi_ref", self.phi_ref),
            ("bandwidth_hz", self.bandwidth_hz),
            ("temperature_k", self.temperature_k),
            ("tx_power_w", self.tx_power_w),
        ] {
            need(v > 0.0 && v.is_finite(), format!("{name} must be positive and finite, got {v}"));
        }
        need(
            self.noise_figure >= 1.0 && self.noise_figure.is_finite(),
            format!("noise_figure must be a finite linear factor >= 1, got {}", self.noise_figure),
        );
        if let Some(s) = self.sigma_d2_override_w {
            need(s > 0.0 && s.is_finite(), format!("receiver noise override must be positive, got {s}"));
        }
        need(
            self.target_rate_bps >= 0.0 && self.target_rate_bps.is_finite(),
            format!("target_rate_bps must be finite and non-negative, got {}", self.target_rate_bps),
        );
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::domain(bad.join("; ")))
        }
    }

    /// Average power Ω_bn of the surface-facing hop.
    pub fn omega_bn(&self) -> Result<f64> {
        path_loss(self.d_bn, self.tau_bn, self.phi_ref)
    }

    /// Average power Ω_nd of the receiver-facing hop.
    pub fn omega_nd(&self) -> Result<f64> {
        path_loss(self.d_nd, self.tau_nd, self.phi_ref)
    }
}

/// Noise quantities derived from [`SystemParams`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseBudget {
    pub sigma_d2: f64,
    pub sigma_r2: f64,
    /// λ = α σ_r² / σ_d²
    pub lambda: f64,
    /// ρ = P_b / σ_d²
    pub rho: f64,
    /// ψ = ρ α
    pub psi: f64,
    pub ups_th: f64,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be positive and finite, got {v}")))
    }
}

/// kTB per hertz-kelvin pair, parameterised by the Boltzmann constant.
pub fn thermal_noise_power_with(k: f64, temperature_k: f64, bandwidth_hz: f64) -> Result<f64> {
    positive("temperature", temperature_k)?;
    positive("bandwidth", bandwidth_hz)?;
    Ok(k * temperature_k * bandwidth_hz)
}

/// Receiver noise power kTB·NF in watts.
pub fn receiver_noise_power(temperature_k: f64, bandwidth_hz: f64, noise_figure: f64) -> Result<f64> {
    if !(noise_figure >= 1.0) || !noise_figure.is_finite() {
        return Err(Error::domain(format!("noise figure must be a linear factor >= 1, got {noise_figure}")));
    }
    Ok(thermal_noise_power_with(BOLTZMANN, temperature_k, bandwidth_hz)? * noise_figure)
}

pub fn receiver_noise_power_dbw(temperature_k: f64, bandwidth_hz: f64, noise_figure: f64) -> Result<f64> {
    receiver_noise_power(temperature_k, bandwidth_hz, noise_figure).map(linear_to_db)
}

/// Total power J_R = NαkTB re-radiated by the surface, in watts.
pub fn ris_noise_power(n: u32, alpha: f64, temperature_k: f64, bandwidth_hz: f64) -> Result<f64> {
    ris_noise_power_with(BOLTZMANN, n, alpha, temperature_k, bandwidth_hz)
}

pub fn ris_noise_power_with(k: f64, n: u32, alpha: f64, temperature_k: f64, bandwidth_hz: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("element count must be at least 1"));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::domain(format!("reflection factor must lie in [0, 1], got {alpha}")));
    }
    Ok(n as f64 * alpha * thermal_noise_power_with(k, temperature_k, bandwidth_hz)?)
}

pub fn ris_noise_power_dbw(n: u32, alpha: f64, temperature_k: f64, bandwidth_hz: f64) -> Result<f64> {
    ris_noise_power(n, alpha, temperature_k, bandwidth_hz).map(linear_to_db)
}

/// Distance-based average power gain φ/D^τ.
pub fn path_loss(distance_m: f64, tau: f64, phi_ref: f64) -> Result<f64> {
    positive("distance", distance_m)?;
    positive("reference path-loss parameter", phi_ref)?;
    if !tau.is_finite() {
        return Err(Error::domain(format!("path-loss exponent must be finite, got {tau}")));
    }
    Ok(phi_ref / distance_m.powf(tau))
}

/// Υ_th = 2^(R/B) − 1.
pub fn sinr_threshold(rate_bps: f64, bandwidth_hz: f64) -> Result<f64> {
    positive("bandwidth", bandwidth_hz)?;
    if !(rate_bps >= 0.0) || !rate_bps.is_finite() {
        return Err(Error::domain(format!("target rate must be finite and non-negative, got {rate_bps}")));
    }
    Ok((rate_bps / bandwidth_hz * std::f64::consts::LN_2).exp_m1())
}

/// Derives σ_d², σ_r², λ, ρ, ψ and Υ_th.
pub fn build_noise_budget(p: &SystemParams) -> Result<NoiseBudget> {
    p.validate()?;
    let sigma_d2 = match p.sigma_d2_override_w {
        Some(s) => s,
        None => receiver_noise_power(p.temperature_k, p.bandwidth_hz, p.noise_figure)?,
    };
    let ktb = thermal_noise_power_with(BOLTZMANN, p.temperature_k, p.bandwidth_hz)?;
    let sigma_r2 = match p.ris_noise {
        RisNoise::PerElement => ktb,
        RisNoise::Aggregate => ris_noise_power(p.n_elements, p.alpha, p.temperature_k, p.bandwidth_hz)?,
        RisNoise::Off => 0.0,
    };
    let rho = p.tx_power_w / sigma_d2;
    Ok(NoiseBudget {
        sigma_d2,
        sigma_r2,
        lambda: p.alpha * sigma_r2 / sigma_d2,
        rho,
        psi: rho * p.alpha,
        ups_th: sinr_threshold(p.target_rate_bps, p.bandwidth_hz)?,
    })
}

pub const TABLE2_ALPHAS: [f64; 10] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];
pub const TABLE2_SIZES: [u32; 3] = [5, 10, 20];

/// J_R in dBW on the α × N grid above at 290 K and 20 MHz, tabulated with
/// the three-digit Boltzmann constant of the published table.
pub fn table2() -> [[f64; 3]; 10] {
    table2_with(BOLTZMANN_ROUNDED)
}

/// The same grid for an arbitrary Boltzmann constant.
pub fn table2_with(k: f64) -> [[f64; 3]; 10] {
    let mut out = [[0.0; 3]; 10];
    for (row, &alpha) in out.iter_mut().zip(&TABLE2_ALPHAS) {
        for (cell, &n) in row.iter_mut().zip(&TABLE2_SIZES) {
            let j = ris_noise_power_with(k, n, alpha, T0, 20e6).expect("table grid is in range");
            *cell = linear_to_db(j);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn receiver_noise_at_three_db() {
        let dbw = receiver_noise_power_dbw(290.0, 2e7, db_to_linear(3.0)).unwrap();
        assert!((dbw - (-127.964_887_238)).abs() < 1e-8, "{dbw}");
        assert!(matches!(receiver_noise_power(290.0, 0.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(receiver_noise_power(290.0, 2e7, 0.5), Err(Error::Domain(_))));
    }

    #[test]
    fn bare_ktb() {
        let dbw = receiver_noise_power_dbw(290.0, 2e7, 1.0).unwrap();
        assert!((dbw - (-130.964_887_238)).abs() < 1e-8, "{dbw}");
    }

    #[test]
    fn ris_noise_is_linear_and_vanishes_without_reflection() {
        let unit = ris_noise_power(1, 1.0, 290.0, 2e7).unwrap();
        assert_eq!(ris_noise_power(10, 0.5, 290.0, 2e7).unwrap(), 10.0 * 0.5 * unit);
        assert_eq!(ris_noise_power(7, 0.0, 290.0, 2e7).unwrap(), 0.0);
        assert!(ris_noise_power(7, 1.2, 290.0, 2e7).is_err());
    }

    #[test]
    fn doubling_bandwidth_adds_three_db() {
        let a = ris_noise_power_dbw(5, 0.3, 290.0, 2e7).unwrap();
        let b = ris_noise_power_dbw(5, 0.3, 290.0, 4e7).unwrap();
        assert!((b - a - 3.010_299_956_639_812).abs() < 1e-12);
    }

    #[test]
    fn path_loss_examples() {
        assert_eq!(path_loss(1.0, 3.7, 1.0).unwrap(), 1.0);
        assert_relative_eq!(path_loss(100.0, 3.2, 1.0).unwrap(), 3.981_071_705_534_972_5e-7, max_relative = 1e-14);
        assert_eq!(path_loss(2.0, 2.0, 1.0).unwrap(), 0.25);
        assert!(path_loss(0.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn threshold_examples() {
        assert_eq!(sinr_threshold(0.0, 2e7).unwrap(), 0.0);
        assert_relative_eq!(sinr_threshold(2e7, 2e7).unwrap(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(sinr_threshold(15e6, 2e7).unwrap(), 0.681_792_830_507_429_1, max_relative = 1e-15);
        assert!(sinr_threshold(1.0, 0.0).is_err());
    }

    #[test]
    fn budget_identities() {
        let p = SystemParams::default();
        let b = build_noise_budget(&p).unwrap();
        assert_eq!(b.lambda, p.alpha * b.sigma_r2 / b.sigma_d2);
        assert_eq!(b.psi, b.rho * p.alpha);

        let off = build_noise_budget(&SystemParams { ris_noise: RisNoise::Off, ..p }).unwrap();
        assert_eq!(off.lambda, 0.0);

        let unity = SystemParams { alpha: 1.0, noise_figure: 1.0, ..p };
        assert_relative_eq!(build_noise_budget(&unity).unwrap().lambda, 1.0, max_relative = 1e-15);
    }

    #[test]
    fn budget_with_table_receiver_noise() {
        let p = SystemParams { sigma_d2_override_w: Some(db_to_linear(-128.0)), ..SystemParams::default() };
        let b = build_noise_budget(&p).unwrap();
        assert!((b.lambda - 0.4547).abs() < 5e-5, "{}", b.lambda);
        assert!((linear_to_db(b.rho) - 69.0).abs() < 1e-9);
    }

    #[test]
    fn lambda_invariant_under_temperature() {
        let p = SystemParams::default();
        let a = build_noise_budget(&p).unwrap().lambda;
        let b = build_noise_budget(&SystemParams { temperature_k: 3.0 * p.temperature_k, ..p }).unwrap().lambda;
        assert_relative_eq!(a, b, max_relative = 1e-14);
    }

    #[test]
    fn validate_reports_every_problem() {
        let p = SystemParams { alpha: 0.0, m_nd: 0.2, d_bn: -1.0, ..SystemParams::default() };
        let msg = p.validate().unwrap_err().to_string();
        assert!(msg.contains("alpha") && msg.contains("m_nd") && msg.contains("d_bn"), "{msg}");
    }
}
