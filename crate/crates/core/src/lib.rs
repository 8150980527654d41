//! Outage and throughput analysis for passive reconfigurable intelligent
//! surface (RIS) links whose elements re-radiate their own thermal noise.
//!
//! The crate is organised bottom-up:
//!
//! - [`noise`]: physical constants, Johnson–Nyquist noise powers, path loss,
//!   the SINR threshold and the derived [`NoiseBudget`].
//! - [`fading`]: Nakagami-m cascade statistics and the moment-matched Gamma
//!   model of the aligned cascade amplitude.
//! - [`specfun`]: incomplete gamma, Kummer's 1F1, the restricted Meijer-G
//!   evaluators and adaptive quadrature.
//! - [`outage`]: closed-form and asymptotic outage, diversity order and
//!   throughput, with a quadrature reference for the RIS-noise term.
//! - [`mc`]: counter-seeded Monte Carlo estimates of the exact and bounded
//!   SINR outage.
//! - [`sweep`] and [`validate`]: the experiment harness behind the CLI.

pub mod error;
pub mod exec;
pub mod fading;
pub mod mc;
pub mod noise;
pub mod outage;
pub mod specfun;
pub mod sweep;
pub mod validate;

pub use error::{ConfigIssue, Error, Result};
pub use exec::Execution;
pub use fading::CascadeApprox;
pub use mc::{McConfig, McEstimate, SinrKind};
pub use noise::{NoiseBudget, RisNoise, SystemParams};
pub use outage::OutageReport;
