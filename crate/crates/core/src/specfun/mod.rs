//! Special functions and numerical integration.

pub mod gamma;
pub mod hyper;
pub mod meijer;
pub mod quad;

pub use gamma::{ln_gamma, lower_gamma, reg_gamma_pair, reg_lower_gamma, reg_upper_gamma};
pub use hyper::kummer_1f1;
pub use meijer::{
    ln_meijer_g_2_1_1_2, ln_tricomi_half_ladder, meijer_g_1_1_1_2, meijer_g_2_0_0_2, meijer_g_2_1_1_2,
    MeijerG212Params,
};
pub use quad::{integrate, integrate_semi_infinite, integrate_semi_infinite_scaled, Quadrature, DEFAULT_REL_TOL};
