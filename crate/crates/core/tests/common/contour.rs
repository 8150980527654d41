//! Numerical Mellin–Barnes contour integration, used only as a test oracle.
//!
//! `G^{m,n}_{p,q}(z) = (1/2πi) ∫_L Π Γ(b_j - t) Π Γ(1 - a_j + t) / (…) z^t dt`
//! is integrated along a vertical line `Re t = c`. For real parameters the
//! integrand is conjugate-symmetric, so `G = (1/π) ∫₀^∞ Re F(c + iy) dy`.
//! The line is placed where the real integrand is smallest between the two
//! pole families, which is where its oscillation along the line is slowest,
//! and the trapezoid rule (spectrally accurate for such integrands) is
//! refined until successive halvings agree.

use num_complex::Complex64;
use std::f64::consts::PI;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Complex log-gamma by upward shifting and the Stirling series. The
/// imaginary part may differ from the principal branch by a multiple of
/// 2π, which is irrelevant once exponentiated.
pub fn ln_gamma_c(w: Complex64) -> Complex64 {
    let mut w = w;
    let mut shift = Complex64::new(0.0, 0.0);
    while w.re < 15.0 {
        shift += w.ln();
        w += 1.0;
    }
    let inv = 1.0 / w;
    let inv2 = inv * inv;
    let series = inv
        * (1.0 / 12.0
            + inv2 * (-1.0 / 360.0 + inv2 * (1.0 / 1260.0 + inv2 * (-1.0 / 1680.0 + inv2 * (1.0 / 1188.0)))));
    (w - 0.5) * w.ln() - w + LN_SQRT_2PI + series - shift
}

/// Integrates `exp(ln_f(t))` along `Re t = c` with `c` chosen in `(lo, hi)`.
/// Returns `ln G`; the result must be positive.
fn ln_contour<F: Fn(Complex64) -> Complex64>(ln_f: F, lo: f64, hi: f64) -> f64 {
    let real = |c: f64| ln_f(Complex64::new(c, 0.0)).re;
    // Golden-section search for the minimum of the real log-integrand.
    let (mut a, mut b) = (lo, hi);
    let g = 0.5 * (5.0_f64.sqrt() - 1.0);
    for _ in 0..200 {
        let x1 = b - g * (b - a);
        let x2 = a + g * (b - a);
        if real(x1) < real(x2) {
            b = x2;
        } else {
            a = x1;
        }
    }
    let margin = 1e-3 * (hi - lo);
    let c = (0.5 * (a + b)).clamp(lo + margin, hi - margin);
    let base = real(c);
    let f = |y: f64| (ln_f(Complex64::new(c, y)) - base).exp().re;

    let trapezoid = |h: f64| {
        let mut sum = 0.5 * f(0.0);
        let mut k = 1usize;
        let mut quiet = 0;
        loop {
            let y = h * k as f64;
            let v = f(y);
            sum += v;
            quiet = if v.abs() < 1e-22 { quiet + 1 } else { 0 };
            if (quiet > 8 && y > 1.0) || k > 50_000_000 {
                break;
            }
            k += 1;
        }
        h * sum
    };
    let mut h = 0.5;
    let mut prev = trapezoid(h);
    loop {
        h *= 0.5;
        let next = trapezoid(h);
        if (next - prev).abs() <= 1e-13 * next.abs() || h < 1e-4 {
            assert!(next > 0.0, "contour integral is not positive");
            return base + (next / PI).ln();
        }
        prev = next;
    }
}

/// `ln G^{2,1}_{1,2}(z | 1-s; 0, 1/2)`, integrand `Γ(-t) Γ(1/2-t) Γ(s+t) z^t`.
pub fn ln_g_2_1_1_2(s: f64, z: f64) -> f64 {
    let lnz = z.ln();
    ln_contour(
        |t| ln_gamma_c(-t) + ln_gamma_c(0.5 - t) + ln_gamma_c(s + t) + t * lnz,
        -s,
        0.0,
    )
}

/// `G^{1,1}_{1,2}(x | 1; δ, 0)`, integrand `Γ(δ-t) Γ(t) / Γ(1+t) x^t`.
pub fn g_1_1_1_2(delta: f64, x: f64) -> f64 {
    let lnx = x.ln();
    ln_contour(
        |t| ln_gamma_c(delta - t) + ln_gamma_c(t) - ln_gamma_c(1.0 + t) + t * lnx,
        0.0,
        delta,
    )
    .exp()
}

/// `G^{2,0}_{0,2}(z | -; 0, 1/2)`, integrand `Γ(-t) Γ(1/2-t) z^t`.
pub fn g_2_0_0_2(z: f64) -> f64 {
    let lnz = z.ln();
    // The line must lie left of both pole families; any c < 0 works.
    ln_contour(|t| ln_gamma_c(-t) + ln_gamma_c(0.5 - t) + t * lnz, -50.0, 0.0).exp()
}
