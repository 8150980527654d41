//! Kummer's confluent hypergeometric function `1F1(a; b; z) = M(a, b, z)`.

use crate::error::{Error, Result};

const EPS: f64 = 1e-17;
const MAX_TERMS: usize = 200_000;
/// Largest tolerated ratio between the biggest series term and the result.
const MAX_CANCELLATION: f64 = 1e6;

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// `1F1(a; b; z)` for real arguments.
///
/// Positive `z` and non-positive `a` are summed directly. For `z < 0` with
/// `a > 0` the Kummer transformation `M(a,b,z) = e^z M(b-a, b, -z)` is
/// applied first, which turns an alternating series into one with a
/// positive leading stretch.
pub fn kummer_1f1(a: f64, b: f64, z: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite() && z.is_finite()) {
        return Err(Error::domain("1F1 arguments must be finite"));
    }
    if is_nonpositive_integer(b) {
        return Err(Error::domain(format!("1F1 lower parameter b = {b} is a non-positive integer")));
    }
    if a == 0.0 || z == 0.0 {
        return Ok(1.0);
    }
    if a == b {
        return Ok(z.exp());
    }
    if z < 0.0 && a > 0.0 && !is_nonpositive_integer(b - a) {
        return Ok(z.exp() * series(b - a, b, -z)?);
    }
    series(a, b, z)
}

/// Direct Maclaurin sum; terminates on its own when `a` is a non-positive
/// integer.
fn series(a: f64, b: f64, z: f64) -> Result<f64> {
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    let mut comp = 0.0_f64;
    let mut largest = 1.0_f64;
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        term *= (a + nf) * z / ((b + nf) * (nf + 1.0));
        if term == 0.0 {
            break;
        }
        // Kahan summation keeps the alternating tails honest.
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        largest = largest.max(term.abs());
        if !sum.is_finite() {
            return Err(Error::NonConvergence("1F1 series (overflow)"));
        }
        // Past the peak once the term ratio drops below one in magnitude.
        let past_peak = ((a + nf + 1.0) * z / ((b + nf + 1.0) * (nf + 2.0))).abs() < 1.0;
        if past_peak && term.abs() <= EPS * sum.abs() {
            if largest > MAX_CANCELLATION * sum.abs() {
                return Err(Error::NonConvergence("1F1 series (cancellation)"));
            }
            return Ok(sum);
        }
    }
    if is_nonpositive_integer(a) {
        return Ok(sum);
    }
    Err(Error::NonConvergence("1F1 series"))
}
