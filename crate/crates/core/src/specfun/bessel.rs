use super::gamma::ln_gamma_pos;
use super::ScaledSum;
use crate::error::{domain, Result};

/// Exponentially scaled modified Bessel function of the first kind,
/// `e^{-x} I_n(x)`, for integer order `n >= 0` and `x >= 0`.
///
/// Evaluated from the ascending series `Σ_k (x/2)^{2k+n} / (k! (k+n)!)`
/// accumulated in scaled form so that large `x` neither overflows nor
/// underflows.
pub fn bessel_i_scaled(n: u32, x: f64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(domain(
            "bessel_i_scaled",
            format!("x must be nonnegative and finite, got {x}"),
        ));
    }
    if x == 0.0 {
        return Ok(if n == 0 { 1.0 } else { 0.0 });
    }
    let half = 0.5 * x;
    let nf = n as f64;
    let ratio_num = half * half;
    let mut sum = ScaledSum::starting_at(nf * half.ln() - ln_gamma_pos(nf + 1.0));
    let mut term = 1.0;
    let mut k = 0.0f64;
    loop {
        k += 1.0;
        term *= ratio_num / (k * (k + nf));
        term = sum.add_scaled(term);
        if k > half && term < f64::EPSILON * 0.25 * sum.relative() {
            break;
        }
    }
    Ok((sum.ln() - x).exp())
}
