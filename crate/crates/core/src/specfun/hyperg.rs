use super::{ScaledSum, SeriesControl};
use crate::error::{domain, Error, Result};

/// Kummer's confluent hypergeometric function `₁F₁(a; b; x)`.
///
/// Thin wrapper over [`kummer_1f1_ln`]; overflows to `+inf` when the value
/// exceeds the double range, use the log form in that case.
pub fn kummer_1f1(a: f64, b: f64, x: f64, ctrl: &SeriesControl) -> Result<f64> {
    kummer_1f1_ln(a, b, x, ctrl).map(f64::exp)
}

/// Natural logarithm of `₁F₁(a; b; x)` for `a > 0`, `b > 0`, `x >= 0`.
///
/// Sums `Σ_l (a)_l / (b)_l · x^l / l!` by forward term recursion. With these
/// argument signs every term is positive, so the sum is accumulated in a
/// rescaled representation instead of being exponentiated.
pub fn kummer_1f1_ln(a: f64, b: f64, x: f64, ctrl: &SeriesControl) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(domain(
            "kummer_1f1",
            format!("a must be positive and finite, got {a}"),
        ));
    }
    if !(b > 0.0) || !b.is_finite() {
        return Err(domain(
            "kummer_1f1",
            format!("b must be positive and finite, got {b}"),
        ));
    }
    if !(x >= 0.0) || !x.is_finite() {
        return Err(domain(
            "kummer_1f1",
            format!("x must be nonnegative and finite, got {x}"),
        ));
    }
    if x == 0.0 {
        return Ok(0.0);
    }

    let mut sum = ScaledSum::starting_at(0.0);
    let mut term = 1.0;
    let mut largest = 1.0f64;
    let mut small_run = 0;
    for l in 0..ctrl.max_terms() {
        let lf = l as f64;
        let next = term * (a + lf) * x / ((b + lf) * (lf + 1.0));
        let decreasing = next < term;
        term = sum.add_scaled(next);
        largest = largest.max(term);
        if decreasing && term <= ctrl.rel_tol() * sum.relative() {
            small_run += 1;
            if small_run >= ctrl.consecutive_small() {
                return Ok(sum.ln());
            }
        } else {
            small_run = 0;
        }
    }
    Err(Error::Convergence {
        func: "kummer_1f1",
        terms: ctrl.max_terms(),
        largest_term: largest,
        cancellation: 1.0,
    })
}
