use super::gamma::ln_gamma_pos;
use crate::error::{domain, Error, Result};

const EPS: f64 = 1e-16;
const MAX_ITER: usize = 100_000;
const TINY: f64 = 1e-300;

/// Regularized upper incomplete gamma function `Q(u, x) = Γ(u, x) / Γ(u)`.
///
/// Power series for `x < u + 1`, Lentz continued fraction otherwise.
pub fn reg_upper_gamma(u: f64, x: f64) -> Result<f64> {
    if !(u > 0.0) || !u.is_finite() {
        return Err(domain(
            "reg_upper_gamma",
            format!("u must be positive and finite, got {u}"),
        ));
    }
    if !(x >= 0.0) {
        return Err(domain(
            "reg_upper_gamma",
            format!("x must be nonnegative, got {x}"),
        ));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x == f64::INFINITY {
        return Ok(0.0);
    }
    let log_prefactor = u * x.ln() - x - ln_gamma_pos(u);
    let q = if x < u + 1.0 {
        1.0 - lower_series(u, x, log_prefactor)?
    } else {
        upper_fraction(u, x, log_prefactor)?
    };
    Ok(q.clamp(0.0, 1.0))
}

// P(u, x) = e^{-x} x^u / Γ(u+1) · Σ_n x^n / ((u+1)...(u+n))
fn lower_series(u: f64, x: f64, log_prefactor: f64) -> Result<f64> {
    let mut denom = u;
    let mut term = 1.0 / u;
    let mut sum = term;
    for _ in 0..MAX_ITER {
        denom += 1.0;
        term *= x / denom;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            return Ok(sum * log_prefactor.exp());
        }
    }
    Err(not_converged(sum))
}

// Q(u, x) = e^{-x} x^u / Γ(u) · 1/(x+1-u- 1·(1-u)/(x+3-u- ...)), modified Lentz.
fn upper_fraction(u: f64, x: f64, log_prefactor: f64) -> Result<f64> {
    let mut b = x + 1.0 - u;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - u);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            return Ok(log_prefactor.exp() * h);
        }
    }
    Err(not_converged(h))
}

fn not_converged(partial: f64) -> Error {
    Error::Convergence {
        func: "reg_upper_gamma",
        terms: MAX_ITER,
        largest_term: partial.abs(),
        cancellation: 1.0,
    }
}

/// Inverse of [`reg_upper_gamma`] in its second argument: the `x >= 0` with
/// `Q(u, x) = q`.
///
/// The root is bracketed by doubling and then refined by Illinois-style
/// false position with bisection as a safeguard.
pub fn inv_reg_upper_gamma(u: f64, q: f64) -> Result<f64> {
    if !(u > 0.0) || !u.is_finite() {
        return Err(domain(
            "inv_reg_upper_gamma",
            format!("u must be positive and finite, got {u}"),
        ));
    }
    if !(q > 0.0 && q <= 1.0) {
        return Err(domain(
            "inv_reg_upper_gamma",
            format!("q must lie in (0, 1], got {q}"),
        ));
    }
    if q == 1.0 {
        return Ok(0.0);
    }

    let f = |x: f64| reg_upper_gamma(u, x).map(|v| v - q);

    let mut lo = 0.0;
    let mut f_lo = 1.0 - q;
    let mut hi = u.max(1.0);
    let mut f_hi = f(hi)?;
    while f_hi > 0.0 {
        lo = hi;
        f_lo = f_hi;
        hi *= 2.0;
        f_hi = f(hi)?;
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }

    // Invariant: f_lo > 0 > f_hi.
    let mut side = 0i8;
    for _ in 0..400 {
        let width = hi - lo;
        if width <= 4.0 * f64::EPSILON * hi {
            break;
        }
        let mut x = hi - f_hi * width / (f_hi - f_lo);
        if !(x > lo && x < hi) || !x.is_finite() {
            x = lo + 0.5 * width;
        }
        let fx = f(x)?;
        if fx.abs() <= 1e-15 {
            return Ok(x);
        }
        if fx > 0.0 {
            lo = x;
            f_lo = fx;
            if side == 1 {
                f_hi *= 0.5;
            }
            side = 1;
        } else {
            hi = x;
            f_hi = fx;
            if side == -1 {
                f_lo *= 0.5;
            }
            side = -1;
        }
        // False position can stall on one side; force a bisection when the
        // bracket fails to halve.
        if hi - lo > 0.5 * width {
            let mid = lo + 0.5 * (hi - lo);
            let fm = f(mid)?;
            if fm > 0.0 {
                lo = mid;
                f_lo = fm;
            } else {
                hi = mid;
                f_hi = fm;
            }
            side = 0;
        }
    }
    Ok(if f_lo.abs() < f_hi.abs() { lo } else { hi })
}
