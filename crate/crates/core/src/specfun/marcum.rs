use super::gamma::ln_gamma_pos;
use super::incgamma::reg_upper_gamma;
use super::{clamp_probability, CompensatedSum, SeriesControl};
use crate::error::{domain, Error, Result};

// Beyond this separation of α and β the result is within Φ(-9.5) < 1e-20
// of its limit.
const SATURATION_GAP: f64 = 9.5;

fn default_control() -> SeriesControl {
    SeriesControl::default()
        .with_max_terms(100_000)
        .expect("static control is valid")
}

/// Generalized Marcum Q-function `Q_u(α, β)` for integer order `u >= 1`.
///
/// See [`marcum_q_with`]; this uses the default truncation control with a
/// term budget of 100 000.
pub fn marcum_q(u: u32, alpha: f64, beta: f64) -> Result<f64> {
    marcum_q_with(u, alpha, beta, &default_control())
}

/// Generalized Marcum Q-function via its Poisson-mixture representation
///
/// ```text
/// Q_u(α, β) = Σ_k e^{-α²/2} (α²/2)^k / k! · Q(u + k, β²/2)
/// ```
///
/// where `Q` is the regularized upper incomplete gamma function. Summation
/// starts at the mode of the Poisson weights and walks outward in both
/// directions; the incomplete gamma factors follow from a single direct
/// evaluation through `Q(s+1, x) = Q(s, x) + x^s e^{-x} / Γ(s+1)`. Each
/// direction stops once the geometric bound on the remaining Poisson mass
/// falls below `rel_tol` times the partial sum (floored at `1e-4`).
pub fn marcum_q_with(u: u32, alpha: f64, beta: f64, ctrl: &SeriesControl) -> Result<f64> {
    if u == 0 {
        return Err(domain("marcum_q", "order u must be at least 1"));
    }
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(domain(
            "marcum_q",
            format!("alpha must be nonnegative and finite, got {alpha}"),
        ));
    }
    if !(beta >= 0.0) || beta.is_nan() {
        return Err(domain(
            "marcum_q",
            format!("beta must be nonnegative, got {beta}"),
        ));
    }
    let uf = u as f64;
    if beta == 0.0 {
        return Ok(1.0);
    }
    if beta.is_infinite() {
        return Ok(0.0);
    }
    let x = 0.5 * beta * beta;
    if alpha == 0.0 {
        return reg_upper_gamma(uf, x);
    }
    // ‖Z + μ‖ >= |Z₁ + α| gives 1 - Q <= Φ(β - α).
    if alpha - beta >= SATURATION_GAP {
        return Ok(1.0);
    }
    // ‖Z + μ‖ <= ‖Z‖ + α gives Q <= Q_u(0, β - α).
    if beta > alpha {
        let gap = beta - alpha;
        if reg_upper_gamma(uf, 0.5 * gap * gap)? < 1e-20 {
            return Ok(0.0);
        }
    }

    let nu = 0.5 * alpha * alpha;
    let ln_nu = nu.ln();
    let ln_x = x.ln();
    let mode = nu.floor();
    // Poisson mass of x^{s} e^{-x} / Γ(s+1) for s = u + k.
    let ln_step = |k: f64| -x + (uf + k) * ln_x - ln_gamma_pos(uf + k + 1.0);
    let floor_tol = |sum: f64| ctrl.rel_tol() * sum.max(1e-4);

    let w_mode = (-nu + mode * ln_nu - ln_gamma_pos(mode + 1.0)).exp();
    let g_mode = reg_upper_gamma(uf + mode, x)?;

    let mut sum = CompensatedSum::default();
    sum.add(w_mode * g_mode);
    let mut terms = 1usize;

    // Upward: k = mode + 1, mode + 2, ...
    let (mut k, mut w, mut g) = (mode, w_mode, g_mode);
    loop {
        g = (g + ln_step(k).exp()).min(1.0);
        k += 1.0;
        w *= nu / k;
        sum.add(w * g);
        terms += 1;
        let ratio = nu / (k + 1.0);
        if ratio < 1.0 && w * ratio / (1.0 - ratio) <= floor_tol(sum.value()) {
            break;
        }
        if terms >= ctrl.max_terms() {
            return Err(budget_exhausted(ctrl, w));
        }
    }

    // Downward: k = mode - 1, ..., 0.
    let (mut k, mut w, mut g) = (mode, w_mode, g_mode);
    while k > 0.0 {
        k -= 1.0;
        g = (g - ln_step(k).exp()).max(0.0);
        w *= (k + 1.0) / nu;
        sum.add(w * g);
        terms += 1;
        let ratio = k / nu;
        if ratio < 1.0 && w * ratio / (1.0 - ratio) <= floor_tol(sum.value()) {
            break;
        }
        if terms >= ctrl.max_terms() {
            return Err(budget_exhausted(ctrl, w));
        }
    }

    clamp_probability("marcum_q", sum.value())
}

fn budget_exhausted(ctrl: &SeriesControl, last_weight: f64) -> Error {
    Error::Convergence {
        func: "marcum_q",
        terms: ctrl.max_terms(),
        largest_term: last_weight,
        cancellation: 1.0,
    }
}
