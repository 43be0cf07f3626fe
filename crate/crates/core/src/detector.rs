//! Energy-detector performance metrics.
//!
//! The test statistic of a radiometer with time-bandwidth product `u` is
//! central chi-square with `2u` degrees of freedom when only noise is
//! present, and noncentral chi-square with noncentrality `2γ` when a signal
//! at SNR `γ` is present. Hence
//!
//! ```text
//! P_f = Γ(u, λ/2) / Γ(u)          P_d(γ) = Q_u(√(2γ), √λ)
//! ```
//!
//! Over Weibull fading the detection probability is averaged over the SNR
//! density. Two independent evaluators are provided: the closed-form series
//! ([`avg_pd_weibull_series`]) and direct numerical integration
//! ([`avg_pd_weibull_quadrature`]). [`avg_pd`] uses the series and falls
//! back to quadrature when the series cannot deliver full accuracy.

use serde::{Deserialize, Serialize};

use crate::channel::{weibull_constant_a, WeibullChannel};
use crate::error::{domain, Error, Result};
use crate::quadrature;
use crate::specfun::gamma::ln_gamma_pos;
use crate::specfun::{
    clamp_probability, inv_reg_upper_gamma, kummer_1f1_ln, marcum_q, reg_upper_gamma,
    CompensatedSum, SeriesControl,
};

/// Default absolute tolerance of the quadrature evaluator.
pub const DEFAULT_QUAD_TOL: f64 = 1e-10;

/// Integrand evaluation budget of the quadrature evaluator.
pub const QUAD_MAX_EVALS: usize = 1_000_000;

/// Radiometer parameters: time-bandwidth product `u` and threshold `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    u: u32,
    lambda: f64,
}

impl DetectorConfig {
    pub fn new(u: u32, lambda: f64) -> Result<Self> {
        if u == 0 {
            return Err(domain(
                "DetectorConfig",
                "time-bandwidth product u must be at least 1",
            ));
        }
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(domain(
                "DetectorConfig",
                format!("threshold must be positive and finite, got {lambda}"),
            ));
        }
        Ok(Self { u, lambda })
    }

    /// Detector whose threshold yields the false-alarm probability `pf`.
    pub fn for_false_alarm(u: u32, pf: f64) -> Result<Self> {
        Self::new(u, threshold_for_pf(u, pf)?)
    }

    pub fn u(&self) -> u32 {
        self.u
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// Which evaluator produced an average detection probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Series,
    Quadrature,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Series => "series",
            Method::Quadrature => "quadrature",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Average detection probability together with evaluation diagnostics.
///
/// `terms_used` counts series terms for [`Method::Series`] and integrand
/// evaluations for [`Method::Quadrature`]. `est_error` is the magnitude of
/// the first omitted series term (a heuristic, not a bound) or the
/// quadrature error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AvgPdResult {
    pub value: f64,
    pub terms_used: usize,
    pub method: Method,
    pub est_error: f64,
}

/// `P_f = Γ(u, λ/2) / Γ(u)`.
pub fn prob_false_alarm(cfg: &DetectorConfig) -> Result<f64> {
    reg_upper_gamma(cfg.u as f64, 0.5 * cfg.lambda)
}

/// Threshold `λ` achieving the false-alarm probability `pf_target`.
pub fn threshold_for_pf(u: u32, pf_target: f64) -> Result<f64> {
    if u == 0 {
        return Err(domain(
            "threshold_for_pf",
            "time-bandwidth product u must be at least 1",
        ));
    }
    if !(pf_target > 0.0 && pf_target < 1.0) {
        return Err(domain(
            "threshold_for_pf",
            format!("target false-alarm probability must lie in (0, 1), got {pf_target}"),
        ));
    }
    Ok(2.0 * inv_reg_upper_gamma(u as f64, pf_target)?)
}

/// Detection probability in AWGN at linear SNR `gamma`:
/// `Q_u(√(2γ), √λ)`.
pub fn prob_detection_awgn(cfg: &DetectorConfig, gamma: f64) -> Result<f64> {
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(domain(
            "prob_detection_awgn",
            format!("SNR must be nonnegative and finite, got {gamma}"),
        ));
    }
    marcum_q(cfg.u, (2.0 * gamma).sqrt(), cfg.lambda.sqrt())
}

/// `P_m = 1 - P_d`.
pub fn prob_missed(pd: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&pd) {
        return Err(domain(
            "prob_missed",
            format!("detection probability must lie in [0, 1], got {pd}"),
        ));
    }
    Ok(1.0 - pd)
}

/// Average detection probability over Weibull fading from the closed-form
/// series
///
/// ```text
/// P̄_d = Σ_{l=0}^{u-1} λ^l e^{-λ/2} / (l! 2^l)
///     + Σ_{l≥0} (-1)^l 𝒜^l λ^u Γ(la/2 + 1) ₁F₁(la/2 + 1; u + 1; λ/2)
///                / (l! u! 2^u γ̄^{la/2} e^{λ/2})
/// ```
///
/// with `𝒜 = [Γ(1 + 2/a)]^{a/2}`. Term magnitudes are built in the log
/// domain and combined by compensated summation. Summation stops once
/// `consecutive_small` successive, decreasing terms fall below
/// `rel_tol · |partial sum|`.
///
/// The second sum alternates. At low `γ̄` (or for `a > 2`, where it is only
/// asymptotic) its terms grow before they shrink, and rounding in the
/// largest term swamps the result. Whenever the largest term exceeds
/// `max_cancellation` times the result a [`Error::Convergence`] is returned
/// and the caller should integrate numerically instead.
pub fn avg_pd_weibull_series(
    cfg: &DetectorConfig,
    ch: &WeibullChannel,
    ctrl: &SeriesControl,
) -> Result<AvgPdResult> {
    if ctrl.max_terms() < 10 {
        return Err(domain(
            "avg_pd_weibull_series",
            "series control must allow at least 10 terms",
        ));
    }
    let u = cfg.u as f64;
    let lambda = cfg.lambda;
    let half_lambda = 0.5 * lambda;
    let a = ch.a();
    let half_a = 0.5 * a;
    let ln_a_const = weibull_constant_a(a)?.ln();
    let ln_gamma_bar = ch.gamma_bar().ln();
    let ln_lambda = lambda.ln();
    let hyper_ctrl = SeriesControl::default()
        .with_rel_tol(1e-17)?
        .with_max_terms(1_000_000)?;

    let mut sum = CompensatedSum::default();

    // Σ_{l<u} λ^l e^{-λ/2} / (l! 2^l)
    for l in 0..cfg.u {
        let lf = l as f64;
        let ln_term =
            lf * (ln_lambda - std::f64::consts::LN_2) - half_lambda - ln_gamma_pos(lf + 1.0);
        sum.add(ln_term.exp());
    }

    let ln_common =
        u * ln_lambda - ln_gamma_pos(u + 1.0) - u * std::f64::consts::LN_2 - half_lambda;
    let ln_term = |l: usize| -> Result<f64> {
        let lf = l as f64;
        let s = lf * half_a + 1.0;
        Ok(
            lf * ln_a_const - lf * half_a * ln_gamma_bar + ln_gamma_pos(s) - ln_gamma_pos(lf + 1.0)
                + kummer_1f1_ln(s, u + 1.0, half_lambda, &hyper_ctrl)?
                + ln_common,
        )
    };

    let fail = |terms: usize, largest: f64, value: f64| Error::Convergence {
        func: "avg_pd_weibull_series",
        terms,
        largest_term: largest,
        cancellation: if value != 0.0 {
            largest / value.abs()
        } else {
            f64::INFINITY
        },
    };

    let mut largest = 0.0f64;
    let mut previous = f64::INFINITY;
    let mut small_run = 0;
    let mut l = 0usize;
    loop {
        if l >= ctrl.max_terms() {
            return Err(fail(l, largest, sum.value()));
        }
        let magnitude = ln_term(l)?.exp();
        if !magnitude.is_finite() {
            return Err(fail(l, f64::INFINITY, sum.value()));
        }
        sum.add(if l.is_multiple_of(2) {
            magnitude
        } else {
            -magnitude
        });
        largest = largest.max(magnitude);
        l += 1;
        // The result is a probability, so a term this large already
        // guarantees the cancellation limit is broken.
        if largest > ctrl.max_cancellation() {
            return Err(fail(l, largest, sum.value()));
        }
        if magnitude < previous && magnitude <= ctrl.rel_tol() * sum.value().abs() {
            small_run += 1;
            if small_run >= ctrl.consecutive_small() {
                break;
            }
        } else {
            small_run = 0;
        }
        previous = magnitude;
    }

    let raw = sum.value();
    if largest > ctrl.max_cancellation() * raw.abs() {
        return Err(fail(l, largest, raw));
    }
    let value = clamp_probability("avg_pd_weibull_series", raw)?;
    let est_error = ln_term(l)?.exp();
    Ok(AvgPdResult {
        value,
        terms_used: l,
        method: Method::Series,
        est_error,
    })
}

/// Average detection probability over Weibull fading by numerical
/// integration of `∫ Q_u(√(2γ), √λ) p_γ(γ) dγ`.
///
/// The substitution `t = [γ Γ(1 + 2/a) / γ̄]^{a/2}` turns the fading weight
/// into `e^{-t}`, which keeps the integrand bounded for every `a` (the SNR
/// density itself diverges at the origin when `a < 2`). The range is cut at
/// `T = ln(10 / abs_tol)`; the remaining tail is bracketed by the
/// integrand's monotonicity and its midpoint added to the result.
pub fn avg_pd_weibull_quadrature(
    cfg: &DetectorConfig,
    ch: &WeibullChannel,
    abs_tol: f64,
) -> Result<AvgPdResult> {
    if !(abs_tol > 0.0) || !abs_tol.is_finite() {
        return Err(domain(
            "avg_pd_weibull_quadrature",
            format!("abs_tol must be positive, got {abs_tol}"),
        ));
    }
    let beta = cfg.lambda.sqrt();
    let mut failure: Option<Error> = None;
    let mut pd_at = |t: f64| -> f64 {
        let gamma = ch.snr_from_exponential(t);
        match marcum_q(cfg.u, (2.0 * gamma).sqrt(), beta) {
            Ok(q) => q,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        }
    };

    let cutoff = (10.0 / abs_tol).ln().max(1.0);
    let breaks = quadrature_breaks(cfg, ch, cutoff);
    let integral = quadrature::integrate_with_breaks(
        |t| pd_at(t) * (-t).exp(),
        &breaks,
        0.5 * abs_tol,
        QUAD_MAX_EVALS,
    );
    let tail_lo = pd_at(cutoff) * (-cutoff).exp();
    let tail_hi = (-cutoff).exp();
    if let Some(e) = failure {
        return Err(e);
    }
    let integral = integral?;
    let raw = integral.value + 0.5 * (tail_lo + tail_hi);
    let est_error = integral.abs_err + 0.5 * (tail_hi - tail_lo);
    Ok(AvgPdResult {
        value: clamp_probability("avg_pd_weibull_quadrature", raw)?,
        terms_used: integral.evals + 1,
        method: Method::Quadrature,
        est_error,
    })
}

// At high average SNR the detection probability jumps from P_f to ~1 within
// a tiny t-interval around t*, where the instantaneous SNR reaches λ/2.
// Seed the integrator with decades below the cutoff and a bracket around t*.
fn quadrature_breaks(cfg: &DetectorConfig, ch: &WeibullChannel, cutoff: f64) -> Vec<f64> {
    let mut breaks = vec![0.0, cutoff];
    let mut t = cutoff;
    for _ in 0..16 {
        t *= 0.1;
        breaks.push(t);
    }
    let t_star = (0.5 * cfg.lambda / ch.snr_scale()).powf(0.5 * ch.a());
    for factor in [0.25, 0.5, 1.0, 2.0, 4.0] {
        let b = t_star * factor;
        if b > 0.0 && b < cutoff {
            breaks.push(b);
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * y.abs().max(1e-300));
    breaks
}

/// Average detection probability: the closed-form series where it is
/// numerically sound, numerical integration otherwise.
pub fn avg_pd(
    cfg: &DetectorConfig,
    ch: &WeibullChannel,
    ctrl: &SeriesControl,
) -> Result<AvgPdResult> {
    match avg_pd_weibull_series(cfg, ch, ctrl) {
        Ok(r) => Ok(r),
        Err(Error::Convergence { .. }) | Err(Error::Accuracy { .. }) => {
            avg_pd_weibull_quadrature(cfg, ch, DEFAULT_QUAD_TOL)
        }
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg_pf(u: u32, pf: f64) -> DetectorConfig {
        DetectorConfig::for_false_alarm(u, pf).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(DetectorConfig::new(0, 1.0).is_err());
        assert!(DetectorConfig::new(1, 0.0).is_err());
        assert!(DetectorConfig::new(1, f64::NAN).is_err());
        assert!(DetectorConfig::for_false_alarm(3, 1.0).is_err());
    }

    #[test]
    fn false_alarm_values() {
        let cfg = DetectorConfig::new(1, 2.0 * 10f64.ln()).unwrap();
        assert!((prob_false_alarm(&cfg).unwrap() - 0.1).abs() < 1e-15);
        let tiny = DetectorConfig::new(4, 1e-300).unwrap();
        assert_eq!(prob_false_alarm(&tiny).unwrap(), 1.0);
        let cfg = cfg_pf(5, 0.1);
        assert!((prob_false_alarm(&cfg).unwrap() - 0.1).abs() < 1e-10);
    }

    #[test]
    fn threshold_values() {
        assert!((threshold_for_pf(1, 0.1).unwrap() - 2.0 * 10f64.ln()).abs() < 1e-11);
        for &pf in &[0.1f64, 0.2] {
            let lambda = threshold_for_pf(5, pf).unwrap();
            let back = prob_false_alarm(&DetectorConfig::new(5, lambda).unwrap()).unwrap();
            assert!((back - pf).abs() < 1e-10);
        }
        assert!(threshold_for_pf(5, 0.0).is_err());
        assert!(threshold_for_pf(5, 1.0).is_err());
        assert!(threshold_for_pf(0, 0.5).is_err());
    }

    #[test]
    fn awgn_detection_limits() {
        for u in 1..=10 {
            for &pf in &[0.01f64, 0.1, 0.5] {
                let cfg = cfg_pf(u, pf);
                let pd0 = prob_detection_awgn(&cfg, 0.0).unwrap();
                assert!((pd0 - prob_false_alarm(&cfg).unwrap()).abs() < 1e-10);
                assert!((1.0 - prob_detection_awgn(&cfg, 1e4).unwrap()).abs() < 1e-9);
            }
        }
        assert!(prob_detection_awgn(&cfg_pf(2, 0.1), -1.0).is_err());
    }

    #[test]
    fn missed_detection() {
        assert_eq!(prob_missed(1.0).unwrap(), 0.0);
        assert_eq!(prob_missed(0.0).unwrap(), 1.0);
        assert!((prob_missed(0.59).unwrap() - 0.41).abs() < 1e-15);
        assert!(prob_missed(1.2).is_err());
    }

    #[test]
    fn series_matches_quadrature_at_moderate_snr() {
        let cfg = cfg_pf(5, 0.1);
        let ch = WeibullChannel::from_db(2.5, 10.0).unwrap();
        let s = avg_pd_weibull_series(&cfg, &ch, &SeriesControl::default()).unwrap();
        let q = avg_pd_weibull_quadrature(&cfg, &ch, DEFAULT_QUAD_TOL).unwrap();
        assert_eq!(s.method, Method::Series);
        assert_eq!(q.method, Method::Quadrature);
        assert!(
            (s.value - q.value).abs() < 1e-8,
            "{} vs {}",
            s.value,
            q.value
        );
    }

    #[test]
    fn series_tends_to_one_at_high_snr() {
        let cfg = cfg_pf(5, 0.1);
        let ch = WeibullChannel::new(1.5, 1e12).unwrap();
        let s = avg_pd_weibull_series(&cfg, &ch, &SeriesControl::default()).unwrap();
        assert!((s.value - 1.0).abs() < 1e-5);
    }

    #[test]
    fn series_refuses_near_zero_snr() {
        // The alternating terms scale like γ̄^{-la/2}; at γ̄ → 0 the series
        // is numerically meaningless and must report failure.
        let cfg = cfg_pf(5, 0.1);
        let ch = WeibullChannel::new(1.0, 1e-12).unwrap();
        assert!(matches!(
            avg_pd_weibull_series(&cfg, &ch, &SeriesControl::default()),
            Err(Error::Convergence { .. })
        ));
    }

    #[test]
    fn dispatch_falls_back_to_quadrature() {
        let cfg = cfg_pf(5, 0.1);
        let ch = WeibullChannel::new(2.0, 1e-12).unwrap();
        let r = avg_pd(&cfg, &ch, &SeriesControl::default()).unwrap();
        assert_eq!(r.method, Method::Quadrature);
        assert!((r.value - 0.1).abs() < 1e-8);
    }

    #[test]
    fn dispatch_keeps_series_where_it_converges() {
        let cfg = cfg_pf(5, 0.2);
        let ch = WeibullChannel::from_db(1.0, 25.0).unwrap();
        let ctrl = SeriesControl::default();
        let direct = avg_pd_weibull_series(&cfg, &ch, &ctrl).unwrap();
        assert_eq!(avg_pd(&cfg, &ch, &ctrl).unwrap(), direct);
    }

    #[test]
    fn quadrature_limits() {
        let cfg = cfg_pf(5, 0.2);
        let ch = WeibullChannel::new(1.0, 1e-12).unwrap();
        let r = avg_pd_weibull_quadrature(&cfg, &ch, 1e-10).unwrap();
        assert!((r.value - 0.2).abs() < 1e-10);
        let open = DetectorConfig::new(5, 1e-300).unwrap();
        let ch = WeibullChannel::from_db(0.75, 3.0).unwrap();
        let r = avg_pd_weibull_quadrature(&open, &ch, 1e-10).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10);
        assert!(avg_pd_weibull_quadrature(&open, &ch, 0.0).is_err());
    }

    #[test]
    fn series_rejects_tiny_budget() {
        let cfg = cfg_pf(5, 0.2);
        let ch = WeibullChannel::from_db(1.0, 10.0).unwrap();
        let ctrl = SeriesControl::default().with_max_terms(5).unwrap();
        assert!(matches!(
            avg_pd_weibull_series(&cfg, &ch, &ctrl),
            Err(Error::Domain { .. })
        ));
    }
}
