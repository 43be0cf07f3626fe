//! Weibull fading channel model.
//!
//! The instantaneous SNR `γ` of a Weibull-faded link with severity `a` and
//! average SNR `γ̄` has
//!
//! ```text
//! F(γ) = 1 - exp(-[γ Γ(1 + 2/a) / γ̄]^{a/2})
//! ```
//!
//! so `t = [γ Γ(1 + 2/a) / γ̄]^{a/2}` is a unit exponential variable. That
//! change of variables drives both the sampler and the quadrature used to
//! average detection probabilities. `a = 2` is Rayleigh fading (exponential
//! SNR) and `a = 1` gives an exponential envelope.

use rand::distr::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::specfun::gamma::ln_gamma_pos;

/// `[Γ(1 + 2/a)]^{a/2}`, the constant that appears in the closed-form
/// average detection probability. Equals 1 at `a = 2`.
pub fn weibull_constant_a(a: f64) -> Result<f64> {
    check_severity(a)?;
    if a == 2.0 {
        return Ok(1.0);
    }
    Ok((0.5 * a * ln_gamma_pos(1.0 + 2.0 / a)).exp())
}

fn check_severity(a: f64) -> Result<()> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(domain(
            "WeibullChannel",
            format!("fading severity a must be positive and finite, got {a}"),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeibullChannel {
    a: f64,
    gamma_bar: f64,
    omega: Option<f64>,
}

impl WeibullChannel {
    /// Channel with fading severity `a` and linear average SNR `gamma_bar`.
    pub fn new(a: f64, gamma_bar: f64) -> Result<Self> {
        check_severity(a)?;
        if !(gamma_bar > 0.0) || !gamma_bar.is_finite() {
            return Err(domain(
                "WeibullChannel",
                format!("average SNR must be positive and finite, got {gamma_bar}"),
            ));
        }
        Ok(Self {
            a,
            gamma_bar,
            omega: None,
        })
    }

    /// Channel with the average SNR given in dB.
    pub fn from_db(a: f64, snr_db: f64) -> Result<Self> {
        Self::new(a, crate::db_to_linear(snr_db))
    }

    /// Sets the mean envelope power `Ω` used by the envelope-domain functions.
    pub fn with_omega(mut self, omega: f64) -> Result<Self> {
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(domain(
                "WeibullChannel",
                format!("omega must be positive and finite, got {omega}"),
            ));
        }
        self.omega = Some(omega);
        Ok(self)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn gamma_bar(&self) -> f64 {
        self.gamma_bar
    }

    pub fn omega(&self) -> Option<f64> {
        self.omega
    }

    fn gamma_factor(&self) -> f64 {
        ln_gamma_pos(1.0 + 2.0 / self.a).exp()
    }

    /// `γ̄ / Γ(1 + 2/a)`: the SNR corresponding to a unit exponential draw.
    pub fn snr_scale(&self) -> f64 {
        self.gamma_bar / self.gamma_factor()
    }

    /// Maps a unit-exponential variate `t` to the SNR `snr_scale · t^{2/a}`.
    pub fn snr_from_exponential(&self, t: f64) -> f64 {
        self.snr_scale() * t.powf(2.0 / self.a)
    }

    /// Inverse CDF evaluated at the survival probability `u ∈ (0, 1)`, i.e.
    /// the SNR whose CDF value is `1 - u`.
    pub fn snr_from_uniform(&self, u: f64) -> f64 {
        self.snr_from_exponential(-u.ln())
    }

    fn require_omega(&self, func: &'static str) -> Result<f64> {
        self.omega
            .ok_or_else(|| domain(func, "envelope-domain evaluation needs omega"))
    }

    /// Envelope density
    /// `a [Γ(1+2/a)/Ω]^{a/2} r^{a-1} exp(-[r² Γ(1+2/a) / Ω]^{a/2})`.
    pub fn pdf_envelope(&self, r: f64) -> Result<f64> {
        let omega = self.require_omega("pdf_envelope")?;
        check_nonnegative("pdf_envelope", r)?;
        let a = self.a;
        let g = self.gamma_factor();
        if r == 0.0 {
            return Ok(zero_point_density(a - 1.0, a * (g / omega).powf(0.5 * a)));
        }
        let ln_p = a.ln() + 0.5 * a * (g / omega).ln() + (a - 1.0) * r.ln()
            - (r * r * g / omega).powf(0.5 * a);
        Ok(ln_p.exp())
    }

    /// Envelope CDF `1 - exp(-[r² Γ(1+2/a) / Ω]^{a/2})`.
    pub fn cdf_envelope(&self, r: f64) -> Result<f64> {
        let omega = self.require_omega("cdf_envelope")?;
        check_nonnegative("cdf_envelope", r)?;
        let z = (r * r * self.gamma_factor() / omega).powf(0.5 * self.a);
        Ok(-(-z).exp_m1())
    }

    /// SNR density
    /// `(a/2) [Γ(1+2/a)/γ̄]^{a/2} γ^{a/2-1} exp(-[γ Γ(1+2/a)/γ̄]^{a/2})`.
    ///
    /// Diverges at `γ = 0` when `a < 2`, in which case `+inf` is returned.
    pub fn pdf_snr(&self, gamma: f64) -> Result<f64> {
        check_nonnegative("pdf_snr", gamma)?;
        let half_a = 0.5 * self.a;
        let rate = self.gamma_factor() / self.gamma_bar;
        if gamma == 0.0 {
            return Ok(zero_point_density(half_a - 1.0, half_a * rate.powf(half_a)));
        }
        let ln_p = half_a.ln() + half_a * rate.ln() + (half_a - 1.0) * gamma.ln()
            - (gamma * rate).powf(half_a);
        Ok(ln_p.exp())
    }

    /// SNR CDF `1 - exp(-[γ Γ(1+2/a)/γ̄]^{a/2})`.
    pub fn cdf_snr(&self, gamma: f64) -> Result<f64> {
        check_nonnegative("cdf_snr", gamma)?;
        let z = (gamma * self.gamma_factor() / self.gamma_bar).powf(0.5 * self.a);
        Ok(-(-z).exp_m1())
    }

    /// Draws one instantaneous SNR by inverting the CDF at an open-interval
    /// uniform variate.
    pub fn sample_snr<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.sample(Open01);
        self.snr_from_uniform(u)
    }
}

/// `E[Rⁿ] = Γ(1 + n/a)` for the unit-scale envelope.
pub fn envelope_moment(a: f64, n: u32) -> Result<f64> {
    check_severity(a)?;
    if n == 0 {
        return Err(domain("envelope_moment", "moment order must be at least 1"));
    }
    Ok(ln_gamma_pos(1.0 + n as f64 / a).exp())
}

fn check_nonnegative(func: &'static str, v: f64) -> Result<()> {
    if !(v >= 0.0) {
        return Err(domain(
            func,
            format!("argument must be nonnegative, got {v}"),
        ));
    }
    Ok(())
}

// Density of the form c·x^p·e^{...} evaluated at x = 0.
fn zero_point_density(power: f64, coeff: f64) -> f64 {
    if power > 0.0 {
        0.0
    } else if power == 0.0 {
        coeff
    } else {
        f64::INFINITY
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{E, LN_2, PI};

    #[test]
    fn constant_a_special_values() {
        assert_eq!(weibull_constant_a(2.0).unwrap(), 1.0);
        assert!((weibull_constant_a(1.0).unwrap() - 2f64.sqrt()).abs() < 1e-14);
        assert!((weibull_constant_a(4.0).unwrap() - PI / 4.0).abs() < 1e-14);
        assert!(weibull_constant_a(0.0).is_err());
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(WeibullChannel::new(-1.0, 1.0).is_err());
        assert!(WeibullChannel::new(1.0, 0.0).is_err());
        assert!(WeibullChannel::new(1.0, f64::INFINITY).is_err());
        assert!(WeibullChannel::new(1.0, 1.0)
            .unwrap()
            .with_omega(0.0)
            .is_err());
        let ch = WeibullChannel::new(1.5, 2.0).unwrap();
        assert!(ch.pdf_envelope(1.0).is_err());
        assert!(ch.cdf_envelope(1.0).is_err());
        assert!(ch.pdf_snr(-1.0).is_err());
    }

    #[test]
    fn rayleigh_reduction_is_exponential() {
        let ch = WeibullChannel::new(2.0, 1.0).unwrap();
        for i in 0..200 {
            let g = 0.05 * i as f64;
            let expected = (-g).exp();
            assert!((ch.pdf_snr(g).unwrap() - expected).abs() <= 1e-14 * expected.max(1e-300));
        }
        assert!((ch.cdf_snr(LN_2).unwrap() - 0.5).abs() < 1e-15);
        let ch = WeibullChannel::new(2.0, 7.5).unwrap();
        for i in 0..200 {
            let g = 0.3 * i as f64;
            let expected = (-g / 7.5).exp() / 7.5;
            assert!((ch.pdf_snr(g).unwrap() - expected).abs() <= 1e-14 * expected);
        }
    }

    #[test]
    fn exponential_envelope_reduction() {
        let ch = WeibullChannel::new(1.0, 3.0).unwrap();
        for i in 0..100 {
            let g = 0.2 * i as f64;
            let expected = 1.0 - (-(2.0 * g / 3.0).sqrt()).exp();
            assert!((ch.cdf_snr(g).unwrap() - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn envelope_special_values() {
        let ch = WeibullChannel::new(2.0, 1.0)
            .unwrap()
            .with_omega(1.0)
            .unwrap();
        for &r in &[0.0f64, 0.3, 1.0, 2.2] {
            let expected = 2.0 * r * (-r * r).exp();
            assert!((ch.pdf_envelope(r).unwrap() - expected).abs() < 1e-15);
        }
        assert!((ch.cdf_envelope(1.0).unwrap() - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        assert_eq!(ch.cdf_envelope(0.0).unwrap(), 0.0);
        let ch = WeibullChannel::new(1.7, 1.0)
            .unwrap()
            .with_omega(1.3)
            .unwrap();
        assert_eq!(ch.pdf_envelope(0.0).unwrap(), 0.0);
    }

    #[test]
    fn envelope_pdf_is_derivative_of_cdf() {
        let ch = WeibullChannel::new(3.0, 1.0)
            .unwrap()
            .with_omega(2.0)
            .unwrap();
        let h = 1e-5;
        let fd =
            (ch.cdf_envelope(1.0 + h).unwrap() - ch.cdf_envelope(1.0 - h).unwrap()) / (2.0 * h);
        assert!((ch.pdf_envelope(1.0).unwrap() - fd).abs() < 1e-9);
    }

    #[test]
    fn envelope_and_snr_cdfs_agree_under_change_of_variables() {
        let omega = 1.7;
        let ch = WeibullChannel::new(2.8, 4.0)
            .unwrap()
            .with_omega(omega)
            .unwrap();
        for &r in &[0.1f64, 0.5, 1.0, 1.9] {
            let g = ch.gamma_bar() * r * r / omega;
            assert!((ch.cdf_envelope(r).unwrap() - ch.cdf_snr(g).unwrap()).abs() < 1e-15);
        }
    }

    #[test]
    fn moments() {
        assert!((envelope_moment(1.0, 1).unwrap() - 1.0).abs() < 1e-15);
        assert!((envelope_moment(2.0, 2).unwrap() - 1.0).abs() < 1e-15);
        assert!(envelope_moment(2.0, 0).is_err());
    }

    #[test]
    fn uniform_at_inverse_e_maps_to_scale() {
        let ch = WeibullChannel::new(1.3, 5.0).unwrap();
        let g = ch.snr_from_uniform(1.0 / E);
        assert!((g - ch.snr_scale()).abs() < 1e-14 * g);
    }

    #[test]
    fn zero_snr_density_by_regime() {
        assert_eq!(
            WeibullChannel::new(3.0, 1.0).unwrap().pdf_snr(0.0).unwrap(),
            0.0
        );
        assert_eq!(
            WeibullChannel::new(2.0, 4.0).unwrap().pdf_snr(0.0).unwrap(),
            0.25
        );
        assert!(WeibullChannel::new(1.0, 1.0)
            .unwrap()
            .pdf_snr(0.0)
            .unwrap()
            .is_infinite());
    }

    proptest! {
        #[test]
        fn inverse_cdf_round_trip(a in 0.3f64..8.0, gb in 1e-3f64..1e3, u in 1e-12f64..1.0) {
            let ch = WeibullChannel::new(a, gb).unwrap();
            let g = ch.snr_from_uniform(u);
            let back = 1.0 - ch.cdf_snr(g).unwrap();
            prop_assert!((back - u).abs() <= 1e-12 * u.max(1e-3));
        }

        #[test]
        fn cdf_is_monotone(a in 0.3f64..8.0, gb in 1e-3f64..1e3, g1 in 0.0f64..1e3, g2 in 0.0f64..1e3) {
            let ch = WeibullChannel::new(a, gb).unwrap();
            let (lo, hi) = if g1 <= g2 { (g1, g2) } else { (g2, g1) };
            let (c_lo, c_hi) = (ch.cdf_snr(lo).unwrap(), ch.cdf_snr(hi).unwrap());
            prop_assert!(c_lo <= c_hi);
            prop_assert!((0.0..=1.0).contains(&c_lo) && (0.0..=1.0).contains(&c_hi));
        }
    }
}
