//! Modified Bessel function of the first kind and the ratio
//! `r_mu(x) = I_mu(x) / I_{mu-1}(x)`.
//!
//! Small arguments use the power series, summed in a rescaled form so the
//! partial sums never overflow. Large arguments use the Hankel expansion of
//! the exponentially scaled function `e^{-x} I_mu(x)`. The ratio is never
//! formed by dividing two Bessel values; it comes from the Gauss continued
//! fraction or from the two scaled expansions.

use crate::error::{domain, Error, Result};

/// Continued-fraction convergence tolerance for [`bessel_ratio`].
pub const RATIO_CF_TOL: f64 = 1e-15;
/// Iteration cap for the continued fraction.
pub const RATIO_CF_MAX_ITER: usize = 10_000;
/// Below this argument the ratio is taken from the power series.
pub const RATIO_SERIES_CUTOFF: f64 = 1e-3;

const LN_RESCALE: f64 = 280.0 * std::f64::consts::LN_10;
const RESCALE: f64 = 1e-280;

/// Order `mu > -1` of a modified Bessel function.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct BesselOrder(f64);

impl BesselOrder {
    pub fn new(mu: f64) -> Result<Self> {
        if !mu.is_finite() || mu <= -1.0 {
            return Err(domain(format!(
                "Bessel order must be finite and > -1, got {mu:?}"
            )));
        }
        Ok(BesselOrder(mu))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Argument beyond which `I_mu` switches from the power series to the
/// large-argument expansion.
pub fn series_crossover(order: BesselOrder) -> f64 {
    30.0 + 2.0 * order.0.abs()
}

/// `ln sum_k (x^2/4)^k / (k! (a)_k)` with `a = m + 1`, the normalized power
/// series of `I_m(x)`. Taking `a` rather than `m` keeps full relative
/// precision when `m` is close to -1. All terms are positive, so the sum is
/// accurate for any `x`; the cost grows linearly with `x`.
fn log_series_sum(a: f64, x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut log_scale = 0.0;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= q / (k * (a + (k - 1.0)));
        sum += term;
        if sum > 1e280 {
            sum *= RESCALE;
            term *= RESCALE;
            log_scale += LN_RESCALE;
        }
        // Bound the rest of the tail by a geometric series once terms decay.
        let next_ratio = q / ((k + 1.0) * (a + k));
        if next_ratio < 1.0 && term * next_ratio / (1.0 - next_ratio) <= 0.5 * f64::EPSILON * sum {
            break;
        }
    }
    sum.ln() + log_scale
}

fn log_bessel_series(mu: f64, x: f64) -> f64 {
    log_bessel_series_shifted(mu, mu + 1.0, x)
}

fn log_bessel_series_shifted(mu: f64, mu_plus_one: f64, x: f64) -> f64 {
    mu * (0.5 * x).ln() - libm::lgamma(mu_plus_one) + log_series_sum(mu_plus_one, x)
}

/// `ln(e^{-x} I_mu(x))` from the Hankel expansion, or `None` when the terms
/// start growing before they fall below machine precision.
fn hankel_log_scaled(mu: f64, x: f64) -> Option<f64> {
    let four_mu_sq = 4.0 * mu * mu;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    for k in 1..=500 {
        let odd = (2 * k - 1) as f64;
        let next = -term * (four_mu_sq - odd * odd) / (8.0 * k as f64 * x);
        if next == 0.0 {
            // Half-integer order: the expansion terminates and is exact.
            return Some(sum.ln() - 0.5 * (2.0 * std::f64::consts::PI * x).ln());
        }
        if next.abs() > term.abs() {
            return None;
        }
        sum += next;
        term = next;
        if term.abs() <= 0.25 * f64::EPSILON * sum.abs() {
            return if sum > 0.0 {
                Some(sum.ln() - 0.5 * (2.0 * std::f64::consts::PI * x).ln())
            } else {
                None
            };
        }
    }
    if sum > 0.0 && term.abs() <= 0.25 * f64::EPSILON * sum.abs() {
        Some(sum.ln() - 0.5 * (2.0 * std::f64::consts::PI * x).ln())
    } else {
        None
    }
}

fn log_bessel_large(mu: f64, x: f64) -> f64 {
    match hankel_log_scaled(mu, x) {
        Some(scaled) => scaled + x,
        // Order too large for the Hankel expansion at this argument.
        None => log_bessel_series(mu, x),
    }
}

/// `I_mu(x)` for `x >= 0`.
pub fn bessel_i(order: BesselOrder, x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(domain(format!("bessel_i requires x >= 0, got {x:?}")));
    }
    let mu = order.0;
    if x == 0.0 {
        return match mu {
            0.0 => Ok(1.0),
            m if m > 0.0 => Ok(0.0),
            _ => Err(Error::Overflow(format!(
                "I_{mu}(0) is infinite for negative order"
            ))),
        };
    }
    let value = log_bessel_i(order, x)?.exp();
    if value.is_infinite() {
        return Err(Error::Overflow(format!("I_{mu}({x}) exceeds f64 range")));
    }
    Ok(value)
}

/// `ln I_mu(x)` for `x > 0`. Finite for arguments far beyond the point where
/// `I_mu` itself overflows.
pub fn log_bessel_i(order: BesselOrder, x: f64) -> Result<f64> {
    if x.is_nan() || x <= 0.0 {
        return Err(domain(format!("log_bessel_i requires x > 0, got {x:?}")));
    }
    if x.is_infinite() {
        return Ok(f64::INFINITY);
    }
    let mu = order.0;
    if x <= series_crossover(order) {
        Ok(log_bessel_series(mu, x))
    } else {
        Ok(log_bessel_large(mu, x))
    }
}

/// `ln(e^{-x} I_mu(x))` where the caller also supplies `mu + 1` exactly, for
/// orders written as `nu/2 - 1` with small `nu`.
pub(crate) fn log_bessel_i_shifted_scaled(mu: f64, mu_plus_one: f64, x: f64) -> Result<f64> {
    let order = BesselOrder::new(mu)?;
    if x.is_nan() || x <= 0.0 {
        return Err(domain(format!("log_bessel_i requires x > 0, got {x:?}")));
    }
    if x.is_infinite() {
        // e^{-x} I_mu(x) ~ 1/sqrt(2 pi x) -> 0.
        return Ok(f64::NEG_INFINITY);
    }
    if x <= series_crossover(order) {
        Ok(log_bessel_series_shifted(mu, mu_plus_one, x) - x)
    } else {
        Ok(match hankel_log_scaled(mu, x) {
            Some(scaled) => scaled,
            None => log_bessel_series_shifted(mu, mu_plus_one, x) - x,
        })
    }
}

fn check_ratio_args(mu: f64, x: f64) -> Result<()> {
    if mu <= 0.0 {
        return Err(domain(format!(
            "Bessel ratio requires order > 0, got {mu:?}"
        )));
    }
    if x.is_nan() || x <= 0.0 {
        return Err(domain(format!("Bessel ratio requires x > 0, got {x:?}")));
    }
    Ok(())
}

fn ratio_series(mu: f64, x: f64) -> f64 {
    x / (2.0 * mu) * (log_series_sum(mu + 1.0, x) - log_series_sum(mu, x)).exp()
}

/// `I_mu / I_{mu-1}` as `1 / (2mu/x + 1 / (2(mu+1)/x + ...))`, modified Lentz.
fn ratio_continued_fraction(mu: f64, x: f64) -> Option<f64> {
    const TINY: f64 = 1e-300;
    let mut f = 2.0 * mu / x;
    let mut c = f;
    let mut d = 0.0;
    for j in 1..=RATIO_CF_MAX_ITER {
        let b = 2.0 * (mu + j as f64) / x;
        d += b;
        if d.abs() < TINY {
            d = TINY;
        }
        d = 1.0 / d;
        c = b + 1.0 / c;
        if c.abs() < TINY {
            c = TINY;
        }
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < RATIO_CF_TOL {
            return Some(1.0 / f);
        }
    }
    None
}

/// `r_mu(x) = I_mu(x) / I_{mu-1}(x)` for `mu > 0`, `x > 0`.
pub fn bessel_ratio(order: BesselOrder, x: f64) -> Result<f64> {
    let mu = order.0;
    check_ratio_args(mu, x)?;
    if x.is_infinite() {
        return Ok(1.0);
    }
    if x < RATIO_SERIES_CUTOFF {
        return Ok(ratio_series(mu, x));
    }
    if x >= 30.0 {
        if let (Some(num), Some(den)) = (hankel_log_scaled(mu, x), hankel_log_scaled(mu - 1.0, x)) {
            return Ok((num - den).exp());
        }
    }
    // The series fallback is exact but costs O(x); the continued fraction
    // only runs out of iterations for x far beyond the Hankel range.
    Ok(ratio_continued_fraction(mu, x).unwrap_or_else(|| ratio_series(mu, x)))
}

/// The ratio together with the logarithms of its numerator and denominator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioEval {
    pub x: f64,
    pub value: f64,
    /// `ln I_mu(x)`.
    pub log_i_num: f64,
    /// `ln I_{mu-1}(x)`.
    pub log_i_den: f64,
}

pub fn ratio_eval(order: BesselOrder, x: f64) -> Result<RatioEval> {
    let value = bessel_ratio(order, x)?;
    let below = BesselOrder::new(order.0 - 1.0)?;
    Ok(RatioEval {
        x,
        value,
        log_i_num: log_bessel_i(order, x)?,
        log_i_den: log_bessel_i(below, x)?,
    })
}

/// `r'_mu(x) = 1 - (2mu - 1) r_mu(x) / x - r_mu(x)^2`.
pub fn bessel_ratio_derivative(order: BesselOrder, x: f64) -> Result<f64> {
    let r = bessel_ratio(order, x)?;
    Ok(ratio_derivative_from(order.0, x, r))
}

pub(crate) fn ratio_derivative_from(mu: f64, x: f64, r: f64) -> f64 {
    1.0 - (2.0 * mu - 1.0) * r / x - r * r
}

/// Which end of the argument range an expansion describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Small,
    Large,
}

/// Two-term expansions of `r_mu` written with `nu = 2 mu`:
/// `x/nu - x^3/(nu^2 (nu+2))` near zero and `1 - (nu-1)/(2x)` near infinity.
///
/// Reference values for tests; not used by any evaluation path.
pub fn ratio_asymptotic(order: BesselOrder, x: f64, regime: Regime) -> Result<f64> {
    check_ratio_args(order.0, x)?;
    let nu = 2.0 * order.0;
    Ok(match regime {
        Regime::Small => x / nu - x.powi(3) / (nu * nu * (nu + 2.0)),
        Regime::Large => 1.0 - (nu - 1.0) / (2.0 * x),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approx_eq;

    fn order(mu: f64) -> BesselOrder {
        BesselOrder::new(mu).unwrap()
    }

    /// Half-order closed forms: I_{1/2} = sqrt(2/(pi x)) sinh x,
    /// I_{-1/2} = sqrt(2/(pi x)) cosh x.
    fn i_half(x: f64) -> f64 {
        (2.0 / (std::f64::consts::PI * x)).sqrt() * x.sinh()
    }
    fn i_minus_half(x: f64) -> f64 {
        (2.0 / (std::f64::consts::PI * x)).sqrt() * x.cosh()
    }

    /// Plain series summation with no rescaling, valid for modest x.
    fn direct_series(mu: f64, x: f64) -> f64 {
        let mut sum = 0.0;
        for k in 0..200 {
            let k = k as f64;
            sum += ((2.0 * k + mu) * (0.5 * x).ln()
                - libm::lgamma(k + 1.0)
                - libm::lgamma(mu + k + 1.0))
            .exp();
        }
        sum
    }

    #[test]
    fn order_validation() {
        assert!(BesselOrder::new(-1.0).is_err());
        assert!(BesselOrder::new(f64::NAN).is_err());
        assert!(BesselOrder::new(-0.999).is_ok());
    }

    #[test]
    fn bessel_i_examples() {
        assert_eq!(bessel_i(order(0.0), 0.0).unwrap(), 1.0);
        let v = bessel_i(order(0.5), 1.0).unwrap();
        assert!(approx_eq(v, i_half(1.0), 1e-14));
        assert!((v - 0.937674).abs() < 1e-6);
        let v = bessel_i(order(1.0), 2.0).unwrap();
        assert!(approx_eq(v, direct_series(1.0, 2.0), 1e-14));
        assert!((v - 1.590637).abs() < 1e-6);
    }

    #[test]
    fn bessel_i_errors() {
        assert!(matches!(bessel_i(order(0.0), -1.0), Err(Error::Domain(_))));
        assert!(matches!(
            bessel_i(order(-0.5), 0.0),
            Err(Error::Overflow(_))
        ));
        assert!(matches!(
            bessel_i(order(0.0), 800.0),
            Err(Error::Overflow(_))
        ));
        assert_eq!(bessel_i(order(2.0), 0.0).unwrap(), 0.0);
    }

    #[test]
    fn half_orders_match_closed_forms() {
        for &x in &[0.01, 0.3, 1.0, 5.0, 29.0, 31.0, 45.0, 100.0, 400.0] {
            let up = bessel_i(order(0.5), x).unwrap();
            let down = bessel_i(order(-0.5), x).unwrap();
            assert!(approx_eq(up / i_half(x), 1.0, 1e-12), "x = {x:?}");
            assert!(approx_eq(down / i_minus_half(x), 1.0, 1e-12), "x = {x:?}");
        }
    }

    #[test]
    fn negative_orders_by_series() {
        for &mu in &[-0.75, -0.5, -0.25] {
            for &x in &[0.1, 1.0, 4.0, 12.0] {
                let v = bessel_i(order(mu), x).unwrap();
                assert!(
                    approx_eq(v / direct_series(mu, x), 1.0, 1e-13),
                    "mu {mu} x {x}"
                );
            }
        }
    }

    #[test]
    fn log_bessel_examples() {
        assert!(log_bessel_i(order(0.0), 1e-8).unwrap().abs() < 1e-15);
        let v = log_bessel_i(order(0.5), 1.0).unwrap();
        assert!((v - i_half(1.0).ln()).abs() < 1e-14);
        assert!((v + 0.064352).abs() < 1e-6);
        // Leading term e^x / sqrt(2 pi x), next correction 1/(8x).
        let v = log_bessel_i(order(0.0), 700.0).unwrap();
        let leading = 700.0 - 0.5 * (2.0 * std::f64::consts::PI * 700.0).ln();
        assert!((v - leading).abs() < 1e-3);
        // 40-digit reference value.
        assert!(approx_eq(v, 695.805_699_998_443_4, 1e-14));
        // log of the half-order closed form, x + ln(1 - e^{-2x}) - ln(2) + ...
        let x = 1e8;
        let v = log_bessel_i(order(0.5), x).unwrap();
        let exact = x - 0.5 * (2.0 * std::f64::consts::PI * x).ln();
        assert!(approx_eq(v, exact, 1e-14));
        assert!(log_bessel_i(order(0.0), 0.0).is_err());
    }

    #[test]
    fn branches_agree_across_crossover() {
        for &mu in &[-0.9, -0.5, 0.0, 0.25, 1.0, 2.5, 5.0] {
            let c = series_crossover(order(mu));
            let mut x = c - 5.0;
            while x <= c + 5.0 {
                let series = log_bessel_series(mu, x);
                let large = log_bessel_large(mu, x);
                assert!(
                    approx_eq(series.exp() / large.exp(), 1.0, 1e-12),
                    "mu {mu} x {x}: {series} vs {large}"
                );
                x += 0.5;
            }
        }
    }

    #[test]
    fn large_order_falls_back_to_series() {
        // mu^2 >> x, the Hankel expansion diverges immediately.
        let mu = 60.0;
        let x = 200.0;
        assert!(hankel_log_scaled(mu, x).is_none());
        let v = log_bessel_i(order(mu), x).unwrap();
        assert!(approx_eq(v, log_bessel_series(mu, x), 1e-14));
    }

    #[test]
    fn ratio_examples() {
        let r = bessel_ratio(order(0.5), 1.0).unwrap();
        assert!((r - 1f64.tanh()).abs() < 1e-15);
        let r = bessel_ratio(order(1.0), 0.001).unwrap();
        assert!((r - 0.0005).abs() < 1e-9);
        let r = bessel_ratio(order(1.0), 100.0).unwrap();
        assert!((r - 0.995).abs() < 1e-4);
    }

    #[test]
    fn ratio_errors() {
        assert!(bessel_ratio(order(0.0), 1.0).is_err());
        assert!(bessel_ratio(order(-0.5), 1.0).is_err());
        assert!(bessel_ratio(order(1.0), 0.0).is_err());
        assert!(bessel_ratio(order(1.0), -2.0).is_err());
    }

    #[test]
    fn ratio_routes_agree() {
        for &mu in &[1e-6, 0.1, 0.5, 1.0, 3.5, 20.0] {
            for &x in &[1e-3, 0.02, 0.7, 3.0, 25.0, 35.0, 80.0] {
                let series = ratio_series(mu, x);
                let cf = ratio_continued_fraction(mu, x).unwrap();
                assert!(
                    approx_eq(cf, series, 1e-13),
                    "mu {mu} x {x}: {cf} vs {series}"
                );
            }
        }
        for &mu in &[0.25, 1.0, 2.0] {
            for &x in &[30.0, 60.0, 200.0] {
                let cf = ratio_continued_fraction(mu, x).unwrap();
                let r = bessel_ratio(order(mu), x).unwrap();
                assert!(approx_eq(cf, r, 1e-13), "mu {mu} x {x}");
            }
        }
    }

    #[test]
    fn ratio_derivative_examples() {
        let d = bessel_ratio_derivative(order(0.5), 1.0).unwrap();
        let sech = 1.0 / 1f64.cosh();
        assert!((d - sech * sech).abs() < 1e-14);
        assert!((d - 0.419974).abs() < 1e-6);
        let d = bessel_ratio_derivative(order(1.0), 0.001).unwrap();
        assert!((d - 0.5).abs() < 1e-6);
    }

    #[test]
    fn asymptotic_examples() {
        let v = ratio_asymptotic(order(1.0), 0.01, Regime::Small).unwrap();
        assert!((v - (0.005 - 1e-6 / 16.0)).abs() < 1e-18);
        assert!((v - 0.00499994).abs() < 1e-8);
        let v = ratio_asymptotic(order(1.0), 100.0, Regime::Large).unwrap();
        assert_eq!(v, 0.995);
        let v = ratio_asymptotic(order(0.5), 50.0, Regime::Large).unwrap();
        assert_eq!(v, 1.0);
    }

    #[test]
    fn concurrent_calls_match_serial() {
        let xs: Vec<f64> = (1..200).map(|i| i as f64 * 0.37).collect();
        let serial: Vec<f64> = xs
            .iter()
            .map(|&x| bessel_ratio(order(0.75), x).unwrap())
            .collect();
        let handles: Vec<_> = (0..4)
            .map(|_| {
                let xs = xs.clone();
                std::thread::spawn(move || {
                    xs.iter()
                        .map(|&x| bessel_ratio(order(0.75), x).unwrap())
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        for h in handles {
            assert_eq!(h.join().unwrap(), serial);
        }
    }

    #[test]
    fn ratio_eval_is_consistent() {
        for &(mu, x) in &[(0.3, 0.01), (1.0, 2.0), (2.5, 45.0), (0.5, 300.0)] {
            let e = ratio_eval(BesselOrder::new(mu).unwrap(), x).unwrap();
            let from_logs = (e.log_i_num - e.log_i_den).exp();
            assert!(
                (e.value - from_logs).abs() <= 1e-13 * (1.0 + x) * e.value,
                "mu {mu} x {x}"
            );
        }
    }
}
