//! Noncentral χ² density in its Poisson-mixture and Bessel forms, and the
//! derivatives of its logarithm.
//!
//! Production evaluation goes through the Bessel form in log space. The
//! mixture form is kept as an independent route: the oracle module and the
//! tests compare the two.

use crate::bessel::{self, BesselOrder};
use crate::error::{domain, Error, Result};

/// Noncentrality below which the central formulas are used.
pub const CENTRAL_LAMBDA: f64 = 1e-300;
/// Agreement required between the two closed forms of `l''`.
pub const D2_CONSISTENCY_TOL: f64 = 1e-9;

const SERIES_MAX_TERMS: usize = 10_000_000;

/// Degrees of freedom `nu > 0` and noncentrality `lambda >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    nu: f64,
    lambda: f64,
}

impl Params {
    pub fn new(nu: f64, lambda: f64) -> Result<Self> {
        if !nu.is_finite() || nu <= 0.0 {
            return Err(domain(format!(
                "degrees of freedom must be finite and > 0, got {nu:?}"
            )));
        }
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(domain(format!(
                "noncentrality must be finite and >= 0, got {lambda:?}"
            )));
        }
        Ok(Params { nu, lambda })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn is_central(&self) -> bool {
        self.lambda < CENTRAL_LAMBDA
    }
}

fn check_x(x: f64) -> Result<()> {
    if x.is_nan() || x <= 0.0 {
        return Err(domain(format!("density argument must be > 0, got {x:?}")));
    }
    Ok(())
}

fn log_central(nu: f64, x: f64) -> f64 {
    let half_x = 0.5 * x;
    -half_x + (0.5 * nu - 1.0) * half_x.ln() - std::f64::consts::LN_2 - libm::lgamma(0.5 * nu)
}

/// Central χ² density `e^{-x/2} (x/2)^{nu/2-1} / (2 Γ(nu/2))`.
pub fn central_density(nu: f64, x: f64) -> Result<f64> {
    if !nu.is_finite() || nu <= 0.0 {
        return Err(domain(format!(
            "degrees of freedom must be > 0, got {nu:?}"
        )));
    }
    check_x(x)?;
    Ok(log_central(nu, x).exp())
}

/// Log of the largest value a central density with `df >= 2` attains.
fn log_central_peak(df: f64) -> f64 {
    if df <= 2.0 {
        -std::f64::consts::LN_2
    } else {
        log_central(df, df - 2.0)
    }
}

/// Result of the truncated Poisson-mixture sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesEval {
    pub value: f64,
    /// Number of mixture terms summed.
    pub terms: usize,
}

/// Density as the Poisson mixture `sum_k Pois(k; lambda/2) p_{nu+2k,0}(x)`.
///
/// Summation stops once a bound on the neglected tail falls below `tol`, so
/// the absolute error is below `tol`. Two bounds are tracked and the smaller
/// one is used: the Poisson tail mass times the peak value of the remaining
/// central densities, and a geometric bound from the ratio of consecutive
/// mixture terms, which decreases in `k`.
pub fn density_series(p: Params, x: f64, tol: f64) -> Result<SeriesEval> {
    check_x(x)?;
    if !(tol > 0.0) {
        return Err(domain(format!("series tolerance must be > 0, got {tol:?}")));
    }
    let nu = p.nu;
    if p.lambda == 0.0 {
        return Ok(SeriesEval {
            value: log_central(nu, x).exp(),
            terms: 1,
        });
    }
    let half = 0.5 * p.lambda;
    let ln_half = half.ln();
    let ln_tol = tol.ln();

    let mut max_log = f64::NEG_INFINITY;
    let mut scaled_sum = 0.0;
    for k in 0..SERIES_MAX_TERMS {
        let kf = k as f64;
        let df = nu + 2.0 * kf;
        let ln_weight = -half + kf * ln_half - libm::lgamma(kf + 1.0);
        let ln_term = ln_weight + log_central(df, x);

        if ln_term > max_log {
            scaled_sum = scaled_sum * (max_log - ln_term).exp() + 1.0;
            max_log = ln_term;
        } else {
            scaled_sum += (ln_term - max_log).exp();
        }

        // Bound on sum_{j > k} term_j.
        let poisson_ratio = half / (kf + 2.0);
        let mut ln_bound = f64::INFINITY;
        if poisson_ratio < 1.0 {
            let ln_next_weight = ln_weight + ln_half - (kf + 1.0).ln();
            ln_bound = ln_next_weight - (1.0 - poisson_ratio).ln() + log_central_peak(df + 2.0);
        }
        let term_ratio = half * x / ((kf + 1.0) * df);
        if term_ratio < 1.0 {
            let geometric = ln_term + term_ratio.ln() - (1.0 - term_ratio).ln();
            ln_bound = ln_bound.min(geometric);
        }
        if ln_bound < ln_tol {
            return Ok(SeriesEval {
                value: (scaled_sum.ln() + max_log).exp(),
                terms: k + 1,
            });
        }
    }
    Err(Error::Convergence {
        what: "Poisson mixture series",
        iterations: SERIES_MAX_TERMS,
    })
}

/// `ln p_{nu,lambda}(x)` from the Bessel form, composed in log space.
pub fn log_density(p: Params, x: f64) -> Result<f64> {
    check_x(x)?;
    if p.is_central() {
        return Ok(log_central(p.nu, x));
    }
    let (sx, sl) = (x.sqrt(), p.lambda.sqrt());
    // -(x + lambda)/2 + sqrt(lambda x) = -(sqrt x - sqrt lambda)^2 / 2, and the
    // remaining e^{sqrt(lambda x)} is absorbed into the scaled Bessel value.
    let log_i_scaled = bessel::log_bessel_i_shifted_scaled(0.5 * p.nu - 1.0, 0.5 * p.nu, sx * sl)?;
    Ok(-std::f64::consts::LN_2 - 0.5 * (sx - sl).powi(2)
        + 0.25 * (p.nu - 2.0) * (x.ln() - p.lambda.ln())
        + log_i_scaled)
}

/// Density `½ e^{-(x+lambda)/2} (x/lambda)^{(nu-2)/4} I_{(nu-2)/2}(sqrt(lambda x))`.
pub fn density_bessel(p: Params, x: f64) -> Result<f64> {
    log_density(p, x).map(f64::exp)
}

/// `ln p` and its first three derivatives at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDensityDerivatives {
    pub x: f64,
    pub l: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

/// `r_{nu/2}(sqrt(lambda x))`, or zero in the central case where every term
/// it appears in carries a factor of `sqrt(lambda)`.
fn ratio_at(p: Params, x: f64) -> Result<f64> {
    if p.is_central() {
        return Ok(0.0);
    }
    bessel::bessel_ratio(BesselOrder::new(0.5 * p.nu)?, p.lambda.sqrt() * x.sqrt())
}

fn d1_from(p: Params, x: f64, r: f64) -> f64 {
    -0.5 + (p.nu - 2.0) / (2.0 * x) + 0.5 * (p.lambda.sqrt() / x.sqrt()) * r
}

/// `l''` in the ratio form and in the `l'` form.
fn d2_forms(p: Params, x: f64, r: f64, d1: f64) -> (f64, f64) {
    let (a, b, _) = d2_forms_with_scale(p, x, r, d1);
    (a, b)
}

/// Both forms of `l''` plus the largest term magnitude entering either sum,
/// which bounds the rounding error of the cancellation.
fn d2_forms_with_scale(p: Params, x: f64, r: f64, d1: f64) -> (f64, f64, f64) {
    let (nu, lambda) = (p.nu, p.lambda);
    let ratio_terms = [
        (2.0 - nu) / (2.0 * x * x),
        lambda / (4.0 * x),
        -nu * lambda.sqrt() / (4.0 * x.powf(1.5)) * r,
        -lambda / (4.0 * x) * r * r,
    ];
    let slope_terms = [
        (lambda + nu - 4.0) / (4.0 * x),
        -0.25,
        -d1 * (d1 + 1.0 - (nu - 4.0) / (2.0 * x)),
    ];
    let scale = ratio_terms
        .iter()
        .chain(&slope_terms)
        .fold(0.0, |m: f64, t| m.max(t.abs()));
    (ratio_terms.iter().sum(), slope_terms.iter().sum(), scale)
}

fn checked_d2(p: Params, x: f64, r: f64, d1: f64) -> Result<f64> {
    let (a, b, scale) = d2_forms_with_scale(p, x, r, d1);
    let tol = D2_CONSISTENCY_TOL * a.abs().max(b.abs()).max(1.0) + 64.0 * f64::EPSILON * scale;
    if !((a - b).abs() <= tol) {
        return Err(Error::Consistency(format!(
            "l'' forms disagree at nu = {:?}, lambda = {:?}, x = {x:?}: {a:?} vs {b:?}",
            p.nu, p.lambda
        )));
    }
    Ok(a)
}

fn d3_from(p: Params, x: f64, d1: f64, d2: f64) -> f64 {
    let nu = p.nu;
    -(p.lambda + nu - 4.0 + 2.0 * (nu - 4.0) * d1) / (4.0 * x * x)
        - d2 * (2.0 * d1 + 1.0 - (nu - 4.0) / (2.0 * x))
}

/// `l'(x) = -1/2 + (nu-2)/(2x) + sqrt(lambda/x)/2 * r_{nu/2}(sqrt(lambda x))`.
pub fn log_density_d1(p: Params, x: f64) -> Result<f64> {
    check_x(x)?;
    Ok(d1_from(p, x, ratio_at(p, x)?))
}

/// `l''(x)`. Both closed forms are evaluated; a disagreement beyond
/// [`D2_CONSISTENCY_TOL`] is reported as [`Error::Consistency`].
pub fn log_density_d2(p: Params, x: f64) -> Result<f64> {
    check_x(x)?;
    let r = ratio_at(p, x)?;
    checked_d2(p, x, r, d1_from(p, x, r))
}

/// Both closed forms of `l''(x)`, unchecked: `(ratio form, slope form)`.
pub fn log_density_d2_forms(p: Params, x: f64) -> Result<(f64, f64)> {
    check_x(x)?;
    let r = ratio_at(p, x)?;
    Ok(d2_forms(p, x, r, d1_from(p, x, r)))
}

/// `l'''(x)` from the closed form in `l'` and `l''`.
pub fn log_density_d3(p: Params, x: f64) -> Result<f64> {
    check_x(x)?;
    let r = ratio_at(p, x)?;
    let d1 = d1_from(p, x, r);
    let d2 = checked_d2(p, x, r, d1)?;
    Ok(d3_from(p, x, d1, d2))
}

/// All of `l, l', l'', l'''` from a single ratio evaluation.
pub fn log_density_derivatives(p: Params, x: f64) -> Result<LogDensityDerivatives> {
    let l = log_density(p, x)?;
    let r = ratio_at(p, x)?;
    let d1 = d1_from(p, x, r);
    let d2 = checked_d2(p, x, r, d1)?;
    let d3 = d3_from(p, x, d1, d2);
    Ok(LogDensityDerivatives { x, l, d1, d2, d3 })
}
