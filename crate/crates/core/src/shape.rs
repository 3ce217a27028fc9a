//! Critical noncentrality and shape classification.
//!
//! For `0 < nu < 2` the function
//!
//! ```text
//! g_nu(lambda) = r_{nu/2}(t) - (lambda - 2) / t,   t = sqrt(lambda (lambda + nu - 4))
//! ```
//!
//! changes sign exactly once on `(4 - nu, inf)`, from negative to positive.
//! Its root `lambda_nu` separates decreasing densities (`lambda <= lambda_nu`)
//! from bimodal ones (`lambda > lambda_nu`).

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use crate::bessel::{bessel_ratio, BesselOrder};
use crate::density::{log_density_d2, Params};
use crate::error::{domain, Error, Result};
use crate::roots::bisect;

/// Default bisection width for `lambda_nu`.
pub const DEFAULT_CRITICAL_TOL: f64 = 1e-12;
/// Relative bisection width for the inflection point.
pub const INFLECTION_TOL: f64 = 1e-10;
/// `lambda_nu` at the `nu = 2` endpoint, where the decreasing range ends.
pub const CRITICAL_LAMBDA_AT_TWO: f64 = 2.0;

const BRACKET_STEPS: usize = 2000;

fn check_nu_open(nu: f64) -> Result<()> {
    if !(nu > 0.0 && nu < 2.0) {
        return Err(domain(format!("nu must lie in (0, 2), got {nu:?}")));
    }
    Ok(())
}

/// `g_nu(lambda)` for `0 < nu < 2`, `lambda > 4 - nu`.
pub fn g(nu: f64, lambda: f64) -> Result<f64> {
    check_nu_open(nu)?;
    let radicand = lambda * (lambda + nu - 4.0);
    if !(lambda > 4.0 - nu) || !(radicand > 0.0) {
        return Err(domain(format!(
            "g requires lambda > 4 - nu = {}, got {lambda:?}",
            4.0 - nu
        )));
    }
    let t = radicand.sqrt();
    Ok(bessel_ratio(BesselOrder::new(0.5 * nu)?, t)? - (lambda - 2.0) / t)
}

/// Root of `g_nu` together with the solver state that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalLambda {
    pub nu: f64,
    pub lambda_nu: f64,
    /// Final bracket; `g` is negative at the left end and positive at the right.
    pub bracket: (f64, f64),
    pub tol: f64,
    pub iterations: usize,
}

/// Solve `g_nu(lambda) = 0` by bisection.
///
/// The left end starts at `4 - nu + 0.01` and moves toward `4 - nu` by
/// halving the offset until `g < 0`; the right end starts at
/// `max(8, 5 - nu)` and doubles until `g > 0`. Bisection stops when the
/// bracket is narrower than `tol`.
pub fn critical_lambda(nu: f64, tol: f64) -> Result<CriticalLambda> {
    check_nu_open(nu)?;
    if !(tol > 0.0) {
        return Err(domain(format!("tolerance must be > 0, got {tol:?}")));
    }
    let floor = 4.0 - nu;

    let mut delta = 1e-2;
    let mut lo = floor + delta;
    let mut found_lo = false;
    for _ in 0..BRACKET_STEPS {
        if g(nu, lo)? < 0.0 {
            found_lo = true;
            break;
        }
        delta *= 0.5;
        lo = floor + delta;
        if lo <= floor {
            break;
        }
    }
    if !found_lo {
        return Err(Error::Bracket(format!(
            "g_{nu} never negative above 4 - nu"
        )));
    }

    let mut hi = f64::max(8.0, floor + 1.0);
    let mut found_hi = false;
    for _ in 0..BRACKET_STEPS {
        if g(nu, hi)? > 0.0 {
            found_hi = true;
            break;
        }
        hi *= 2.0;
        if !hi.is_finite() {
            break;
        }
    }
    if !found_hi {
        return Err(Error::Bracket(format!("g_{nu} never positive")));
    }

    let b = bisect(|lambda| g(nu, lambda), lo, hi, |_| tol)?;
    Ok(CriticalLambda {
        nu,
        lambda_nu: b.root,
        bracket: (b.lo, b.hi),
        tol,
        iterations: b.iterations,
    })
}

fn cache() -> &'static Mutex<HashMap<(u64, u64), CriticalLambda>> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, u64), CriticalLambda>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// [`critical_lambda`] memoized per `(nu, tol)` for the life of the process.
pub fn cached_critical_lambda(nu: f64, tol: f64) -> Result<CriticalLambda> {
    let key = (nu.to_bits(), tol.to_bits());
    if let Some(hit) = cache().lock().unwrap_or_else(|e| e.into_inner()).get(&key) {
        return Ok(*hit);
    }
    let fresh = critical_lambda(nu, tol)?;
    cache()
        .lock()
        .unwrap_or_else(|e| e.into_inner())
        .insert(key, fresh);
    Ok(fresh)
}

/// `lambda_nu` for `0 < nu <= 2`, with the endpoint value 2 at `nu = 2`.
pub(crate) fn critical_value(nu: f64, tol: f64) -> Result<Option<f64>> {
    if nu == 2.0 {
        Ok(Some(CRITICAL_LAMBDA_AT_TWO))
    } else if nu < 2.0 {
        Ok(Some(cached_critical_lambda(nu, tol)?.lambda_nu))
    } else {
        Ok(None)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeReport {
    pub params: Params,
    pub log_concave: bool,
    pub decreasing: bool,
    pub bimodal: bool,
    /// Strictly log-convex near zero and strictly log-concave afterwards.
    pub convex_then_concave: bool,
    /// `lambda_nu`, present iff `nu <= 2`.
    pub critical_lambda: Option<f64>,
}

/// Classify the density shape using [`DEFAULT_CRITICAL_TOL`].
pub fn classify(p: Params) -> Result<ShapeReport> {
    classify_with_tol(p, DEFAULT_CRITICAL_TOL)
}

pub fn classify_with_tol(p: Params, tol: f64) -> Result<ShapeReport> {
    let (nu, lambda) = (p.nu(), p.lambda());
    let critical = critical_value(nu, tol)?;
    let decreasing = critical.is_some_and(|c| lambda <= c);
    Ok(ShapeReport {
        params: p,
        log_concave: nu >= 2.0,
        decreasing,
        bimodal: nu < 2.0 && !decreasing,
        convex_then_concave: nu < 2.0 && lambda > 0.0,
        critical_lambda: critical,
    })
}

/// The unique zero of `l''` when `0 < nu < 2` and `lambda > 0`.
pub fn inflection_point(p: Params) -> Result<f64> {
    inflection_point_with_tol(p, INFLECTION_TOL)
}

pub fn inflection_point_with_tol(p: Params, tol: f64) -> Result<f64> {
    let (nu, lambda) = (p.nu(), p.lambda());
    if !(nu < 2.0 && lambda > 0.0) {
        return Err(domain(format!(
            "inflection point requires 0 < nu < 2 and lambda > 0, got nu = {nu:?}, lambda = {lambda:?}"
        )));
    }
    let d2 = |x: f64| log_density_d2(p, x);

    let mut lo = 1.0;
    let mut steps = 0;
    while d2(lo)? <= 0.0 {
        lo *= 0.5;
        steps += 1;
        if steps > BRACKET_STEPS || lo == 0.0 {
            return Err(Error::Bracket("l'' never positive near zero".into()));
        }
    }
    let mut hi = f64::max(1.0, lambda + nu).max(2.0 * lo);
    steps = 0;
    while d2(hi)? >= 0.0 {
        hi *= 2.0;
        steps += 1;
        if steps > BRACKET_STEPS || !hi.is_finite() {
            return Err(Error::Bracket("l'' never negative".into()));
        }
    }
    Ok(bisect(d2, lo, hi, |mid| tol * mid.max(1.0))?.root)
}
