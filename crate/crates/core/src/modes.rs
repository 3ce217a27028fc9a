//! Interior mode, antimode and the closed-form bounds on the mode location.
//!
//! An interior mode exists when `nu > 2`, when `nu = 2` and `lambda > 2`, or
//! when `nu < 2` and `lambda > lambda_nu`. In the last case there is also a
//! mode at zero and an antimode between the two.

use crate::bessel::{bessel_ratio, BesselOrder};
use crate::density::{log_density_d1, log_density_d2, Params};
use crate::error::{domain, Error, Result};
use crate::roots::{bisect, Bisection};
use crate::shape::{self, DEFAULT_CRITICAL_TOL};

/// Default relative bisection width for mode positions.
pub const MODE_TOL: f64 = 1e-10;

const WIDEN: f64 = 1e-6;
const EXPAND_STEPS: usize = 2000;
const POLISH_STEPS: usize = 4;

/// Which inequality a bound comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundSource {
    /// `lambda + nu - 4 < M`, valid whenever an interior mode exists.
    Loose,
    /// `(nu - 2)(1 + lambda/nu) <= M <= lambda + nu - 2` for `nu >= 2`.
    NuGe2,
    /// `lambda + nu - 3 < M` for `nu > 3`.
    NuGt3,
    /// `M < lambda + nu - 3` in the bimodal case.
    Bimodal,
}

impl BoundSource {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundSource::Loose => "loose",
            BoundSource::NuGe2 => "nu_ge_2",
            BoundSource::NuGt3 => "nu_gt_3",
            BoundSource::Bimodal => "bimodal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bound {
    pub value: f64,
    /// Strict inequality.
    pub strict: bool,
    pub source: BoundSource,
}

impl Bound {
    /// Whether `m` lies on the permitted side of this bound taken as a lower bound.
    pub fn admits_above(&self, m: f64) -> bool {
        if self.strict {
            m > self.value
        } else {
            m >= self.value
        }
    }

    /// Whether `m` lies on the permitted side of this bound taken as an upper bound.
    pub fn admits_below(&self, m: f64) -> bool {
        if self.strict {
            m < self.value
        } else {
            m <= self.value
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeBounds {
    pub lower: Bound,
    pub upper: Option<Bound>,
}

impl ModeBounds {
    pub fn contains(&self, m: f64) -> bool {
        self.lower.admits_above(m) && self.upper.is_none_or(|u| u.admits_below(m))
    }
}

fn has_interior_mode(p: Params) -> Result<bool> {
    let (nu, lambda) = (p.nu(), p.lambda());
    Ok(match shape::critical_value(nu, DEFAULT_CRITICAL_TOL)? {
        None => true,
        Some(c) => lambda > c,
    })
}

fn is_bimodal(p: Params) -> Result<bool> {
    Ok(p.nu() < 2.0 && has_interior_mode(p)?)
}

/// Density has a mode at zero (a decreasing start).
pub fn zero_is_mode(p: Params) -> bool {
    let nu = p.nu();
    nu < 2.0 || (nu == 2.0 && p.lambda() <= shape::CRITICAL_LAMBDA_AT_TWO)
}

/// Bounds on the interior mode. Fails if there is none.
pub fn mode_bounds(p: Params) -> Result<ModeBounds> {
    let (nu, lambda) = (p.nu(), p.lambda());
    if !has_interior_mode(p)? {
        return Err(Error::NoInteriorMode { nu, lambda });
    }
    let mut lower = Bound {
        value: lambda + nu - 4.0,
        strict: true,
        source: BoundSource::Loose,
    };
    let mut tighten = |candidate: Bound| {
        if candidate.value > lower.value
            || (candidate.value == lower.value && candidate.strict && !lower.strict)
        {
            lower = candidate;
        }
    };
    if nu >= 2.0 {
        tighten(Bound {
            value: (nu - 2.0) * (1.0 + lambda / nu),
            strict: false,
            source: BoundSource::NuGe2,
        });
    }
    if nu > 3.0 {
        tighten(Bound {
            value: lambda + nu - 3.0,
            strict: true,
            source: BoundSource::NuGt3,
        });
    }
    let upper = if nu >= 2.0 {
        Bound {
            value: lambda + nu - 2.0,
            strict: false,
            source: BoundSource::NuGe2,
        }
    } else {
        Bound {
            value: lambda + nu - 3.0,
            strict: true,
            source: BoundSource::Bimodal,
        }
    };
    Ok(ModeBounds {
        lower,
        upper: Some(upper),
    })
}

fn widen_down(x: f64) -> f64 {
    let w = x - WIDEN * x.abs().max(1.0);
    if w > 0.0 {
        w
    } else {
        // Lower bound at or near zero: start just inside the support.
        (0.5 * x).max(f64::MIN_POSITIVE.sqrt())
    }
}

fn widen_up(x: f64) -> f64 {
    x + WIDEN * x.abs().max(1.0)
}

/// Move `lo` toward zero until `l'(lo) > 0`.
fn expand_to_positive(p: Params, mut lo: f64) -> Result<f64> {
    for _ in 0..EXPAND_STEPS {
        if log_density_d1(p, lo)? > 0.0 {
            return Ok(lo);
        }
        lo *= 0.5;
    }
    Err(Error::Bracket(format!(
        "l' not positive left of the mode for {p:?}"
    )))
}

/// Move `lo` toward zero until `l'(lo) < 0`.
fn expand_to_negative_left(p: Params, mut lo: f64) -> Result<f64> {
    for _ in 0..EXPAND_STEPS {
        if log_density_d1(p, lo)? < 0.0 {
            return Ok(lo);
        }
        lo *= 0.5;
    }
    Err(Error::Bracket(format!(
        "l' not negative near zero for {p:?}"
    )))
}

/// Grow `hi` until `l'(hi) < 0`.
fn expand_to_negative(p: Params, mut hi: f64) -> Result<f64> {
    for _ in 0..EXPAND_STEPS {
        if log_density_d1(p, hi)? < 0.0 {
            return Ok(hi);
        }
        hi *= 2.0;
    }
    Err(Error::Bracket(format!(
        "l' not negative right of the mode for {p:?}"
    )))
}

/// Newton steps on `l'` from the bisection midpoint, kept inside the final
/// bracket. Near zero `l''` is steep, so a bracket of width `tol` alone does
/// not make `l'` small.
fn polish(p: Params, b: Bisection) -> Result<f64> {
    let mut x = b.root;
    for _ in 0..POLISH_STEPS {
        let d1 = log_density_d1(p, x)?;
        let d2 = log_density_d2(p, x)?;
        if d1 == 0.0 || d2 == 0.0 {
            break;
        }
        let next = x - d1 / d2;
        if !(next > b.lo && next < b.hi) || next == x {
            break;
        }
        x = next;
    }
    Ok(x)
}

/// Interior mode `M(nu, lambda)`, or `None` when the density has none.
pub fn interior_mode(p: Params) -> Result<Option<f64>> {
    interior_mode_with_tol(p, MODE_TOL)
}

pub fn interior_mode_with_tol(p: Params, tol: f64) -> Result<Option<f64>> {
    if !(tol > 0.0) {
        return Err(domain(format!("tolerance must be > 0, got {tol:?}")));
    }
    if !has_interior_mode(p)? {
        return Ok(None);
    }
    let (nu, lambda) = (p.nu(), p.lambda());
    let d1 = |x: f64| log_density_d1(p, x);
    let (lo, hi) = if nu >= 2.0 {
        let lo = widen_down(((nu - 2.0) * (1.0 + lambda / nu)).max(0.0));
        let hi = widen_up(lambda + nu - 2.0);
        (expand_to_positive(p, lo)?, expand_to_negative(p, hi)?)
    } else {
        let inflection = shape::inflection_point(p)?;
        if d1(inflection)? <= 0.0 {
            return Err(Error::Bracket(format!(
                "l' not positive at the inflection point for {p:?}"
            )));
        }
        let hi = widen_up((lambda + nu - 3.0).max(inflection));
        (inflection, expand_to_negative(p, hi)?)
    };
    Ok(Some(polish(
        p,
        bisect(d1, lo, hi, |mid| tol * mid.max(1.0))?,
    )?))
}

/// Local minimum of the density between the zero mode and the interior mode,
/// present only in the bimodal case.
pub fn antimode(p: Params) -> Result<Option<f64>> {
    antimode_with_tol(p, MODE_TOL)
}

pub fn antimode_with_tol(p: Params, tol: f64) -> Result<Option<f64>> {
    if !(tol > 0.0) {
        return Err(domain(format!("tolerance must be > 0, got {tol:?}")));
    }
    if !is_bimodal(p)? {
        return Ok(None);
    }
    let hi = shape::inflection_point(p)?;
    if log_density_d1(p, hi)? <= 0.0 {
        return Err(Error::Bracket(format!(
            "l' not positive at the inflection point for {p:?}"
        )));
    }
    let lo = expand_to_negative_left(p, 0.5 * hi)?;
    Ok(Some(polish(
        p,
        bisect(|x| log_density_d1(p, x), lo, hi, |mid| tol * mid.max(1.0))?,
    )?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeReport {
    pub params: Params,
    pub zero_is_mode: bool,
    pub interior_mode: Option<f64>,
    pub antimode: Option<f64>,
    /// Zero of `l''`, reported when `0 < nu < 2` and `lambda > 0`.
    pub inflection_point: Option<f64>,
    pub bounds: Option<ModeBounds>,
}

pub fn mode_report(p: Params) -> Result<ModeReport> {
    mode_report_with_tol(p, MODE_TOL)
}

pub fn mode_report_with_tol(p: Params, tol: f64) -> Result<ModeReport> {
    let interior = interior_mode_with_tol(p, tol)?;
    let inflection = if p.nu() < 2.0 && p.lambda() > 0.0 {
        Some(shape::inflection_point_with_tol(p, tol)?)
    } else {
        None
    };
    Ok(ModeReport {
        params: p,
        zero_is_mode: zero_is_mode(p),
        interior_mode: interior,
        antimode: antimode_with_tol(p, tol)?,
        inflection_point: inflection,
        bounds: if interior.is_some() {
            Some(mode_bounds(p)?)
        } else {
            None
        },
    })
}

/// Interior modes along an increasing list of noncentralities.
pub fn mode_monotonicity_probe(nu: f64, lambdas: &[f64]) -> Result<Vec<f64>> {
    lambdas
        .iter()
        .map(|&lambda| {
            let p = Params::new(nu, lambda)?;
            interior_mode(p)?.ok_or(Error::NoInteriorMode { nu, lambda })
        })
        .collect()
}

/// `h(lambda) = r_{nu/2}(sqrt(lambda z)) - (lambda - 1)/sqrt(lambda z)` with
/// `z = lambda + nu - 3`. Its sign is the sign of `l'(lambda + nu - 3)`.
pub fn prop2_h(nu: f64, lambda: f64) -> Result<f64> {
    let z = lambda + nu - 3.0;
    let lz = lambda * z;
    if !(nu > 0.0) || !(lambda > 0.0) || !(lz > 0.0) {
        return Err(domain(format!(
            "h requires nu > 0, lambda > max(0, 3 - nu); got nu = {nu:?}, lambda = {lambda:?}"
        )));
    }
    let s = lz.sqrt();
    Ok(bessel_ratio(BesselOrder::new(0.5 * nu)?, s)? - (lambda - 1.0) / s)
}

/// `r_{nu/2}(sqrt(4 - nu)) - (3 - nu)/sqrt(4 - nu)`, the limit of `h` as
/// `lambda` falls to `4 - nu`.
pub fn eq12_limit(nu: f64) -> Result<f64> {
    if !(nu > 0.0 && nu < 2.0) {
        return Err(domain(format!("nu must lie in (0, 2), got {nu:?}")));
    }
    let s = (4.0 - nu).sqrt();
    Ok(bessel_ratio(BesselOrder::new(0.5 * nu)?, s)? - (3.0 - nu) / s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eq12Report {
    pub points: usize,
    pub max_value: f64,
    pub argmax_nu: f64,
}

impl Eq12Report {
    pub fn all_negative(&self) -> bool {
        self.max_value < 0.0
    }
}

/// Evaluate [`eq12_limit`] over `grid` and report the largest value.
pub fn verify_eq12_negative(grid: &[f64]) -> Result<Eq12Report> {
    if grid.is_empty() {
        return Err(domain("empty nu grid"));
    }
    let mut report = Eq12Report {
        points: 0,
        max_value: f64::NEG_INFINITY,
        argmax_nu: f64::NAN,
    };
    for &nu in grid {
        let v = eq12_limit(nu)?;
        report.points += 1;
        if v > report.max_value {
            report.max_value = v;
            report.argmax_nu = nu;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::log_density_d2;

    fn params(nu: f64, lambda: f64) -> Params {
        Params::new(nu, lambda).unwrap()
    }

    #[test]
    fn central_mode() {
        let m = interior_mode(params(4.0, 0.0)).unwrap().unwrap();
        assert!((m - 2.0).abs() < 1e-9);
    }

    #[test]
    fn mode_examples() {
        let m = interior_mode(params(4.0, 5.0)).unwrap().unwrap();
        assert!(m > 6.0 && m <= 7.0, "{m}");
        let m = interior_mode(params(1.0, 5.0)).unwrap().unwrap();
        assert!(m > 2.0 && m < 3.0, "{m}");
        assert_eq!(interior_mode(params(1.0, 4.0)).unwrap(), None);
        assert_eq!(interior_mode(params(2.0, 2.0)).unwrap(), None);
        assert!(interior_mode(params(2.0, 3.0)).unwrap().is_some());
        assert!(interior_mode(params(2.5, 0.0)).unwrap().is_some());
    }

    #[test]
    fn antimode_examples() {
        let m = antimode(params(1.0, 5.0)).unwrap().unwrap();
        assert!(m > 0.0 && m <= 2.0, "{m}");
        assert!(log_density_d2(params(1.0, 5.0), m).unwrap() > 0.0);
        assert_eq!(antimode(params(1.0, 4.0)).unwrap(), None);
        assert_eq!(antimode(params(3.0, 1.0)).unwrap(), None);
    }

    #[test]
    fn bounds_examples() {
        let b = mode_bounds(params(4.0, 5.0)).unwrap();
        assert_eq!(b.lower.value, 6.0);
        assert_eq!(b.lower.source, BoundSource::NuGt3);
        assert!(b.lower.strict);
        assert_eq!(b.upper.unwrap().value, 7.0);
        assert!(!b.upper.unwrap().strict);

        let b = mode_bounds(params(2.0, 3.0)).unwrap();
        assert_eq!(b.lower.value, 1.0);
        assert_eq!(b.lower.source, BoundSource::Loose);
        assert_eq!(b.upper.unwrap().value, 3.0);

        let b = mode_bounds(params(1.0, 5.0)).unwrap();
        assert_eq!(b.lower.value, 2.0);
        assert_eq!(b.upper.unwrap().value, 3.0);
        assert!(b.upper.unwrap().strict);
        assert_eq!(b.upper.unwrap().source, BoundSource::Bimodal);

        assert!(matches!(
            mode_bounds(params(1.0, 4.0)),
            Err(Error::NoInteriorMode { .. })
        ));
    }

    #[test]
    fn bounds_coincide_at_zero_noncentrality() {
        let b = mode_bounds(params(5.0, 0.0)).unwrap();
        assert_eq!(b.lower.value, 3.0);
        assert_eq!(b.upper.unwrap().value, 3.0);
        let m = interior_mode(params(5.0, 0.0)).unwrap().unwrap();
        assert!((m - 3.0).abs() < 1e-9);
    }

    #[test]
    fn report_bimodal() {
        let r = mode_report(params(1.0, 5.0)).unwrap();
        assert!(r.zero_is_mode);
        let (m, a, x) = (
            r.interior_mode.unwrap(),
            r.antimode.unwrap(),
            r.inflection_point.unwrap(),
        );
        assert!(a < x && x < m);
        assert!(r.bounds.unwrap().contains(m));
    }

    #[test]
    fn report_decreasing() {
        let r = mode_report(params(1.0, 4.0)).unwrap();
        assert!(r.zero_is_mode);
        assert_eq!(r.interior_mode, None);
        assert_eq!(r.antimode, None);
        assert_eq!(r.bounds, None);
        assert!(r.inflection_point.is_some());
    }

    #[test]
    fn probe_examples() {
        let ms = mode_monotonicity_probe(4.0, &[0.0, 1.0, 2.0, 4.0, 8.0]).unwrap();
        assert!((ms[0] - 2.0).abs() < 1e-9);
        assert!(ms.windows(2).all(|w| w[0] < w[1]));
        let ms = mode_monotonicity_probe(1.0, &[4.5, 5.0, 6.0, 10.0]).unwrap();
        assert!(ms.windows(2).all(|w| w[0] < w[1]));
        let m = mode_monotonicity_probe(4.0, &[1e4]).unwrap()[0];
        assert!(m - (1e4 + 1.0) > 0.0 && m - (1e4 + 1.0) < 0.01);
        assert!(mode_monotonicity_probe(1.0, &[5.0, 4.0]).is_err());
    }

    #[test]
    fn h_examples() {
        assert!(prop2_h(4.0, 2.0).unwrap() > 0.0);
        assert!(prop2_h(1.0, 5.0).unwrap() < 0.0);
        let nu = 0.5;
        let near = prop2_h(nu, 4.0 - nu + 1e-6).unwrap();
        let limit = eq12_limit(nu).unwrap();
        assert!(near < 0.0);
        assert!((near - limit).abs() < 1e-5);
        assert!(prop2_h(1.0, 1.5).is_err());
    }

    #[test]
    fn h_sign_matches_slope() {
        for &(nu, lambda) in &[(4.0, 2.0), (1.0, 5.0), (0.5, 7.0), (6.0, 10.0)] {
            let z = lambda + nu - 3.0;
            let h = prop2_h(nu, lambda).unwrap();
            let d1 = log_density_d1(params(nu, lambda), z).unwrap();
            assert_eq!(h.signum(), d1.signum());
        }
    }

    #[test]
    fn boundary_limit_examples() {
        let v = eq12_limit(1.0).unwrap();
        let s = 3f64.sqrt();
        assert!((v - (s.tanh() - 2.0 / s)).abs() < 1e-14);
        assert!(eq12_limit(1e-6).unwrap() < 0.0);
        assert!(eq12_limit(2.0 - 1e-6).unwrap() < 0.0);
        let r = verify_eq12_negative(&[0.1, 0.5, 1.9]).unwrap();
        assert_eq!(r.points, 3);
        assert!(r.all_negative());
        assert!(verify_eq12_negative(&[]).is_err());
        assert!(verify_eq12_negative(&[2.5]).is_err());
    }
}
