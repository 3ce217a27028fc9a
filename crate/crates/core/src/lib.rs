//! Noncentral chi-squared density and its shape.
//!
//! The crate evaluates the noncentral χ² density with `nu` degrees of freedom
//! and noncentrality `lambda`, together with the first three derivatives of
//! its logarithm, and uses them to answer shape questions:
//!
//! * [`shape`] solves for the critical noncentrality that separates
//!   decreasing densities from bimodal ones when `0 < nu < 2`, and classifies
//!   any parameter pair (log-concave, decreasing, bimodal).
//! * [`modes`] locates the interior mode and the antimode and reports the
//!   closed-form bounds on the mode location.
//! * [`bessel`] provides the modified Bessel function of the first kind and
//!   the ratio `I_mu / I_{mu-1}` that every shape criterion is written in.
//! * [`oracle`] holds brute-force reference computations (finite differences,
//!   dense-grid maxima, adaptive quadrature) that only touch the Poisson
//!   mixture form of the density, so they stay independent of the Bessel path.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bessel;
pub mod density;
mod error;
pub mod modes;
pub mod oracle;
mod roots;
pub mod shape;

pub use bessel::{
    bessel_i, bessel_ratio, bessel_ratio_derivative, log_bessel_i, ratio_eval, BesselOrder,
    RatioEval,
};
pub use density::{
    central_density, density_bessel, density_series, log_density, log_density_d1, log_density_d2,
    log_density_d2_forms, log_density_d3, log_density_derivatives, LogDensityDerivatives, Params,
    SeriesEval,
};
pub use error::{Error, Result};
pub use modes::{
    antimode, interior_mode, mode_bounds, mode_report, Bound, BoundSource, ModeBounds, ModeReport,
};
pub use oracle::{GridSpec, Spacing};
pub use shape::{classify, critical_lambda, g, inflection_point, CriticalLambda, ShapeReport};

/// Hybrid absolute/relative closeness: `|a - b| <= tol * max(1, |a|, |b|)`.
pub fn approx_eq(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1f64.max(a.abs()).max(b.abs())
}
