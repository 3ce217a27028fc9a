//! Brute-force reference computations for checking the closed forms.
//!
//! Everything here that needs the density evaluates the Poisson mixture
//! ([`density_series`]) and never the Bessel form, so comparisons against
//! the production path compare two independent derivations.

use rayon::prelude::*;

use crate::density::{density_series, Params};
use crate::error::{domain, Error, Result};

/// Absolute truncation tolerance for mixture evaluations inside the oracles.
pub const SERIES_TOL: f64 = 1e-300;
/// Absolute tolerance of [`adaptive_quadrature`].
pub const QUADRATURE_TOL: f64 = 1e-9;
/// Default number of points for mode-counting grids.
pub const DEFAULT_GRID_POINTS: usize = 20_000;

const MAX_SUBDIVISIONS: usize = 5000;

/// Central-difference estimate of the `order`-th derivative of `f` at `x`.
///
/// Requires the stencil `[x - order h, x + order h]` to stay inside `(0, inf)`.
pub fn finite_difference<F>(f: F, x: f64, order: u8, h: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(h > 0.0) {
        return Err(domain(format!("step must be > 0, got {h:?}")));
    }
    if !(1..=3).contains(&order) {
        return Err(domain(format!("order must be 1, 2 or 3, got {order:?}")));
    }
    if !(x - f64::from(order) * h > 0.0) {
        return Err(domain(format!(
            "stencil around {x} with step {h} leaves (0, inf)"
        )));
    }
    Ok(match order {
        1 => (f(x + h) - f(x - h)) / (2.0 * h),
        2 => (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h),
        _ => {
            (f(x + 2.0 * h) - 2.0 * f(x + h) + 2.0 * f(x - h) - f(x - 2.0 * h)) / (2.0 * h * h * h)
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    x_min: f64,
    x_max: f64,
    points: usize,
    spacing: Spacing,
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, points: usize, spacing: Spacing) -> Result<Self> {
        if !(x_min > 0.0) || !x_min.is_finite() {
            return Err(domain(format!(
                "grid x_min must be finite and > 0, got {x_min:?}"
            )));
        }
        if !(x_max > x_min) || !x_max.is_finite() {
            return Err(domain(format!(
                "grid x_max must be finite and > x_min, got {x_max:?}"
            )));
        }
        if points < 3 {
            return Err(domain(format!(
                "grid needs at least 3 points, got {points:?}"
            )));
        }
        Ok(GridSpec {
            x_min,
            x_max,
            points,
            spacing,
        })
    }

    pub fn points(&self) -> usize {
        self.points
    }

    /// Grid abscissae, endpoints included exactly.
    pub fn abscissae(&self) -> Vec<f64> {
        let n = self.points - 1;
        (0..=n)
            .map(|i| {
                if i == 0 {
                    return self.x_min;
                }
                if i == n {
                    return self.x_max;
                }
                let t = i as f64 / n as f64;
                match self.spacing {
                    Spacing::Linear => self.x_min + t * (self.x_max - self.x_min),
                    Spacing::Log => (self.x_min.ln() + t * (self.x_max / self.x_min).ln()).exp(),
                }
            })
            .collect()
    }
}

/// Local maxima of the density found on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMaxima {
    /// Density falls from the first grid point to the second: a mode at zero.
    pub boundary_max: bool,
    /// Interior grid points strictly above both neighbours, as `(x, density)`.
    pub interior: Vec<(f64, f64)>,
}

/// Scan the mixture-form density over `grid` for local maxima.
pub fn grid_local_maxima(p: Params, grid: &GridSpec) -> Result<GridMaxima> {
    let xs = grid.abscissae();
    let values = xs
        .par_iter()
        .map(|&x| density_series(p, x, SERIES_TOL).map(|s| s.value))
        .collect::<Result<Vec<f64>>>()?;
    let interior = (1..values.len() - 1)
        .filter(|&i| values[i] > values[i - 1] && values[i] > values[i + 1])
        .map(|i| (xs[i], values[i]))
        .collect();
    Ok(GridMaxima {
        boundary_max: values[0] > values[1],
        interior,
    })
}

/// 7-point Gauss / 15-point Kronrod nodes on `[0, 1]` half of `[-1, 1]`.
const KRONROD_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const KRONROD_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gauss_kronrod<F: Fn(f64) -> Result<f64>>(f: &F, a: f64, b: f64) -> Result<Panel> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center)?;
    let mut kronrod = f_center * KRONROD_WEIGHTS[7];
    let mut gauss = f_center * GAUSS_WEIGHTS[3];
    for j in 0..7 {
        let dx = half * KRONROD_NODES[j];
        let pair = f(center - dx)? + f(center + dx)?;
        kronrod += KRONROD_WEIGHTS[j] * pair;
        if j % 2 == 1 {
            gauss += GAUSS_WEIGHTS[j / 2] * pair;
        }
    }
    Ok(Panel {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    })
}

/// Globally adaptive Gauss-Kronrod on `[a, b]`: split the panel with the
/// largest error estimate until the summed estimate is below `tol`.
fn integrate<F: Fn(f64) -> Result<f64>>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let mut panels = vec![gauss_kronrod(&f, a, b)?];
    for _ in 0..MAX_SUBDIVISIONS {
        let total_error: f64 = panels.iter().map(|p| p.error).sum();
        if total_error <= tol {
            return Ok(panels.iter().map(|p| p.value).sum());
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        panels.push(gauss_kronrod(&f, p.a, mid)?);
        panels.push(gauss_kronrod(&f, mid, p.b)?);
    }
    Err(Error::Convergence {
        what: "adaptive quadrature",
        iterations: MAX_SUBDIVISIONS,
    })
}

/// `∫_0^inf x^moment p(x) dx` with absolute tolerance [`QUADRATURE_TOL`].
///
/// Three panels: `[0, 1]` under `x = u^q` with `q = max(1, 2/nu)`, which
/// removes the `x^{nu/2 - 1}` singularity at zero; `[1, B]` directly; and
/// `[B, inf)` under `x = B + t/(1-t)`.
pub fn adaptive_quadrature(p: Params, moment: u8) -> Result<f64> {
    if moment > 1 {
        return Err(domain(format!("moment must be 0 or 1, got {moment:?}")));
    }
    let nu = p.nu();
    let lambda = p.lambda();
    let density = |x: f64| -> Result<f64> {
        if x <= 0.0 {
            return Ok(0.0);
        }
        let d = density_series(p, x, SERIES_TOL)?.value;
        Ok(if moment == 1 { x * d } else { d })
    };
    let tol = QUADRATURE_TOL / 3.0;

    let q = if nu < 2.0 { 2.0 / nu } else { 1.0 };
    let head = integrate(
        |u: f64| Ok(density(u.powf(q))? * q * u.powf(q - 1.0)),
        0.0,
        1.0,
        tol,
    )?;

    let split = 1.0 + nu + lambda + 10.0 * (2.0 * nu + 4.0 * lambda).sqrt();
    let body = integrate(density, 1.0, split, tol)?;

    let tail = integrate(
        |t: f64| {
            let s = 1.0 - t;
            Ok(density(split + t / s)? / (s * s))
        },
        0.0,
        1.0,
        tol,
    )?;
    Ok(head + body + tail)
}
