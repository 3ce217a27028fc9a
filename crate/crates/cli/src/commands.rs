use std::io::Write;

use serde::Serialize;
use serde_json::{Map, Value};

use ncx2::density::D2_CONSISTENCY_TOL;
use ncx2::modes::{mode_report_with_tol, Bound};
use ncx2::shape::classify_with_tol;
use ncx2::{critical_lambda, density_bessel, log_density_derivatives, GridSpec, Params, Spacing};

use crate::output::{emit, sig12, sig12_opt, Format, Meta, Payload};
use crate::CliError;

pub const DEFAULT_TOL: f64 = 1e-8;

pub const TABLE_NUS: [f64; 7] = [0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75];

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SpacingArg {
    Linear,
    Log,
}

pub enum EvalPoints {
    Single(f64),
    Grid {
        lo: f64,
        hi: f64,
        points: usize,
        spacing: SpacingArg,
    },
}

fn params(nu: f64, lambda: f64) -> Result<Params, CliError> {
    Ok(Params::new(nu, lambda)?)
}

fn check_tol(tol: f64) -> Result<(), CliError> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "--tol must be finite and > 0, got {tol}"
        )))
    }
}

fn param_fields(p: Params) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("nu".into(), Value::from(p.nu()));
    m.insert("lambda".into(), Value::from(p.lambda()));
    m
}

#[derive(Serialize)]
struct EvalRow {
    x: f64,
    density: f64,
    log_density: f64,
    d1: f64,
    d2: f64,
}

pub fn eval(
    out: &mut impl Write,
    format: Format,
    nu: f64,
    lambda: f64,
    points: EvalPoints,
) -> Result<(), CliError> {
    let p = params(nu, lambda)?;
    let xs = match points {
        EvalPoints::Single(x) => vec![x],
        EvalPoints::Grid {
            lo,
            hi,
            points,
            spacing,
        } => {
            let spacing = match spacing {
                SpacingArg::Linear => Spacing::Linear,
                SpacingArg::Log => Spacing::Log,
            };
            GridSpec::new(lo, hi, points, spacing)?.abscissae()
        }
    };
    // Evaluate at the printed abscissa so each row is reproducible from its
    // own x column.
    let rows = xs
        .into_iter()
        .map(sig12)
        .map(|x| {
            let d = log_density_derivatives(p, x)?;
            Ok(EvalRow {
                x,
                density: sig12(density_bessel(p, x)?),
                log_density: sig12(d.l),
                d1: sig12(d.d1),
                d2: sig12(d.d2),
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let meta = Meta::new("eval", &[("d2_consistency", D2_CONSISTENCY_TOL)]);
    emit(
        out,
        format,
        meta,
        Payload::Table {
            fields: param_fields(p),
            rows,
        },
    )
}

#[derive(Serialize)]
struct ClassifyRecord {
    nu: f64,
    lambda: f64,
    log_concave: bool,
    decreasing: bool,
    bimodal: bool,
    convex_then_concave: bool,
    critical_lambda: Option<f64>,
}

pub fn classify(
    out: &mut impl Write,
    format: Format,
    nu: f64,
    lambda: f64,
    tol: f64,
) -> Result<(), CliError> {
    check_tol(tol)?;
    let p = params(nu, lambda)?;
    let s = classify_with_tol(p, tol)?;
    let record = ClassifyRecord {
        nu: p.nu(),
        lambda: p.lambda(),
        log_concave: s.log_concave,
        decreasing: s.decreasing,
        bimodal: s.bimodal,
        convex_then_concave: s.convex_then_concave,
        critical_lambda: sig12_opt(s.critical_lambda),
    };
    emit(
        out,
        format,
        Meta::new("classify", &[("critical_lambda", tol)]),
        Payload::Record(record),
    )
}

#[derive(Serialize)]
struct CriticalRow {
    nu: f64,
    lambda_nu: f64,
    iterations: usize,
    bracket_lo: f64,
    bracket_hi: f64,
}

/// `steps` equally spaced values from `lo` to `hi` inclusive.
pub fn nu_range(lo: f64, hi: f64, steps: usize) -> Result<Vec<f64>, CliError> {
    if steps == 0 {
        return Err(CliError::Usage("--steps must be at least 1".into()));
    }
    if lo.is_nan() || hi.is_nan() || hi < lo {
        return Err(CliError::Usage(format!(
            "--nu-max ({hi}) must be >= --nu-min ({lo})"
        )));
    }
    if steps == 1 {
        return Ok(vec![lo]);
    }
    let step = (hi - lo) / (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| {
            if i + 1 == steps {
                hi
            } else {
                lo + step * i as f64
            }
        })
        .collect())
}

pub fn critical_table(
    out: &mut impl Write,
    format: Format,
    nus: &[f64],
    tol: f64,
) -> Result<(), CliError> {
    check_tol(tol)?;
    if let Some(bad) = nus.iter().find(|&&nu| !(nu > 0.0 && nu < 2.0)) {
        return Err(CliError::Usage(format!(
            "--nu values must lie in (0, 2), got {bad}"
        )));
    }
    let rows = nus
        .iter()
        .map(|&nu| {
            let c = critical_lambda(nu, tol)?;
            Ok(CriticalRow {
                nu: sig12(nu),
                lambda_nu: sig12(c.lambda_nu),
                iterations: c.iterations,
                bracket_lo: sig12(c.bracket.0),
                bracket_hi: sig12(c.bracket.1),
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let meta = Meta::new("critical-table", &[("critical_lambda", tol)]);
    emit(
        out,
        format,
        meta,
        Payload::Table {
            fields: Map::new(),
            rows,
        },
    )
}

#[derive(Serialize)]
struct ModesRecord {
    nu: f64,
    lambda: f64,
    zero_is_mode: bool,
    interior_mode: Option<f64>,
    antimode: Option<f64>,
    inflection_point: Option<f64>,
    lower_bound: Option<f64>,
    lower_strict: Option<bool>,
    lower_bound_source: Option<&'static str>,
    upper_bound: Option<f64>,
    upper_strict: Option<bool>,
    upper_bound_source: Option<&'static str>,
}

fn bound_parts(b: Option<Bound>) -> (Option<f64>, Option<bool>, Option<&'static str>) {
    match b {
        Some(b) => (
            Some(sig12(b.value)),
            Some(b.strict),
            Some(b.source.as_str()),
        ),
        None => (None, None, None),
    }
}

pub fn modes(
    out: &mut impl Write,
    format: Format,
    nu: f64,
    lambda: f64,
    tol: f64,
) -> Result<(), CliError> {
    check_tol(tol)?;
    let p = params(nu, lambda)?;
    let r = mode_report_with_tol(p, tol)?;
    let (lower_bound, lower_strict, lower_bound_source) = bound_parts(r.bounds.map(|b| b.lower));
    let (upper_bound, upper_strict, upper_bound_source) =
        bound_parts(r.bounds.and_then(|b| b.upper));
    let record = ModesRecord {
        nu: p.nu(),
        lambda: p.lambda(),
        zero_is_mode: r.zero_is_mode,
        interior_mode: sig12_opt(r.interior_mode),
        antimode: sig12_opt(r.antimode),
        inflection_point: sig12_opt(r.inflection_point),
        lower_bound,
        lower_strict,
        lower_bound_source,
        upper_bound,
        upper_strict,
        upper_bound_source,
    };
    emit(
        out,
        format,
        Meta::new("modes", &[("mode", tol)]),
        Payload::Record(record),
    )
}
