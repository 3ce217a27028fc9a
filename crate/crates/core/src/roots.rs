//! Sign-change bisection shared by the shape and mode solvers.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub(crate) struct Bisection {
    pub root: f64,
    pub lo: f64,
    pub hi: f64,
    pub iterations: usize,
}

const MAX_ITER: usize = 2000;

/// Bisect `f` on `[lo, hi]`, which must straddle a sign change.
///
/// Stops when `hi - lo <= width(mid)` or the bracket cannot shrink further
/// in floating point.
pub(crate) fn bisect<F, W>(mut f: F, mut lo: f64, mut hi: f64, width: W) -> Result<Bisection>
where
    F: FnMut(f64) -> Result<f64>,
    W: Fn(f64) -> f64,
{
    let f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo == 0.0 {
        return Ok(Bisection {
            root: lo,
            lo,
            hi: lo,
            iterations: 0,
        });
    }
    if f_hi == 0.0 {
        return Ok(Bisection {
            root: hi,
            lo: hi,
            hi,
            iterations: 0,
        });
    }
    if f_lo.signum() == f_hi.signum() || f_lo.is_nan() || f_hi.is_nan() {
        return Err(Error::Bracket(format!(
            "f({lo}) = {f_lo:?} and f({hi}) = {f_hi:?} have the same sign"
        )));
    }
    let lo_negative = f_lo < 0.0;
    let mut iterations = 0;
    while iterations < MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= width(mid) || mid <= lo || mid >= hi {
            return Ok(Bisection {
                root: mid,
                lo,
                hi,
                iterations,
            });
        }
        iterations += 1;
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(Bisection {
                root: mid,
                lo: mid,
                hi: mid,
                iterations,
            });
        }
        if (f_mid < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Convergence {
        what: "bisection",
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        let b = bisect(|x| Ok(x * x - 2.0), 0.0, 2.0, |_| 1e-14).unwrap();
        assert!((b.root - 2f64.sqrt()).abs() < 1e-14);
        assert!(b.lo <= 2f64.sqrt() && 2f64.sqrt() <= b.hi);
    }

    #[test]
    fn decreasing_function() {
        let b = bisect(|x| Ok(1.0 - x), 0.0, 3.0, |_| 1e-12).unwrap();
        assert!((b.root - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_same_sign() {
        let err = bisect(|x| Ok(x * x + 1.0), -1.0, 1.0, |_| 1e-12).unwrap_err();
        assert!(matches!(err, Error::Bracket(_)));
    }
}
