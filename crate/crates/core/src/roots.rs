//! Bracketed scalar root finding.

use crate::error::{Error, Result};

/// Bisection on `[lo, hi]` where `f(lo)` and `f(hi)` differ in sign.
///
/// Stops once the bracket is narrower than `xtol` or `f` vanishes exactly.
pub fn bisect<F>(mut f: F, mut lo: f64, mut hi: f64, xtol: f64, max_iter: usize) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut flo = f(lo)?;
    let fhi = f(hi)?;
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::numeric(format!(
            "no sign change on [{lo}, {hi}]: f = {flo}, {fhi}"
        )));
    }
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= xtol || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Err(Error::numeric(format!(
        "bisection did not converge in {max_iter} iterations"
    )))
}

/// Newton's method kept inside a shrinking bracket.
///
/// `fdf` returns `(f(x), f'(x))`. A Newton step that leaves the bracket, or
/// fails to halve the residual, is replaced by a bisection step. Converges
/// when `|f(x)| < ftol`.
pub fn newton_bracketed<F>(
    mut fdf: F,
    mut lo: f64,
    mut hi: f64,
    ftol: f64,
    max_iter: usize,
) -> Result<f64>
where
    F: FnMut(f64) -> (f64, f64),
{
    let (flo, _) = fdf(lo);
    let (fhi, _) = fdf(hi);
    if flo.abs() < ftol {
        return Ok(lo);
    }
    if fhi.abs() < ftol {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::numeric(format!(
            "no sign change on [{lo}, {hi}]: f = {flo}, {fhi}"
        )));
    }
    let lo_sign = flo.signum();
    let mut x = 0.5 * (lo + hi);
    let mut last_f = f64::INFINITY;
    for _ in 0..max_iter {
        let (fx, dfx) = fdf(x);
        if !fx.is_finite() {
            return Err(Error::numeric(format!("non-finite residual at x = {x}")));
        }
        if fx.abs() < ftol {
            return Ok(x);
        }
        if fx.signum() == lo_sign {
            lo = x;
        } else {
            hi = x;
        }
        let step = x - fx / dfx;
        let newton_ok = dfx != 0.0 && step > lo && step < hi && fx.abs() < 0.5 * last_f;
        x = if newton_ok { step } else { 0.5 * (lo + hi) };
        last_f = fx.abs();
        if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
            let (fx, _) = fdf(x);
            if fx.abs() < ftol {
                return Ok(x);
            }
            return Err(Error::numeric(format!(
                "bracket collapsed at x = {x} with residual {fx:e}"
            )));
        }
    }
    Err(Error::numeric(format!(
        "Newton iteration did not converge in {max_iter} iterations"
    )))
}
