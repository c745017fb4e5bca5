//! Large-population approximations to the pivots.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::newton_bracketed;
use crate::special::{gaussian_cdf, inverse_mills};

/// Approximate outcome pivot for aggregate rates `p`, `q` and population `n_t`.
pub fn op_approx(p: f64, q: f64, n_t: f64) -> Result<f64> {
    if !(p > 0.0 && q > 0.0 && p <= 1.0 && q <= 1.0) {
        return Err(Error::domain(format!(
            "vote rates must lie in (0, 1], got p = {p}, q = {q}"
        )));
    }
    if !(n_t > 0.0 && n_t.is_finite()) {
        return Err(Error::domain(format!("population must be positive, got {n_t}")));
    }
    let (sp, sq) = (p.sqrt(), q.sqrt());
    let ln = -(2.0f64.ln()) - 0.25 * (p * q).ln() - 0.5 * (PI * n_t).ln()
        + ((sp + sq) / (2.0 * sp)).ln()
        - n_t * (sp - sq).powi(2);
    Ok(ln.exp())
}

/// Stationary point of the Laplace exponent for `K` symmetric groups.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplaceSolution {
    /// Standardized optimum `sqrt(n) (alpha0 - p) / sqrt(p)`.
    pub x0: f64,
    pub alpha0: f64,
    /// `n h_n(alpha0)`
    pub nh: f64,
    /// `|h_n''(alpha0)|`
    pub h2: f64,
    /// Prefactor with `pp_approx = zeta Q / sqrt(n p)`; depends on `K` only.
    pub q: f64,
}

fn check_groups(k: usize) -> Result<()> {
    if k < 2 {
        return Err(Error::domain(format!(
            "winner-take-all needs at least two groups, got {k}"
        )));
    }
    Ok(())
}

fn check_pn(p: f64, n: f64) -> Result<()> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::domain(format!("vote rate must lie in (0, 1], got {p}")));
    }
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::domain(format!("group size must be positive, got {n}")));
    }
    Ok(())
}

/// Solves `x = ((K-2)/2) phi(x)/Phi(x)` and fills in the Laplace quantities.
pub fn solve_alpha0(p: f64, n: f64, k: usize) -> Result<LaplaceSolution> {
    check_groups(k)?;
    check_pn(p, n)?;
    let c = 0.5 * (k as f64 - 2.0);
    let x0 = if k == 2 {
        0.0
    } else {
        let upper = (k as f64 - 2.0) / (2.0 * PI).sqrt();
        newton_bracketed(
            |x| {
                let m = inverse_mills(x);
                (x - c * m, 1.0 + c * m * (x + m))
            },
            0.0,
            upper,
            1e-14,
            200,
        )?
    };
    let r = inverse_mills(x0);
    let kf = k as f64;
    let nh = -x0 * x0 + (kf - 2.0) * gaussian_cdf(x0).ln();
    let s = 1.0 + 0.25 * kf * (kf - 2.0) * r * r;
    Ok(LaplaceSolution {
        x0,
        alpha0: p + x0 * p.sqrt() / n.sqrt(),
        nh,
        h2: 2.0 / p * s,
        q: (kf - 1.0) * nh.exp() / (2.0 * PI.sqrt() * s.sqrt()),
    })
}

/// Laplace approximation to the winner-take-all pivot when all `K` groups
/// expect `n p` votes.
pub fn pp_approx(p: f64, n: f64, k: usize, zeta: f64) -> Result<f64> {
    let sol = solve_alpha0(p, n, k)?;
    Ok(zeta * sol.q / (n * p).sqrt())
}

/// Closed-form lower bound on [`pp_approx`].
pub fn pp_lower_bound(p: f64, n: f64, k: usize, zeta: f64) -> Result<f64> {
    check_groups(k)?;
    check_pn(p, n)?;
    let kf = k as f64;
    let factor = (kf - 1.0) * (-(kf - 2.0).powi(2) / (2.0 * PI)).exp() * 2f64.powf(2.0 - kf)
        / (2f64.sqrt() * (kf * kf - 2.0 * kf + 2.0 * PI).sqrt());
    Ok(zeta / (p * n).sqrt() * factor)
}
