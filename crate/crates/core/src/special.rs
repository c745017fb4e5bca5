//! Scalar special-function kernels.
//!
//! Everything that multiplies a tiny exponential by a huge one (Poisson
//! masses at large means, `e^{-x} I_m(x)` at large `x`) is carried in log
//! space and exponentiated only at the end. Poisson masses use Loader's
//! saddle-point form (`stirlerr` + `bd0`), which keeps full relative
//! precision for means in the hundreds of thousands.

use std::f64::consts::{PI, SQRT_2};
use std::ops::{Add, Mul};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `ln(sqrt(2 pi))`
pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
/// `1 / sqrt(2 pi)`
pub const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Argument at which `bessel_i_scaled` switches from the power series to the
/// large-argument expansion.
pub const BESSEL_SWITCH: f64 = 30.0;

/// Below this argument `inverse_mills` evaluates `phi/Phi` directly.
const MILLS_ASYMPTOTIC_BELOW: f64 = -30.0;

/// A non-negative quantity stored as its natural logarithm.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct LogScaledValue {
    pub log_magnitude: f64,
}

impl LogScaledValue {
    pub const ZERO: Self = Self {
        log_magnitude: f64::NEG_INFINITY,
    };
    pub const ONE: Self = Self { log_magnitude: 0.0 };

    pub fn from_log(log_magnitude: f64) -> Self {
        Self { log_magnitude }
    }

    /// Panics in debug builds on negative input.
    pub fn from_value(v: f64) -> Self {
        debug_assert!(v >= 0.0);
        Self {
            log_magnitude: v.ln(),
        }
    }

    pub fn ln(self) -> f64 {
        self.log_magnitude
    }

    pub fn value(self) -> f64 {
        self.log_magnitude.exp()
    }

    pub fn is_zero(self) -> bool {
        self.log_magnitude == f64::NEG_INFINITY
    }
}

impl Mul for LogScaledValue {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::from_log(self.log_magnitude + rhs.log_magnitude)
    }
}

impl Add for LogScaledValue {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let (hi, lo) = if self.log_magnitude >= rhs.log_magnitude {
            (self.log_magnitude, rhs.log_magnitude)
        } else {
            (rhs.log_magnitude, self.log_magnitude)
        };
        if hi == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        Self::from_log(hi + (lo - hi).exp().ln_1p())
    }
}

fn check_rate(name: &str, lambda: f64) -> Result<()> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::domain(format!(
            "{name} must be a finite non-negative rate, got {lambda}"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Factorials and Poisson masses
// ---------------------------------------------------------------------------

/// Error of Stirling's approximation: `ln n! - [(n + 1/2) ln n - n + ln sqrt(2 pi)]`.
fn stirlerr(n: f64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if n <= 15.0 {
        let k = n as u64;
        let lnfact: f64 = (2..=k).map(|i| (i as f64).ln()).sum();
        return lnfact - (n + 0.5) * n.ln() + n - LN_SQRT_2PI;
    }
    let nn = n * n;
    if n > 500.0 {
        (S0 - S1 / nn) / n
    } else if n > 80.0 {
        (S0 - (S1 - S2 / nn) / nn) / n
    } else if n > 35.0 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / n
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / n
    }
}

/// Deviance term `x ln(x/m) + m - x`, accurate when `x` is close to `m`.
fn bd0(x: f64, m: f64) -> f64 {
    if (x - m).abs() < 0.1 * (x + m) {
        let v = (x - m) / (x + m);
        let mut s = (x - m) * v;
        let mut ej = 2.0 * x * v;
        let v2 = v * v;
        for j in 1..1000 {
            ej *= v2;
            let s1 = s + ej / f64::from(2 * j + 1);
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        s
    } else {
        x * (x / m).ln() + m - x
    }
}

/// `ln k!`
pub fn ln_factorial(k: u64) -> f64 {
    if k < 2 {
        return 0.0;
    }
    let n = k as f64;
    (n + 0.5) * n.ln() - n + LN_SQRT_2PI + stirlerr(n)
}

/// `ln f_lambda(x)` without argument checks.
pub(crate) fn ln_poisson_pmf_raw(lambda: f64, x: u64) -> f64 {
    if lambda == 0.0 {
        return if x == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if x == 0 {
        return -lambda;
    }
    let xf = x as f64;
    -0.5 * (2.0 * PI * xf).ln() - stirlerr(xf) - bd0(xf, lambda)
}

/// Natural log of the Poisson mass `lambda^x e^{-lambda} / x!`.
pub fn ln_poisson_pmf(lambda: f64, x: i64) -> Result<f64> {
    check_rate("lambda", lambda)?;
    if x < 0 {
        return Err(Error::domain(format!("count must be non-negative, got {x}")));
    }
    Ok(ln_poisson_pmf_raw(lambda, x as u64))
}

/// Poisson probability mass `f_lambda(x)`.
pub fn poisson_pmf(lambda: f64, x: i64) -> Result<f64> {
    ln_poisson_pmf(lambda, x).map(f64::exp)
}

/// Sums the two Poisson tails by recurrence away from the bulk.
///
/// Returns `(P(X <= x), P(X > x))`; the smaller of the two is computed
/// directly and the other as its complement.
fn poisson_tails(lambda: f64, x: u64) -> (f64, f64) {
    if lambda == 0.0 {
        return (1.0, 0.0);
    }
    let xf = x as f64;
    if xf <= lambda {
        // Lower tail: terms shrink by z/lambda going down from x.
        let mut term = ln_poisson_pmf_raw(lambda, x).exp();
        let mut sum = term;
        let mut z = x;
        while z > 0 && term > sum * 1e-18 {
            term *= z as f64 / lambda;
            sum += term;
            z -= 1;
        }
        let lower = sum.min(1.0);
        (lower, 1.0 - lower)
    } else {
        // Upper tail: terms shrink by lambda/(z+1) going up from x+1.
        let mut z = x + 1;
        let mut term = ln_poisson_pmf_raw(lambda, z).exp();
        let mut sum = term;
        while term > sum * 1e-18 {
            z += 1;
            term *= lambda / z as f64;
            sum += term;
        }
        let upper = sum.min(1.0);
        (1.0 - upper, upper)
    }
}

/// Poisson distribution function `F_lambda(x) = sum_{z <= x} f_lambda(z)`;
/// zero for negative `x`.
pub fn poisson_cdf(lambda: f64, x: i64) -> Result<f64> {
    check_rate("lambda", lambda)?;
    if x < 0 {
        return Ok(0.0);
    }
    Ok(poisson_tails(lambda, x as u64).0)
}

/// Upper tail `P(X > x)` computed without cancellation.
pub fn poisson_sf(lambda: f64, x: i64) -> Result<f64> {
    check_rate("lambda", lambda)?;
    if x < 0 {
        return Ok(1.0);
    }
    Ok(poisson_tails(lambda, x as u64).1)
}

/// Truncation point `ceil(mean + 12 sqrt(mean) + 20)` used for Poisson sums.
pub fn truncation_point(mean: f64) -> u64 {
    (mean + 12.0 * mean.sqrt() + 20.0).ceil() as u64
}

// ---------------------------------------------------------------------------
// Modified Bessel functions of the first kind
// ---------------------------------------------------------------------------

fn bessel_series_scaled(m: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let q = half * half;
    let mf = f64::from(m);
    let ln_first = if m == 0 {
        0.0
    } else {
        mf * half.ln() - ln_factorial(u64::from(m))
    };
    let mut term = (ln_first - x).exp();
    let mut sum = term;
    let mut k = 0.0;
    while term > sum * 1e-18 {
        k += 1.0;
        term *= q / (k * (k + mf));
        sum += term;
    }
    sum
}

fn bessel_asymptotic_scaled(m: u32, x: f64) -> Option<f64> {
    let mu = 4.0 * f64::from(m) * f64::from(m);
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    for k in 1..200 {
        let odd = f64::from(2 * k - 1);
        let next = -term * (mu - odd * odd) / (f64::from(k) * 8.0 * x);
        if next == 0.0 {
            return Some(sum / (2.0 * PI * x).sqrt());
        }
        if next.abs() > term.abs() {
            // Series started diverging before reaching full precision.
            return None;
        }
        sum += next;
        term = next;
        if term.abs() < 1e-17 * sum.abs() {
            return Some(sum / (2.0 * PI * x).sqrt());
        }
    }
    None
}

/// Miller backward recurrence normalized by `e^{-x} I_0(x)`.
fn bessel_miller_scaled(m: u32, x: f64) -> f64 {
    let top = f64::from(m).max(x);
    let start = 2 * ((top + (200.0 * top).sqrt()) as u32) + 10;
    let tox = 2.0 / x;
    let (mut bip, mut bi) = (0.0_f64, 1.0_f64);
    let mut ans = 0.0;
    for j in (1..=start).rev() {
        let bim = bip + f64::from(j) * tox * bi;
        bip = bi;
        bi = bim;
        if bi.abs() > 1e250 {
            ans *= 1e-250;
            bi *= 1e-250;
            bip *= 1e-250;
        }
        if j == m {
            ans = bip;
        }
    }
    ans / bi * ive_raw(0, x)
}

pub(crate) fn ive_raw(m: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if m == 0 { 1.0 } else { 0.0 };
    }
    if x < BESSEL_SWITCH {
        return bessel_series_scaled(m, x);
    }
    if let Some(v) = bessel_asymptotic_scaled(m, x) {
        return v;
    }
    bessel_miller_scaled(m, x)
}

/// Exponentially scaled modified Bessel function `e^{-x} I_m(x)`.
///
/// Power series below `x = 30`, the large-argument expansion (summed to
/// machine precision) above. Orders for which the expansion does not reach
/// full precision fall back to Miller's backward recurrence.
pub fn bessel_i_scaled(m: u32, x: f64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::domain(format!(
            "Bessel argument must be finite and non-negative, got {x}"
        )));
    }
    Ok(ive_raw(m, x))
}

// ---------------------------------------------------------------------------
// Skellam
// ---------------------------------------------------------------------------

pub(crate) fn ln_skellam_raw(l1: f64, l2: f64, m: i64) -> f64 {
    if l1 == 0.0 && l2 == 0.0 {
        return if m == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if l2 == 0.0 {
        return if m < 0 {
            f64::NEG_INFINITY
        } else {
            ln_poisson_pmf_raw(l1, m as u64)
        };
    }
    if l1 == 0.0 {
        return if m > 0 {
            f64::NEG_INFINITY
        } else {
            ln_poisson_pmf_raw(l2, m.unsigned_abs())
        };
    }
    let (s1, s2) = (l1.sqrt(), l2.sqrt());
    let x = 2.0 * s1 * s2;
    let order = u32::try_from(m.unsigned_abs()).unwrap_or(u32::MAX);
    let d = s1 - s2;
    -(d * d) + 0.5 * m as f64 * (l1.ln() - l2.ln()) + ive_raw(order, x).ln()
}

/// Natural log of `P(X - Y = m)` for independent `X ~ Poisson(l1)`, `Y ~ Poisson(l2)`.
pub fn ln_skellam_pmf(lambda1: f64, lambda2: f64, m: i64) -> Result<f64> {
    check_rate("lambda1", lambda1)?;
    check_rate("lambda2", lambda2)?;
    Ok(ln_skellam_raw(lambda1, lambda2, m))
}

/// Skellam mass `e^{-(l1+l2)} (l1/l2)^{m/2} I_|m|(2 sqrt(l1 l2))`.
pub fn skellam_pmf(lambda1: f64, lambda2: f64, m: i64) -> Result<f64> {
    ln_skellam_pmf(lambda1, lambda2, m).map(f64::exp)
}

// ---------------------------------------------------------------------------
// Gaussian
// ---------------------------------------------------------------------------

/// Standard normal density.
pub fn gaussian_pdf(u: f64) -> f64 {
    FRAC_1_SQRT_2PI * (-0.5 * u * u).exp()
}

/// Standard normal distribution function.
pub fn gaussian_cdf(u: f64) -> f64 {
    0.5 * libm::erfc(-u / SQRT_2)
}

/// Inverse of the standard normal distribution function (Wichura's AS 241).
pub fn gaussian_quantile(q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::domain(format!(
            "quantile level must lie in (0, 1), got {q}"
        )));
    }
    Ok(ppnd16(q))
}

fn poly(coef: &[f64], x: f64) -> f64 {
    coef.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn ppnd16(p: f64) -> f64 {
    const A: [f64; 8] = [
        3.387_132_872_796_366_608,
        1.331_416_678_917_843_774_5e2,
        1.971_590_950_306_551_442_7e3,
        1.373_169_376_550_946_112_5e4,
        4.592_195_393_154_987_145_7e4,
        6.726_577_092_700_870_085_3e4,
        3.343_057_558_358_812_810_5e4,
        2.509_080_928_730_122_672_7e3,
    ];
    const B: [f64; 8] = [
        1.0,
        4.231_333_070_160_091_125_2e1,
        6.871_870_074_920_579_083e2,
        5.394_196_021_424_751_107_7e3,
        2.121_379_430_158_659_586_7e4,
        3.930_789_580_009_271_061e4,
        2.872_908_573_572_194_267_4e4,
        5.226_495_278_852_854_561e3,
    ];
    const C: [f64; 8] = [
        1.423_437_110_749_683_577_34,
        4.630_337_846_156_545_295_9,
        5.769_497_221_460_691_405_5,
        3.647_848_324_763_204_605_04,
        1.270_458_252_452_368_382_58,
        2.417_807_251_774_506_117_7e-1,
        2.272_384_498_926_918_458_33e-2,
        7.745_450_142_783_414_076_4e-4,
    ];
    const D: [f64; 8] = [
        1.0,
        2.053_191_626_637_758_821_87,
        1.676_384_830_183_803_849_4,
        6.897_673_349_851_000_045_5e-1,
        1.481_039_764_274_800_745_9e-1,
        1.519_866_656_361_645_719_66e-2,
        5.475_938_084_995_344_946e-4,
        1.050_750_071_644_416_843_24e-9,
    ];
    const E: [f64; 8] = [
        6.657_904_643_501_103_777_2,
        5.463_784_911_164_114_369_9,
        1.784_826_539_917_291_335_8,
        2.965_605_718_285_048_912_3e-1,
        2.653_218_952_657_612_309_3e-2,
        1.242_660_947_388_078_438_6e-3,
        2.711_555_568_743_487_578_15e-5,
        2.010_334_399_292_288_132_65e-7,
    ];
    const F: [f64; 8] = [
        1.0,
        5.998_322_065_558_879_376_9e-1,
        1.369_298_809_227_358_053_1e-1,
        1.487_536_129_085_061_485_25e-2,
        7.868_691_311_456_132_591e-4,
        1.846_318_317_510_054_681_8e-5,
        1.421_511_758_316_445_888_7e-7,
        2.044_263_103_389_939_785_64e-15,
    ];

    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q * poly(&A, r) / poly(&B, r);
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let mut r = (-tail.ln()).sqrt();
    let val = if r <= 5.0 {
        r -= 1.6;
        poly(&C, r) / poly(&D, r)
    } else {
        r -= 5.0;
        poly(&E, r) / poly(&F, r)
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

/// Inverse Mills ratio `phi(u) / Phi(u)`.
///
/// Below `u = -30` the ratio is computed from the asymptotic expansion of
/// the Mills ratio, where `Phi(u)` is too small to divide by safely.
pub fn inverse_mills(u: f64) -> f64 {
    if u >= MILLS_ASYMPTOTIC_BELOW {
        return gaussian_pdf(u) / gaussian_cdf(u);
    }
    let x = -u;
    let inv2 = 1.0 / (x * x);
    // Mills ratio R(x) = (1/x) sum_k (-1)^k (2k-1)!! / x^{2k}
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..8 {
        term *= -f64::from(2 * k - 1) * inv2;
        sum += term;
    }
    x / sum
}
