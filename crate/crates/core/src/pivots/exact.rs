//! Exact pivots from Skellam and Poisson sums.

use crate::error::{Error, Result};
use crate::model::{Electorate, Party, PrizeRule, Scenario, VoteProfile};
use crate::special::{
    ln_poisson_pmf_raw, ln_skellam_raw, poisson_cdf, poisson_pmf, poisson_sf, truncation_point,
};

use super::{Convention, PivotMethod, PivotReport, Truncation};

fn check_mean(name: &str, v: f64) -> Result<()> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "{name} must be finite and non-negative, got {v}"
        )))
    }
}

fn party_totals(profile: &VoteProfile, electorate: &Electorate) -> Result<(f64, f64)> {
    let la: f64 = profile.group_vote_means(electorate, Party::A).iter().sum();
    let lb: f64 = profile.group_vote_means(electorate, Party::B).iter().sum();
    check_mean("expected A votes", la)?;
    check_mean("expected B votes", lb)?;
    Ok((la, lb))
}

/// Outcome pivot for an A vote from expected totals `lambda_a`, `lambda_b`.
pub(crate) fn op_a_from_means(la: f64, lb: f64) -> f64 {
    0.5 * ln_skellam_raw(la, lb, 0).exp() + 0.5 * ln_skellam_raw(la, lb, -1).exp()
}

pub(crate) fn op_b_from_means(la: f64, lb: f64) -> f64 {
    -(0.5 * ln_skellam_raw(la, lb, 0).exp() + 0.5 * ln_skellam_raw(la, lb, 1).exp())
}

/// Change in `Pr(A wins)` when one abstainer votes A instead.
pub fn outcome_pivot_a(profile: &VoteProfile, electorate: &Electorate) -> Result<f64> {
    let (la, lb) = party_totals(profile, electorate)?;
    Ok(op_a_from_means(la, lb))
}

/// Change in `Pr(A wins)` when one abstainer votes B instead; never positive.
pub fn outcome_pivot_b(profile: &VoteProfile, electorate: &Electorate) -> Result<f64> {
    let (la, lb) = party_totals(profile, electorate)?;
    Ok(op_b_from_means(la, lb))
}

/// A winner-take-all pivot together with its truncation diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WtaPivot {
    pub value: f64,
    pub a_star: u64,
    pub error_bound: f64,
}

/// Poisson pmf and cdf tabulated on `lo..=hi`.
struct Table {
    lo: u64,
    pmf: Vec<f64>,
    cdf: Vec<f64>,
}

impl Table {
    fn new(lambda: f64, lo: u64, hi: u64) -> Self {
        let len = (hi - lo + 1) as usize;
        let mut pmf = vec![0.0; len];
        if lambda == 0.0 {
            if lo == 0 {
                pmf[0] = 1.0;
            }
            return Self {
                lo,
                pmf,
                cdf: vec![1.0; len],
            };
        }
        // Anchor the ratio recurrence at the mode (clamped into range).
        let mode = (lambda.floor() as u64).clamp(lo, hi);
        let m = (mode - lo) as usize;
        pmf[m] = ln_poisson_pmf_raw(lambda, mode).exp();
        for i in (m + 1)..len {
            pmf[i] = pmf[i - 1] * lambda / (lo + i as u64) as f64;
        }
        for i in (0..m).rev() {
            pmf[i] = pmf[i + 1] * (lo + i as u64 + 1) as f64 / lambda;
        }

        // Lower sums upward below the mean, upper tails downward above it.
        let mut cdf = vec![0.0; len];
        let split = ((lambda.floor() as u64).clamp(lo, hi) - lo) as usize;
        let mut acc = poisson_cdf(lambda, lo as i64).unwrap_or(0.0);
        cdf[0] = acc;
        for i in 1..=split {
            acc += pmf[i];
            cdf[i] = acc.min(1.0);
        }
        let mut tail = poisson_sf(lambda, hi as i64).unwrap_or(0.0);
        for i in (split + 1..len).rev() {
            cdf[i] = 1.0 - tail;
            tail += pmf[i];
        }
        Self { lo, pmf, cdf }
    }

    #[inline]
    fn pmf(&self, x: u64) -> f64 {
        self.pmf[(x - self.lo) as usize]
    }

    #[inline]
    fn cdf(&self, x: u64) -> f64 {
        self.cdf[(x - self.lo) as usize]
    }
}

/// Winner-take-all pivot of group `k` given every group's expected vote count.
pub(crate) fn wta_from_means(
    means: &[f64],
    k: usize,
    zeta: f64,
    convention: Convention,
) -> Result<WtaPivot> {
    if means.len() < 2 {
        return Err(Error::domain(
            "winner-take-all needs at least two competing groups",
        ));
    }
    if k >= means.len() {
        return Err(Error::domain(format!(
            "group index {k} out of range for {} groups",
            means.len()
        )));
    }
    for &m in means {
        check_mean("expected group votes", m)?;
    }
    check_mean("zeta", zeta)?;

    let lam_k = means[k];
    let lam_max = means.iter().cloned().fold(0.0, f64::max);
    let a_star = truncation_point(lam_max);
    // Own-mass window: f_k is negligible outside it and every bracket is at most 1.
    let lo = if lam_k > 0.0 {
        (lam_k - 12.0 * lam_k.sqrt() - 20.0).floor().max(0.0) as u64
    } else {
        0
    };
    let hi = truncation_point(lam_k).min(a_star);
    let omitted = poisson_cdf(lam_k, lo as i64 - 1)? + poisson_sf(lam_k, hi as i64)?;

    let own = Table::new(lam_k, lo, hi);
    let rivals: Vec<f64> = means
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != k)
        .map(|(_, &m)| m)
        .collect();

    let mut sum = 0.0;
    if rivals.iter().all(|&m| m == rivals[0]) {
        let t = Table::new(rivals[0], lo, hi + 1);
        let r = rivals.len() as f64;
        for a in lo..=hi {
            let fk = own.pmf(a);
            let d = t.pmf(a + 1);
            let f1 = t.cdf(a + 1);
            if fk == 0.0 || d == 0.0 || f1 == 0.0 {
                continue;
            }
            // F(a+1)^r - F(a)^r without cancellation.
            let diff = f1.powf(r) * -(r * (-d / f1).ln_1p()).exp_m1();
            sum += fk * diff;
        }
    } else {
        let tables: Vec<Table> = rivals.iter().map(|&m| Table::new(m, lo, hi + 1)).collect();
        let r = tables.len();
        let mut suffix = vec![1.0; r + 1];
        for a in lo..=hi {
            let fk = own.pmf(a);
            if fk == 0.0 {
                continue;
            }
            // prod F_j(a+1) - prod F_j(a) = sum_j prefix(a+1) f_j(a+1) suffix(a)
            for j in (0..r).rev() {
                suffix[j] = suffix[j + 1] * tables[j].cdf(a);
            }
            let mut prefix = 1.0;
            let mut diff = 0.0;
            for (j, t) in tables.iter().enumerate() {
                diff += prefix * t.pmf(a + 1) * suffix[j + 1];
                prefix *= t.cdf(a + 1);
            }
            sum += fk * diff;
        }
    }
    if convention == Convention::Strict {
        sum += (-means.iter().sum::<f64>()).exp();
    }
    let value = (zeta * sum).clamp(0.0, zeta);
    if !value.is_finite() {
        return Err(Error::numeric("winner-take-all pivot is not finite"));
    }
    Ok(WtaPivot {
        value,
        a_star,
        error_bound: zeta * omitted,
    })
}

/// Winner-take-all prize pivot of group `k` for party A's prize `zeta`.
pub fn prize_pivot_wta(
    k: usize,
    profile: &VoteProfile,
    electorate: &Electorate,
    zeta: f64,
    convention: Convention,
) -> Result<WtaPivot> {
    let means = profile.group_vote_means(electorate, Party::A);
    wta_from_means(&means, k, zeta, convention)
}

/// Two-group winner-take-all pivot `zeta Pr(A_j - A_k = 1)` (lenient).
pub fn prize_pivot_wta_k2(
    k: usize,
    profile: &VoteProfile,
    electorate: &Electorate,
    zeta: f64,
) -> Result<f64> {
    if electorate.num_groups() != 2 {
        return Err(Error::domain(format!(
            "the two-group form needs exactly two groups, got {}",
            electorate.num_groups()
        )));
    }
    if k > 1 {
        return Err(Error::domain(format!("group index {k} out of range")));
    }
    check_mean("zeta", zeta)?;
    let means = profile.group_vote_means(electorate, Party::A);
    let (lk, lj) = (means[k], means[1 - k]);
    check_mean("expected group votes", lk)?;
    check_mean("expected group votes", lj)?;
    Ok(zeta * ln_skellam_raw(lj, lk, 1).exp())
}

/// Threshold rule: the pivot is `zeta f_{lambda}(t - 1)`.
pub fn prize_pivot_threshold(lambda: f64, t: u64, zeta: f64) -> Result<f64> {
    if t < 1 {
        return Err(Error::domain("threshold must be at least 1"));
    }
    check_mean("zeta", zeta)?;
    Ok(zeta * poisson_pmf(lambda, t as i64 - 1)?)
}

/// A fixed reward set does not respond to votes.
pub fn prize_pivot_specific() -> f64 {
    0.0
}

pub fn prize_pivot_proportionate(rho: f64) -> f64 {
    rho
}

/// Prize pivot of group `k` for `party` under the scenario's rule.
///
/// Party B's pivot mirrors A's with `q` and `zeta_B` in place of `p` and
/// `zeta_A`. The proportionate rate `rho` applies to both parties.
pub fn prize_pivot(
    scenario: &Scenario,
    party: Party,
    k: usize,
    convention: Convention,
) -> Result<WtaPivot> {
    let means = scenario
        .profile
        .group_vote_means(&scenario.electorate, party);
    let zeta = scenario.prizes.zeta(party);
    let plain = |value| WtaPivot {
        value,
        a_star: 0,
        error_bound: 0.0,
    };
    match &scenario.rule {
        PrizeRule::Wta => wta_from_means(&means, k, zeta, convention),
        PrizeRule::Specific { .. } => Ok(plain(prize_pivot_specific())),
        PrizeRule::Threshold { t } => Ok(plain(prize_pivot_threshold(means[k], *t, zeta)?)),
        PrizeRule::Proportionate { rho } => Ok(plain(prize_pivot_proportionate(*rho))),
    }
}

/// Exact outcome and prize pivots for every group and both parties.
pub fn pivot_report(scenario: &Scenario, convention: Convention) -> Result<PivotReport> {
    let (la, lb) = party_totals(&scenario.profile, &scenario.electorate)?;
    let groups = scenario.electorate.num_groups();
    let mut pp = [Vec::with_capacity(groups), Vec::with_capacity(groups)];
    let mut a_star = 0;
    let mut bound = 0.0;
    for (i, party) in [Party::A, Party::B].into_iter().enumerate() {
        for k in 0..groups {
            let w = prize_pivot(scenario, party, k, convention)?;
            a_star = a_star.max(w.a_star);
            bound += w.error_bound;
            pp[i].push(w.value);
        }
    }
    let [pp_a, pp_b] = pp;
    Ok(PivotReport {
        op_a: op_a_from_means(la, lb),
        op_b: op_b_from_means(la, lb),
        pp_a,
        pp_b,
        method: PivotMethod::Exact,
        truncation: (scenario.rule == PrizeRule::Wta).then_some(Truncation {
            a_star,
            error_bound: bound,
        }),
        std_errors: None,
    })
}
