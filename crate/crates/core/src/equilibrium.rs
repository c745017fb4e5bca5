//! Voter thresholds, best responses and equilibrium solvers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    Electorate, EvaluationDistribution, Party, PreferenceModel, PrizeRule, PrizeSpec, Rivalry,
    Scenario, VoteProfile,
};
use crate::pivots::exact::{op_a_from_means, op_b_from_means, wta_from_means};
use crate::pivots::{pivot_report, pp_approx, Convention, PivotMethod, PivotReport};
use crate::roots::bisect;
use crate::special::poisson_cdf;

/// Per-group expected vote counts at or above this use the Laplace pivot
/// in the dominant-party and polarized solvers.
pub const EXACT_PIVOT_LIMIT: f64 = 1e4;

/// Outcome pivots below this are treated as zero.
const OP_FLOOR: f64 = 1e-300;

/// Private-evaluation cut-offs for every group.
///
/// A member of group `k` with evaluation `eps` prefers voting A to abstaining
/// iff `eps > tau_a[k]`, voting B to abstaining iff `eps < tau_b[k]`, and A
/// to B iff `eps > tau_ab[k]`. Infinite entries mark comparisons decided by
/// prizes alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSet {
    #[serde(with = "inf_vec")]
    pub tau_a: Vec<f64>,
    #[serde(with = "inf_vec")]
    pub tau_b: Vec<f64>,
    #[serde(with = "inf_vec")]
    pub tau_ab: Vec<f64>,
}

/// Serializes infinities as the strings "inf" and "-inf" (JSON has no
/// infinite numbers).
mod inf_vec {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Cell {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(|&x| {
                if x == f64::INFINITY {
                    Cell::Text("inf".into())
                } else if x == f64::NEG_INFINITY {
                    Cell::Text("-inf".into())
                } else {
                    Cell::Num(x)
                }
            })
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<Cell>::deserialize(d)?
            .into_iter()
            .map(|c| match c {
                Cell::Num(x) => Ok(x),
                Cell::Text(t) => match t.as_str() {
                    "inf" => Ok(f64::INFINITY),
                    "-inf" => Ok(f64::NEG_INFINITY),
                    _ => Err(serde::de::Error::custom(format!("bad threshold {t}"))),
                },
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    FixedPoint,
    Symmetric,
    Dominant,
    Polarized,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// The best response reproduces the profile to within tolerance.
    Converged,
    /// Converged with some vote probability pinned at 0 or 1.
    Boundary,
    /// The update norm stopped decreasing.
    Oscillating,
    MaxIterations,
}

impl Status {
    pub fn is_converged(self) -> bool {
        matches!(self, Status::Converged | Status::Boundary)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumResult {
    pub family: Family,
    pub profile: VoteProfile,
    pub thresholds: ThresholdSet,
    pub pivots: PivotReport,
    pub expected_votes_a: f64,
    pub expected_votes_b: f64,
    /// Expected share of the electorate that votes.
    pub turnout: f64,
    pub iterations: usize,
    /// Fixed-point families: `|BR(x) - x|_inf`. Bisection families: final
    /// bracket width in the solved probability.
    pub residual: f64,
    pub status: Status,
    /// False when an ex-post check of the family's assumptions failed.
    pub valid: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a_dominates: Option<bool>,
    pub warnings: Vec<String>,
}

fn check_cost(c: f64) -> Result<()> {
    if c > 0.0 && c.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("voting cost must be positive, got {c}")))
    }
}

/// Thresholds implied by a set of pivots, policy bias `gamma` and cost `c`.
pub fn thresholds_from_pivots(report: &PivotReport, gamma: f64, c: f64) -> ThresholdSet {
    let k = report.pp_a.len();
    let (op_a, op_b) = (report.op_a, report.op_b);
    let mut t = ThresholdSet {
        tau_a: Vec::with_capacity(k),
        tau_b: Vec::with_capacity(k),
        tau_ab: Vec::with_capacity(k),
    };
    for (&ppa, &ppb) in report.pp_a.iter().zip(&report.pp_b) {
        t.tau_a.push(if op_a > OP_FLOOR {
            (c - ppa) / op_a - gamma
        } else if ppa >= c {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        });
        t.tau_b.push(if -op_b > OP_FLOOR {
            (c - ppb) / op_b - gamma
        } else if ppb >= c {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        });
        let d = op_a - op_b;
        t.tau_ab.push(if d > OP_FLOOR {
            (ppb - ppa) / d - gamma
        } else if ppa > ppb {
            f64::NEG_INFINITY
        } else if ppa < ppb {
            f64::INFINITY
        } else {
            0.0
        });
    }
    t
}

/// Exact pivots and the thresholds they imply at the scenario's profile.
pub fn thresholds(
    scenario: &Scenario,
    c: f64,
    convention: Convention,
) -> Result<(ThresholdSet, PivotReport)> {
    check_cost(c)?;
    let report = pivot_report(scenario, convention)?;
    Ok((thresholds_from_pivots(&report, scenario.prefs.gamma, c), report))
}

fn response(t: &ThresholdSet, g: &EvaluationDistribution) -> VoteProfile {
    let (p, q) = (0..t.tau_a.len())
        .map(|k| {
            let hi = t.tau_a[k].max(t.tau_ab[k]);
            let lo = t.tau_b[k].min(t.tau_ab[k]);
            (1.0 - g.cdf(hi), g.cdf(lo))
        })
        .unzip();
    VoteProfile { p, q }
}

/// Vote probabilities that are optimal against the scenario's profile.
pub fn best_response(scenario: &Scenario, c: f64, convention: Convention) -> Result<VoteProfile> {
    let (t, _) = thresholds(scenario, c, convention)?;
    Ok(response(&t, &scenario.prefs.g))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPointOptions {
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Iterations without a new smallest update before giving up.
    pub oscillation_window: usize,
    pub convention: Convention,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self {
            damping: 0.3,
            tol: 1e-10,
            max_iter: 10_000,
            oscillation_window: 500,
            convention: Convention::Strict,
        }
    }
}

/// Named starting profiles selecting among equilibrium families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitPreset {
    /// Use the scenario's own profile.
    Scenario,
    Competitive,
    DominantA,
    DominantB,
    Empty,
}

impl InitPreset {
    pub fn profile(self, scenario: &Scenario) -> VoteProfile {
        let k = scenario.electorate.num_groups();
        match self {
            InitPreset::Scenario => scenario.profile.clone(),
            InitPreset::Competitive => VoteProfile::uniform(k, 0.25, 0.25),
            InitPreset::DominantA => VoteProfile::uniform(k, 0.5, 0.05),
            InitPreset::DominantB => VoteProfile::uniform(k, 0.05, 0.5),
            InitPreset::Empty => VoteProfile::uniform(k, 0.0, 0.0),
        }
    }
}

fn on_boundary(profile: &VoteProfile) -> bool {
    profile
        .p
        .iter()
        .chain(&profile.q)
        .any(|&x| x == 0.0 || x == 1.0)
        || profile
            .p
            .iter()
            .zip(&profile.q)
            .any(|(p, q)| p + q >= 1.0)
}

fn assemble(
    family: Family,
    scenario: &Scenario,
    thresholds: ThresholdSet,
    pivots: PivotReport,
    iterations: usize,
    residual: f64,
    status: Status,
) -> EquilibriumResult {
    let el = &scenario.electorate;
    let a: f64 = scenario.profile.group_vote_means(el, Party::A).iter().sum();
    let b: f64 = scenario.profile.group_vote_means(el, Party::B).iter().sum();
    EquilibriumResult {
        family,
        profile: scenario.profile.clone(),
        thresholds,
        pivots,
        expected_votes_a: a,
        expected_votes_b: b,
        turnout: (a + b) / el.total(),
        iterations,
        residual,
        status,
        valid: status.is_converged(),
        a_dominates: None,
        warnings: Vec::new(),
    }
}

/// Damped best-response iteration from `init`.
pub fn solve_fixed_point(
    scenario: &Scenario,
    c: f64,
    init: &VoteProfile,
    opts: &FixedPointOptions,
) -> Result<EquilibriumResult> {
    check_cost(c)?;
    if !(opts.damping > 0.0 && opts.damping <= 1.0) {
        return Err(Error::domain(format!(
            "damping must lie in (0, 1], got {}",
            opts.damping
        )));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::domain("tolerance must be positive"));
    }
    let mut current = scenario.with_profile(init.clone()).validated()?;
    let w = opts.damping;
    let mut best = f64::INFINITY;
    let mut best_at = 0;
    let mut status = Status::MaxIterations;
    let mut iterations = 0;
    let (mut t, mut report) = thresholds(&current, c, opts.convention)?;
    let mut residual;
    loop {
        let br = response(&t, &current.prefs.g);
        residual = br.distance(&current.profile);
        if residual < opts.tol {
            status = if on_boundary(&current.profile) {
                Status::Boundary
            } else {
                Status::Converged
            };
            break;
        }
        if residual < best {
            best = residual;
            best_at = iterations;
        } else if iterations - best_at >= opts.oscillation_window {
            status = Status::Oscillating;
            break;
        }
        if iterations >= opts.max_iter {
            break;
        }
        let x = &current.profile;
        let mix = |a: &[f64], b: &[f64]| -> Vec<f64> {
            a.iter()
                .zip(b)
                .map(|(a, b)| ((1.0 - w) * a + w * b).clamp(0.0, 1.0))
                .collect()
        };
        let next = VoteProfile {
            p: mix(&x.p, &br.p),
            q: mix(&x.q, &br.q),
        };
        current = current.with_profile(next);
        (t, report) = thresholds(&current, c, opts.convention)?;
        iterations += 1;
    }
    let mut out = assemble(
        Family::FixedPoint,
        &current,
        t,
        report,
        iterations,
        residual,
        status,
    );
    match status {
        Status::Oscillating => out.warnings.push(format!(
            "update norm did not decrease over {} iterations",
            opts.oscillation_window
        )),
        Status::MaxIterations => out
            .warnings
            .push(format!("no convergence within {} iterations", opts.max_iter)),
        _ => {}
    }
    Ok(out)
}

fn symmetric_scenario(
    n_t: f64,
    k: usize,
    p: f64,
    q: f64,
    prizes: PrizeSpec,
    prefs: PreferenceModel,
) -> Result<Scenario> {
    Scenario::new(
        Electorate::uniform(n_t, k)?,
        VoteProfile::uniform(k, p, q),
        PrizeRule::Wta,
        prizes,
        prefs,
    )
}

/// Bisection on `ln p` for a decreasing function, counting evaluations.
fn bisect_log<F>(mut f: F, lo: f64, hi: f64, iters: &mut usize) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let x = bisect(
        |u| {
            *iters += 1;
            f(u.exp())
        },
        lo.ln(),
        hi.ln(),
        1e-13,
        400,
    )?;
    let p = x.exp();
    Ok((p, p * 1e-13))
}

/// Symmetric two-party equilibrium with `K` equal groups and equal prizes.
///
/// `G` is assumed symmetric about zero so that `q = p`.
pub fn solve_symmetric_competitive(
    n_t: f64,
    k: usize,
    zeta: f64,
    c: f64,
    g: &EvaluationDistribution,
    convention: Convention,
) -> Result<EquilibriumResult> {
    check_cost(c)?;
    if k < 2 {
        return Err(Error::domain("the prize competition needs at least two groups"));
    }
    let n = n_t / k as f64;
    let gap = |p: f64| -> Result<f64> {
        let lam = n_t * p;
        let pp = wta_from_means(&vec![n * p; k], 0, zeta, convention)?.value;
        Ok(g.quantile(1.0 - p)? * op_a_from_means(lam, lam) + pp - c)
    };
    let mut iters = 0;
    let p_min = 1e-12 / n_t;
    let (p, width) = if gap(0.5)? > 0.0 {
        (0.5, 0.0)
    } else if gap(p_min)? <= 0.0 {
        (0.0, 0.0)
    } else {
        bisect_log(gap, p_min, 0.5, &mut iters)?
    };
    let prizes = PrizeSpec {
        zeta_a: zeta,
        zeta_b: zeta,
        rivalry: Rivalry::NonRival,
    };
    let prefs = PreferenceModel {
        gamma: 0.0,
        g: g.clone(),
    };
    let scenario = symmetric_scenario(n_t, k, p, p, prizes, prefs)?;
    let (t, report) = thresholds(&scenario, c, convention)?;
    let br = response(&t, g);
    let residual = br.distance(&scenario.profile);
    let status = if p == 0.0 || p == 0.5 {
        Status::Boundary
    } else {
        Status::Converged
    };
    let mut out = assemble(Family::Symmetric, &scenario, t, report, iters, residual, status);
    if width > 0.0 {
        out.residual = residual.max(width);
    }
    Ok(out)
}

/// Winner-take-all pivot for group `k`, switching to the Laplace form when
/// all competing groups expect the same large vote count.
pub(crate) fn wta_auto(means: &[f64], k: usize, zeta: f64, convention: Convention) -> Result<(f64, PivotMethod)> {
    let lam = means[k];
    if lam >= EXACT_PIVOT_LIMIT {
        let active: Vec<f64> = means.iter().cloned().filter(|&m| m > 0.0).collect();
        if active.len() >= 2 && active.iter().all(|&m| m == lam) {
            return Ok((pp_approx(1.0, lam, active.len(), zeta)?, PivotMethod::Asymptotic));
        }
    }
    Ok((wta_from_means(means, k, zeta, convention)?.value, PivotMethod::Exact))
}

/// Exact outcome pivots with winner-take-all prize pivots from [`wta_auto`].
fn auto_report(scenario: &Scenario, convention: Convention) -> Result<PivotReport> {
    if scenario.rule != PrizeRule::Wta {
        return pivot_report(scenario, convention);
    }
    let el = &scenario.electorate;
    let ma = scenario.profile.group_vote_means(el, Party::A);
    let mb = scenario.profile.group_vote_means(el, Party::B);
    let (la, lb) = (ma.iter().sum(), mb.iter().sum());
    let mut method = PivotMethod::Exact;
    let mut pp = |means: &[f64], zeta: f64| -> Result<Vec<f64>> {
        (0..means.len())
            .map(|k| {
                let (v, m) = wta_auto(means, k, zeta, convention)?;
                if m == PivotMethod::Asymptotic {
                    method = m;
                }
                Ok(v)
            })
            .collect()
    };
    let pp_a = pp(&ma, scenario.prizes.zeta_a)?;
    let pp_b = pp(&mb, scenario.prizes.zeta_b)?;
    Ok(PivotReport {
        op_a: op_a_from_means(la, lb),
        op_b: op_b_from_means(la, lb),
        pp_a,
        pp_b,
        method,
        truncation: None,
        std_errors: None,
    })
}

/// Prize pivot of one of `k` equal groups when each expects `lam` votes.
fn symmetric_pp(lam: f64, k: usize, zeta: f64, convention: Convention) -> Result<f64> {
    Ok(wta_auto(&vec![lam; k], 0, zeta, convention)?.0)
}

/// Solves `PP(p) = c` for `k` groups of size `n`, saturating at `p_max`.
fn solve_prize_only(
    n: f64,
    k: usize,
    zeta: f64,
    c: f64,
    p_max: f64,
    convention: Convention,
    iters: &mut usize,
) -> Result<(f64, f64)> {
    if zeta <= c {
        return Ok((0.0, 0.0));
    }
    let gap = |p: f64| symmetric_pp(n * p, k, zeta, convention).map(|v| v - c);
    if gap(p_max)? >= 0.0 {
        return Ok((p_max, 0.0));
    }
    let p_min = 1e-9 / n;
    if gap(p_min)? <= 0.0 {
        return Ok((0.0, 0.0));
    }
    bisect_log(gap, p_min, p_max, iters)
}

fn no_policy_prizes(zeta_a: f64, zeta_b: f64) -> (PrizeSpec, PreferenceModel) {
    (
        PrizeSpec {
            zeta_a,
            zeta_b,
            rivalry: Rivalry::NonRival,
        },
        PreferenceModel::no_policy(),
    )
}

/// Equilibrium in which party A's lead makes the outcome pivot negligible,
/// so turnout is driven by the two prize competitions alone.
///
/// When the independent solutions would ask more than the whole electorate
/// to vote, every voter votes and splits so that `PP_A(p) = PP_B(1 - p)`.
pub fn solve_dominant_party(
    n_t: f64,
    k: usize,
    zeta_a: f64,
    zeta_b: f64,
    c: f64,
    convention: Convention,
) -> Result<EquilibriumResult> {
    check_cost(c)?;
    if k < 2 {
        return Err(Error::domain("the prize competition needs at least two groups"));
    }
    if !(zeta_a > zeta_b) {
        return Err(Error::domain(format!(
            "the dominant party needs the larger prize, got zeta_A = {zeta_a}, zeta_B = {zeta_b}"
        )));
    }
    let n = n_t / k as f64;
    let mut iters = 0;
    let mut warnings = Vec::new();
    let (mut p, w_a) = solve_prize_only(n, k, zeta_a, c, 1.0, convention, &mut iters)?;
    let (mut q, w_b) = solve_prize_only(n, k, zeta_b, c, 1.0, convention, &mut iters)?;
    let mut width = w_a.max(w_b);
    if p + q > 1.0 {
        let split = |x: f64| -> Result<f64> {
            Ok(symmetric_pp(n * x, k, zeta_a, convention)?
                - symmetric_pp(n * (1.0 - x), k, zeta_b, convention)?)
        };
        p = if q == 0.0 {
            1.0
        } else {
            iters += 1;
            bisect(split, 0.5, 1.0 - 1e-9 / n, 1e-14, 200)?
        };
        q = 1.0 - p;
        width = 1e-14;
        warnings.push("full turnout: voters split between the two prize competitions".into());
    }
    let (prizes, prefs) = no_policy_prizes(zeta_a, zeta_b);
    let scenario = symmetric_scenario(n_t, k, p, q, prizes, prefs)?;
    let report = auto_report(&scenario, convention)?;
    let t = thresholds_from_pivots(&report, 0.0, c);
    let status = if on_boundary(&scenario.profile) {
        Status::Boundary
    } else {
        Status::Converged
    };
    let mut out = assemble(Family::Dominant, &scenario, t, report, iters, width, status);
    out.warnings = warnings;
    if out.pivots.op_a >= 1e-12 {
        out.valid = false;
        out.warnings.push(format!(
            "outcome pivot {:.3e} is not negligible; dominance assumption fails",
            out.pivots.op_a
        ));
    }
    if p <= q {
        out.valid = false;
        out.warnings
            .push(format!("party A is not dominant: p = {p}, q = {q}"));
    }
    out.a_dominates = Some(p > q);
    Ok(out)
}

/// Equilibrium where `k_a` groups compete for A's prize and `k_b` other
/// groups compete for B's, each group voting for one party only.
pub fn solve_polarized(
    n_t: f64,
    k_a: usize,
    k_b: usize,
    zeta_a: f64,
    zeta_b: f64,
    c: f64,
    convention: Convention,
) -> Result<EquilibriumResult> {
    check_cost(c)?;
    if k_a < 2 || k_b < 2 {
        return Err(Error::domain(format!(
            "each party's prize needs at least two groups vying for it, got K_A = {k_a}, K_B = {k_b}"
        )));
    }
    let n = n_t / (k_a + k_b) as f64;
    let mut iters = 0;
    let (pa, w_a) = solve_prize_only(n, k_a, zeta_a, c, 1.0, convention, &mut iters)?;
    let (qb, w_b) = solve_prize_only(n, k_b, zeta_b, c, 1.0, convention, &mut iters)?;
    let mut p = vec![pa; k_a];
    p.extend(std::iter::repeat(0.0).take(k_b));
    let mut q = vec![0.0; k_a];
    q.extend(std::iter::repeat(qb).take(k_b));
    let (prizes, prefs) = no_policy_prizes(zeta_a, zeta_b);
    let scenario = Scenario::new(
        Electorate::uniform(n_t, k_a + k_b)?,
        VoteProfile::new(p, q)?,
        PrizeRule::Wta,
        prizes,
        prefs,
    )?;
    let report = auto_report(&scenario, convention)?;
    let t = thresholds_from_pivots(&report, 0.0, c);
    let status = if on_boundary(&scenario.profile) {
        Status::Boundary
    } else {
        Status::Converged
    };
    let mut out = assemble(
        Family::Polarized,
        &scenario,
        t,
        report,
        iters,
        w_a.max(w_b),
        status,
    );
    let dominates = out.expected_votes_a > out.expected_votes_b;
    out.a_dominates = Some(dominates);
    if out.pivots.op_a >= 1e-12 {
        out.valid = false;
        out.warnings.push(format!(
            "outcome pivot {:.3e} is not negligible",
            out.pivots.op_a
        ));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub condition: u8,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrizeOnlyVerdict {
    pub passed: bool,
    pub conditions: Vec<ConditionCheck>,
}

impl PrizeOnlyVerdict {
    pub fn condition(&self, i: u8) -> &ConditionCheck {
        &self.conditions[(i - 1) as usize]
    }
}

/// Checks the necessary conditions for a prize-only equilibrium:
/// 1. at least two groups vote;
/// 2. voting groups below full turnout share the largest expected vote count;
/// 3. those groups are indifferent (`PP_A = c`) and saturated groups are not
///    deterred (`PP_A >= c`);
/// 4. a member of a non-voting group gains at most `c`, i.e.
///    `zeta_A prod_{j in S} F_{n_j p_j}(1) <= c`.
pub fn verify_prize_only(scenario: &Scenario, c: f64) -> Result<PrizeOnlyVerdict> {
    check_cost(c)?;
    let pr = &scenario.prizes;
    if !(pr.zeta_a > c && pr.zeta_b == 0.0) {
        return Err(Error::domain("prize-only competition needs zeta_A > c and zeta_B = 0"));
    }
    if scenario.prefs.gamma != 0.0 || scenario.prefs.g != EvaluationDistribution::Degenerate {
        return Err(Error::domain(
            "prize-only competition needs gamma = 0 and a degenerate G",
        ));
    }
    if scenario.rule != PrizeRule::Wta {
        return Err(Error::domain("prize-only verification applies to winner-take-all"));
    }
    let scenario = scenario.clone().validated()?;
    let p = &scenario.profile.p;
    let means = scenario
        .profile
        .group_vote_means(&scenario.electorate, Party::A);
    let support: Vec<usize> = (0..p.len()).filter(|&k| p[k] > 0.0).collect();
    let interior: Vec<usize> = support.iter().cloned().filter(|&k| p[k] < 1.0).collect();
    let mut checks = Vec::with_capacity(4);

    checks.push(ConditionCheck {
        condition: 1,
        passed: support.len() >= 2,
        detail: format!("{} supporting groups", support.len()),
    });

    let max_mean = support.iter().map(|&k| means[k]).fold(0.0, f64::max);
    let off: Vec<usize> = interior
        .iter()
        .cloned()
        .filter(|&k| (means[k] - max_mean).abs() > 1e-9 * max_mean.max(1.0))
        .collect();
    checks.push(ConditionCheck {
        condition: 2,
        passed: off.is_empty(),
        detail: if off.is_empty() {
            format!("interior groups share n p = {max_mean}")
        } else {
            format!("groups {off:?} fall short of the largest n p = {max_mean}")
        },
    });

    let tol = 1e-8 * c.max(1.0);
    let mut bad = Vec::new();
    for &k in &support {
        let pp = wta_from_means(&means, k, pr.zeta_a, Convention::Strict)?.value;
        let ok = if p[k] < 1.0 {
            (pp - c).abs() <= tol
        } else {
            pp >= c - tol
        };
        if !ok {
            bad.push(format!("group {k}: PP_A = {pp}"));
        }
    }
    checks.push(ConditionCheck {
        condition: 3,
        passed: bad.is_empty(),
        detail: if bad.is_empty() {
            format!("PP_A = {c} on interior groups")
        } else {
            bad.join("; ")
        },
    });

    let mut prod = 1.0;
    for &k in &support {
        prod *= poisson_cdf(means[k], 1)?;
    }
    let gain = pr.zeta_a * prod;
    let zeros = p.len() - support.len();
    checks.push(ConditionCheck {
        condition: 4,
        passed: zeros == 0 || gain <= c,
        detail: format!("non-supporting gain {gain:e} vs cost {c}"),
    });

    Ok(PrizeOnlyVerdict {
        passed: checks.iter().all(|c| c.passed),
        conditions: checks,
    })
}
