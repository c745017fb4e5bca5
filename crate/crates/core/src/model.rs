//! Electorate, vote profiles, prize rules and voter preferences.
//!
//! A [`Scenario`] bundles all of them and is the unit read from and written
//! to scenario files.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};
use crate::special::{gaussian_cdf, gaussian_quantile};

/// The two competing parties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Party {
    A,
    B,
}

/// Expected group sizes `n_k`. Sizes are real-valued Poisson means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Electorate {
    pub group_means: Vec<f64>,
}

impl Electorate {
    pub fn new(group_means: Vec<f64>) -> Result<Self> {
        let e = Self { group_means };
        let v = e.violations();
        if v.is_empty() {
            Ok(e)
        } else {
            Err(Error::Invalid(v))
        }
    }

    /// `K` groups of equal expected size `n_total / K`.
    pub fn uniform(n_total: f64, groups: usize) -> Result<Self> {
        if groups == 0 {
            return Err(Error::domain("an electorate needs at least one group"));
        }
        Self::new(vec![n_total / groups as f64; groups])
    }

    pub fn num_groups(&self) -> usize {
        self.group_means.len()
    }

    /// `n_T`, the expected total population.
    pub fn total(&self) -> f64 {
        self.group_means.iter().sum()
    }

    fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.group_means.is_empty() {
            out.push(Violation::new(
                "electorate.group_means",
                "at least one group is required",
            ));
        }
        for (k, &n) in self.group_means.iter().enumerate() {
            if !(n > 0.0 && n.is_finite()) {
                out.push(Violation::new(
                    format!("electorate.group_means[{k}]"),
                    format!("expected group size must be positive and finite, got {n}"),
                ));
            }
        }
        out
    }
}

/// Per-group probabilities of voting for party A (`p`) and party B (`q`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoteProfile {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

impl VoteProfile {
    pub fn new(p: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        let profile = Self { p, q };
        let v = profile.violations(None);
        if v.is_empty() {
            Ok(profile)
        } else {
            Err(Error::Invalid(v))
        }
    }

    /// Every group votes `(p, q)`.
    pub fn uniform(groups: usize, p: f64, q: f64) -> Self {
        Self {
            p: vec![p; groups],
            q: vec![q; groups],
        }
    }

    pub fn num_groups(&self) -> usize {
        self.p.len()
    }

    pub fn rate(&self, party: Party, k: usize) -> f64 {
        match party {
            Party::A => self.p[k],
            Party::B => self.q[k],
        }
    }

    /// Expected vote counts `n_k p_k` (or `n_k q_k`) per group.
    pub fn group_vote_means(&self, electorate: &Electorate, party: Party) -> Vec<f64> {
        let rates = match party {
            Party::A => &self.p,
            Party::B => &self.q,
        };
        rates
            .iter()
            .zip(&electorate.group_means)
            .map(|(r, n)| r * n)
            .collect()
    }

    /// Population-weighted aggregate rates `(p, q)`.
    pub fn aggregate(&self, electorate: &Electorate) -> (f64, f64) {
        let total = electorate.total();
        let a: f64 = self.group_vote_means(electorate, Party::A).iter().sum();
        let b: f64 = self.group_vote_means(electorate, Party::B).iter().sum();
        (a / total, b / total)
    }

    /// Infinity norm of the difference between two profiles.
    pub fn distance(&self, other: &VoteProfile) -> f64 {
        self.p
            .iter()
            .zip(&other.p)
            .chain(self.q.iter().zip(&other.q))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    fn violations(&self, groups: Option<usize>) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.p.len() != self.q.len() {
            out.push(Violation::new(
                "profile",
                format!("p has {} entries but q has {}", self.p.len(), self.q.len()),
            ));
        }
        if let Some(k) = groups {
            if self.p.len() != k {
                out.push(Violation::new(
                    "profile.p",
                    format!("expected {k} groups, got {}", self.p.len()),
                ));
            }
        }
        for (k, (&p, &q)) in self.p.iter().zip(&self.q).enumerate() {
            if !(0.0..=1.0).contains(&p) {
                out.push(Violation::new(
                    format!("profile.p[{k}]"),
                    format!("must lie in [0, 1], got {p}"),
                ));
            }
            if !(0.0..=1.0).contains(&q) {
                out.push(Violation::new(
                    format!("profile.q[{k}]"),
                    format!("must lie in [0, 1], got {q}"),
                ));
            }
            if p + q > 1.0 + 1e-12 {
                out.push(Violation::new(
                    format!("profile[{k}]"),
                    format!("group {k} has p + q = {} > 1", p + q),
                ));
            }
        }
        out
    }
}

/// Contingent prize allocation rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum PrizeRule {
    /// The most supportive group (all tied groups) receives the prize.
    Wta,
    /// A fixed set of groups is rewarded regardless of votes.
    Specific { members: Vec<usize> },
    /// A group is rewarded iff it delivers at least `t` votes.
    Threshold { t: u64 },
    /// A group receives `rho` per delivered vote.
    Proportionate { rho: f64 },
}

impl PrizeRule {
    fn violations(&self, groups: usize) -> Vec<Violation> {
        let mut out = Vec::new();
        match self {
            PrizeRule::Wta => {}
            PrizeRule::Specific { members } => {
                let mut seen = BTreeSet::new();
                for &m in members {
                    if m >= groups {
                        out.push(Violation::new(
                            "rule.params.members",
                            format!("group index {m} out of range for {groups} groups"),
                        ));
                    }
                    if !seen.insert(m) {
                        out.push(Violation::new(
                            "rule.params.members",
                            format!("group index {m} listed twice"),
                        ));
                    }
                }
            }
            PrizeRule::Threshold { t } => {
                if *t < 1 {
                    out.push(Violation::new("rule.params.t", "threshold must be at least 1"));
                }
            }
            PrizeRule::Proportionate { rho } => {
                if !(*rho >= 0.0 && rho.is_finite()) {
                    out.push(Violation::new(
                        "rule.params.rho",
                        format!("must be finite and non-negative, got {rho}"),
                    ));
                }
            }
        }
        out
    }
}

/// Whether a prize's provision cost scales with the size of the rewarded group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rivalry {
    #[default]
    NonRival,
    Rival,
}

/// Prize values offered by each party.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrizeSpec {
    #[serde(rename = "zeta_A")]
    pub zeta_a: f64,
    #[serde(rename = "zeta_B")]
    pub zeta_b: f64,
    #[serde(default)]
    pub rivalry: Rivalry,
}

impl PrizeSpec {
    pub fn zeta(&self, party: Party) -> f64 {
        match party {
            Party::A => self.zeta_a,
            Party::B => self.zeta_b,
        }
    }
}

/// Distribution `G` of private evaluations, `G(r) = Pr(eps < r)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EvaluationDistribution {
    Gaussian { mean: f64, variance: f64 },
    /// Point mass at zero: `G(x) = 0` for `x < 0` and `1` for `x >= 0`.
    Degenerate,
    /// Piecewise-linear cdf through `(x, G(x))` points.
    Tabulated { points: Vec<(f64, f64)> },
}

impl EvaluationDistribution {
    pub fn cdf(&self, x: f64) -> f64 {
        if x == f64::INFINITY {
            return 1.0;
        }
        if x == f64::NEG_INFINITY {
            return 0.0;
        }
        match self {
            EvaluationDistribution::Gaussian { mean, variance } => {
                gaussian_cdf((x - mean) / variance.sqrt())
            }
            EvaluationDistribution::Degenerate => {
                if x < 0.0 {
                    0.0
                } else {
                    1.0
                }
            }
            EvaluationDistribution::Tabulated { points } => {
                let (x0, _) = points[0];
                let (xn, _) = points[points.len() - 1];
                if x <= x0 {
                    return 0.0;
                }
                if x >= xn {
                    return 1.0;
                }
                let i = points.partition_point(|&(px, _)| px <= x);
                let (xa, fa) = points[i - 1];
                let (xb, fb) = points[i];
                fa + (fb - fa) * (x - xa) / (xb - xa)
            }
        }
    }

    /// Smallest `x` with `G(x) >= q`.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::domain(format!("quantile level {q} outside [0, 1]")));
        }
        match self {
            EvaluationDistribution::Gaussian { mean, variance } => {
                if q == 0.0 {
                    return Ok(f64::NEG_INFINITY);
                }
                if q == 1.0 {
                    return Ok(f64::INFINITY);
                }
                Ok(mean + variance.sqrt() * gaussian_quantile(q)?)
            }
            EvaluationDistribution::Degenerate => Ok(0.0),
            EvaluationDistribution::Tabulated { points } => {
                let i = points.partition_point(|&(_, f)| f < q);
                if i == 0 {
                    return Ok(points[0].0);
                }
                if i >= points.len() {
                    return Ok(points[points.len() - 1].0);
                }
                let (xa, fa) = points[i - 1];
                let (xb, fb) = points[i];
                Ok(xa + (xb - xa) * (q - fa) / (fb - fa))
            }
        }
    }

    fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        match self {
            EvaluationDistribution::Gaussian { mean, variance } => {
                if !mean.is_finite() {
                    out.push(Violation::new("prefs.G.mean", "must be finite"));
                }
                if !(*variance > 0.0 && variance.is_finite()) {
                    out.push(Violation::new(
                        "prefs.G.variance",
                        format!("must be positive and finite, got {variance}"),
                    ));
                }
            }
            EvaluationDistribution::Degenerate => {}
            EvaluationDistribution::Tabulated { points } => {
                if points.len() < 2 {
                    out.push(Violation::new(
                        "prefs.G.points",
                        "a tabulated cdf needs at least two points",
                    ));
                    return out;
                }
                for (i, w) in points.windows(2).enumerate() {
                    if !(w[1].0 > w[0].0) {
                        out.push(Violation::new(
                            format!("prefs.G.points[{}]", i + 1),
                            "abscissae must be strictly increasing",
                        ));
                    }
                    if w[1].1 < w[0].1 {
                        out.push(Violation::new(
                            format!("prefs.G.points[{}]", i + 1),
                            "cdf values must be non-decreasing",
                        ));
                    }
                }
                if points[0].1 != 0.0 {
                    out.push(Violation::new("prefs.G.points[0]", "cdf must start at 0"));
                }
                if points[points.len() - 1].1 != 1.0 {
                    out.push(Violation::new(
                        format!("prefs.G.points[{}]", points.len() - 1),
                        "cdf must end at 1",
                    ));
                }
            }
        }
        out
    }
}

/// Mean policy bias `gamma` toward party A plus the distribution of
/// individual deviations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreferenceModel {
    pub gamma: f64,
    #[serde(rename = "G")]
    pub g: EvaluationDistribution,
}

impl PreferenceModel {
    pub fn no_policy() -> Self {
        Self {
            gamma: 0.0,
            g: EvaluationDistribution::Degenerate,
        }
    }
}

/// Everything needed to evaluate pivots and best responses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub electorate: Electorate,
    pub profile: VoteProfile,
    pub rule: PrizeRule,
    pub prizes: PrizeSpec,
    pub prefs: PreferenceModel,
}

impl Scenario {
    /// Builds a scenario, reporting every violated invariant at once.
    pub fn new(
        electorate: Electorate,
        profile: VoteProfile,
        rule: PrizeRule,
        prizes: PrizeSpec,
        prefs: PreferenceModel,
    ) -> Result<Self> {
        Self {
            electorate,
            profile,
            rule,
            prizes,
            prefs,
        }
        .validated()
    }

    pub fn violations(&self) -> Vec<Violation> {
        let mut out = self.electorate.violations();
        out.extend(
            self.profile
                .violations(Some(self.electorate.num_groups())),
        );
        out.extend(self.rule.violations(self.electorate.num_groups()));
        for (path, z) in [("prizes.zeta_A", self.prizes.zeta_a), ("prizes.zeta_B", self.prizes.zeta_b)] {
            if !(z >= 0.0 && z.is_finite()) {
                out.push(Violation::new(path, format!("must be finite and non-negative, got {z}")));
            }
        }
        if !self.prefs.gamma.is_finite() {
            out.push(Violation::new("prefs.gamma", "must be finite"));
        }
        out.extend(self.prefs.g.violations());
        out
    }

    pub fn validated(self) -> Result<Self> {
        let v = self.violations();
        if v.is_empty() {
            Ok(self)
        } else {
            Err(Error::Invalid(v))
        }
    }

    pub fn with_profile(&self, profile: VoteProfile) -> Self {
        Self {
            profile,
            ..self.clone()
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: Scenario = serde_json::from_str(s)?;
        raw.validated()
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> Scenario {
        Scenario::new(
            Electorate::uniform(100_000.0, 3).unwrap(),
            VoteProfile::uniform(3, 0.3, 0.3),
            PrizeRule::Wta,
            PrizeSpec {
                zeta_a: 100.0,
                zeta_b: 100.0,
                rivalry: Rivalry::NonRival,
            },
            PreferenceModel {
                gamma: 0.0,
                g: EvaluationDistribution::Gaussian {
                    mean: 0.0,
                    variance: 100.0,
                },
            },
        )
        .unwrap()
    }

    #[test]
    fn valid_three_group_scenario() {
        let s = base();
        assert!((s.electorate.group_means[0] - 33_333.333_333).abs() < 1e-3);
        assert_eq!(s.electorate.total(), 100_000.0);
        let (p, q) = s.profile.aggregate(&s.electorate);
        assert!((p - 0.3).abs() < 1e-15 && (q - 0.3).abs() < 1e-15);
    }

    #[test]
    fn overfull_group_is_rejected_by_name() {
        let mut s = base();
        s.profile.p[1] = 0.7;
        s.profile.q[1] = 0.5;
        match s.validated() {
            Err(Error::Invalid(v)) => {
                assert_eq!(v.len(), 1);
                assert_eq!(v[0].path, "profile[1]");
                assert!(v[0].message.contains("group 1"));
            }
            other => panic!("expected rejection, got {other:?}"),
        }
    }

    #[test]
    fn zero_threshold_is_rejected() {
        let mut s = base();
        s.rule = PrizeRule::Threshold { t: 0 };
        let err = s.validated().unwrap_err();
        assert!(matches!(err, Error::Invalid(ref v) if v[0].path == "rule.params.t"));
    }

    #[test]
    fn every_violation_is_reported() {
        let mut s = base();
        s.electorate.group_means[0] = -1.0;
        s.prizes.zeta_b = -2.0;
        s.rule = PrizeRule::Specific { members: vec![0, 5] };
        let Err(Error::Invalid(v)) = s.validated() else {
            panic!("expected rejection")
        };
        let paths: Vec<_> = v.iter().map(|x| x.path.as_str()).collect();
        assert!(paths.contains(&"electorate.group_means[0]"));
        assert!(paths.contains(&"prizes.zeta_B"));
        assert!(paths.contains(&"rule.params.members"));
    }

    #[test]
    fn json_layout_uses_documented_keys() {
        let s = base();
        let v: serde_json::Value = serde_json::from_str(&s.to_json_string().unwrap()).unwrap();
        assert!(v["electorate"]["group_means"].is_array());
        assert!(v["profile"]["p"].is_array());
        assert_eq!(v["rule"]["kind"], "wta");
        assert_eq!(v["prizes"]["zeta_A"], 100.0);
        assert_eq!(v["prizes"]["rivalry"], "non_rival");
        assert_eq!(v["prefs"]["G"]["kind"], "gaussian");
        let mut t = s.clone();
        t.rule = PrizeRule::Threshold { t: 5 };
        let v: serde_json::Value = serde_json::from_str(&t.to_json_string().unwrap()).unwrap();
        assert_eq!(v["rule"]["params"]["t"], 5);
    }

    #[test]
    fn degenerate_g_matches_step_definition() {
        let g = EvaluationDistribution::Degenerate;
        assert_eq!(g.cdf(-1e-12), 0.0);
        assert_eq!(g.cdf(0.0), 1.0);
        assert_eq!(g.cdf(f64::NEG_INFINITY), 0.0);
    }

    #[test]
    fn tabulated_cdf_interpolates_and_inverts() {
        let g = EvaluationDistribution::Tabulated {
            points: vec![(-2.0, 0.0), (0.0, 0.5), (2.0, 1.0)],
        };
        assert!(g.violations().is_empty());
        assert_eq!(g.cdf(-1.0), 0.25);
        assert_eq!(g.cdf(5.0), 1.0);
        assert_eq!(g.quantile(0.75).unwrap(), 1.0);
        let bad = EvaluationDistribution::Tabulated {
            points: vec![(0.0, 0.1), (1.0, 0.05)],
        };
        assert_eq!(bad.violations().len(), 3);
    }

    #[test]
    fn gaussian_g_median_and_variance() {
        let g = EvaluationDistribution::Gaussian {
            mean: 0.0,
            variance: 100.0,
        };
        assert_eq!(g.cdf(0.0), 0.5);
        assert!((g.cdf(10.0) - gaussian_cdf(1.0)).abs() < 1e-16);
        assert!((g.quantile(gaussian_cdf(-1.0)).unwrap() + 10.0).abs() < 1e-9);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn scenario_json_round_trip(
                means in proptest::collection::vec(1.0f64..1e6, 1..6),
                rates in proptest::collection::vec((0.0f64..0.5, 0.0f64..0.5), 6),
                zeta_a in 0.0f64..1e3,
                zeta_b in 0.0f64..1e3,
                gamma in -5.0f64..5.0,
                rule_pick in 0usize..4,
            ) {
                let k = means.len();
                let (p, q): (Vec<_>, Vec<_>) = rates[..k].iter().cloned().unzip();
                let rule = match rule_pick {
                    0 => PrizeRule::Wta,
                    1 => PrizeRule::Specific { members: vec![0] },
                    2 => PrizeRule::Threshold { t: 7 },
                    _ => PrizeRule::Proportionate { rho: 0.25 },
                };
                let s = Scenario::new(
                    Electorate::new(means).unwrap(),
                    VoteProfile::new(p, q).unwrap(),
                    rule,
                    PrizeSpec { zeta_a, zeta_b, rivalry: Rivalry::Rival },
                    PreferenceModel { gamma, g: EvaluationDistribution::Gaussian { mean: 0.5, variance: 3.0 } },
                ).unwrap();
                let back = Scenario::from_json_str(&s.to_json_string().unwrap()).unwrap();
                prop_assert_eq!(back, s);
            }
        }
    }
}
