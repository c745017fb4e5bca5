//! Outcome and prize pivot probabilities.

pub mod asymptotic;
pub mod exact;

use serde::{Deserialize, Serialize};

pub use asymptotic::{op_approx, pp_approx, pp_lower_bound, solve_alpha0, LaplaceSolution};
pub use exact::{
    outcome_pivot_a, outcome_pivot_b, pivot_report, prize_pivot, prize_pivot_proportionate,
    prize_pivot_specific, prize_pivot_threshold, prize_pivot_wta, prize_pivot_wta_k2, WtaPivot,
};

/// How an all-zero vote count is treated under winner-take-all.
///
/// `Strict` requires a winning group to cast at least one vote; `Lenient`
/// lets every group tie for the prize at zero votes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    #[default]
    Strict,
    Lenient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PivotMethod {
    Exact,
    Asymptotic,
    MonteCarlo,
}

/// Truncation of the infinite winner-take-all sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    /// Largest vote count `a*` the sum may reach.
    pub a_star: u64,
    /// Upper bound on the omitted mass, summed over groups and parties.
    pub error_bound: f64,
}

/// Pivots for both parties at a single profile.
///
/// `pp_a[k]` is the change in group `k`'s expected prize from party A when a
/// member of `k` switches from abstaining to voting A; `pp_b` likewise for B.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PivotReport {
    pub op_a: f64,
    pub op_b: f64,
    pub pp_a: Vec<f64>,
    pub pp_b: Vec<f64>,
    pub method: PivotMethod,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation: Option<Truncation>,
    /// Standard errors in the same layout, for simulated reports.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub std_errors: Option<PivotStdErrors>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PivotStdErrors {
    pub op_a: f64,
    pub op_b: f64,
    pub pp_a: Vec<f64>,
    pub pp_b: Vec<f64>,
}
