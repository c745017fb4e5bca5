//! Parameter sweeps for the standard figures and the group-configuration
//! cost analysis.

use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::equilibrium::{
    solve_dominant_party, solve_polarized, solve_symmetric_competitive, wta_auto,
};
use crate::error::{Error, Result};
use crate::model::{EvaluationDistribution, Rivalry};
use crate::pivots::exact::{op_a_from_means, wta_from_means};
use crate::pivots::{op_approx, pp_approx, Convention, PivotMethod};
use crate::roots::bisect;

/// Electorate size used throughout the figures.
pub const N_TOTAL: f64 = 100_000.0;

pub fn fig3_zeta_grid() -> Vec<f64> {
    (0..=16).map(|i| 25.0 * i as f64).collect()
}

pub fn cost_grid() -> Vec<f64> {
    (1..=20).map(|i| i as f64 / 10.0).collect()
}

pub fn group_count_grid() -> Vec<usize> {
    (2..=27).collect()
}

pub fn fig1_group_sizes() -> Vec<f64> {
    [100.0, 300.0, 1000.0, 3000.0, 10_000.0, 30_000.0]
        .iter()
        .map(|np| np / 0.3)
        .collect()
}

pub fn fig2_p_grid() -> Vec<f64> {
    (0..=40).map(|i| 0.25 + 0.0025 * i as f64).collect()
}

fn gauss100() -> EvaluationDistribution {
    EvaluationDistribution::Gaussian {
        mean: 0.0,
        variance: 100.0,
    }
}

/// Where a sweep came from: a hash of its inputs and the code version.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub scenario_hash: String,
    pub code_version: String,
    pub parameters: Value,
}

impl Provenance {
    fn new(figure: u8, parameters: Value) -> Self {
        let canonical = json!({ "figure": figure, "parameters": parameters });
        let digest = Sha256::digest(canonical.to_string().as_bytes());
        Self {
            scenario_hash: hex::encode(&digest[..6]),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            parameters,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableFormat {
    Csv,
    Json,
}

/// Rows of numbers under named columns. Flags are stored as 0 or 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub figure: u8,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub provenance: Provenance,
}

impl SweepTable {
    fn new(figure: u8, columns: &[&str], rows: Vec<Vec<f64>>, parameters: Value) -> Self {
        Self {
            figure,
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows,
            provenance: Provenance::new(figure, parameters),
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(e.into());
        w.write_record(&self.columns).map_err(io)?;
        for row in &self.rows {
            w.serialize(row).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is ascii"))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn file_name(&self, format: TableFormat) -> String {
        let ext = match format {
            TableFormat::Csv => "csv",
            TableFormat::Json => "json",
        };
        format!("fig{}_{}.{ext}", self.figure, self.provenance.scenario_hash)
    }

    /// Writes the table into `dir` and returns the file path.
    pub fn write(&self, dir: &Path, format: TableFormat) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(self.file_name(format));
        let body = match format {
            TableFormat::Csv => self.to_csv()?,
            TableFormat::Json => self.to_json()?,
        };
        std::fs::write(&path, body)?;
        Ok(path)
    }
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn sorted<T: PartialOrd + Copy>(v: &[T]) -> Vec<T> {
    let mut v = v.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("grid values are comparable"));
    v
}

/// Exact and approximate winner-take-all pivots at vote rate `p` for every
/// `(K, group size)` pair.
pub fn sweep_fig1(ks: &[usize], group_sizes: &[f64], p: f64) -> Result<SweepTable> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("p must lie in (0, 1), got {p}")));
    }
    let ks = sorted(ks);
    let sizes = sorted(group_sizes);
    let grid: Vec<(usize, f64)> = ks
        .iter()
        .flat_map(|&k| sizes.iter().map(move |&n| (k, n)))
        .collect();
    let rows = grid
        .par_iter()
        .map(|&(k, n)| {
            let exact = wta_from_means(&vec![n * p; k], 0, 1.0, Convention::Strict)?.value;
            let approx = pp_approx(p, n, k, 1.0)?;
            Ok(vec![k as f64, n, n * p, exact, approx, (approx - exact) / exact])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable::new(
        1,
        &["K", "group_size", "expected_votes", "pp_exact", "pp_approx", "relative_error"],
        rows,
        json!({ "K": ks, "group_sizes": sizes, "p": p }),
    ))
}

/// Outcome and prize pivots across A's vote rate with B's held at `q`.
pub fn sweep_fig2(n_t: f64, q: f64, k: usize, p_grid: &[f64]) -> Result<SweepTable> {
    let ps = sorted(p_grid);
    let n = n_t / k as f64;
    let rows = ps
        .par_iter()
        .map(|&p| {
            Ok(vec![
                p,
                op_approx(p, q, n_t)?,
                op_a_from_means(n_t * p, n_t * q),
                pp_approx(p, n, k, 1.0)?,
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable::new(
        2,
        &["p", "op_approx", "op_exact", "pp_approx"],
        rows,
        json!({ "n_T": n_t, "q": q, "K": k, "p": ps }),
    ))
}

/// Symmetric competitive turnout as the common prize grows.
pub fn sweep_fig3(zeta_grid: &[f64]) -> Result<SweepTable> {
    let zs = sorted(zeta_grid);
    let g = gauss100();
    let rows = zs
        .par_iter()
        .map(|&z| {
            let r = solve_symmetric_competitive(N_TOTAL, 3, z, 1.0, &g, Convention::Strict)?;
            Ok(vec![z, r.profile.p[0], r.expected_votes_a, r.turnout])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable::new(
        3,
        &["zeta", "p", "votes_per_party", "turnout"],
        rows,
        json!({ "n_T": N_TOTAL, "K": 3, "c": 1.0, "G": g, "zeta": zs }),
    ))
}

/// Dominant-party support for each voting cost.
pub fn sweep_fig4(c_grid: &[f64]) -> Result<SweepTable> {
    let cs = sorted(c_grid);
    let rows = cs
        .par_iter()
        .map(|&c| {
            let r = solve_dominant_party(N_TOTAL, 3, 300.0, 100.0, c, Convention::Strict)?;
            Ok(vec![
                c,
                r.profile.p[0],
                r.profile.q[0],
                r.expected_votes_a,
                r.expected_votes_b,
                r.turnout,
                flag(r.turnout >= 1.0 - 1e-12),
                flag(r.valid),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable::new(
        4,
        &["c", "p", "q", "votes_a", "votes_b", "turnout", "full_turnout", "valid"],
        rows,
        json!({ "n_T": N_TOTAL, "K": 3, "zeta_A": 300.0, "zeta_B": 100.0, "c": cs }),
    ))
}

/// Polarized support for each voting cost.
pub fn sweep_fig5(c_grid: &[f64], k_a: usize, k_b: usize) -> Result<SweepTable> {
    let cs = sorted(c_grid);
    let rows = cs
        .par_iter()
        .map(|&c| {
            let r = solve_polarized(N_TOTAL, k_a, k_b, 300.0, 100.0, c, Convention::Strict)?;
            Ok(vec![
                c,
                r.profile.p[0],
                r.profile.q[k_a],
                r.expected_votes_a,
                r.expected_votes_b,
                flag(r.a_dominates == Some(true)),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable::new(
        5,
        &["c", "p_pro_a", "q_pro_b", "votes_a", "votes_b", "a_dominates"],
        rows,
        json!({ "n_T": N_TOTAL, "K_A": k_a, "K_B": k_b, "zeta_A": 300.0, "zeta_B": 100.0, "c": cs }),
    ))
}

/// How a party organises its prize competitions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub competitions: usize,
    pub groups_per_competition: usize,
    pub total_population: f64,
    pub target_support: f64,
    pub cost_of_voting: f64,
    pub rivalry: Rivalry,
}

impl Configuration {
    /// The standard setting: 100,000 voters, 60% support, unit cost.
    pub fn standard(competitions: usize, groups: usize, rivalry: Rivalry) -> Self {
        Self {
            competitions,
            groups_per_competition: groups,
            total_population: N_TOTAL,
            target_support: 0.6,
            cost_of_voting: 1.0,
            rivalry,
        }
    }

    pub fn group_size(&self) -> f64 {
        self.total_population / (self.competitions * self.groups_per_competition) as f64
    }

    fn check(&self) -> Result<()> {
        if self.competitions < 1 {
            return Err(Error::domain("at least one competition is required"));
        }
        if self.groups_per_competition < 2 {
            return Err(Error::domain(format!(
                "a competition needs at least two groups, got {}",
                self.groups_per_competition
            )));
        }
        if !(self.total_population > 0.0 && self.total_population.is_finite()) {
            return Err(Error::domain("total population must be positive"));
        }
        if !(self.target_support > 0.0 && self.target_support <= 1.0) {
            return Err(Error::domain("target support must lie in (0, 1]"));
        }
        if !(self.cost_of_voting > 0.0 && self.cost_of_voting.is_finite()) {
            return Err(Error::domain("voting cost must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RequiredPrize {
    pub zeta_star: f64,
    pub group_size: f64,
    pub method: PivotMethod,
}

/// Prize that makes a voter in every group indifferent at the target
/// support, assuming the outcome pivot is negligible.
pub fn required_prize(config: &Configuration) -> Result<RequiredPrize> {
    config.check()?;
    let n = config.group_size();
    let g = config.groups_per_competition;
    let (unit, method) = wta_auto(
        &vec![n * config.target_support; g],
        0,
        1.0,
        Convention::Strict,
    )?;
    Ok(RequiredPrize {
        zeta_star: config.cost_of_voting / unit,
        group_size: n,
        method,
    })
}

/// Total outlay: one prize per competition, paid once (non-rival) or to
/// every member of the winning group (rival).
pub fn total_cost(config: &Configuration, zeta_star: f64) -> f64 {
    match config.rivalry {
        Rivalry::NonRival => config.competitions as f64 * zeta_star,
        // C winning groups of n_T / (C G) members each.
        Rivalry::Rival => zeta_star * config.total_population / config.groups_per_competition as f64,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupCountChoice {
    pub best: usize,
    /// `(groups, total cost)` for every candidate.
    pub costs: Vec<(usize, f64)>,
}

/// Number of groups per competition that minimises the total cost.
pub fn optimal_group_count(
    n_t: f64,
    p_star: f64,
    c: f64,
    ks: &[usize],
    competitions: usize,
    rivalry: Rivalry,
) -> Result<GroupCountChoice> {
    if ks.iter().any(|&k| !(2..=30).contains(&k)) {
        return Err(Error::domain("group counts must lie in 2..=30"));
    }
    if ks.is_empty() {
        return Err(Error::domain("no group counts given"));
    }
    let costs = sorted(ks)
        .par_iter()
        .map(|&k| {
            let cfg = Configuration {
                competitions,
                groups_per_competition: k,
                total_population: n_t,
                target_support: p_star,
                cost_of_voting: c,
                rivalry,
            };
            Ok((k, total_cost(&cfg, required_prize(&cfg)?.zeta_star)))
        })
        .collect::<Result<Vec<_>>>()?;
    let best = costs
        .iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|&(k, _)| k)
        .expect("non-empty");
    Ok(GroupCountChoice { best, costs })
}

/// Non-rival cost against the number of groups, for one and for three
/// competitions.
pub fn sweep_fig6(ks: &[usize]) -> Result<SweepTable> {
    let ks = sorted(ks);
    let rows = ks
        .par_iter()
        .map(|&k| {
            let one = Configuration::standard(1, k, Rivalry::NonRival);
            let three = Configuration::standard(3, k, Rivalry::NonRival);
            let z1 = required_prize(&one)?.zeta_star;
            let z3 = required_prize(&three)?.zeta_star;
            Ok(vec![k as f64, z1, total_cost(&one, z1), z3, total_cost(&three, z3)])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable::new(
        6,
        &["K", "zeta_one", "cost_one", "zeta_three", "cost_three"],
        rows,
        json!({ "n_T": N_TOTAL, "p": 0.6, "c": 1.0, "K": ks }),
    ))
}

/// Rival cost for each number of competitions and groups per competition.
pub fn sweep_fig7(competitions: &[usize], ks: &[usize]) -> Result<SweepTable> {
    let cs = sorted(competitions);
    let ks = sorted(ks);
    let grid: Vec<(usize, usize)> = cs
        .iter()
        .flat_map(|&c| ks.iter().map(move |&k| (c, k)))
        .collect();
    let rows = grid
        .par_iter()
        .map(|&(c, k)| {
            let cfg = Configuration::standard(c, k, Rivalry::Rival);
            let r = required_prize(&cfg)?;
            Ok(vec![
                c as f64,
                k as f64,
                r.group_size,
                r.zeta_star,
                flag(r.method == PivotMethod::Asymptotic),
                total_cost(&cfg, r.zeta_star),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable::new(
        7,
        &["competitions", "K", "group_size", "zeta_star", "asymptotic", "rival_cost"],
        rows,
        json!({ "n_T": N_TOTAL, "p": 0.6, "c": 1.0, "competitions": cs, "K": ks }),
    ))
}

/// Largest cost at which the dominant-party equilibrium has full turnout.
pub fn full_turnout_cost(n_t: f64, k: usize, zeta_a: f64, zeta_b: f64) -> Result<f64> {
    let full = |c: f64| -> Result<f64> {
        let r = solve_dominant_party(n_t, k, zeta_a, zeta_b, c, Convention::Strict)?;
        Ok(if r.turnout >= 1.0 - 1e-12 { 1.0 } else { -1.0 })
    };
    bisect(full, 1e-3, 10.0 * zeta_a.max(1.0), 1e-6, 200)
}

/// Cost at which the pro-A groups' total first exceeds the pro-B total.
pub fn polarization_boundary(
    n_t: f64,
    k_a: usize,
    k_b: usize,
    zeta_a: f64,
    zeta_b: f64,
) -> Result<f64> {
    let margin = |c: f64| -> Result<f64> {
        let r = solve_polarized(n_t, k_a, k_b, zeta_a, zeta_b, c, Convention::Strict)?;
        Ok(r.expected_votes_a - r.expected_votes_b)
    };
    // Both sides stop voting at high cost, so bracket by stepping up from
    // a low cost until A's total first leads.
    let (mut lo, mut hi) = (1e-3, 1e-3);
    if margin(lo)? > 0.0 {
        return Err(Error::domain("party A already dominates at the lowest cost"));
    }
    while margin(hi)? <= 0.0 {
        lo = hi;
        hi *= 1.25;
        if hi > 10.0 * zeta_a.max(zeta_b).max(1.0) {
            return Err(Error::domain("party A never dominates"));
        }
    }
    bisect(margin, lo, hi, 1e-6, 200)
}

/// Per-vote reward `rho` that sustains symmetric support `p` under the
/// proportionate rule, and the total paid to A's voters.
pub fn proportionate_cost(
    n_t: f64,
    p: f64,
    c: f64,
    g: &EvaluationDistribution,
) -> Result<(f64, f64)> {
    let lam = n_t * p;
    let rho = c - g.quantile(1.0 - p)? * op_a_from_means(lam, lam);
    Ok((rho, rho * lam))
}

impl fmt::Display for SweepTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.columns.join("\t"))?;
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|x| format!("{x:.6e}")).collect();
            writeln!(f, "{}", cells.join("\t"))?;
        }
        Ok(())
    }
}
