use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use pivotlab::equilibrium::{
    solve_dominant_party, solve_fixed_point, solve_polarized, solve_symmetric_competitive,
    verify_prize_only, InitPreset,
};
use pivotlab::model::Party;
use pivotlab::montecarlo::{mc_pivot_report, mc_prize_pivot};
use pivotlab::pivots::{op_approx, pivot_report, pp_approx, prize_pivot_wta};
use pivotlab::scenarios::{self, SweepTable, TableFormat};
use pivotlab::{
    Convention, Electorate, EquilibriumResult, Error, FixedPointOptions, PivotMethod, PivotReport,
    PrizeRule, Scenario, VoteProfile,
};

/// Bumped whenever the shape of the JSON output changes.
const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(name = "pivotlab", version, about = "Pivot probabilities and turnout equilibria")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Outcome and prize pivots for a scenario.
    Pivot(PivotArgs),
    /// Solve for an equilibrium.
    Solve(SolveArgs),
    /// Write the table behind one of the standard figures.
    Sweep(SweepArgs),
    /// Compare exact winner-take-all pivots against simulation.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Exact,
    Approx,
    Mc,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConventionArg {
    Strict,
    Lenient,
}

impl From<ConventionArg> for Convention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Strict => Convention::Strict,
            ConventionArg::Lenient => Convention::Lenient,
        }
    }
}

#[derive(Args)]
struct PivotArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Exact)]
    method: Method,
    /// Also report this group's prize pivots on their own.
    #[arg(long)]
    group: Option<usize>,
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    /// Required with `--method mc`.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = ConventionArg::Strict)]
    convention: ConventionArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    FixedPoint,
    Symmetric,
    Dominant,
    Polarized,
    PrizeOnlyVerify,
}

#[derive(Clone, Copy, ValueEnum)]
enum InitArg {
    Scenario,
    Competitive,
    DominantA,
    DominantB,
    Empty,
}

impl From<InitArg> for InitPreset {
    fn from(i: InitArg) -> Self {
        match i {
            InitArg::Scenario => InitPreset::Scenario,
            InitArg::Competitive => InitPreset::Competitive,
            InitArg::DominantA => InitPreset::DominantA,
            InitArg::DominantB => InitPreset::DominantB,
            InitArg::Empty => InitPreset::Empty,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, value_enum, default_value_t = FamilyArg::FixedPoint)]
    family: FamilyArg,
    /// Cost of voting.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = 0.3)]
    damping: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iter: usize,
    #[arg(long, value_enum, default_value_t = InitArg::Scenario)]
    init: InitArg,
    /// Pro-A groups for the polarized family. Defaults to the groups whose
    /// A rate is at least their B rate.
    #[arg(long)]
    k_a: Option<usize>,
    #[arg(long)]
    k_b: Option<usize>,
    #[arg(long, value_enum, default_value_t = ConventionArg::Strict)]
    convention: ConventionArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=7))]
    figure: u8,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Group counts (figures 1, 6, 7).
    #[arg(long, value_delimiter = ',')]
    ks: Option<Vec<usize>>,
    /// Group sizes (figure 1).
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<f64>>,
    /// Vote rate (figure 1).
    #[arg(long)]
    p: Option<f64>,
    /// B's vote rate (figure 2).
    #[arg(long)]
    q: Option<f64>,
    /// Electorate size (figure 2).
    #[arg(long)]
    n_total: Option<f64>,
    /// Number of groups (figure 2).
    #[arg(long)]
    k: Option<usize>,
    /// A's vote rates (figure 2).
    #[arg(long, value_delimiter = ',')]
    p_grid: Option<Vec<f64>>,
    /// Prize levels (figure 3).
    #[arg(long, value_delimiter = ',')]
    zetas: Option<Vec<f64>>,
    /// Voting costs (figures 4, 5).
    #[arg(long, value_delimiter = ',')]
    costs: Option<Vec<f64>>,
    /// Pro-A and pro-B group counts (figure 5).
    #[arg(long)]
    k_a: Option<usize>,
    #[arg(long)]
    k_b: Option<usize>,
    /// Numbers of competitions (figure 7).
    #[arg(long, value_delimiter = ',')]
    competitions: Option<Vec<usize>>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Largest accepted |z| score.
    #[arg(long, default_value_t = 3.0)]
    max_z: f64,
    /// Print JSON instead of a text table.
    #[arg(long)]
    json: bool,
}

enum Failure {
    Usage(String),
    Core(Error),
    /// The solver ran but did not converge; the result is still printed.
    NotConverged(Value, String),
    ValidationFailed,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

type CliResult<T> = Result<T, Failure>;

fn envelope(command: &str, result: Value) -> Value {
    json!({ "schema_version": SCHEMA_VERSION, "command": command, "result": result })
}

fn print_json(v: &Value) {
    use std::io::Write;
    let body = serde_json::to_string_pretty(v).expect("values serialize");
    // A closed pipe (e.g. `| head`) is not worth a panic.
    let _ = writeln!(std::io::stdout().lock(), "{body}");
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("values serialize")
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("PIVOTLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| Failure::Usage(format!("PIVOTLAB_THREADS must be a count, got {raw:?}")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    Ok(())
}

fn approx_report(s: &Scenario) -> CliResult<PivotReport> {
    let el = &s.electorate;
    let (p, q) = s.profile.aggregate(el);
    let n_t = el.total();
    let op_a = op_approx(p, q, n_t)?;
    let op_b = -op_approx(q, p, n_t)?;
    if s.rule != PrizeRule::Wta {
        return Err(Failure::Usage(
            "the approximate prize pivot covers the winner-take-all rule only".into(),
        ));
    }
    let k = el.num_groups();
    let mut pp = [Vec::new(), Vec::new()];
    for (i, party) in [Party::A, Party::B].into_iter().enumerate() {
        let means = s.profile.group_vote_means(el, party);
        let sizes = &el.group_means;
        if means.iter().any(|&m| m != means[0]) || sizes.iter().any(|&n| n != sizes[0]) {
            return Err(Failure::Usage(
                "the approximate prize pivot needs equal groups with equal vote rates".into(),
            ));
        }
        let rate = s.profile.rate(party, 0);
        let v = pp_approx(rate, sizes[0], k, s.prizes.zeta(party))?;
        pp[i] = vec![v; k];
    }
    let [pp_a, pp_b] = pp;
    Ok(PivotReport {
        op_a,
        op_b,
        pp_a,
        pp_b,
        method: PivotMethod::Asymptotic,
        truncation: None,
        std_errors: None,
    })
}

fn run_pivot(a: PivotArgs) -> CliResult<Value> {
    let s = Scenario::from_path(&a.scenario)?;
    let conv = a.convention.into();
    let report = match a.method {
        Method::Exact => pivot_report(&s, conv)?,
        Method::Approx => approx_report(&s)?,
        Method::Mc => {
            let seed = a
                .seed
                .ok_or_else(|| Failure::Usage("--seed is required with --method mc".into()))?;
            mc_pivot_report(&s, conv, a.samples, seed)?
        }
    };
    let mut out = envelope("pivot", to_value(&report));
    if let Some(k) = a.group {
        let groups = s.electorate.num_groups();
        if k >= groups {
            return Err(Failure::Usage(format!(
                "--group {k} is out of range for {groups} groups"
            )));
        }
        out["group"] = json!({ "index": k, "pp_a": report.pp_a[k], "pp_b": report.pp_b[k] });
    }
    Ok(out)
}

/// Splits a scenario into pro-A and pro-B groups by their larger rate.
fn party_split(s: &Scenario) -> (usize, usize) {
    let k_a = s
        .profile
        .p
        .iter()
        .zip(&s.profile.q)
        .filter(|(p, q)| p >= q)
        .count();
    (k_a, s.electorate.num_groups() - k_a)
}

fn finish(r: EquilibriumResult) -> CliResult<Value> {
    let v = envelope("solve", to_value(&r));
    if r.status.is_converged() {
        Ok(v)
    } else {
        let why = format!(
            "solver stopped with status {:?} after {} iterations, residual {:.3e}",
            r.status, r.iterations, r.residual
        );
        Err(Failure::NotConverged(v, why))
    }
}

fn run_solve(a: SolveArgs) -> CliResult<Value> {
    let s = Scenario::from_path(&a.scenario)?;
    let conv: Convention = a.convention.into();
    let n_t = s.electorate.total();
    let k = s.electorate.num_groups();
    let (za, zb) = (s.prizes.zeta_a, s.prizes.zeta_b);
    match a.family {
        FamilyArg::FixedPoint => {
            let opts = FixedPointOptions {
                damping: a.damping,
                tol: a.tol,
                max_iter: a.max_iter,
                convention: conv,
                ..Default::default()
            };
            let init = InitPreset::from(a.init).profile(&s);
            finish(solve_fixed_point(&s, a.c, &init, &opts)?)
        }
        FamilyArg::Symmetric => {
            if za != zb {
                return Err(Failure::Usage(format!(
                    "the symmetric family needs equal prizes, got {za} and {zb}"
                )));
            }
            finish(solve_symmetric_competitive(n_t, k, za, a.c, &s.prefs.g, conv)?)
        }
        FamilyArg::Dominant => finish(solve_dominant_party(n_t, k, za, zb, a.c, conv)?),
        FamilyArg::Polarized => {
            let (da, db) = party_split(&s);
            let (ka, kb) = (a.k_a.unwrap_or(da), a.k_b.unwrap_or(db));
            finish(solve_polarized(n_t, ka, kb, za, zb, a.c, conv)?)
        }
        FamilyArg::PrizeOnlyVerify => {
            Ok(envelope("solve", to_value(&verify_prize_only(&s, a.c)?)))
        }
    }
}

fn run_sweep(a: SweepArgs) -> CliResult<Value> {
    let given: Vec<(&str, bool)> = vec![
        ("ks", a.ks.is_some()),
        ("sizes", a.sizes.is_some()),
        ("p", a.p.is_some()),
        ("q", a.q.is_some()),
        ("n-total", a.n_total.is_some()),
        ("k", a.k.is_some()),
        ("p-grid", a.p_grid.is_some()),
        ("zetas", a.zetas.is_some()),
        ("costs", a.costs.is_some()),
        ("k-a", a.k_a.is_some()),
        ("k-b", a.k_b.is_some()),
        ("competitions", a.competitions.is_some()),
    ];
    let allowed: &[&str] = match a.figure {
        1 => &["ks", "sizes", "p"],
        2 => &["n-total", "q", "k", "p-grid"],
        3 => &["zetas"],
        4 => &["costs"],
        5 => &["costs", "k-a", "k-b"],
        6 => &["ks"],
        _ => &["competitions", "ks"],
    };
    if let Some((flag, _)) = given.iter().find(|(f, set)| *set && !allowed.contains(f)) {
        return Err(Failure::Usage(format!(
            "--{flag} does not apply to figure {}",
            a.figure
        )));
    }

    let table: SweepTable = match a.figure {
        1 => scenarios::sweep_fig1(
            &a.ks.unwrap_or_else(|| vec![3, 9]),
            &a.sizes.unwrap_or_else(scenarios::fig1_group_sizes),
            a.p.unwrap_or(0.3),
        )?,
        2 => scenarios::sweep_fig2(
            a.n_total.unwrap_or(scenarios::N_TOTAL),
            a.q.unwrap_or(0.3),
            a.k.unwrap_or(3),
            &a.p_grid.unwrap_or_else(scenarios::fig2_p_grid),
        )?,
        3 => scenarios::sweep_fig3(&a.zetas.unwrap_or_else(scenarios::fig3_zeta_grid))?,
        4 => scenarios::sweep_fig4(&a.costs.unwrap_or_else(scenarios::cost_grid))?,
        5 => scenarios::sweep_fig5(
            &a.costs.unwrap_or_else(scenarios::cost_grid),
            a.k_a.unwrap_or(3),
            a.k_b.unwrap_or(6),
        )?,
        6 => scenarios::sweep_fig6(&a.ks.unwrap_or_else(scenarios::group_count_grid))?,
        _ => scenarios::sweep_fig7(
            &a.competitions.unwrap_or_else(|| vec![1, 3, 9]),
            &a.ks.unwrap_or_else(|| vec![3, 9]),
        )?,
    };
    let format = match a.format {
        FormatArg::Csv => TableFormat::Csv,
        FormatArg::Json => TableFormat::Json,
    };
    let path = table.write(&a.out, format)?;
    Ok(envelope(
        "sweep",
        json!({
            "figure": table.figure,
            "path": path,
            "rows": table.rows.len(),
            "provenance": table.provenance,
        }),
    ))
}

fn run_validate(a: ValidateArgs) -> CliResult<Value> {
    let mut rows = Vec::new();
    let mut all_pass = true;
    let mut seed = a.seed;
    for k in [2usize, 3, 5, 9] {
        for lam in [0.5, 2.0, 10.0, 50.0] {
            for conv in [Convention::Strict, Convention::Lenient] {
                let el = Electorate::new(vec![lam; k])?;
                let prof = VoteProfile::uniform(k, 1.0, 0.0);
                let exact = prize_pivot_wta(0, &prof, &el, 1.0, conv)?.value;
                let mc =
                    mc_prize_pivot(0, &prof, &el, &PrizeRule::Wta, 1.0, conv, a.samples, seed)?;
                seed = seed.wrapping_add(1);
                let z = mc.z_score(exact);
                let pass = z <= a.max_z;
                all_pass &= pass;
                rows.push(json!({
                    "K": k,
                    "lambda": lam,
                    "convention": conv,
                    "exact": exact,
                    "mc": mc.mean,
                    "std_error": mc.std_error,
                    "z": z,
                    "pass": pass,
                }));
            }
        }
    }
    if a.json {
        print_json(&envelope("validate", json!({ "samples": a.samples, "rows": rows })));
    } else {
        println!(
            "{:>2} {:>6} {:>8} {:>14} {:>14} {:>11} {:>6}  result",
            "K", "lambda", "conv", "exact", "mc", "se", "z"
        );
        for r in &rows {
            println!(
                "{:>2} {:>6} {:>8} {:>14.8e} {:>14.8e} {:>11.3e} {:>6.2}  {}",
                r["K"],
                r["lambda"],
                r["convention"].as_str().unwrap_or(""),
                r["exact"].as_f64().unwrap_or(f64::NAN),
                r["mc"].as_f64().unwrap_or(f64::NAN),
                r["std_error"].as_f64().unwrap_or(f64::NAN),
                r["z"].as_f64().unwrap_or(f64::NAN),
                if r["pass"] == true { "PASS" } else { "FAIL" }
            );
        }
    }
    if all_pass {
        Ok(Value::Null)
    } else {
        Err(Failure::ValidationFailed)
    }
}

fn run(cli: Cli) -> CliResult<Value> {
    configure_threads()?;
    match cli.command {
        Command::Pivot(a) => run_pivot(a),
        Command::Solve(a) => run_solve(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Validate(a) => run_validate(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(Value::Null) => ExitCode::SUCCESS,
        Ok(v) => {
            print_json(&v);
            ExitCode::SUCCESS
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            // Unreadable input files count with bad inputs.
            let bad_input = e.is_domain() || matches!(e, Error::Io(_));
            ExitCode::from(if bad_input { 1 } else { 2 })
        }
        Err(Failure::NotConverged(v, why)) => {
            print_json(&v);
            eprintln!("error: {why}");
            ExitCode::from(2)
        }
        Err(Failure::ValidationFailed) => {
            eprintln!("error: some simulated pivots fall outside the accepted band");
            ExitCode::from(2)
        }
    }
}
