//! Acceptance checks. Each check prints one PASS or FAIL line; the process
//! exits non-zero if any fails.

use std::process::ExitCode;

use pivotlab::equilibrium::{
    best_response, solve_dominant_party, solve_fixed_point, solve_polarized,
    solve_symmetric_competitive, verify_prize_only, InitPreset,
};
use pivotlab::montecarlo::{mc_prize_pivot, mc_prize_pivot_independent};
use pivotlab::pivots::{
    op_approx, outcome_pivot_a, pp_approx, pp_lower_bound, prize_pivot_threshold, prize_pivot_wta,
};
use pivotlab::roots::bisect;
use pivotlab::scenarios::{
    fig3_zeta_grid, full_turnout_cost, group_count_grid, optimal_group_count,
    polarization_boundary, proportionate_cost, required_prize, total_cost, Configuration,
    N_TOTAL,
};
use pivotlab::{
    Convention, Electorate, EvaluationDistribution, FixedPointOptions, PreferenceModel, PrizeRule,
    PrizeSpec, Rivalry, Scenario, VoteProfile,
};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn within(x: f64, target: f64, rel: f64) -> bool {
    ((x - target) / target).abs() <= rel
}

/// Poisson pmf by the ratio recurrence f(k+1) = f(k) lam / (k+1), carried
/// in logs so that large means do not underflow.
fn pmf_table(lam: f64, len: usize) -> Vec<f64> {
    let ln_lam = lam.ln();
    let mut ln_f = -lam;
    let mut f = vec![ln_f.exp()];
    for k in 1..len {
        ln_f += ln_lam - (k as f64).ln();
        f.push(ln_f.exp());
    }
    f
}

fn gauss100() -> EvaluationDistribution {
    EvaluationDistribution::Gaussian {
        mean: 0.0,
        variance: 100.0,
    }
}

// 1
fn outcome_pivot_convolution() -> Outcome {
    let grid = [
        (0.5, 0.5),
        (1.0, 3.0),
        (2.0, 2.0),
        (3.0, 1.0),
        (5.0, 7.5),
        (7.5, 5.0),
        (10.0, 10.0),
        (12.0, 20.0),
        (15.0, 14.0),
        (20.0, 35.0),
        (25.0, 25.0),
        (30.0, 10.0),
        (33.3, 40.0),
        (40.0, 40.0),
        (45.0, 50.0),
        (50.0, 50.0),
        (50.0, 0.7),
        (0.7, 50.0),
        (18.0, 18.5),
        (8.25, 41.0),
    ];
    let mut worst: f64 = 0.0;
    for &(la, lb) in &grid {
        let len = 200;
        let fa = pmf_table(la, len);
        let fb = pmf_table(lb, len + 1);
        let direct: f64 = (0..len).map(|k| fa[k] * (0.5 * fb[k] + 0.5 * fb[k + 1])).sum();
        let n_t = 100.0;
        let el = Electorate::new(vec![n_t]).unwrap();
        let prof = VoteProfile::new(vec![la / n_t], vec![lb / n_t]).unwrap();
        let v = outcome_pivot_a(&prof, &el).unwrap();
        worst = worst.max((v - direct).abs());
    }
    outcome(worst < 1e-10, format!("max |difference| = {worst:.2e} over 20 points"))
}

// 2
fn prize_pivot_vs_monte_carlo() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut seed = 1;
    for &k in &[2usize, 3, 5, 9] {
        for &lam in &[0.5, 2.0, 10.0, 50.0] {
            for conv in [Convention::Strict, Convention::Lenient] {
                let el = Electorate::new(vec![lam; k]).unwrap();
                let prof = VoteProfile::uniform(k, 1.0, 0.0);
                let exact = prize_pivot_wta(0, &prof, &el, 1.0, conv).unwrap().value;
                let mc =
                    mc_prize_pivot(0, &prof, &el, &PrizeRule::Wta, 1.0, conv, 1_000_000, seed)
                        .unwrap();
                seed += 1;
                worst = worst.max(mc.z_score(exact));
            }
        }
    }
    outcome(worst < 3.0, format!("largest |z| = {worst:.2} over 32 cases"))
}

// 3
fn point_values() -> Vec<(String, Outcome)> {
    let mut out = Vec::new();
    let el = Electorate::new(vec![N_TOTAL]).unwrap();
    let exact = |p: f64, q: f64| {
        outcome_pivot_a(&VoteProfile::new(vec![p], vec![q]).unwrap(), &el).unwrap()
    };

    let (a, e) = (op_approx(0.3, 0.3, N_TOTAL).unwrap(), exact(0.3, 0.3));
    out.push((
        "3a outcome pivot at p = q = 0.3 near 0.0016".into(),
        outcome(
            within(a, 0.0016, 0.05) && within(e, 0.0016, 0.05),
            format!("approx {a:.5e}, exact {e:.5e}"),
        ),
    ));

    let (a, e) = (op_approx(0.31, 0.30, N_TOTAL).unwrap(), exact(0.31, 0.30));
    out.push((
        "3b outcome pivot at p = 0.31, q = 0.30 near 4.4e-7".into(),
        outcome(
            within(a, 4.4e-7, 0.10) && within(e, 4.4e-7, 0.10),
            format!("approx {a:.4e}, exact {e:.4e}"),
        ),
    ));

    // The threshold pivot f_{np}(t - 1) peaks where np is close to t.
    let n = 1e4;
    let peak = (4900..=5100)
        .map(|i| prize_pivot_threshold(n * i as f64 / 1e4, 5000, 1.0).unwrap())
        .fold(0.0, f64::max);
    let at_half = prize_pivot_threshold(n * 0.5, 5000, 1.0).unwrap();
    out.push((
        "3c threshold pivot maximum near 0.0056".into(),
        outcome(
            within(peak, 0.0056, 0.02) && within(at_half, 0.0056, 0.02),
            format!("peak {peak:.5e}, at p = 0.5 {at_half:.5e}"),
        ),
    ));

    let mut worst: f64 = 0.0;
    for &x in &[38.3, 50.0, 100.0, 1000.0] {
        for &r in &[1.0f64 / 3.0, 0.5, 1.0, 1.05, 1.2, 1.5, 2.0, 3.0] {
            // x = 2 n sqrt(pq) with p = r q
            let q: f64 = 0.2;
            let p = r * q;
            let n_t = x / (2.0 * (p * q).sqrt());
            let lam_a = n_t * p;
            let lam_b = n_t * q;
            let len = (lam_a.max(lam_b) * 3.0 + 200.0) as usize;
            let fa = pmf_table(lam_a, len);
            let fb = pmf_table(lam_b, len + 1);
            let direct: f64 = (0..len).map(|k| fa[k] * (0.5 * fb[k] + 0.5 * fb[k + 1])).sum();
            let a = op_approx(p, q, n_t).unwrap();
            worst = worst.max((a / direct - 1.0).abs());
        }
    }
    out.push((
        "3d approximation within 1% once 2 n sqrt(pq) > 38.2".into(),
        outcome(worst <= 0.01, format!("worst relative error {worst:.3e}")),
    ));

    let rel = (op_approx(0.5, 0.5, N_TOTAL).unwrap() / exact(0.5, 0.5) - 1.0).abs();
    out.push((
        "3e approximation error near 1e-6 at p = q = 0.5".into(),
        outcome(
            rel > 1e-7 && rel < 1e-5,
            format!("relative error {rel:.3e}"),
        ),
    ));
    out
}

// 4
fn competitive_turnout() -> Vec<(String, Outcome)> {
    let g = gauss100();
    let solve = |z: f64| solve_symmetric_competitive(N_TOTAL, 3, z, 1.0, &g, Convention::Strict)
        .unwrap();
    let r0 = solve(0.0);
    let r100 = solve(100.0);
    let r400 = solve(400.0);
    let turnouts: Vec<f64> = fig3_zeta_grid().iter().map(|&z| solve(z).turnout).collect();
    let monotone = turnouts.windows(2).all(|w| w[1] > w[0]);
    vec![
        (
            "4a no prize gives about 80 votes per party".into(),
            outcome(
                within(r0.expected_votes_a, 80.0, 0.15),
                format!("{:.2} votes", r0.expected_votes_a),
            ),
        ),
        (
            "4b prize 100 gives about 300 votes per party".into(),
            outcome(
                within(r100.expected_votes_a, 300.0, 0.20),
                format!("{:.1} votes", r100.expected_votes_a),
            ),
        ),
        (
            "4c prize 400 gives p near 0.38 and turnout near 76%".into(),
            outcome(
                (r400.profile.p[0] - 0.38).abs() <= 0.03 && (r400.turnout - 0.76).abs() <= 0.05,
                format!("p = {:.5}, turnout = {:.4}", r400.profile.p[0], r400.turnout),
            ),
        ),
        (
            "4d turnout increases with the prize".into(),
            outcome(monotone, format!("{} grid points", turnouts.len())),
        ),
    ]
}

// 5
fn dominant_party() -> Vec<(String, Outcome)> {
    let ratios: Vec<f64> = [1.0, 1.5, 2.0]
        .iter()
        .map(|&c| {
            let r = solve_dominant_party(N_TOTAL, 3, 300.0, 100.0, c, Convention::Strict).unwrap();
            r.profile.p[0] / r.profile.q[0]
        })
        .collect();
    let c_full = full_turnout_cost(N_TOTAL, 3, 300.0, 100.0).unwrap();
    let p400 = solve_symmetric_competitive(N_TOTAL, 3, 400.0, 1.0, &gauss100(), Convention::Strict)
        .unwrap()
        .profile
        .p[0];
    let (rho, cost) = proportionate_cost(N_TOTAL, p400, 1.0, &gauss100()).unwrap();
    vec![
        (
            "5a support ratio near 9 below saturation".into(),
            outcome(
                ratios.iter().all(|&r| within(r, 9.0, 0.10)),
                format!("p/q at c = 1, 1.5, 2: {ratios:.3?}"),
            ),
        ),
        (
            "5b full turnout below a cost near 0.5".into(),
            outcome((c_full - 0.5).abs() <= 0.1, format!("c = {c_full:.4}")),
        ),
        (
            "5c proportionate cost near 95 times the prize of 400".into(),
            outcome(
                within(cost / 400.0, 95.0, 0.10),
                format!("rho = {rho:.4}, total {cost:.0}, ratio {:.2}", cost / 400.0),
            ),
        ),
    ]
}

// 6
fn polarization() -> Vec<(String, Outcome)> {
    let c = polarization_boundary(N_TOTAL, 3, 6, 300.0, 100.0).unwrap();
    let rejected = solve_polarized(N_TOTAL, 1, 6, 300.0, 100.0, 1.0, Convention::Strict)
        .map_err(|e| e.is_domain());
    vec![
        (
            "6a A-dominance boundary near c = 0.3".into(),
            outcome((c - 0.3).abs() <= 0.05, format!("c = {c:.4}")),
        ),
        (
            "6b a single pro-A group is rejected".into(),
            outcome(rejected == Err(true), format!("{rejected:?}")),
        ),
    ]
}

// 7
fn group_configuration() -> Vec<(String, Outcome)> {
    let cfg = |c, g| Configuration::standard(c, g, Rivalry::Rival);
    let z13 = required_prize(&cfg(1, 3)).unwrap().zeta_star;
    let cost13 = total_cost(&cfg(1, 3), z13);

    let mut identity = true;
    for c in [1, 3, 9] {
        for g in [3, 9] {
            let z = required_prize(&cfg(c, g)).unwrap().zeta_star;
            identity &= total_cost(&cfg(c, g), z) == z * N_TOTAL / g as f64;
        }
    }

    let choice = optimal_group_count(
        N_TOTAL,
        0.6,
        1.0,
        &group_count_grid(),
        1,
        Rivalry::NonRival,
    )
    .unwrap();

    let rival = |c, g| {
        let k = cfg(c, g);
        total_cost(&k, required_prize(&k).unwrap().zeta_star)
    };
    let chain_a = [rival(1, 3), rival(3, 3), rival(3, 9), rival(9, 9)];
    let chain_b = [rival(1, 3), rival(9, 3), rival(9, 9)];
    let decreasing = |v: &[f64]| v.windows(2).all(|w| w[1] < w[0]);

    let z99 = required_prize(&cfg(9, 9)).unwrap();
    vec![
        (
            "7a required prize near 503 for one competition of three groups".into(),
            outcome(within(z13, 503.0, 0.03), format!("zeta* = {z13:.2}")),
        ),
        (
            "7b rival total cost near 17 million".into(),
            outcome(within(cost13, 17e6, 0.05), format!("{cost13:.4e}")),
        ),
        (
            "7c rival total equals zeta n_T / G".into(),
            outcome(identity, "checked on C in {1,3,9}, G in {3,9}"),
        ),
        (
            "7d non-rival optimum at five groups".into(),
            outcome(choice.best == 5, format!("argmin K = {}", choice.best)),
        ),
        (
            "7e rival cost falls from (1,3) to (9,9)".into(),
            outcome(
                decreasing(&chain_a) && decreasing(&chain_b),
                format!("{chain_a:.4?} and {chain_b:.4?}"),
            ),
        ),
        (
            "7f prize at (9,9), reported only".into(),
            outcome(
                true,
                format!(
                    "zeta* = {:.1} ({:?} pivot, group size {:.0}); a prize of 500 would cost {:.3e}",
                    z99.zeta_star,
                    z99.method,
                    z99.group_size,
                    500.0 * N_TOTAL / 9.0
                ),
            ),
        ),
    ]
}

// 8
fn larger_group_smaller_pivot() -> Outcome {
    let grid = [0.5, 1.0, 2.0, 3.0, 5.0, 7.5, 10.0, 15.0, 20.0];
    let mut checked = 0;
    let mut failures = Vec::new();
    for conv in [Convention::Strict, Convention::Lenient] {
        for &lj in &grid {
            for &lk in &grid {
                if lj <= lk {
                    continue;
                }
                let el = Electorate::new(vec![lj, lk, 10.0]).unwrap();
                let prof = VoteProfile::new(vec![1.0, 1.0, 0.0], vec![0.0; 3]).unwrap();
                let pj = prize_pivot_wta(0, &prof, &el, 1.0, conv).unwrap().value;
                let pk = prize_pivot_wta(1, &prof, &el, 1.0, conv).unwrap().value;
                checked += 1;
                if !(pj < pk) {
                    failures.push((lj, lk));
                }
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!("{checked} pairs, violations {failures:?}"),
    )
}

fn bound_dominance() -> Outcome {
    let mut checked = 0;
    let mut worst: f64 = 0.0;
    for k in 2..=30 {
        for i in 1..=19 {
            let p = i as f64 / 20.0;
            for &np in &[10.0, 1e2, 1e3, 1e4, 1e5, 1e6] {
                let lb = pp_lower_bound(p, np / p, k, 1.0).unwrap();
                let ap = pp_approx(p, np / p, k, 1.0).unwrap();
                worst = worst.max(lb / ap);
                checked += 1;
            }
        }
    }
    // At K = 2 the two coincide analytically.
    outcome(
        worst <= 1.0 + 1e-12,
        format!("{checked} points, max bound/approx = {worst:.15}"),
    )
}

fn fixed_point_consistency() -> Outcome {
    let el = Electorate::uniform(N_TOTAL, 3).unwrap();
    let opts = FixedPointOptions::default();
    let mut runs = 0;
    let mut converged = 0;
    let mut worst: f64 = 0.0;
    for (zeta, gamma, init) in [
        (0.0, 0.0, InitPreset::Competitive),
        (0.0, 0.5, InitPreset::Competitive),
        (25.0, 0.0, InitPreset::Competitive),
        (0.0, 0.0, InitPreset::Empty),
        (0.0, 0.0, InitPreset::DominantA),
    ] {
        let s = Scenario::new(
            el.clone(),
            VoteProfile::uniform(3, 0.25, 0.25),
            PrizeRule::Wta,
            PrizeSpec {
                zeta_a: zeta,
                zeta_b: zeta,
                rivalry: Rivalry::NonRival,
            },
            PreferenceModel {
                gamma,
                g: gauss100(),
            },
        )
        .unwrap();
        let start = init.profile(&s);
        runs += 1;
        let r = match solve_fixed_point(&s, 1.0, &start, &opts) {
            Ok(r) => r,
            Err(_) => continue,
        };
        if !r.status.is_converged() {
            continue;
        }
        converged += 1;
        let br = best_response(&s.with_profile(r.profile.clone()), 1.0, opts.convention).unwrap();
        worst = worst.max(br.distance(&r.profile));
    }
    outcome(
        converged > 0 && worst < 10.0 * opts.tol,
        format!("{converged}/{runs} converged, max |BR(x) - x| = {worst:.2e}"),
    )
}

fn prize_only_verifier() -> Outcome {
    let (zeta, c, n) = (10.0, 1.0, 100.0);
    let p = bisect(
        |p| Ok(wta_symmetric2(n * p, zeta) - c),
        1e-6,
        1.0,
        1e-15,
        200,
    )
    .unwrap();
    let s = Scenario::new(
        Electorate::new(vec![n; 3]).unwrap(),
        VoteProfile::new(vec![p, p, 0.0], vec![0.0; 3]).unwrap(),
        PrizeRule::Wta,
        PrizeSpec {
            zeta_a: zeta,
            zeta_b: 0.0,
            rivalry: Rivalry::NonRival,
        },
        PreferenceModel::no_policy(),
    )
    .unwrap();
    let base = verify_prize_only(&s, c).unwrap().passed;
    let fails = |profile: VoteProfile, zeta_a: f64, cond: u8| {
        let mut t = s.with_profile(profile);
        t.prizes.zeta_a = zeta_a;
        !verify_prize_only(&t, c).unwrap().condition(cond).passed
    };
    let prof = |a: f64, b: f64| VoteProfile::new(vec![a, b, 0.0], vec![0.0; 3]).unwrap();
    let perturbed = [
        fails(prof(0.0, 0.0), zeta, 1),
        fails(prof(p, 0.9 * p), zeta, 2),
        fails(prof(1.1 * p, 1.1 * p), zeta, 3),
        fails(prof(p, p), 1e6, 4),
    ];
    outcome(
        base && perturbed.iter().all(|&b| b),
        format!("equilibrium passes: {base}, perturbations caught: {perturbed:?}"),
    )
}

/// Strict winner-take-all pivot for two equal groups and an empty third.
fn wta_symmetric2(lam: f64, zeta: f64) -> f64 {
    let el = Electorate::new(vec![lam, lam, 1.0]).unwrap();
    let prof = VoteProfile::new(vec![1.0, 1.0, 0.0], vec![0.0; 3]).unwrap();
    prize_pivot_wta(0, &prof, &el, zeta, Convention::Strict)
        .unwrap()
        .value
}

fn mc_thread_independence() -> Outcome {
    let el = Electorate::new(vec![30.0; 3]).unwrap();
    let prof = VoteProfile::uniform(3, 0.4, 0.2);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                mc_prize_pivot(1, &prof, &el, &PrizeRule::Wta, 1.0, Convention::Strict, 200_000, 7)
                    .unwrap()
            })
    };
    let one = run(1);
    let same = [2, 4, 8].iter().all(|&t| run(t) == one);
    outcome(same, format!("1, 2, 4 and 8 threads, mean {:.6e}", one.mean))
}

fn crn_variance_reduction() -> Outcome {
    let el = Electorate::new(vec![10.0; 3]).unwrap();
    let prof = VoteProfile::uniform(3, 1.0, 0.0);
    let args = (&PrizeRule::Wta, 1.0, Convention::Strict, 100_000, 11);
    let crn = mc_prize_pivot(0, &prof, &el, args.0, args.1, args.2, args.3, args.4).unwrap();
    let naive =
        mc_prize_pivot_independent(0, &prof, &el, args.0, args.1, args.2, args.3, args.4).unwrap();
    let ratio = naive.std_error / crn.std_error;
    outcome(
        ratio >= 5.0,
        format!(
            "naive SE {:.3e}, paired SE {:.3e}, ratio {ratio:.2}",
            naive.std_error, crn.std_error
        ),
    )
}

fn main() -> ExitCode {
    let mut checks: Vec<(String, Outcome)> = Vec::new();
    checks.push(("1 outcome pivot matches direct convolution".into(), outcome_pivot_convolution()));
    checks.push(("2 winner-take-all pivot within 3 SE of simulation".into(), prize_pivot_vs_monte_carlo()));
    checks.extend(point_values());
    checks.extend(competitive_turnout());
    checks.extend(dominant_party());
    checks.extend(polarization());
    checks.extend(group_configuration());
    checks.push(("8a larger group has the smaller pivot with a silent third".into(), larger_group_smaller_pivot()));
    checks.push(("8b lower bound never exceeds the approximation".into(), bound_dominance()));
    checks.push(("8c converged fixed points reproduce themselves".into(), fixed_point_consistency()));
    checks.push(("8d prize-only verifier accepts and rejects".into(), prize_only_verifier()));
    checks.push(("8e simulation independent of thread count".into(), mc_thread_independence()));
    checks.push(("extra paired sampling cuts SE at least 5x at K = 3, mean 10".into(), crn_variance_reduction()));

    let mut failed = 0;
    for (name, o) in &checks {
        let tag = if o.passed { "PASS" } else { "FAIL" };
        println!("{tag} {name}: {}", o.detail);
        if !o.passed {
            failed += 1;
        }
    }
    println!("{} passed, {failed} failed", checks.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
