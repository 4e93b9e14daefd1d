//! Acceptance suite: criteria 1–14, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so that every line is printed. The
//! process exits nonzero if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use rand::Rng;

use maxcov::algorithms::{greedy, t_d_count};
use maxcov::exact::{opt_branch_bound, opt_exhaustive, SearchBudget};
use maxcov::experiments::{
    equivalence_check, greedy_vs_fixed, reproduce_degree_mix, reproduce_marginals,
    t_d_concentration, theorem3_experiment, with_threads, GreedyFixedReport,
};
use maxcov::generators::{bad_instance, genr, lrr, DegreeSpec};
use maxcov::matching::{lambda, max_matching, SimpleGraph};
use maxcov::theory::{
    augmented_factor, gamma_constants, hypergeom_approx_check, ode_rk4_max_error, ode_solution,
    worst_case_factor,
};
use maxcov::{BipartiteGraph, Result, Seed};

use common::*;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

/// CSV bodies kept for the determinism rerun.
#[derive(Default)]
struct Bodies {
    c2: String,
    c5: String,
    c10: String,
    c11: String,
}

fn criterion1() -> Result<Verdict> {
    let mut notes = Vec::new();
    let mut ok = true;
    for k in 2..=5usize {
        let g = bad_instance(k)?;
        let kk = k.pow(k as u32);
        let want_greedy = kk - (k - 1).pow(k as u32);
        // (1 - (1 - 1/k)^k) k^k as a float, to confirm the integer form
        let closed = (1.0 - (1.0 - 1.0 / k as f64).powi(k as i32)) * kk as f64;
        let alg = greedy(&g, k)?.coverage();
        let opt = opt_exhaustive(&g, k, u64::MAX)?.value;
        ok &= alg == want_greedy && opt == kk && (closed - want_greedy as f64).abs() < 1e-6;
        notes.push(format!("k={k}: greedy {alg}/{want_greedy}, opt {opt}/{kk}"));
    }
    Ok(verdict(ok, notes.join("; ")))
}

fn criterion2(bodies: &mut Bodies) -> Result<Verdict> {
    let report = equivalence_check(1000, 200, Seed(2))?;
    bodies.c2 = report.to_csv();
    let mism = report.mismatches();
    Ok(verdict(
        mism == 0,
        format!("{} graphs, {} (graph, k) checks, {mism} mismatches", 1000, report.rows.len()),
    ))
}

/// Instances shared by criteria 3 and 4; even indices are left-regular.
fn small_genr_instances() -> Result<Vec<BipartiteGraph>> {
    (0..500u64)
        .map(|i| {
            let mut rng = Seed(3).rng(i);
            let n = rng.random_range(2..=18);
            let m = rng.random_range(6..=30);
            let spec = if i % 2 == 0 {
                DegreeSpec::Uniform(rng.random_range(1..=5))
            } else {
                DegreeSpec::Explicit((0..n).map(|_| rng.random_range(1..=6)).collect())
            };
            let ds = spec.realize(n, m, &mut rng)?;
            genr(m, &ds, &mut rng)
        })
        .collect()
}

fn criterion3(instances: &[BipartiteGraph], opts: &mut Vec<Vec<usize>>) -> Result<Verdict> {
    let mut mismatches = 0;
    let mut solves = 0;
    for g in instances {
        let mut row = Vec::with_capacity(g.n_left());
        for k in 1..=g.n_left() {
            let ex = opt_exhaustive(g, k, u64::MAX)?.value;
            let bb = opt_branch_bound(g, k, SearchBudget::unlimited())?;
            if bb.value != ex || bb.best_effort {
                mismatches += 1;
            }
            solves += 1;
            row.push(ex);
        }
        opts.push(row);
    }
    Ok(verdict(
        mismatches == 0,
        format!("{} instances, {solves} (instance, k) pairs, {mismatches} mismatches", instances.len()),
    ))
}

fn criterion4(instances: &[BipartiteGraph], opts: &[Vec<usize>]) -> Result<Verdict> {
    let mut worst_checks = 0;
    let mut worst_violations = 0;
    let mut aug_checks = 0;
    let mut aug_violations = 0;
    for (g, row) in instances.iter().zip(opts) {
        let trace = greedy(g, g.n_left())?;
        let t_d = match g.regular_degree() {
            Some(_) => Some(t_d_count(g)?),
            None => None,
        };
        for k in 1..=g.n_left() {
            let alg = trace.coverage_at(k) as f64;
            let opt = row[k - 1] as f64;
            worst_checks += 1;
            if alg < worst_case_factor(k)? * opt - 1e-9 {
                worst_violations += 1;
            }
            if let (Some(t), Some(d)) = (t_d, g.regular_degree()) {
                if k >= t {
                    aug_checks += 1;
                    if alg < augmented_factor(t, g.m_right(), d)? * opt - 1e-9 {
                        aug_violations += 1;
                    }
                }
            }
        }
    }
    Ok(verdict(
        worst_violations == 0 && aug_violations == 0,
        format!(
            "worst-case: {worst_violations}/{worst_checks} violations; augmented (left-regular, k >= t_d): {aug_violations}/{aug_checks} violations"
        ),
    ))
}

fn criterion5(bodies: &mut Bodies) -> Result<Verdict> {
    let n = 100_000;
    let two = t_d_concentration(n, 2, 20, Seed(5))?;
    let three = t_d_concentration(n, 3, 20, Seed(5).derive(3))?;
    bodies.c5 = format!("{}{}", two.to_csv(), three.to_csv());
    let f2 = two.mean / n as f64;
    let f3 = three.mean / n as f64;
    // independent evaluation of the d = 3 prediction: (1 - 7^(-1/2)) / 3
    let predicted3 = (1.0 - 7f64.powf(-0.5)) / 3.0;
    let ok = (0.323..=0.343).contains(&f2) && (0.197..=0.217).contains(&f3);
    Ok(verdict(
        ok,
        format!(
            "mean t_2/n = {f2:.5} (predicted {:.5}), mean t_3/n = {f3:.5} (predicted {predicted3:.5}); within radius: {} / {}",
            1.0 / 3.0,
            two.all_within_delta,
            three.all_within_delta
        ),
    ))
}

fn criterion6() -> Result<Verdict> {
    let times = [0.25, 0.5, 1.0];
    let mut worst_lib: f64 = 0.0;
    let mut worst_oracle: f64 = 0.0;
    let m = 1000;
    for d in 2..=6 {
        for n in [500, 1000, 2000] {
            worst_lib = worst_lib.max(ode_rk4_max_error(n, m, d, &times, 1e-4)?);
            let c = (n * d) as f64 / m as f64;
            let numeric = rk4_oracle(c, d as i32, 1e-4, &times);
            for (&t, y) in times.iter().zip(numeric) {
                worst_oracle = worst_oracle.max((y - ode_solution(t, n, m, d)?).abs());
            }
        }
    }
    Ok(verdict(
        worst_lib <= 1e-8 && worst_oracle <= 1e-8,
        format!("max |RK4 - closed form|: library {worst_lib:.2e}, test integrator {worst_oracle:.2e}"),
    ))
}

fn criterion7() -> Result<(Verdict, Duration)> {
    let start = Instant::now();
    let mut cases = 0;
    let mut violations = 0;
    let mut worst_slack = f64::INFINITY;
    for m in 50..=200 {
        let mut d = 1;
        while 2 * d * d <= m {
            let c = hypergeom_approx_check(m, d)?;
            cases += 1;
            if !c.holds() {
                violations += 1;
            }
            worst_slack = worst_slack.min(c.bound - c.max_error);
            d += 1;
        }
    }
    let lib_time = start.elapsed();
    // the same pairs in exact rational arithmetic
    let mut exact_disagreements = 0;
    let mut exact_cases = 0;
    for m in 50..=200 {
        let mut d = 1;
        while 2 * d * d <= m {
            let exact = hypergeom_max_error_exact(m as u64, d as u64);
            let lib = hypergeom_approx_check(m, d)?;
            exact_cases += 1;
            if exact > rational(2 * (d * d) as u64, m as u64)
                || (to_f64(&exact) - lib.max_error).abs() > 1e-12
            {
                exact_disagreements += 1;
            }
            d += 1;
        }
    }
    Ok((
        verdict(
            violations == 0 && exact_disagreements == 0,
            format!(
                "{cases} (m, d) pairs, {violations} violations, min slack {worst_slack:.3e}; exact arithmetic on {exact_cases} pairs, {exact_disagreements} disagreements"
            ),
        ),
        lib_time,
    ))
}

fn criterion8() -> Result<Verdict> {
    let mut lambda_mism = 0;
    for i in 0..200u64 {
        let mut rng = Seed(8).rng(i);
        let n = rng.random_range(2..=12);
        let g = lrr(n, 2, &mut rng)?;
        if lambda(&g)? != brute_lambda(&adjacency(&g), n) {
            lambda_mism += 1;
        }
    }
    let mut matching_mism = 0;
    for i in 0..300u64 {
        let mut rng = Seed(8).derive(1).rng(i);
        let v = rng.random_range(1..=14usize);
        let p: f64 = rng.random_range(0.05..0.9);
        let mut edges = Vec::new();
        for a in 0..v {
            for b in a + 1..v {
                if rng.random::<f64>() < p {
                    edges.push((a, b));
                }
            }
        }
        let sg = SimpleGraph::new(v, edges.iter().map(|&(a, b)| (a as u32, b as u32)))?;
        if max_matching(&sg).size != brute_matching(v, &edges) {
            matching_mism += 1;
        }
    }
    Ok(verdict(
        lambda_mism == 0 && matching_mism == 0,
        format!("λ vs disjoint subsets: {lambda_mism}/200 mismatches; blossom vs exhaustive: {matching_mism}/300 mismatches"),
    ))
}

fn criterion9() -> Result<Verdict> {
    let g = gamma_constants();
    let newton = gamma_low_newton();
    let ok = g.residual <= 1e-12
        && g.gamma_star_low <= 0.853
        && g.gamma_star_high <= 0.853
        && g.limit_ratio <= 0.94
        && (0.92..=0.93).contains(&g.limit_ratio)
        && (g.gamma_star_low - newton).abs() < 1e-12;
    Ok(verdict(
        ok,
        format!(
            "γ_* = {:.10} (Newton {newton:.10}), γ* = {:.10}, residual {:.1e}, limit ratio {:.6}, matching fraction {:.6}",
            g.gamma_star_low, g.gamma_star_high, g.residual, g.limit_ratio, g.matching_fraction
        ),
    ))
}

fn criterion10(bodies: &mut Bodies) -> Result<Verdict> {
    let n = 20_000;
    let r = theorem3_experiment(&[n], 0.38, 10, Seed(10))?;
    bodies.c10 = r.to_csv();
    let row = &r.rows[0];
    let mu = row.mean_lambda / n as f64;
    let hits = row.lambda_values.iter().filter(|&&l| l >= row.k).count();
    let greedy_ratio = row.mean_greedy / (2 * row.k) as f64;
    let ok = (0.37..=0.41).contains(&mu) && hits >= 8 && greedy_ratio <= 0.95;
    Ok(verdict(
        ok,
        format!(
            "k = {}, mean μ(I_B)/n = {mu:.5}, λ >= k in {hits}/10, mean greedy/(2k) = {greedy_ratio:.5}, mean t_2/n = {:.5}",
            row.k,
            row.mean_t2 / n as f64
        ),
    ))
}

fn grid_cells() -> Vec<(usize, usize, usize)> {
    let mut cells = Vec::new();
    for n in [50, 100] {
        for d in [3, 6] {
            for k in [n / (2 * d), n / d, 2 * n / d] {
                cells.push((n, d, k));
            }
        }
    }
    cells
}

fn run_grid() -> Result<Vec<GreedyFixedReport>> {
    grid_cells()
        .into_iter()
        .enumerate()
        .map(|(i, (n, d, k))| greedy_vs_fixed(n, d, k, 2000, Seed(11).derive(i as u64)))
        .collect()
}

fn grid_csv(reports: &[GreedyFixedReport]) -> String {
    let mut out = format!("{}\n", GreedyFixedReport::csv_header());
    for r in reports {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

fn criterion11(bodies: &mut Bodies, reports: &mut Vec<GreedyFixedReport>) -> Result<Verdict> {
    *reports = run_grid()?;
    bodies.c11 = grid_csv(reports);
    let mut failures = Vec::new();
    for r in reports.iter() {
        let cell = format!("(n={}, d={}, k={})", r.n, r.d, r.k);
        if !r.greedy_dominates(2.0) {
            failures.push(format!("{cell} greedy < fixed"));
        }
        if !r.hybrid_monotone(2.0) {
            failures.push(format!("{cell} hybrid not monotone"));
        }
        if !r.fixed_matches_formula(3.0) {
            failures.push(format!(
                "{cell} fixed mean {:.4} vs formula {:.4} (se {:.4})",
                r.mean_fixed, r.analytic_fixed, r.se_fixed
            ));
        }
    }
    let worst_z = reports
        .iter()
        .map(|r| ((r.mean_fixed - r.analytic_fixed) / r.se_fixed).abs())
        .fold(0.0, f64::max);
    Ok(verdict(
        failures.is_empty(),
        if failures.is_empty() {
            format!("{} cells x 2000 trials; largest |fixed - formula| / se = {worst_z:.2}", reports.len())
        } else {
            failures.join("; ")
        },
    ))
}

fn criterion12() -> Result<Verdict> {
    let marg = reproduce_marginals(100, 100, 6, 200, Seed(12))?;
    let cum_ok = marg.cumulative_dominates(2.0);
    let mix = reproduce_degree_mix(
        40,
        40,
        &[0.0, 0.5, 1.0],
        50,
        Seed(12).derive(1),
        SearchBudget::time(Duration::from_secs(20)),
    )?;
    let r0 = &mix.rows[0];
    let r1 = &mix.rows[2];
    let ok = marg.crossover.is_some() && cum_ok && r0.min_ratio <= r1.min_ratio;
    let cells: Vec<String> = mix
        .rows
        .iter()
        .map(|r| format!("a={}: {:.4}±{:.4} at k={}{}", r.a, r.min_ratio, r.se, r.argmin_k, if r.best_effort { " (best effort)" } else { "" }))
        .collect();
    Ok(verdict(
        ok,
        format!(
            "crossover at t = {:?}, cumulative dominance {cum_ok}; min ratios {}",
            marg.crossover,
            cells.join(", ")
        ),
    ))
}

fn criterion13(reports: &[GreedyFixedReport]) -> Verdict {
    let floor = 1.0 - (-1.0f64).exp();
    let violations: Vec<String> = reports
        .iter()
        .filter(|r| r.ratio_lb < floor)
        .map(|r| format!("(n={}, d={}, k={}): {:.4}", r.n, r.d, r.k, r.ratio_lb))
        .collect();
    let min = reports.iter().map(|r| r.ratio_lb).fold(f64::INFINITY, f64::min);
    verdict(
        violations.is_empty(),
        if violations.is_empty() {
            format!("smallest mean greedy / mean upper bound on opt = {min:.4} (floor {floor:.4})")
        } else {
            violations.join("; ")
        },
    )
}

fn rerun_bodies() -> Result<Bodies> {
    let two = t_d_concentration(100_000, 2, 20, Seed(5))?;
    let three = t_d_concentration(100_000, 3, 20, Seed(5).derive(3))?;
    Ok(Bodies {
        c2: equivalence_check(1000, 200, Seed(2))?.to_csv(),
        c5: format!("{}{}", two.to_csv(), three.to_csv()),
        c10: theorem3_experiment(&[20_000], 0.38, 10, Seed(10))?.to_csv(),
        c11: grid_csv(&run_grid()?),
    })
}

fn criterion14(first: &Bodies) -> Result<Verdict> {
    let mut notes = Vec::new();
    let mut ok = true;
    for threads in [1, 4] {
        let again = with_threads(Some(threads), rerun_bodies)??;
        for (name, a, b) in [
            ("2", &first.c2, &again.c2),
            ("5", &first.c5, &again.c5),
            ("10", &first.c10, &again.c10),
            ("11", &first.c11, &again.c11),
        ] {
            let same = a == b;
            ok &= same;
            if !same {
                notes.push(format!("criterion {name} differs at {threads} threads"));
            }
        }
    }
    Ok(verdict(
        ok,
        if ok {
            "CSV bodies of criteria 2, 5, 10, 11 identical on the default pool and at 1 and 4 threads".into()
        } else {
            notes.join("; ")
        },
    ))
}

fn report(id: u32, limit: Option<Duration>, elapsed: Duration, outcome: Result<Verdict>) -> bool {
    let (pass, detail) = match outcome {
        Ok(v) => (v.pass, v.detail),
        Err(e) => (false, format!("error: {e}")),
    };
    let in_time = limit.is_none_or(|l| elapsed <= l);
    let timing = match limit {
        Some(l) => format!("{:.2}s, limit {}s", elapsed.as_secs_f64(), l.as_secs()),
        None => format!("{:.2}s", elapsed.as_secs_f64()),
    };
    let ok = pass && in_time;
    let note = if pass && !in_time { " [over time limit]" } else { "" };
    println!(
        "criterion {id:>2}: {} ({timing}) {detail}{note}",
        if ok { "PASS" } else { "FAIL" }
    );
    ok
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn main() {
    // `cargo test -- --list` and filters pass arguments; run everything anyway
    // unless only listing is requested.
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let secs = Duration::from_secs;
    let mut bodies = Bodies::default();
    let mut all = true;

    let (out, t) = timed(criterion1);
    all &= report(1, Some(secs(1)), t, out);

    let (out, t) = timed(|| criterion2(&mut bodies));
    all &= report(2, Some(secs(30)), t, out);

    let instances = small_genr_instances();
    let mut opts = Vec::new();
    let (out, t) = timed(|| instances.as_deref().map_err(clone_err).and_then(|g| criterion3(g, &mut opts)));
    all &= report(3, Some(secs(120)), t, out);

    let (out, t) = timed(|| instances.as_deref().map_err(clone_err).and_then(|g| criterion4(g, &opts)));
    all &= report(4, None, t, out);

    let (out, t) = timed(|| criterion5(&mut bodies));
    all &= report(5, Some(secs(60)), t, out);

    let (out, t) = timed(criterion6);
    all &= report(6, Some(secs(5)), t, out);

    // the limit applies to the library check; the exact-arithmetic cross
    // check runs on top of it
    let (out, total) = timed(criterion7);
    let (out, t) = match out {
        Ok((v, lib)) => (Ok(Verdict { detail: format!("{} (with exact check {:.2}s)", v.detail, total.as_secs_f64()), ..v }), lib),
        Err(e) => (Err(e), total),
    };
    all &= report(7, Some(secs(10)), t, out);

    let (out, t) = timed(criterion8);
    all &= report(8, Some(secs(60)), t, out);

    let (out, t) = timed(criterion9);
    all &= report(9, Some(secs(1)), t, out);

    let (out, t) = timed(|| criterion10(&mut bodies));
    all &= report(10, Some(secs(120)), t, out);

    let mut grid = Vec::new();
    let (out, t) = timed(|| criterion11(&mut bodies, &mut grid));
    all &= report(11, Some(secs(300)), t, out);

    let (out, t) = timed(criterion12);
    all &= report(12, Some(secs(900)), t, out);

    let (out, t) = timed(|| Ok(criterion13(&grid)));
    all &= report(13, None, t, out);

    let (out, t) = timed(|| criterion14(&bodies));
    all &= report(14, None, t, out);

    if all {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: some criteria failed");
        std::process::exit(1);
    }
}

fn clone_err(e: &maxcov::Error) -> maxcov::Error {
    maxcov::Error::InvalidInput(e.to_string())
}
