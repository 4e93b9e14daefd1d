//! `maxcov` command-line tool.
//!
//! Exit codes: 0 success, 1 error, 2 an exact solve stopped on its budget.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use maxcov::algorithms::{accept_reject, greedy, t_d_count};
use maxcov::exact::{opt_branch_bound, opt_exhaustive, SearchBudget, DEFAULT_EXHAUSTIVE_BUDGET};
use maxcov::experiments::{equivalence_check, with_threads, ExperimentSpec};
use maxcov::generators::{bad_instance, genr, lrr, powerlaw_degrees, ulrr, DegreeSpec};
use maxcov::graph::{load_graph, save_graph};
use maxcov::matching::{build_incidence_graph, max_matching, SimpleGraph};
use maxcov::theory::{
    claim_checks, gamma_constants, hypergeom_approx_check, ode_rk4_max_error, predict,
};
use maxcov::{Error, Seed};

const EXPERIMENT_HELP: &str = "\
CSV columns by experiment kind:
  ratio            k,trials,mean_alg,se_alg,mean_opt,se_opt,ratio_of_means,ratio_se,opt_method,best_effort_trials
  degree_mix       a,min_ratio,se,argmin_k,best_effort
  marginals        t,greedy_mean,greedy_se,fixed_mean,fixed_se,cum_diff_mean,cum_diff_se
  theorem3         n,k,trials,mean_greedy,mean_lambda,mean_opt_lb,mean_t2,ratio_ub,frac_lambda_ge_k
  td_concentration n,d,trials,t_star,delta,mean,sd,max_abs_dev,all_within_delta
  chernoff         n,d,k,delta,trials,analytic_mean,empirical_mean,empirical_se,threshold,frequency,bound,slack,holds
  greedy_vs_fixed  n,d,k,trials,mean_greedy,se_greedy,mean_fixed,se_fixed,se_diff,analytic_fixed,hybrid_min_step,mean_opt_ub,ratio_lb
The first line of the output file is a `#` comment with the kind and a timestamp.";

#[derive(Parser, Debug)]
#[command(name = "maxcov", version, about = "Maximum coverage on random bipartite graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
#[value(rename_all = "snake_case")]
enum Model {
    Lrr,
    Ulrr,
    Genr,
    Powerlaw,
    BadInstance,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
#[value(rename_all = "snake_case")]
enum Method {
    Exhaustive,
    BranchBound,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a graph and write it in the text format ("n m" header, one
    /// line of right neighbors per left node).
    Gen {
        #[arg(long, value_enum)]
        model: Model,
        #[arg(long)]
        n: Option<u64>,
        /// Right side size (defaults to n).
        #[arg(long)]
        m: Option<u64>,
        /// Common degree for lrr and ulrr.
        #[arg(long)]
        d: Option<u64>,
        /// Explicit comma-separated degrees for genr.
        #[arg(long, value_delimiter = ',')]
        degrees: Option<Vec<u64>>,
        /// Mixture support for genr, with --probs.
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<u64>>,
        #[arg(long, value_delimiter = ',')]
        probs: Option<Vec<f64>>,
        /// Pareto shape for powerlaw.
        #[arg(long)]
        a: Option<f64>,
        /// Order of the bad instance.
        #[arg(long)]
        k: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run greedy and print coverage and trace summary.
    Greedy {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        k: u64,
        /// Also write the trace as CSV (step,node,gain,coverage).
        #[arg(long)]
        trace_csv: Option<PathBuf>,
        /// Also run AcceptReject and report whether the sequences agree.
        #[arg(long)]
        accept_reject: bool,
    },
    /// Solve exactly.
    Opt {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        k: u64,
        #[arg(long, value_enum, default_value = "branch_bound")]
        method: Method,
        /// Time limit for branch and bound.
        #[arg(long)]
        budget_ms: Option<u64>,
        /// Node limit for branch and bound, subset limit for exhaustive.
        #[arg(long)]
        max_nodes: Option<u64>,
    },
    /// Maximum matching. With --graph (2-left-regular bipartite) reports
    /// λ = μ(I_B); with --simple matches a simple graph ("V E" header, one
    /// "u v" edge per line).
    Match {
        #[arg(long, conflicts_with = "simple", required_unless_present = "simple")]
        graph: Option<PathBuf>,
        #[arg(long)]
        simple: Option<PathBuf>,
    },
    /// Print closed-form predictions.
    Predict {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        m: u64,
        #[arg(long)]
        d: u64,
        /// Cardinality (defaults to min(n, floor(m/d))).
        #[arg(long)]
        k: Option<u64>,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
    },
    /// Run a JSON experiment document and write its CSV.
    #[command(after_help = EXPERIMENT_HELP)]
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (defaults to all cores).
        #[arg(long)]
        threads: Option<u64>,
    },
    /// Run the deterministic invariant suite; nonzero exit on any violation.
    Verify {
        #[arg(long)]
        seed: Option<u64>,
        /// Number of sampled graphs for the greedy/AcceptReject check.
        #[arg(long, default_value_t = 300)]
        graphs: u64,
    },
}

enum Outcome {
    Done(Value),
    BestEffort(Value),
    Failed(Value),
}

fn usize_of(v: u64, flag: &str) -> Result<usize, Error> {
    usize::try_from(v).map_err(|_| Error::InvalidInput(format!("--{flag} too large")))
}

fn need(v: Option<u64>, flag: &str) -> Result<usize, Error> {
    usize_of(
        v.ok_or_else(|| Error::InvalidInput(format!("--{flag} is required for this model")))?,
        flag,
    )
}

fn seed_or_default(seed: Option<u64>) -> Seed {
    match seed {
        Some(s) => Seed(s),
        None => {
            log::warn!("no --seed given; using the shared default seed 0");
            Seed(0)
        }
    }
}

fn run(command: Command) -> Result<Outcome, Error> {
    match command {
        Command::Gen {
            model,
            n,
            m,
            d,
            degrees,
            values,
            probs,
            a,
            k,
            seed,
            out,
        } => {
            let needs_seed = !matches!(model, Model::BadInstance);
            let seed = if needs_seed { seed_or_default(seed) } else { Seed(seed.unwrap_or(0)) };
            let mut rng = seed.rng(0);
            let graph = match model {
                Model::Lrr => lrr(need(n, "n")?, need(d, "d")?, &mut rng)?,
                Model::Ulrr => {
                    let n = need(n, "n")?;
                    ulrr(n, need(m.or(Some(n as u64)), "m")?, need(d, "d")?, &mut rng)?
                }
                Model::Genr => {
                    let n = need(n, "n")?;
                    let m = need(m.or(Some(n as u64)), "m")?;
                    let spec = match (degrees, values, probs) {
                        (Some(ds), None, None) => DegreeSpec::Explicit(
                            ds.into_iter().map(|x| usize_of(x, "degrees")).collect::<Result<_, _>>()?,
                        ),
                        (None, Some(vs), Some(ps)) => DegreeSpec::Mixture {
                            values: vs.into_iter().map(|x| usize_of(x, "values")).collect::<Result<_, _>>()?,
                            probs: ps,
                        },
                        (None, None, None) => DegreeSpec::Uniform(need(d, "d")?),
                        _ => {
                            return Err(Error::InvalidInput(
                                "genr takes --degrees, or --values with --probs, or --d".into(),
                            ))
                        }
                    };
                    let ds = spec.realize(n, m, &mut rng)?;
                    genr(m, &ds, &mut rng)?
                }
                Model::Powerlaw => {
                    let n = need(n, "n")?;
                    let m = need(m.or(Some(n as u64)), "m")?;
                    let a = a.ok_or_else(|| Error::InvalidInput("--a is required for powerlaw".into()))?;
                    let ds = powerlaw_degrees(n, m, a, &mut rng)?;
                    genr(m, &ds, &mut rng)?
                }
                Model::BadInstance => bad_instance(need(k, "k")?)?,
            };
            save_graph(&graph, &out)?;
            Ok(Outcome::Done(json!({
                "out": out.display().to_string(),
                "n": graph.n_left(),
                "m": graph.m_right(),
                "edges": graph.edge_count(),
                "seed": seed.0,
            })))
        }
        Command::Greedy {
            graph,
            k,
            trace_csv,
            accept_reject: check_ar,
        } => {
            let g = load_graph(&graph)?;
            let k = usize_of(k, "k")?;
            let trace = greedy(&g, k)?;
            if let Some(path) = trace_csv {
                std::fs::write(path, trace.to_csv())?;
            }
            let full_degree_steps = match g.regular_degree() {
                Some(_) => Some(t_d_count(&g)?),
                None => None,
            };
            let mut out = json!({
                "k": k,
                "coverage": trace.coverage(),
                "selections": trace.selections,
                "first_gain": trace.gains.first(),
                "last_gain": trace.gains.last(),
                "t_d": full_degree_steps,
            });
            if check_ar {
                let ar = accept_reject(&g, k)?;
                out["accept_reject_agrees"] = json!(ar.accepted == trace.selections);
            }
            Ok(Outcome::Done(out))
        }
        Command::Opt {
            graph,
            k,
            method,
            budget_ms,
            max_nodes,
        } => {
            let g = load_graph(&graph)?;
            let k = usize_of(k, "k")?;
            let start = Instant::now();
            let result = match method {
                Method::Exhaustive => {
                    opt_exhaustive(&g, k, max_nodes.unwrap_or(DEFAULT_EXHAUSTIVE_BUDGET))
                }
                Method::BranchBound => opt_branch_bound(
                    &g,
                    k,
                    SearchBudget {
                        max_nodes,
                        max_time: budget_ms.map(Duration::from_millis),
                    },
                ),
            };
            let result = match result {
                Ok(r) => r,
                Err(Error::Capacity(msg)) => {
                    return Ok(Outcome::BestEffort(json!({ "error": msg, "best_effort": true })))
                }
                Err(e) => return Err(e),
            };
            let mut out = serde_json::to_value(&result)?;
            out["time_ms"] = json!(start.elapsed().as_millis() as u64);
            Ok(if result.best_effort {
                Outcome::BestEffort(out)
            } else {
                Outcome::Done(out)
            })
        }
        Command::Match { graph, simple } => {
            if let Some(path) = graph {
                let g = load_graph(&path)?;
                let ig = build_incidence_graph(&g)?;
                let mm = max_matching(&ig);
                Ok(Outcome::Done(json!({
                    "incidence_vertices": ig.n_vertices(),
                    "incidence_edges": ig.edges().len(),
                    "lambda": mm.size,
                    "pairs": mm.pairs,
                })))
            } else {
                let path = simple.expect("clap enforces one of --graph/--simple");
                let sg = SimpleGraph::from_text(&std::fs::read_to_string(path)?)?;
                let mm = max_matching(&sg);
                Ok(Outcome::Done(json!({ "size": mm.size, "pairs": mm.pairs })))
            }
        }
        Command::Predict { n, m, d, k, eps } => {
            let (n, m, d) = (usize_of(n, "n")?, usize_of(m, "m")?, usize_of(d, "d")?);
            let k = match k {
                Some(k) => usize_of(k, "k")?,
                None => n.min(m / d.max(1)),
            };
            Ok(Outcome::Done(serde_json::to_value(predict(n, m, d, k, eps)?)?))
        }
        Command::Experiment {
            config,
            out,
            threads,
        } => {
            let spec = ExperimentSpec::from_json(&std::fs::read_to_string(&config)?)?;
            if spec.explicit_seed().is_none() {
                log::warn!("config has no seed; using the shared default seed 0");
            }
            let threads = threads.map(|t| usize_of(t, "threads")).transpose()?;
            let output = with_threads(threads, || spec.run())??;
            let kind = serde_json::to_value(&spec)?["kind"].clone();
            let stamp = SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            let kind_label = kind.as_str().unwrap_or("unknown");
            std::fs::write(
                &out,
                format!("# maxcov experiment kind={kind_label} generated_at={stamp}\n{}", output.csv),
            )?;
            let summary = json!({
                "out": out.display().to_string(),
                "kind": kind,
                "rows": output.csv.lines().count().saturating_sub(1),
                "best_effort": output.best_effort,
            });
            Ok(if output.best_effort {
                Outcome::BestEffort(summary)
            } else {
                Outcome::Done(summary)
            })
        }
        Command::Verify { seed, graphs } => {
            let seed = Seed(seed.unwrap_or(0));
            let claims = claim_checks();
            let mut hyper_violations = 0usize;
            let mut hyper_cases = 0usize;
            for m in 50..=200 {
                let mut d = 1;
                while 2 * d * d <= m {
                    hyper_cases += 1;
                    if !hypergeom_approx_check(m, d)?.holds() {
                        hyper_violations += 1;
                    }
                    d += 1;
                }
            }
            let mut ode_max: f64 = 0.0;
            for d in 2..=6 {
                for (n, m) in [(50, 100), (100, 100), (200, 100)] {
                    ode_max = ode_max.max(ode_rk4_max_error(n, m, d, &[0.25, 0.5, 1.0], 1e-4)?);
                }
            }
            let eq = equivalence_check(usize_of(graphs, "graphs")?, 200, seed)?;
            let gamma = gamma_constants();
            let ok = claims.holds()
                && hyper_violations == 0
                && ode_max <= 1e-8
                && eq.mismatches() == 0
                && gamma.residual <= 1e-12;
            let report = json!({
                "ok": ok,
                "claims": claims,
                "hypergeom_cases": hyper_cases,
                "hypergeom_violations": hyper_violations,
                "ode_max_error": ode_max,
                "equivalence_checks": eq.rows.len(),
                "equivalence_mismatches": eq.mismatches(),
                "gamma": gamma,
            });
            Ok(if ok {
                Outcome::Done(report)
            } else {
                Outcome::Failed(report)
            })
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
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
    match run(cli.command) {
        Ok(Outcome::Done(v)) => {
            println!("{v}");
            ExitCode::SUCCESS
        }
        Ok(Outcome::BestEffort(v)) => {
            println!("{v}");
            ExitCode::from(2)
        }
        Ok(Outcome::Failed(v)) => {
            println!("{v}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
