//! Monte Carlo harness.
//!
//! Trial `i` of a cell draws its instance from substream `i` of the cell
//! seed. Trials run on the current rayon pool and results are reduced in
//! trial order, so every CSV body depends only on the configuration.
//!
//! All CSV bodies start with a header row; column orders are listed on each
//! `to_csv` method.

use std::fmt::Write as _;
use std::time::Duration;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algorithms::{
    accept_reject, fixed_set_value, greedy, hybrid_coverages, t_d_count, GreedyTrace,
};
use crate::error::{domain, invalid, Error, Result};
use crate::exact::{opt_branch_bound, opt_exhaustive, SearchBudget, DEFAULT_EXHAUSTIVE_BUDGET};
use crate::generators::{bad_instance, genr, lrr, powerlaw_degrees, ulrr, DegreeSpec};
use crate::graph::{BipartiteGraph, CoverState};
use crate::matching::{lambda, max_matching, build_incidence_graph};
use crate::seed::Seed;
use crate::theory::{
    de_error_bound, expected_fixed_coverage, predict_t_star, trivial_opt_ub,
};

/// Instance model of an experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelSpec {
    Lrr { n: usize, d: usize },
    Ulrr { n: usize, m: usize, d: usize },
    Genr { n: usize, m: usize, degrees: DegreeSpec },
    Powerlaw { n: usize, m: usize, a: f64 },
    /// The deterministic tight instance of order `size`.
    BadInstance { size: usize },
}

impl ModelSpec {
    pub fn n(&self) -> usize {
        match self {
            ModelSpec::Lrr { n, .. }
            | ModelSpec::Ulrr { n, .. }
            | ModelSpec::Genr { n, .. }
            | ModelSpec::Powerlaw { n, .. } => *n,
            ModelSpec::BadInstance { size } => 2 * size - 1,
        }
    }

    pub fn m(&self) -> usize {
        match self {
            ModelSpec::Lrr { n, .. } => *n,
            ModelSpec::Ulrr { m, .. } | ModelSpec::Genr { m, .. } | ModelSpec::Powerlaw { m, .. } => {
                *m
            }
            ModelSpec::BadInstance { size } => size.saturating_pow(*size as u32),
        }
    }

    /// Common left degree, when the model is left-regular.
    pub fn regular_degree(&self) -> Option<usize> {
        match self {
            ModelSpec::Lrr { d, .. } | ModelSpec::Ulrr { d, .. } => Some(*d),
            ModelSpec::Genr {
                degrees: DegreeSpec::Uniform(d),
                ..
            } => Some(*d),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::Lrr { n, d } => check_regular(*n, *n, *d),
            ModelSpec::Ulrr { n, m, d } => check_regular(*n, *m, *d),
            ModelSpec::Genr { n, m, degrees } => {
                if *n == 0 || *m == 0 {
                    return Err(invalid("n and m must be positive"));
                }
                degrees.validate(*n, *m)
            }
            ModelSpec::Powerlaw { n, m, a } => {
                if *n == 0 || *m == 0 {
                    return Err(invalid("n and m must be positive"));
                }
                DegreeSpec::PowerLaw { a: *a }.validate(*n, *m)
            }
            ModelSpec::BadInstance { size } => {
                if *size < 2 {
                    return Err(invalid("bad instance needs size >= 2"));
                }
                Ok(())
            }
        }
    }

    /// Draws one instance.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<BipartiteGraph> {
        match self {
            ModelSpec::Lrr { n, d } => lrr(*n, *d, rng),
            ModelSpec::Ulrr { n, m, d } => ulrr(*n, *m, *d, rng),
            ModelSpec::Genr { n, m, degrees } => {
                let ds = degrees.realize(*n, *m, rng)?;
                genr(*m, &ds, rng)
            }
            ModelSpec::Powerlaw { n, m, a } => {
                let ds = powerlaw_degrees(*n, *m, *a, rng)?;
                genr(*m, &ds, rng)
            }
            ModelSpec::BadInstance { size } => bad_instance(*size),
        }
    }
}

fn check_regular(n: usize, m: usize, d: usize) -> Result<()> {
    if n == 0 || m == 0 {
        return Err(invalid("n and m must be positive"));
    }
    if d == 0 || d > m {
        return Err(invalid(format!("degree {d} outside [1, {m}]")));
    }
    Ok(())
}

/// One cardinality or a grid of them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KSpec {
    Single(usize),
    Grid(Vec<usize>),
}

impl KSpec {
    pub fn values(&self) -> Vec<usize> {
        match self {
            KSpec::Single(k) => vec![*k],
            KSpec::Grid(ks) => ks.clone(),
        }
    }
}

/// How the denominator of a ratio is obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptProxy {
    /// Exact; exceeding the enumeration budget is an error.
    Exhaustive,
    /// Exact unless the budget is hit, in which case the trial is flagged.
    BranchBound,
    /// `2 min(k, λ)`, a lower bound (d = 2 only). Ratios against it are
    /// upper bounds on the true ratio.
    MatchingLb,
    /// `min(top-k degree sum, |N(L)|, m)`, an upper bound. Ratios against
    /// it are lower bounds on the true ratio.
    TrivialUb,
    /// No denominator; only greedy statistics are meaningful.
    None,
}

impl OptProxy {
    pub fn label(self) -> &'static str {
        match self {
            OptProxy::Exhaustive => "exhaustive",
            OptProxy::BranchBound => "branch_bound",
            OptProxy::MatchingLb => "matching_lb",
            OptProxy::TrivialUb => "trivial_ub",
            OptProxy::None => "none",
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, OptProxy::Exhaustive | OptProxy::BranchBound)
    }
}

/// Configuration of a ratio estimate or a `k` sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub model: ModelSpec,
    pub k: KSpec,
    pub trials: usize,
    #[serde(default)]
    pub seed: Option<Seed>,
    pub opt_method: OptProxy,
    /// Per-solve time limit for branch and bound.
    #[serde(default)]
    pub budget_ms: Option<u64>,
    /// Node limit for branch and bound, or subset limit for exhaustive.
    #[serde(default)]
    pub max_nodes: Option<u64>,
}

impl ExperimentConfig {
    pub fn seed(&self) -> Seed {
        self.seed.unwrap_or_default()
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(invalid("trials must be at least 1"));
        }
        self.model.validate()?;
        let n = self.model.n();
        let ks = self.k.values();
        if ks.is_empty() {
            return Err(invalid("empty k grid"));
        }
        if let Some(&k) = ks.iter().find(|&&k| k == 0 || k > n) {
            return Err(invalid(format!("k = {k} outside [1, {n}]")));
        }
        if self.opt_method == OptProxy::MatchingLb && self.model.regular_degree() != Some(2) {
            return Err(invalid("matching_lb needs a 2-left-regular model"));
        }
        Ok(())
    }

    fn search_budget(&self) -> SearchBudget {
        SearchBudget {
            max_nodes: self.max_nodes,
            max_time: self.budget_ms.map(Duration::from_millis),
        }
    }
}

/// Sample mean and standard error (`sd / sqrt(len)`, sample sd with
/// `len - 1`); the error is zero for a single sample.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let t = xs.len();
    if t == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / t as f64;
    if t == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (t - 1) as f64;
    (mean, (var / t as f64).sqrt())
}

fn sample_cov(xs: &[f64], ys: &[f64]) -> f64 {
    let t = xs.len();
    if t < 2 {
        return 0.0;
    }
    let mx = xs.iter().sum::<f64>() / t as f64;
    let my = ys.iter().sum::<f64>() / t as f64;
    xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / (t - 1) as f64
}

/// Ratio of means `E[alg] / E[opt]` with standard errors.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioEstimate {
    trials: usize,
    mean_alg: f64,
    se_alg: f64,
    mean_opt: f64,
    se_opt: f64,
    ratio_of_means: f64,
    ratio_se: f64,
    opt_method: OptProxy,
    best_effort_trials: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    per_trial: Option<Vec<(f64, f64)>>,
}

impl RatioEstimate {
    /// Builds the estimate from paired per-trial samples. The ratio is
    /// always the ratio of the two means; its error uses the delta method.
    pub fn from_samples(
        alg: &[f64],
        opt: &[f64],
        opt_method: OptProxy,
        best_effort_trials: usize,
        keep_per_trial: bool,
    ) -> Result<Self> {
        if alg.is_empty() || alg.len() != opt.len() {
            return Err(invalid("ratio needs equally many non-zero alg and opt samples"));
        }
        let (mean_alg, se_alg) = mean_se(alg);
        let (mean_opt, se_opt) = mean_se(opt);
        if mean_opt <= 0.0 {
            return Err(domain("mean opt value is not positive"));
        }
        let ratio = mean_alg / mean_opt;
        let t = alg.len() as f64;
        let var = (se_alg * se_alg * t) - 2.0 * ratio * sample_cov(alg, opt)
            + ratio * ratio * (se_opt * se_opt * t);
        let ratio_se = (var.max(0.0) / t).sqrt() / mean_opt;
        Ok(RatioEstimate {
            trials: alg.len(),
            mean_alg,
            se_alg,
            mean_opt,
            se_opt,
            ratio_of_means: ratio,
            ratio_se,
            opt_method,
            best_effort_trials,
            per_trial: keep_per_trial.then(|| alg.iter().copied().zip(opt.iter().copied()).collect()),
        })
    }

    pub fn trials(&self) -> usize {
        self.trials
    }
    pub fn mean_alg(&self) -> f64 {
        self.mean_alg
    }
    pub fn se_alg(&self) -> f64 {
        self.se_alg
    }
    pub fn mean_opt(&self) -> f64 {
        self.mean_opt
    }
    pub fn se_opt(&self) -> f64 {
        self.se_opt
    }
    pub fn ratio_of_means(&self) -> f64 {
        self.ratio_of_means
    }
    pub fn ratio_se(&self) -> f64 {
        self.ratio_se
    }
    pub fn opt_method(&self) -> OptProxy {
        self.opt_method
    }
    /// Trials whose solver stopped on its budget.
    pub fn best_effort_trials(&self) -> usize {
        self.best_effort_trials
    }
    pub fn per_trial(&self) -> Option<&[(f64, f64)]> {
        self.per_trial.as_deref()
    }
}

/// Opt proxy value for one instance and one `k`; the flag marks a solve
/// that stopped on its budget.
fn opt_value(
    graph: &BipartiteGraph,
    k: usize,
    method: OptProxy,
    budget: SearchBudget,
) -> Result<(usize, bool)> {
    match method {
        OptProxy::Exhaustive => {
            let limit = budget.max_nodes.unwrap_or(DEFAULT_EXHAUSTIVE_BUDGET);
            Ok((opt_exhaustive(graph, k, limit)?.value, false))
        }
        OptProxy::BranchBound => {
            let r = opt_branch_bound(graph, k, budget)?;
            Ok((r.value, r.best_effort))
        }
        OptProxy::MatchingLb => Ok((crate::matching::opt_lower_bound_d2(graph, k)?, false)),
        OptProxy::TrivialUb => Ok((trivial_opt_ub(graph, k), false)),
        OptProxy::None => Err(invalid("opt_method none has no denominator")),
    }
}

/// Result of a `k` sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    pub rows: Vec<(usize, RatioEstimate)>,
    /// `k` with the smallest ratio of means (first on ties).
    pub argmin_k: usize,
}

impl SweepResult {
    pub fn best_effort(&self) -> bool {
        self.rows.iter().any(|(_, r)| r.best_effort_trials > 0)
    }

    pub fn min_row(&self) -> &RatioEstimate {
        &self.rows.iter().find(|(k, _)| *k == self.argmin_k).expect("argmin row").1
    }

    /// Columns `k,trials,mean_alg,se_alg,mean_opt,se_opt,ratio_of_means,ratio_se,opt_method,best_effort_trials`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "k,trials,mean_alg,se_alg,mean_opt,se_opt,ratio_of_means,ratio_se,opt_method,best_effort_trials\n",
        );
        for (k, r) in &self.rows {
            let _ = writeln!(
                out,
                "{k},{},{},{},{},{},{},{},{},{}",
                r.trials,
                r.mean_alg,
                r.se_alg,
                r.mean_opt,
                r.se_opt,
                r.ratio_of_means,
                r.ratio_se,
                r.opt_method.label(),
                r.best_effort_trials
            );
        }
        out
    }
}

/// Estimates the ratio of means for every `k` in the configuration. Each
/// trial draws one instance and evaluates all `k` on it.
pub fn sweep_k(config: &ExperimentConfig) -> Result<SweepResult> {
    config.validate()?;
    if config.opt_method == OptProxy::None {
        return Err(invalid("ratio estimation needs an opt_method other than none"));
    }
    let ks = config.k.values();
    let k_max = *ks.iter().max().expect("non-empty grid");
    let seed = config.seed();
    let budget = config.search_budget();
    let per_trial: Vec<Vec<(usize, usize, bool)>> = (0..config.trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed.rng(i);
            let graph = config.model.sample(&mut rng)?;
            let trace = greedy(&graph, k_max)?;
            ks.iter()
                .map(|&k| {
                    let (opt, flagged) = opt_value(&graph, k, config.opt_method, budget)?;
                    Ok((trace.coverage_at(k), opt, flagged))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::with_capacity(ks.len());
    for (j, &k) in ks.iter().enumerate() {
        let alg: Vec<f64> = per_trial.iter().map(|t| t[j].0 as f64).collect();
        let opt: Vec<f64> = per_trial.iter().map(|t| t[j].1 as f64).collect();
        let flagged = per_trial.iter().filter(|t| t[j].2).count();
        rows.push((k, RatioEstimate::from_samples(&alg, &opt, config.opt_method, flagged, false)?));
    }
    let argmin_k = rows
        .iter()
        .fold(None::<(usize, f64)>, |best, (k, r)| match best {
            Some((_, v)) if v <= r.ratio_of_means => best,
            _ => Some((*k, r.ratio_of_means)),
        })
        .expect("non-empty grid")
        .0;
    Ok(SweepResult { rows, argmin_k })
}

/// Ratio of means for a single-`k` configuration.
pub fn estimate_ratio(config: &ExperimentConfig) -> Result<RatioEstimate> {
    if !matches!(config.k, KSpec::Single(_)) {
        return Err(invalid("estimate_ratio needs a single k; use sweep_k for a grid"));
    }
    Ok(sweep_k(config)?.rows.remove(0).1)
}

/// One row of [`reproduce_degree_mix`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegreeMixRow {
    pub a: f64,
    pub min_ratio: f64,
    pub se: f64,
    pub argmin_k: usize,
    /// Some solve in this cell stopped on its budget.
    pub best_effort: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegreeMixResult {
    pub rows: Vec<DegreeMixRow>,
}

impl DegreeMixResult {
    pub fn best_effort(&self) -> bool {
        self.rows.iter().any(|r| r.best_effort)
    }

    /// Columns `a,min_ratio,se,argmin_k,best_effort`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("a,min_ratio,se,argmin_k,best_effort\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.a, r.min_ratio, r.se, r.argmin_k, r.best_effort
            );
        }
        out
    }
}

/// Degrees drawn from `{1, 4, 7}` with probabilities `(a/2, 1 - a, a/2)`
/// (mean degree 4); for each `a`, the minimum over `k in 1..=n` of the
/// greedy-to-optimum ratio of means, with exact optima from branch and
/// bound under `budget`.
pub fn reproduce_degree_mix(
    n: usize,
    m: usize,
    a_grid: &[f64],
    trials: usize,
    seed: Seed,
    budget: SearchBudget,
) -> Result<DegreeMixResult> {
    if a_grid.is_empty() {
        return Err(invalid("empty a grid"));
    }
    if let Some(a) = a_grid.iter().find(|a| !(0.0..=1.0).contains(*a)) {
        return Err(invalid(format!("a = {a} outside [0, 1]")));
    }
    let mut rows = Vec::with_capacity(a_grid.len());
    for (cell, &a) in a_grid.iter().enumerate() {
        let config = ExperimentConfig {
            model: ModelSpec::Genr {
                n,
                m,
                degrees: DegreeSpec::Mixture {
                    values: vec![1, 4, 7],
                    probs: vec![a / 2.0, 1.0 - a, a / 2.0],
                },
            },
            k: KSpec::Grid((1..=n).collect()),
            trials,
            seed: Some(seed.derive(cell as u64)),
            opt_method: OptProxy::BranchBound,
            budget_ms: budget.max_time.map(|t| t.as_millis() as u64),
            max_nodes: budget.max_nodes,
        };
        let sweep = sweep_k(&config)?;
        let best = sweep.min_row();
        rows.push(DegreeMixRow {
            a,
            min_ratio: best.ratio_of_means,
            se: best.ratio_se,
            argmin_k: sweep.argmin_k,
            best_effort: sweep.best_effort(),
        });
    }
    Ok(DegreeMixResult { rows })
}

/// Per-iteration marginal gains of greedy and of the fixed set.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MarginalsResult {
    pub n: usize,
    pub m: usize,
    pub d: usize,
    pub trials: usize,
    pub greedy_mean: Vec<f64>,
    pub greedy_se: Vec<f64>,
    pub fixed_mean: Vec<f64>,
    pub fixed_se: Vec<f64>,
    /// Mean of `|N(G_t)| - |N(H_t)|`.
    pub cum_diff_mean: Vec<f64>,
    pub cum_diff_se: Vec<f64>,
    /// First `t` (1-based) where the fixed-set mean gain exceeds greedy's.
    pub crossover: Option<usize>,
}

impl MarginalsResult {
    /// Whether cumulative greedy means stay at or above fixed-set means
    /// within `tol` standard errors at every `t`.
    pub fn cumulative_dominates(&self, tol: f64) -> bool {
        self.cum_diff_mean
            .iter()
            .zip(&self.cum_diff_se)
            .all(|(m, se)| *m >= -tol * se)
    }

    /// Columns `t,greedy_mean,greedy_se,fixed_mean,fixed_se,cum_diff_mean,cum_diff_se`.
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("t,greedy_mean,greedy_se,fixed_mean,fixed_se,cum_diff_mean,cum_diff_se\n");
        for t in 0..self.greedy_mean.len() {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                t + 1,
                self.greedy_mean[t],
                self.greedy_se[t],
                self.fixed_mean[t],
                self.fixed_se[t],
                self.cum_diff_mean[t],
                self.cum_diff_se[t]
            );
        }
        out
    }
}

/// Marginal contributions of greedy step `t` and of adding node `t` to the
/// fixed set, averaged over `trials` instances of `ULRR(n, m, d)`.
pub fn reproduce_marginals(
    n: usize,
    m: usize,
    d: usize,
    trials: usize,
    seed: Seed,
) -> Result<MarginalsResult> {
    check_regular(n, m, d)?;
    if trials == 0 {
        return Err(invalid("trials must be at least 1"));
    }
    let per_trial: Vec<(Vec<usize>, Vec<usize>)> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed.rng(i);
            let graph = ulrr(n, m, d, &mut rng)?;
            let trace = greedy(&graph, n)?;
            let mut state = CoverState::new(m);
            let fixed: Vec<usize> = (0..n).map(|u| state.add(&graph, u)).collect();
            Ok((trace.gains, fixed))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut result = MarginalsResult {
        n,
        m,
        d,
        trials,
        greedy_mean: Vec::with_capacity(n),
        greedy_se: Vec::with_capacity(n),
        fixed_mean: Vec::with_capacity(n),
        fixed_se: Vec::with_capacity(n),
        cum_diff_mean: Vec::with_capacity(n),
        cum_diff_se: Vec::with_capacity(n),
        crossover: None,
    };
    let mut cum = vec![0f64; trials];
    for t in 0..n {
        let g: Vec<f64> = per_trial.iter().map(|p| p.0[t] as f64).collect();
        let f: Vec<f64> = per_trial.iter().map(|p| p.1[t] as f64).collect();
        for (c, (x, y)) in cum.iter_mut().zip(g.iter().zip(&f)) {
            *c += x - y;
        }
        let (gm, gs) = mean_se(&g);
        let (fm, fs) = mean_se(&f);
        let (cm, cs) = mean_se(&cum);
        if result.crossover.is_none() && fm > gm {
            result.crossover = Some(t + 1);
        }
        result.greedy_mean.push(gm);
        result.greedy_se.push(gs);
        result.fixed_mean.push(fm);
        result.fixed_se.push(fs);
        result.cum_diff_mean.push(cm);
        result.cum_diff_se.push(cs);
    }
    Ok(result)
}

/// One `n` of [`theorem3_experiment`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Theorem3Row {
    pub n: usize,
    pub k: usize,
    pub trials: usize,
    pub mean_greedy: f64,
    pub mean_lambda: f64,
    /// Mean of `2 min(k, λ)`.
    pub mean_opt_lb: f64,
    pub mean_t2: f64,
    /// `mean_greedy / mean_opt_lb`, an upper bound on the ratio of means.
    pub ratio_ub: f64,
    pub frac_lambda_ge_k: f64,
    pub lambda_values: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Theorem3Result {
    pub rows: Vec<Theorem3Row>,
}

impl Theorem3Result {
    /// Columns `n,k,trials,mean_greedy,mean_lambda,mean_opt_lb,mean_t2,ratio_ub,frac_lambda_ge_k`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "n,k,trials,mean_greedy,mean_lambda,mean_opt_lb,mean_t2,ratio_ub,frac_lambda_ge_k\n",
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.n,
                r.k,
                r.trials,
                r.mean_greedy,
                r.mean_lambda,
                r.mean_opt_lb,
                r.mean_t2,
                r.ratio_ub,
                r.frac_lambda_ge_k
            );
        }
        out
    }
}

/// Degree-two regime on `LRR(n, 2)` with `k = floor(k_fraction n)`: greedy
/// value, `λ` via blossom, the matching lower bound on the optimum and
/// `t_2`.
pub fn theorem3_experiment(
    n_grid: &[usize],
    k_fraction: f64,
    trials: usize,
    seed: Seed,
) -> Result<Theorem3Result> {
    if trials == 0 {
        return Err(invalid("trials must be at least 1"));
    }
    if !(k_fraction > 0.0 && k_fraction <= 1.0) {
        return Err(invalid(format!("k_fraction = {k_fraction} outside (0, 1]")));
    }
    let mut rows = Vec::with_capacity(n_grid.len());
    for (cell, &n) in n_grid.iter().enumerate() {
        check_regular(n, n, 2)?;
        let k = (k_fraction * n as f64).floor() as usize;
        let cell_seed = seed.derive(cell as u64);
        let samples: Vec<(usize, usize, usize)> = (0..trials as u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = cell_seed.rng(i);
                let graph = lrr(n, 2, &mut rng)?;
                let trace = greedy(&graph, n)?;
                let t2 = trace.gains.iter().take_while(|&&g| g == 2).count();
                let lam = max_matching(&build_incidence_graph(&graph)?).size;
                Ok((trace.coverage_at(k), lam, t2))
            })
            .collect::<Result<Vec<_>>>()?;
        let t = trials as f64;
        let mean_greedy = samples.iter().map(|s| s.0 as f64).sum::<f64>() / t;
        let mean_lambda = samples.iter().map(|s| s.1 as f64).sum::<f64>() / t;
        let mean_opt_lb = samples.iter().map(|s| 2.0 * k.min(s.1) as f64).sum::<f64>() / t;
        let mean_t2 = samples.iter().map(|s| s.2 as f64).sum::<f64>() / t;
        rows.push(Theorem3Row {
            n,
            k,
            trials,
            mean_greedy,
            mean_lambda,
            mean_opt_lb,
            mean_t2,
            ratio_ub: mean_greedy / mean_opt_lb,
            frac_lambda_ge_k: samples.iter().filter(|s| s.1 >= k).count() as f64 / t,
            lambda_values: samples.iter().map(|s| s.1).collect(),
        });
    }
    Ok(Theorem3Result { rows })
}

/// Distribution of `t_d` on `LRR(n, d)` against the closed-form prediction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TdSummary {
    pub n: usize,
    pub d: usize,
    pub trials: usize,
    pub t_star: f64,
    pub delta: f64,
    pub samples: Vec<usize>,
    pub mean: f64,
    pub sd: f64,
    pub max_abs_dev: f64,
    pub all_within_delta: bool,
}

impl TdSummary {
    /// Columns `n,d,trials,t_star,delta,mean,sd,max_abs_dev,all_within_delta`.
    pub fn to_csv(&self) -> String {
        format!(
            "n,d,trials,t_star,delta,mean,sd,max_abs_dev,all_within_delta\n{},{},{},{},{},{},{},{},{}\n",
            self.n,
            self.d,
            self.trials,
            self.t_star,
            self.delta,
            self.mean,
            self.sd,
            self.max_abs_dev,
            self.all_within_delta
        )
    }
}

pub fn t_d_concentration(n: usize, d: usize, trials: usize, seed: Seed) -> Result<TdSummary> {
    if trials == 0 {
        return Err(invalid("trials must be at least 1"));
    }
    if d < 2 || 2 * d * d > n {
        return Err(domain(format!("need 2 <= d and 2 d^2 <= n, got n = {n}, d = {d}")));
    }
    let t_star = predict_t_star(n, n, d)?;
    let delta = de_error_bound(n, n, d)?;
    let samples: Vec<usize> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed.rng(i);
            t_d_count(&lrr(n, d, &mut rng)?)
        })
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = samples.iter().map(|&s| s as f64).collect();
    let (mean, se) = mean_se(&xs);
    let max_abs_dev = xs.iter().map(|x| (x - t_star).abs()).fold(0.0, f64::max);
    Ok(TdSummary {
        n,
        d,
        trials,
        t_star,
        delta,
        samples,
        mean,
        sd: se * (trials as f64).sqrt(),
        max_abs_dev,
        all_within_delta: max_abs_dev <= delta,
    })
}

/// Upper-tail frequency of `|N(H_k)|` on `LRR(n, d)` against the
/// multiplicative Chernoff bound for negatively correlated indicators.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChernoffReport {
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub delta: f64,
    pub trials: usize,
    pub analytic_mean: f64,
    pub empirical_mean: f64,
    pub empirical_se: f64,
    pub mean_within_3se: bool,
    /// `(1 + delta) analytic_mean`.
    pub threshold: f64,
    pub exceedances: usize,
    pub frequency: f64,
    /// `exp(-(delta^2 / 3) analytic_mean)`.
    pub bound: f64,
    /// `3 sqrt(bound (1 - bound) / trials)`.
    pub slack: f64,
    pub holds: bool,
}

impl ChernoffReport {
    /// Columns `n,d,k,delta,trials,analytic_mean,empirical_mean,empirical_se,threshold,frequency,bound,slack,holds`.
    pub fn to_csv(&self) -> String {
        format!(
            "n,d,k,delta,trials,analytic_mean,empirical_mean,empirical_se,threshold,frequency,bound,slack,holds\n{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            self.n,
            self.d,
            self.k,
            self.delta,
            self.trials,
            self.analytic_mean,
            self.empirical_mean,
            self.empirical_se,
            self.threshold,
            self.frequency,
            self.bound,
            self.slack,
            self.holds
        )
    }
}

pub fn chernoff_check(
    n: usize,
    d: usize,
    k: usize,
    delta: f64,
    trials: usize,
    seed: Seed,
) -> Result<ChernoffReport> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(domain(format!("delta = {delta} outside (0, 1)")));
    }
    if trials == 0 {
        return Err(invalid("trials must be at least 1"));
    }
    check_regular(n, n, d)?;
    if k == 0 || k > n {
        return Err(invalid(format!("k = {k} outside [1, {n}]")));
    }
    let analytic_mean = expected_fixed_coverage(&vec![d; n], n, k)?;
    let values: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed.rng(i);
            // H_k is the first k nodes; the rest of the graph is irrelevant
            let graph = ulrr(k, n, d, &mut rng)?;
            Ok(fixed_set_value(&graph, k)? as f64)
        })
        .collect::<Result<Vec<_>>>()?;
    let (empirical_mean, empirical_se) = mean_se(&values);
    let threshold = (1.0 + delta) * analytic_mean;
    let exceedances = values.iter().filter(|&&v| v >= threshold).count();
    let frequency = exceedances as f64 / trials as f64;
    let bound = (-(delta * delta / 3.0) * analytic_mean).exp();
    let slack = 3.0 * (bound * (1.0 - bound) / trials as f64).sqrt();
    Ok(ChernoffReport {
        n,
        d,
        k,
        delta,
        trials,
        analytic_mean,
        empirical_mean,
        empirical_se,
        mean_within_3se: (empirical_mean - analytic_mean).abs() <= 3.0 * empirical_se,
        threshold,
        exceedances,
        frequency,
        bound,
        slack,
        holds: frequency <= bound + slack,
    })
}

/// Greedy against the fixed set and the hybrid family on `LRR(n, d)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GreedyFixedReport {
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub trials: usize,
    pub mean_greedy: f64,
    pub se_greedy: f64,
    pub mean_fixed: f64,
    pub se_fixed: f64,
    /// Standard error of the paired difference greedy − fixed.
    pub se_diff: f64,
    /// Product-formula expectation of `|N(H_k)|`.
    pub analytic_fixed: f64,
    /// Mean `|N(Y^t)|` for `t = 0..=k`.
    pub hybrid_means: Vec<f64>,
    /// Standard errors of the paired steps `Y^{t+1} - Y^t`.
    pub hybrid_step_se: Vec<f64>,
    pub mean_opt_ub: f64,
    /// `mean_greedy / mean_opt_ub`, a lower bound on the ratio of means.
    pub ratio_lb: f64,
}

impl GreedyFixedReport {
    /// Mean greedy at least mean fixed set, within `tol` paired SEs.
    pub fn greedy_dominates(&self, tol: f64) -> bool {
        self.mean_greedy - self.mean_fixed >= -tol * self.se_diff
    }

    /// Every hybrid step non-decreasing within `tol` paired SEs.
    pub fn hybrid_monotone(&self, tol: f64) -> bool {
        self.hybrid_means
            .windows(2)
            .zip(&self.hybrid_step_se)
            .all(|(w, se)| w[1] - w[0] >= -tol * se)
    }

    /// Empirical fixed-set mean within `tol` SEs of the product formula.
    pub fn fixed_matches_formula(&self, tol: f64) -> bool {
        (self.mean_fixed - self.analytic_fixed).abs() <= tol * self.se_fixed
    }

    pub fn csv_header() -> &'static str {
        "n,d,k,trials,mean_greedy,se_greedy,mean_fixed,se_fixed,se_diff,analytic_fixed,hybrid_min_step,mean_opt_ub,ratio_lb"
    }

    pub fn csv_row(&self) -> String {
        let min_step = self
            .hybrid_means
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.n,
            self.d,
            self.k,
            self.trials,
            self.mean_greedy,
            self.se_greedy,
            self.mean_fixed,
            self.se_fixed,
            self.se_diff,
            self.analytic_fixed,
            min_step,
            self.mean_opt_ub,
            self.ratio_lb
        )
    }

    /// Header plus one row.
    pub fn to_csv(&self) -> String {
        format!("{}\n{}\n", Self::csv_header(), self.csv_row())
    }
}

pub fn greedy_vs_fixed(n: usize, d: usize, k: usize, trials: usize, seed: Seed) -> Result<GreedyFixedReport> {
    check_regular(n, n, d)?;
    if trials == 0 {
        return Err(invalid("trials must be at least 1"));
    }
    if k == 0 || k > n {
        return Err(invalid(format!("k = {k} outside [1, {n}]")));
    }
    struct Trial {
        greedy: usize,
        fixed: usize,
        hybrid: Vec<usize>,
        opt_ub: usize,
    }
    let per_trial: Vec<Trial> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed.rng(i);
            let graph = lrr(n, d, &mut rng)?;
            let hybrid = hybrid_coverages(&graph, k)?;
            Ok(Trial {
                greedy: hybrid[k],
                fixed: fixed_set_value(&graph, k)?,
                hybrid,
                opt_ub: trivial_opt_ub(&graph, k),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let col = |f: &dyn Fn(&Trial) -> f64| per_trial.iter().map(f).collect::<Vec<f64>>();
    let (mean_greedy, se_greedy) = mean_se(&col(&|t| t.greedy as f64));
    let (mean_fixed, se_fixed) = mean_se(&col(&|t| t.fixed as f64));
    let (_, se_diff) = mean_se(&col(&|t| t.greedy as f64 - t.fixed as f64));
    let hybrid_means = (0..=k).map(|j| mean_se(&col(&|t| t.hybrid[j] as f64)).0).collect();
    let hybrid_step_se = (0..k)
        .map(|j| mean_se(&col(&|t| t.hybrid[j + 1] as f64 - t.hybrid[j] as f64)).1)
        .collect();
    let (mean_opt_ub, _) = mean_se(&col(&|t| t.opt_ub as f64));
    Ok(GreedyFixedReport {
        n,
        d,
        k,
        trials,
        mean_greedy,
        se_greedy,
        mean_fixed,
        se_fixed,
        se_diff,
        analytic_fixed: expected_fixed_coverage(&vec![d; n], n, k)?,
        hybrid_means,
        hybrid_step_se,
        mean_opt_ub,
        ratio_lb: mean_greedy / mean_opt_ub,
    })
}

/// Greedy against AcceptReject on sampled instances.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquivalenceReport {
    /// `(graph, model, n, m, k, greedy coverage, sequences equal)`.
    pub rows: Vec<(usize, &'static str, usize, usize, usize, usize, bool)>,
}

impl EquivalenceReport {
    pub fn mismatches(&self) -> usize {
        self.rows.iter().filter(|r| !r.6).count()
    }

    /// Columns `graph,model,n,m,k,greedy_coverage,match`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("graph,model,n,m,k,greedy_coverage,match\n");
        for (g, model, n, m, k, cov, ok) in &self.rows {
            let _ = writeln!(out, "{g},{model},{n},{m},{k},{cov},{ok}");
        }
        out
    }
}

/// Compares greedy and AcceptReject selection sequences on `graphs` random
/// instances (cycling LRR, ULRR and GenR, `n <= max_n`) at
/// `k in {1, n/4, n}`.
pub fn equivalence_check(graphs: usize, max_n: usize, seed: Seed) -> Result<EquivalenceReport> {
    if max_n < 4 {
        return Err(invalid("max_n must be at least 4"));
    }
    let rows: Vec<Vec<_>> = (0..graphs as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed.rng(i);
            let n = rng.random_range(4..=max_n);
            let (label, graph) = match i % 3 {
                0 => {
                    let d = rng.random_range(1..=8.min(n));
                    ("lrr", lrr(n, d, &mut rng)?)
                }
                1 => {
                    let m = rng.random_range(4..=2 * max_n);
                    let d = rng.random_range(1..=8.min(m));
                    ("ulrr", ulrr(n, m, d, &mut rng)?)
                }
                _ => {
                    let m = rng.random_range(4..=2 * max_n);
                    let top = 10.min(m);
                    let ds: Vec<usize> = (0..n).map(|_| rng.random_range(1..=top)).collect();
                    ("genr", genr(m, &ds, &mut rng)?)
                }
            };
            let mut ks = vec![1, (n / 4).max(1), n];
            ks.dedup();
            ks.into_iter()
                .map(|k| {
                    let g: GreedyTrace = greedy(&graph, k)?;
                    let ar = accept_reject(&graph, k)?;
                    Ok((i as usize, label, n, graph.m_right(), k, g.coverage(), g.selections == ar.accepted))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EquivalenceReport {
        rows: rows.into_iter().flatten().collect(),
    })
}

/// `λ` for each of `trials` instances of `LRR(n, 2)`.
pub fn lambda_samples(n: usize, trials: usize, seed: Seed) -> Result<Vec<usize>> {
    (0..trials as u64)
        .into_par_iter()
        .map(|i| lambda(&lrr(n, 2, &mut seed.rng(i))?))
        .collect()
}

fn default_k_fraction() -> f64 {
    0.38
}

fn default_a_grid() -> Vec<f64> {
    vec![0.0, 0.25, 0.5, 0.75, 1.0]
}

/// A JSON experiment document, tagged by `kind`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExperimentSpec {
    /// Ratio of means over a `k` grid (a single `k` gives one row).
    Ratio(ExperimentConfig),
    DegreeMix {
        n: usize,
        m: usize,
        #[serde(default = "default_a_grid")]
        a_grid: Vec<f64>,
        trials: usize,
        #[serde(default)]
        seed: Option<Seed>,
        #[serde(default)]
        budget_ms: Option<u64>,
        #[serde(default)]
        max_nodes: Option<u64>,
    },
    Marginals {
        n: usize,
        m: usize,
        d: usize,
        trials: usize,
        #[serde(default)]
        seed: Option<Seed>,
    },
    Theorem3 {
        n_grid: Vec<usize>,
        #[serde(default = "default_k_fraction")]
        k_fraction: f64,
        trials: usize,
        #[serde(default)]
        seed: Option<Seed>,
    },
    TdConcentration {
        n: usize,
        d: usize,
        trials: usize,
        #[serde(default)]
        seed: Option<Seed>,
    },
    Chernoff {
        n: usize,
        d: usize,
        k: usize,
        delta: f64,
        trials: usize,
        #[serde(default)]
        seed: Option<Seed>,
    },
    GreedyVsFixed {
        n: usize,
        d: usize,
        k: usize,
        trials: usize,
        #[serde(default)]
        seed: Option<Seed>,
    },
}

/// CSV body of a finished experiment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExperimentOutput {
    pub csv: String,
    /// Some exact solve stopped on its budget.
    pub best_effort: bool,
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// The seed given in the document, if any.
    pub fn explicit_seed(&self) -> Option<Seed> {
        match self {
            ExperimentSpec::Ratio(c) => c.seed,
            ExperimentSpec::DegreeMix { seed, .. }
            | ExperimentSpec::Marginals { seed, .. }
            | ExperimentSpec::Theorem3 { seed, .. }
            | ExperimentSpec::TdConcentration { seed, .. }
            | ExperimentSpec::Chernoff { seed, .. }
            | ExperimentSpec::GreedyVsFixed { seed, .. } => *seed,
        }
    }

    pub fn run(&self) -> Result<ExperimentOutput> {
        let seed = self.explicit_seed().unwrap_or_default();
        let plain = |csv: String| ExperimentOutput {
            csv,
            best_effort: false,
        };
        Ok(match self {
            ExperimentSpec::Ratio(config) => {
                let sweep = sweep_k(config)?;
                ExperimentOutput {
                    csv: sweep.to_csv(),
                    best_effort: sweep.best_effort(),
                }
            }
            ExperimentSpec::DegreeMix {
                n,
                m,
                a_grid,
                trials,
                budget_ms,
                max_nodes,
                ..
            } => {
                let budget = SearchBudget {
                    max_nodes: *max_nodes,
                    max_time: budget_ms.map(Duration::from_millis),
                };
                let r = reproduce_degree_mix(*n, *m, a_grid, *trials, seed, budget)?;
                ExperimentOutput {
                    csv: r.to_csv(),
                    best_effort: r.best_effort(),
                }
            }
            ExperimentSpec::Marginals { n, m, d, trials, .. } => {
                plain(reproduce_marginals(*n, *m, *d, *trials, seed)?.to_csv())
            }
            ExperimentSpec::Theorem3 {
                n_grid,
                k_fraction,
                trials,
                ..
            } => plain(theorem3_experiment(n_grid, *k_fraction, *trials, seed)?.to_csv()),
            ExperimentSpec::TdConcentration { n, d, trials, .. } => {
                plain(t_d_concentration(*n, *d, *trials, seed)?.to_csv())
            }
            ExperimentSpec::Chernoff {
                n,
                d,
                k,
                delta,
                trials,
                ..
            } => plain(chernoff_check(*n, *d, *k, *delta, *trials, seed)?.to_csv()),
            ExperimentSpec::GreedyVsFixed { n, d, k, trials, .. } => {
                plain(greedy_vs_fixed(*n, *d, *k, *trials, seed)?.to_csv())
            }
        })
    }
}

/// Runs `f` on a dedicated pool of `threads` workers, or on the global pool
/// when `threads` is `None`.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(invalid("thread count must be at least 1")),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::InvalidInput(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}
