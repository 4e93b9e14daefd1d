//! Closed-form predictions, constants and inequality checks for greedy on
//! random left-regular and general-degree instances.
//!
//! Conventions: `n` is the number of left nodes, `m` the number of right
//! nodes, `d` the common left degree. Logarithms are natural.

use std::f64::consts::E;

use serde::Serialize;

use crate::error::{domain, Result};
use crate::graph::{coverage_of, BipartiteGraph};

fn require_degree(d: usize) -> Result<()> {
    if d < 2 {
        return Err(domain(format!(
            "closed forms need d >= 2 (exponent -1/(d-1)); got d = {d}"
        )));
    }
    Ok(())
}

/// `(1 + x)^(-1/(d-1))`, evaluated in log space for `d > 2`.
fn inv_root(x: f64, d: usize) -> f64 {
    if d == 2 {
        1.0 / (1.0 + x)
    } else {
        (-x.ln_1p() / (d - 1) as f64).exp()
    }
}

/// Predicted number of full-degree greedy steps,
/// `(1 - (1 + n d (d-1) / m)^(-1/(d-1))) * m / d`.
pub fn predict_t_star(n: usize, m: usize, d: usize) -> Result<f64> {
    require_degree(d)?;
    if m == 0 {
        return Err(domain("m must be positive"));
    }
    let (nf, mf, df) = (n as f64, m as f64, d as f64);
    let scale = mf / df;
    let x = nf * df * (df - 1.0) / mf;
    Ok(scale - scale * inv_root(x, d))
}

/// Deviation radius `3 e^(n d^2 / m) sqrt(8 n log 2n)`; requires `m >= 2 d^2`.
pub fn de_error_bound(n: usize, m: usize, d: usize) -> Result<f64> {
    if n == 0 || d == 0 {
        return Err(domain("n and d must be positive"));
    }
    if m < 2 * d * d {
        return Err(domain(format!("need m >= 2 d^2, got m = {m}, d = {d}")));
    }
    let (nf, mf, df) = (n as f64, m as f64, d as f64);
    Ok(3.0 * (nf * df * df / mf).exp() * (8.0 * nf * (2.0 * nf).ln()).sqrt())
}

/// Drift `(1 - (n d / m) y)^d` of the first-phase accept process.
pub fn ode_rhs(y: f64, n: usize, m: usize, d: usize) -> Result<f64> {
    require_degree(d)?;
    let cap = m as f64 / (n as f64 * d as f64);
    if !(0.0..=cap * (1.0 + 1e-12)).contains(&y) {
        return Err(domain(format!("y = {y} outside [0, {cap}]")));
    }
    let base = (1.0 - y / cap).max(0.0);
    Ok(base.powi(d as i32))
}

/// Solution of `y' = (1 - (n d / m) y)^d`, `y(0) = 0`:
/// `y(t) = (m / n d) (1 - (1 + n d (d-1) t / m)^(-1/(d-1)))`.
pub fn ode_solution(t: f64, n: usize, m: usize, d: usize) -> Result<f64> {
    require_degree(d)?;
    if n == 0 || m == 0 {
        return Err(domain("n and m must be positive"));
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(domain(format!("t = {t} outside [0, 1]")));
    }
    let (nf, mf, df) = (n as f64, m as f64, d as f64);
    let scale = mf / (nf * df);
    Ok(scale - scale * inv_root(nf * df * (df - 1.0) * t / mf, d))
}

/// Classical fourth-order Runge–Kutta for a scalar autonomous ODE, from
/// `t0` to each of the increasing `targets` with step `h` (the last step
/// before a target is shortened to land on it).
pub fn rk4<F: Fn(f64) -> f64>(f: F, y0: f64, t0: f64, targets: &[f64], h: f64) -> Vec<f64> {
    let mut t = t0;
    let mut y = y0;
    let mut out = Vec::with_capacity(targets.len());
    for &target in targets {
        while target - t > 1e-15 {
            let step = h.min(target - t);
            let k1 = f(y);
            let k2 = f(y + 0.5 * step * k1);
            let k3 = f(y + 0.5 * step * k2);
            let k4 = f(y + step * k3);
            y += step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            t += step;
        }
        out.push(y);
    }
    out
}

/// Largest absolute gap between RK4 (step `h`) and the closed form at the
/// given times.
pub fn ode_rk4_max_error(n: usize, m: usize, d: usize, times: &[f64], h: f64) -> Result<f64> {
    require_degree(d)?;
    let c = n as f64 * d as f64 / m as f64;
    let numeric = rk4(|y| (1.0 - c * y).max(0.0).powi(d as i32), 0.0, 0.0, times, h);
    let mut worst: f64 = 0.0;
    for (&t, y) in times.iter().zip(numeric) {
        worst = worst.max((y - ode_solution(t, n, m, d)?).abs());
    }
    Ok(worst)
}

/// Exact `E|N(H_k)| = (1 - prod_{i<=k} (1 - d_i / m)) m` over the `k`
/// largest degrees.
pub fn expected_fixed_coverage(degrees: &[usize], m: usize, k: usize) -> Result<f64> {
    if k > degrees.len() {
        return Err(domain(format!("k = {k} exceeds {} degrees", degrees.len())));
    }
    if let Some(d) = degrees.iter().find(|&&d| d > m) {
        return Err(domain(format!("degree {d} exceeds m = {m}")));
    }
    let mut sorted = degrees.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let mf = m as f64;
    let miss: f64 = sorted[..k].iter().map(|&d| 1.0 - d as f64 / mf).product();
    Ok((1.0 - miss) * mf)
}

/// Exponential lower bound `(1 - e^(-sum d_i / m)) m` on the same quantity.
pub fn fixed_coverage_exp_bound(degrees: &[usize], m: usize, k: usize) -> f64 {
    let mut sorted = degrees.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let total: usize = sorted.iter().take(k).sum();
    (1.0 - (-(total as f64) / m as f64).exp()) * m as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HypergeomCheck {
    pub m: usize,
    pub d: usize,
    pub max_error: f64,
    /// `2 d^2 / m`.
    pub bound: f64,
}

impl HypergeomCheck {
    pub fn holds(&self) -> bool {
        self.max_error <= self.bound
    }
}

/// `max_r |C(r,d)/C(m,d) - (r/m)^d|` over `r` in `1..=m`, with `m >= 2 d^2`.
pub fn hypergeom_approx_check(m: usize, d: usize) -> Result<HypergeomCheck> {
    if d == 0 || m < 2 * d * d {
        return Err(domain(format!("need d >= 1 and m >= 2 d^2, got m = {m}, d = {d}")));
    }
    let mf = m as f64;
    let mut max_error: f64 = 0.0;
    for r in 1..=m {
        // C(r,d)/C(m,d) = prod_{i<d} (r-i)/(m-i), zero when r < d
        let exact: f64 = if r < d {
            0.0
        } else {
            (0..d).map(|i| (r - i) as f64 / (m - i) as f64).product()
        };
        let approx = (r as f64 / mf).powi(d as i32);
        max_error = max_error.max((exact - approx).abs());
    }
    Ok(HypergeomCheck {
        m,
        d,
        max_error,
        bound: 2.0 * (d * d) as f64 / mf,
    })
}

/// Constants of the maximum matching size in sparse random graphs with
/// average degree 2.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GammaConstants {
    /// Smallest root of `x = 2 exp(-2 exp(-x))`.
    pub gamma_star_low: f64,
    /// `2 exp(-gamma_star_low)`.
    pub gamma_star_high: f64,
    /// `1/2 + (1/3) / (2 - s/2)` with `s = γ* + γ_* + γ* γ_*`.
    pub limit_ratio: f64,
    /// `1 - s/4`.
    pub matching_fraction: f64,
    /// `|x - 2 exp(-2 exp(-x))|` at the returned root.
    pub residual: f64,
}

fn gamma_fixed_point_gap(x: f64) -> f64 {
    x - 2.0 * (-2.0 * (-x).exp()).exp()
}

pub fn gamma_constants() -> GammaConstants {
    // first sign change on a 1e-3 grid over [0, 2]
    let step = 1e-3;
    let mut lo = 0.0;
    let mut hi = 0.0;
    for i in 0..2000 {
        let a = i as f64 * step;
        let b = (i + 1) as f64 * step;
        if gamma_fixed_point_gap(a) <= 0.0 && gamma_fixed_point_gap(b) >= 0.0 {
            lo = a;
            hi = b;
            break;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if gamma_fixed_point_gap(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let low = if gamma_fixed_point_gap(lo).abs() <= gamma_fixed_point_gap(hi).abs() {
        lo
    } else {
        hi
    };
    let high = 2.0 * (-low).exp();
    let s = high + low + high * low;
    GammaConstants {
        gamma_star_low: low,
        gamma_star_high: high,
        limit_ratio: 0.5 + (1.0 / 3.0) / (2.0 - s / 2.0),
        matching_fraction: 1.0 - s / 4.0,
        residual: gamma_fixed_point_gap(low).abs(),
    }
}

/// `k(n) = floor((matching_fraction - n^(-1/9)) n)`, clamped at zero.
pub fn theorem3_k(n: usize) -> usize {
    if n == 0 {
        return 0;
    }
    let nf = n as f64;
    let raw = ((gamma_constants().matching_fraction - nf.powf(-1.0 / 9.0)) * nf).floor();
    if raw <= 0.0 {
        0
    } else {
        (raw as usize).min(n)
    }
}

/// Worst-case greedy factor `1 - (1 - 1/k)^k`.
pub fn worst_case_factor(k: usize) -> Result<f64> {
    if k == 0 {
        return Err(domain("k must be at least 1"));
    }
    let kf = k as f64;
    Ok(1.0 - (kf * (-1.0 / kf).ln_1p()).exp())
}

/// Augmented factor `1 - 1/e + (1/e) (t_d / (m/d))^3`, valid for
/// `k >= t_d` on `d`-left-regular instances with `m` right nodes.
pub fn augmented_factor(t_d: usize, m: usize, d: usize) -> Result<f64> {
    if d == 0 || m == 0 {
        return Err(domain("m and d must be positive"));
    }
    if t_d * d > m {
        return Err(domain(format!("t_d = {t_d} exceeds m/d = {}", m as f64 / d as f64)));
    }
    let x = t_d as f64 * d as f64 / m as f64;
    Ok(1.0 - 1.0 / E + x.powi(3) / E)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    NearLinear,
    Critical,
    Saturated,
}

/// The expected-ratio guarantee implied by a region.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Guarantee {
    /// Ratio at least `1 - eps` for large enough instances.
    OneMinusEps { factor: f64 },
    /// Ratio `1 - 1/e + Omega(eps^24)`; the constant is not explicit.
    ConstantImprovement { label: &'static str },
    /// Only the worst-case `1 - (1 - 1/k)^k` is known.
    WorstCase { factor: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RegionClass {
    pub region: Region,
    /// Critical region with large average degree among the top `k`.
    pub large_degree: bool,
    pub guarantee: Guarantee,
    pub top_k_degree_sum: usize,
}

/// Classifies `(n, m, degrees, k)` by the sum of the `k` largest degrees:
/// near-linear below `(eps/2) m`, saturated at or above `(2/eps) m`,
/// critical otherwise.
pub fn classify_region(
    n: usize,
    m: usize,
    degrees: &[usize],
    k: usize,
    eps: f64,
) -> Result<RegionClass> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(domain(format!("eps = {eps} outside (0, 1)")));
    }
    if m == 0 {
        return Err(domain("m must be positive"));
    }
    if k > degrees.len() {
        return Err(domain(format!("k = {k} exceeds {} degrees", degrees.len())));
    }
    let mut sorted = degrees.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let sum: usize = sorted[..k].iter().sum();
    let (sf, mf) = (sum as f64, m as f64);
    let one_minus_eps = Guarantee::OneMinusEps { factor: 1.0 - eps };
    let (region, large_degree, guarantee) = if sf <= eps / 2.0 * mf {
        (Region::NearLinear, false, one_minus_eps)
    } else if sf >= 2.0 / eps * mf {
        (Region::Saturated, false, one_minus_eps)
    } else {
        let ratio = (n as f64 / mf).powi(2).max(1.0);
        let threshold = 20f64.powi(4) * ratio / eps.powi(8);
        let large = k > 0 && sf / k as f64 >= threshold;
        let regular = sorted.first() == sorted.last();
        let guarantee = if large {
            one_minus_eps
        } else if regular {
            Guarantee::ConstantImprovement {
                label: "1 - 1/e + Omega(eps^24)",
            }
        } else {
            Guarantee::WorstCase {
                factor: worst_case_factor(k.max(1))?,
            }
        };
        (Region::Critical, large, guarantee)
    };
    Ok(RegionClass {
        region,
        large_degree,
        guarantee,
        top_k_degree_sum: sum,
    })
}

/// `min(sum of the k largest degrees, |N(L)|, m)`.
pub fn trivial_opt_ub(graph: &BipartiteGraph, k: usize) -> usize {
    let mut degrees = graph.degrees();
    degrees.sort_unstable_by(|a, b| b.cmp(a));
    let top: usize = degrees.iter().take(k).sum();
    let all: Vec<usize> = (0..graph.n_left()).collect();
    top.min(coverage_of(graph, &all)).min(graph.m_right())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClaimReport {
    pub claim1_points: usize,
    pub claim1_violations: usize,
    /// Smallest `(1 - e^-eps)/eps - (1 - eps)` seen.
    pub claim1_min_slack: f64,
    pub claim2_points: usize,
    pub claim2_violations: usize,
    /// Smallest `(1/e - 1/(4ek)) - (1 - 1/k)^k` seen.
    pub claim2_min_slack: f64,
}

impl ClaimReport {
    pub fn holds(&self) -> bool {
        self.claim1_violations == 0 && self.claim2_violations == 0
    }
}

/// Evaluates `(1 - e^-eps)/eps >= 1 - eps` on `eps = 1e-4, 2e-4, ..` in
/// (0, 1) and `(1 - 1/k)^k <= 1/e - 1/(4ek)` on all `k <= 1000` plus a
/// log grid up to `10^6`.
pub fn claim_checks() -> ClaimReport {
    let mut report = ClaimReport {
        claim1_points: 0,
        claim1_violations: 0,
        claim1_min_slack: f64::INFINITY,
        claim2_points: 0,
        claim2_violations: 0,
        claim2_min_slack: f64::INFINITY,
    };
    for i in 1..10_000 {
        let eps = i as f64 * 1e-4;
        let slack = -(-eps).exp_m1() / eps - (1.0 - eps);
        report.claim1_points += 1;
        report.claim1_min_slack = report.claim1_min_slack.min(slack);
        if slack < 0.0 {
            report.claim1_violations += 1;
        }
    }
    let mut ks: Vec<u64> = (1..=1000).collect();
    let steps = 600;
    for i in 0..=steps {
        let k = 10f64.powf(3.0 + 3.0 * i as f64 / steps as f64).round() as u64;
        ks.push(k);
    }
    ks.sort_unstable();
    ks.dedup();
    for k in ks {
        let kf = k as f64;
        let lhs = (kf * (-1.0 / kf).ln_1p()).exp();
        let rhs = 1.0 / E - 1.0 / (4.0 * E * kf);
        let slack = rhs - lhs;
        report.claim2_points += 1;
        report.claim2_min_slack = report.claim2_min_slack.min(slack);
        if slack < 0.0 {
            report.claim2_violations += 1;
        }
    }
    report
}

/// Closed-form predictions for a parameter tuple.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PredictionSet {
    pub n: usize,
    pub m: usize,
    pub d: usize,
    pub k: usize,
    pub eps: f64,
    pub t_star: f64,
    /// Deviation radius; `None` when `m < 2 d^2`.
    pub delta: Option<f64>,
    /// True when the radius is at least `t_star`, so the estimate says nothing.
    pub delta_vacuous: bool,
    pub region: Region,
    pub large_degree: bool,
    pub opt_ub: usize,
    /// Instance-wise factor greedy is predicted to reach: 1 when `k` fits in
    /// the full-degree phase, otherwise the better of the worst-case and the
    /// augmented factor at `max(t_star - delta, 0)`.
    pub greedy_lb_factor: f64,
}

/// Builds a [`PredictionSet`] for LRR/ULRR parameters.
pub fn predict(n: usize, m: usize, d: usize, k: usize, eps: f64) -> Result<PredictionSet> {
    if d > m {
        return Err(domain(format!("d = {d} exceeds m = {m}")));
    }
    if k > n {
        return Err(domain(format!("k = {k} exceeds n = {n}")));
    }
    let t_star = predict_t_star(n, m, d)?;
    let delta = de_error_bound(n, m, d).ok();
    let delta_vacuous = delta.is_none_or(|dl| dl >= t_star);
    let class = classify_region(n, m, &vec![d; n], k, eps)?;
    let opt_ub = (k * d).min(m);
    let greedy_lb_factor = if k == 0 {
        1.0
    } else {
        let worst = worst_case_factor(k)?;
        match delta {
            Some(dl) if !delta_vacuous => {
                let t_low = (t_star - dl).max(0.0);
                if (k as f64) <= t_low {
                    1.0
                } else {
                    let x = (t_low * d as f64 / m as f64).min(1.0);
                    worst.max(1.0 - 1.0 / E + x.powi(3) / E)
                }
            }
            _ => worst,
        }
    };
    Ok(PredictionSet {
        n,
        m,
        d,
        k,
        eps,
        t_star,
        delta,
        delta_vacuous,
        region: class.region,
        large_degree: class.large_degree,
        opt_ub,
        greedy_lb_factor,
    })
}
