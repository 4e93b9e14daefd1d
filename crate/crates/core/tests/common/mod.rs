//! Reference implementations used only by tests. Each one is written from
//! the definitions, shares no code with the library, and favors clarity
//! over speed.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use maxcov::BipartiteGraph;

pub fn adjacency(g: &BipartiteGraph) -> Vec<Vec<usize>> {
    (0..g.n_left())
        .map(|u| g.neighbors(u).iter().map(|&v| v as usize).collect())
        .collect()
}

pub fn cover_count(adj: &[Vec<usize>], m: usize, nodes: &[usize]) -> usize {
    let mut seen = vec![false; m];
    for &u in nodes {
        for &v in &adj[u] {
            seen[v] = true;
        }
    }
    seen.iter().filter(|&&b| b).count()
}

/// Plain greedy: recompute every gain each step, lowest index on ties.
pub fn naive_greedy(adj: &[Vec<usize>], m: usize, k: usize) -> (Vec<usize>, Vec<usize>) {
    let mut covered = vec![false; m];
    let mut used = vec![false; adj.len()];
    let mut picks = Vec::new();
    let mut gains = Vec::new();
    for _ in 0..k {
        let mut best: Option<(usize, usize)> = None;
        for u in 0..adj.len() {
            if used[u] {
                continue;
            }
            let g = adj[u].iter().filter(|&&v| !covered[v]).count();
            if best.is_none_or(|(_, bg)| g > bg) {
                best = Some((u, g));
            }
        }
        let Some((u, g)) = best else { break };
        used[u] = true;
        for &v in &adj[u] {
            covered[v] = true;
        }
        picks.push(u);
        gains.push(g);
    }
    (picks, gains)
}

/// Optimum over all `min(k, n)`-subsets by bitmask enumeration (n <= 20).
pub fn brute_opt(adj: &[Vec<usize>], m: usize, k: usize) -> usize {
    let n = adj.len();
    assert!(n <= 20);
    let size = k.min(n);
    let mut best = 0;
    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() as usize != size {
            continue;
        }
        let nodes: Vec<usize> = (0..n).filter(|&u| mask >> u & 1 == 1).collect();
        best = best.max(cover_count(adj, m, &nodes));
    }
    best
}

/// Maximum matching size by dynamic programming over subsets of still
/// unmatched vertices (at most 20 vertices): the lowest vertex of the
/// subset is either left unmatched or matched to a neighbor in the subset.
pub fn brute_matching(n_vertices: usize, edges: &[(usize, usize)]) -> usize {
    assert!(n_vertices <= 20);
    let mut nbr = vec![0u32; n_vertices];
    for &(a, b) in edges {
        if a != b {
            nbr[a] |= 1 << b;
            nbr[b] |= 1 << a;
        }
    }
    let full = if n_vertices == 0 { 0 } else { (1u32 << n_vertices) - 1 };
    let mut best = vec![0u8; full as usize + 1];
    for mask in 1..=full {
        let v = mask.trailing_zeros() as usize;
        let rest = mask & !(1 << v);
        let mut value = best[rest as usize];
        let mut cand = nbr[v] & rest;
        while cand != 0 {
            let w = cand.trailing_zeros();
            cand &= cand - 1;
            value = value.max(1 + best[(rest & !(1 << w)) as usize]);
        }
        best[mask as usize] = value;
    }
    best[full as usize] as usize
}

/// Largest set of left nodes with pairwise disjoint neighborhoods.
pub fn brute_lambda(adj: &[Vec<usize>], m: usize) -> usize {
    fn go(adj: &[Vec<usize>], used: &mut [bool], u: usize) -> usize {
        if u == adj.len() {
            return 0;
        }
        let mut best = go(adj, used, u + 1);
        if adj[u].iter().all(|&v| !used[v]) {
            adj[u].iter().for_each(|&v| used[v] = true);
            best = best.max(1 + go(adj, used, u + 1));
            adj[u].iter().for_each(|&v| used[v] = false);
        }
        best
    }
    let mut used = vec![false; m];
    go(adj, &mut used, 0)
}

/// Coverage of `Y^t`: the naive greedy prefix of length `t`, then the
/// `k - t` best residual nodes found by fully sorting all gains.
pub fn naive_hybrid(adj: &[Vec<usize>], m: usize, k: usize, t: usize) -> usize {
    let (prefix, _) = naive_greedy(adj, m, t);
    let mut covered = vec![false; m];
    for &u in &prefix {
        adj[u].iter().for_each(|&v| covered[v] = true);
    }
    let mut rest: Vec<(usize, usize)> = (0..adj.len())
        .filter(|u| !prefix.contains(u))
        .map(|u| (adj[u].iter().filter(|&&v| !covered[v]).count(), u))
        .collect();
    rest.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut nodes = prefix;
    nodes.extend(rest.iter().take(k - t).map(|p| p.1));
    cover_count(adj, m, &nodes)
}

fn binom(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Exact `max_r |C(r,d)/C(m,d) - (r/m)^d|` for `r` in `1..=m`.
pub fn hypergeom_max_error_exact(m: u64, d: u64) -> BigRational {
    let denom = binom(m, d);
    let md = BigInt::from(m).pow(d as u32);
    let mut worst = BigRational::zero();
    for r in 1..=m {
        let exact = BigRational::new(binom(r, d), denom.clone());
        let approx = BigRational::new(BigInt::from(r).pow(d as u32), md.clone());
        let gap = (exact - approx).abs();
        if gap > worst {
            worst = gap;
        }
    }
    worst
}

pub fn rational(num: u64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn to_f64(x: &BigRational) -> f64 {
    let scale = BigInt::from(10u64).pow(30);
    let scaled = (x * BigRational::from_integer(scale.clone())).to_integer();
    scaled.to_string().parse::<f64>().unwrap() / 1e30
}

/// Smallest root of `x = 2 exp(-2 exp(-x))` by Newton's method from 0.8.
pub fn gamma_low_newton() -> f64 {
    let f = |x: f64| x - 2.0 * (-2.0 * (-x).exp()).exp();
    let df = |x: f64| 1.0 - 4.0 * (-x).exp() * (-2.0 * (-x).exp()).exp();
    let mut x = 0.8;
    for _ in 0..100 {
        x -= f(x) / df(x);
    }
    x
}

/// Classical RK4 for `y' = (1 - c y)^d`, `y(0) = 0`, step `h`, sampled at
/// `targets` (each a multiple of `h`).
pub fn rk4_oracle(c: f64, d: i32, h: f64, targets: &[f64]) -> Vec<f64> {
    let f = |y: f64| (1.0 - c * y).powi(d);
    let mut y = 0.0;
    let mut step = 0u64;
    let mut out = Vec::new();
    for &t in targets {
        let goal = (t / h).round() as u64;
        while step < goal {
            let k1 = f(y);
            let k2 = f(y + 0.5 * h * k1);
            let k3 = f(y + 0.5 * h * k2);
            let k4 = f(y + h * k3);
            y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            step += 1;
        }
        out.push(y);
    }
    out
}
