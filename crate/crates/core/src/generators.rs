//! Seeded random instance generators and the deterministic worst-case
//! instance for greedy.
//!
//! Every random model draws each left node's neighborhood as a uniform
//! subset of the right side of the requested size, independently across
//! nodes. Generators take any [`Rng`]; experiments pass the generator of a
//! trial substream (see [`crate::seed::Seed::rng`]).

use std::collections::HashSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::graph::BipartiteGraph;

/// How left degrees are chosen.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegreeSpec {
    Uniform(usize),
    Explicit(Vec<usize>),
    Mixture { values: Vec<usize>, probs: Vec<f64> },
    /// Floors of Pareto(a, x_min = 1) samples, clamped to `[1, m]`.
    PowerLaw { a: f64 },
}

impl DegreeSpec {
    pub fn validate(&self, n: usize, m: usize) -> Result<()> {
        let in_range = |d: usize| (1..=m).contains(&d);
        match self {
            DegreeSpec::Uniform(d) => {
                if !in_range(*d) {
                    return Err(invalid(format!("degree {d} outside [1, {m}]")));
                }
            }
            DegreeSpec::Explicit(ds) => {
                if ds.len() != n {
                    return Err(invalid(format!("{} explicit degrees for {n} nodes", ds.len())));
                }
                if let Some(d) = ds.iter().find(|&&d| !in_range(d)) {
                    return Err(invalid(format!("degree {d} outside [1, {m}]")));
                }
            }
            DegreeSpec::Mixture { values, probs } => {
                if values.is_empty() || values.len() != probs.len() {
                    return Err(invalid("mixture needs matching non-empty values and probs"));
                }
                if let Some(d) = values.iter().find(|&&d| !in_range(d)) {
                    return Err(invalid(format!("degree {d} outside [1, {m}]")));
                }
                if probs.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
                    return Err(invalid("mixture probabilities must lie in [0, 1]"));
                }
                let total: f64 = probs.iter().sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(invalid(format!("mixture probabilities sum to {total}, not 1")));
                }
            }
            DegreeSpec::PowerLaw { a } => {
                if a.is_nan() || *a <= 1.0 {
                    return Err(invalid(format!("Pareto shape must exceed 1, got {a}")));
                }
            }
        }
        Ok(())
    }

    /// Draws a degree sequence of length `n`.
    pub fn realize<R: Rng + ?Sized>(&self, n: usize, m: usize, rng: &mut R) -> Result<Vec<usize>> {
        self.validate(n, m)?;
        Ok(match self {
            DegreeSpec::Uniform(d) => vec![*d; n],
            DegreeSpec::Explicit(ds) => ds.clone(),
            DegreeSpec::Mixture { values, probs } => (0..n)
                .map(|_| {
                    let x: f64 = rng.random();
                    let mut acc = 0.0;
                    for (&v, &p) in values.iter().zip(probs) {
                        acc += p;
                        if x < acc {
                            return v;
                        }
                    }
                    // rounding left x above the running sum: take the last value with mass
                    values[probs.iter().rposition(|&p| p > 0.0).unwrap_or(values.len() - 1)]
                })
                .collect(),
            DegreeSpec::PowerLaw { a } => powerlaw_degrees(n, m, *a, rng)?,
        })
    }
}

/// Samples uniform `d`-subsets of `0..m`.
///
/// Dense requests use a partial Fisher–Yates shuffle over a persistent
/// permutation; sparse ones use rejection sampling.
pub struct SubsetSampler {
    m: usize,
    perm: Vec<u32>,
    seen: HashSet<u32>,
}

impl SubsetSampler {
    pub fn new(m: usize) -> Self {
        Self {
            m,
            perm: Vec::new(),
            seen: HashSet::new(),
        }
    }

    /// Sorted uniform subset of size `d`; requires `d <= m`.
    pub fn sample<R: Rng + ?Sized>(&mut self, d: usize, rng: &mut R) -> Vec<u32> {
        assert!(d <= self.m, "subset size {d} exceeds universe {}", self.m);
        let mut out = Vec::with_capacity(d);
        if d * 64 > self.m {
            if self.perm.is_empty() {
                self.perm = (0..self.m as u32).collect();
            }
            // any starting permutation yields a uniform subset
            for i in 0..d {
                let j = rng.random_range(i..self.m);
                self.perm.swap(i, j);
            }
            out.extend_from_slice(&self.perm[..d]);
        } else if d <= 32 {
            while out.len() < d {
                let v = rng.random_range(0..self.m) as u32;
                if !out.contains(&v) {
                    out.push(v);
                }
            }
        } else {
            self.seen.clear();
            while out.len() < d {
                let v = rng.random_range(0..self.m) as u32;
                if self.seen.insert(v) {
                    out.push(v);
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// GenR(n, m, d_1..d_n): node `i` gets a uniform `degrees[i]`-subset of the
/// `m` right nodes.
pub fn genr<R: Rng + ?Sized>(m: usize, degrees: &[usize], rng: &mut R) -> Result<BipartiteGraph> {
    if m == 0 {
        return Err(invalid("m must be at least 1"));
    }
    if let Some(d) = degrees.iter().find(|&&d| d == 0 || d > m) {
        return Err(invalid(format!("degree {d} outside [1, {m}]")));
    }
    let mut sampler = SubsetSampler::new(m);
    let adjacency = degrees.iter().map(|&d| sampler.sample(d, rng)).collect();
    BipartiteGraph::from_adjacency(m, adjacency)
}

/// Left-regular random model LRR(n, d): `n` left and `n` right nodes.
pub fn lrr<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Result<BipartiteGraph> {
    if n == 0 {
        return Err(invalid("n must be at least 1"));
    }
    ulrr(n, n, d, rng)
}

/// Unbalanced left-regular model ULRR(n, m, d).
pub fn ulrr<R: Rng + ?Sized>(n: usize, m: usize, d: usize, rng: &mut R) -> Result<BipartiteGraph> {
    if d == 0 || d > m {
        return Err(invalid(format!("degree {d} outside [1, {m}]")));
    }
    genr(m, &vec![d; n], rng)
}

/// Degrees `clamp(floor(X_i), 1, m)` for `X_i ~ Pareto(a, 1)`, sorted
/// descending. Samples are drawn by inversion, `X = U^(-1/a)`.
pub fn powerlaw_degrees<R: Rng + ?Sized>(
    n: usize,
    m: usize,
    a: f64,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if a.is_nan() || a <= 1.0 {
        return Err(invalid(format!("Pareto shape must exceed 1, got {a}")));
    }
    if m == 0 {
        return Err(invalid("m must be at least 1"));
    }
    let mut clamped = 0usize;
    let mut degrees: Vec<usize> = (0..n)
        .map(|_| {
            let x = pareto_sample(a, rng);
            let d = x.floor();
            if d > m as f64 {
                clamped += 1;
                m
            } else {
                (d as usize).max(1)
            }
        })
        .collect();
    if clamped > 0 {
        log::warn!("power-law degrees: {clamped} of {n} samples clamped to m = {m}");
    }
    degrees.sort_unstable_by(|a, b| b.cmp(a));
    Ok(degrees)
}

/// One Pareto(a, x_min = 1) draw by inversion.
pub fn pareto_sample<R: Rng + ?Sized>(a: f64, rng: &mut R) -> f64 {
    // 1 - U lies in (0, 1], so the power is finite
    let u = 1.0 - rng.random::<f64>();
    u.powf(-1.0 / a)
}

/// Largest number of edges [`bad_instance`] will materialize.
pub const MAX_BAD_INSTANCE_EDGES: usize = 1 << 25;

/// The classical tight instance for greedy with cardinality `k`.
///
/// Right nodes are `{1..k}^k` in lexicographic order (the first coordinate
/// is most significant). Left nodes are `a_1..a_{k-1}` followed by
/// `b_1..b_k`, with `N(a_i) = {x : x_i = 1}` and `N(b_i) = {x : x_k = i}`.
pub fn bad_instance(k: usize) -> Result<BipartiteGraph> {
    if k < 2 {
        return Err(invalid("bad instance needs k >= 2"));
    }
    let too_big = || Error::Capacity(format!("bad instance with k = {k} has too many right nodes"));
    let m = (0..k).try_fold(1usize, |acc, _| acc.checked_mul(k)).ok_or_else(too_big)?;
    let edges = (2 * k - 1).checked_mul(m / k).ok_or_else(too_big)?;
    if edges > MAX_BAD_INSTANCE_EDGES {
        return Err(too_big());
    }
    // coordinate j (0-based) of right node x has place value k^(k-1-j)
    let coord = |x: usize, j: usize| (x / k.pow((k - 1 - j) as u32)) % k;
    let mut adjacency = Vec::with_capacity(2 * k - 1);
    for i in 0..k - 1 {
        adjacency.push((0..m).filter(|&x| coord(x, i) == 0).map(|x| x as u32).collect());
    }
    for i in 0..k {
        adjacency.push((0..m).filter(|&x| x % k == i).map(|x| x as u32).collect());
    }
    BipartiteGraph::from_adjacency(m, adjacency)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::Seed;

    #[test]
    fn lrr_contract() {
        let g = lrr(10, 3, &mut Seed(7).rng(0)).unwrap();
        assert_eq!(g.n_left(), 10);
        assert_eq!(g.m_right(), 10);
        assert!(g.degrees().iter().all(|&d| d == 3));
        assert!((0..10).all(|u| g.neighbors(u).iter().all(|&v| v < 10)));
    }

    #[test]
    fn lrr_full_degree_covers_everything() {
        let g = lrr(6, 6, &mut Seed(1).rng(0)).unwrap();
        for u in 0..6 {
            assert_eq!(g.neighbors(u), &[0, 1, 2, 3, 4, 5]);
        }
    }

    #[test]
    fn degree_out_of_range_is_rejected() {
        let mut rng = Seed(0).rng(0);
        assert!(lrr(5, 6, &mut rng).is_err());
        assert!(ulrr(5, 3, 4, &mut rng).is_err());
        assert!(genr(4, &[1, 0], &mut rng).is_err());
        assert!(genr(4, &[5], &mut rng).is_err());
        assert!(powerlaw_degrees(10, 10, 1.0, &mut rng).is_err());
    }

    #[test]
    fn ulrr_contract() {
        let g = ulrr(5, 20, 4, &mut Seed(3).rng(0)).unwrap();
        assert_eq!((g.n_left(), g.m_right()), (5, 20));
        assert!(g.degrees().iter().all(|&d| d == 4));
        assert!(g.neighbors(0).iter().all(|&v| v < 20));
    }

    #[test]
    fn same_seed_same_graph() {
        let a = genr(50, &[3, 40, 7, 1, 50], &mut Seed(9).rng(4)).unwrap();
        let b = genr(50, &[3, 40, 7, 1, 50], &mut Seed(9).rng(4)).unwrap();
        let c = genr(50, &[3, 40, 7, 1, 50], &mut Seed(9).rng(5)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.degrees(), vec![3, 40, 7, 1, 50]);
    }

    #[test]
    fn sampler_paths_produce_valid_subsets() {
        let mut rng = Seed(11).rng(0);
        let mut sampler = SubsetSampler::new(10_000);
        for d in [1, 5, 40, 100, 500, 10_000] {
            let s = sampler.sample(d, &mut rng);
            assert_eq!(s.len(), d);
            assert!(s.windows(2).all(|w| w[0] < w[1]));
            assert!(s.iter().all(|&v| v < 10_000));
        }
    }

    #[test]
    fn mixture_validation() {
        let ok = DegreeSpec::Mixture { values: vec![1, 4, 7], probs: vec![0.25, 0.5, 0.25] };
        assert!(ok.validate(10, 10).is_ok());
        let bad_sum = DegreeSpec::Mixture { values: vec![1, 4], probs: vec![0.5, 0.4] };
        assert!(bad_sum.validate(10, 10).is_err());
        let bad_deg = DegreeSpec::Mixture { values: vec![11], probs: vec![1.0] };
        assert!(bad_deg.validate(10, 10).is_err());
        let degen = DegreeSpec::Mixture { values: vec![1, 4, 7], probs: vec![0.5, 0.0, 0.5] };
        let ds = degen.realize(200, 10, &mut Seed(2).rng(0)).unwrap();
        assert!(ds.iter().all(|&d| d == 1 || d == 7));
    }

    #[test]
    fn powerlaw_degrees_are_sorted_and_bounded() {
        let ds = powerlaw_degrees(1000, 50, 1.5, &mut Seed(5).rng(0)).unwrap();
        assert!(ds.windows(2).all(|w| w[0] >= w[1]));
        assert!(ds.iter().all(|&d| (1..=50).contains(&d)));
    }

    #[test]
    fn bad_instance_k2() {
        let g = bad_instance(2).unwrap();
        assert_eq!(g.m_right(), 4);
        assert_eq!(g.n_left(), 3);
        // R = (1,1),(1,2),(2,1),(2,2)
        assert_eq!(g.neighbors(0), &[0, 1]);
        assert_eq!(g.neighbors(1), &[0, 2]);
        assert_eq!(g.neighbors(2), &[1, 3]);
    }

    #[test]
    fn bad_instance_degrees_and_capacity() {
        for k in 2..=6 {
            let g = bad_instance(k).unwrap();
            assert_eq!(g.n_left(), 2 * k - 1);
            assert_eq!(g.m_right(), k.pow(k as u32));
            assert_eq!(g.regular_degree(), Some(k.pow(k as u32 - 1)));
        }
        assert!(bad_instance(1).is_err());
        assert!(matches!(bad_instance(9), Err(Error::Capacity(_))));
        assert!(matches!(bad_instance(40), Err(Error::Capacity(_))));
    }
}
