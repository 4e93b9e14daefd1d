//! Exact maximum coverage for desk-scale instances.
//!
//! Both solvers work on per-node bitsets over the right side. The exhaustive
//! solver enumerates every `min(k, n)`-subset; the branch-and-bound solver
//! runs a best-first include/exclude search over left nodes in index order.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::algorithms::greedy;
use crate::error::{Error, Result};
use crate::graph::{BipartiteGraph, NodeSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptMethod {
    Exhaustive,
    BranchBound,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OptResult {
    pub value: usize,
    pub witness: NodeSet,
    pub nodes_explored: u64,
    pub method: OptMethod,
    /// Set when the search stopped on its budget; `value` is then only a
    /// lower bound on the optimum.
    pub best_effort: bool,
}

impl OptResult {
    pub fn csv_header() -> &'static str {
        "value,method,explored,time_ms"
    }

    pub fn csv_row(&self, time_ms: u128) -> String {
        let method = match self.method {
            OptMethod::Exhaustive => "exhaustive",
            OptMethod::BranchBound => "branch_bound",
        };
        format!("{},{method},{},{time_ms}", self.value, self.nodes_explored)
    }
}

/// Default cap on the number of subsets the exhaustive solver enumerates.
pub const DEFAULT_EXHAUSTIVE_BUDGET: u64 = 10_000_000;

/// Limits for the branch-and-bound search. `None` means unlimited.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchBudget {
    pub max_nodes: Option<u64>,
    pub max_time: Option<Duration>,
}

impl SearchBudget {
    pub fn unlimited() -> Self {
        Self::default()
    }

    pub fn time(limit: Duration) -> Self {
        Self {
            max_time: Some(limit),
            ..Self::default()
        }
    }
}

/// Neighborhoods as fixed-width bitsets.
struct BitCover {
    words: usize,
    sets: Vec<u64>,
}

impl BitCover {
    fn new(graph: &BipartiteGraph) -> Self {
        let words = graph.m_right().div_ceil(64);
        let mut sets = vec![0u64; words * graph.n_left()];
        for u in 0..graph.n_left() {
            let row = &mut sets[u * words..(u + 1) * words];
            for &v in graph.neighbors(u) {
                row[v as usize / 64] |= 1 << (v % 64);
            }
        }
        Self { words, sets }
    }

    #[inline]
    fn row(&self, u: usize) -> &[u64] {
        &self.sets[u * self.words..(u + 1) * self.words]
    }

    #[inline]
    fn gain(&self, covered: &[u64], u: usize) -> usize {
        self.row(u)
            .iter()
            .zip(covered)
            .map(|(a, c)| (a & !c).count_ones() as usize)
            .sum()
    }

    #[inline]
    fn union_into(&self, covered: &mut [u64], u: usize) {
        for (c, a) in covered.iter_mut().zip(self.row(u)) {
            *c |= a;
        }
    }
}

fn popcount(bits: &[u64]) -> usize {
    bits.iter().map(|w| w.count_ones() as usize).sum()
}

/// `C(n, k)` saturating at `u64::MAX`.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

fn all_nodes_result(graph: &BipartiteGraph, method: OptMethod) -> OptResult {
    let all: Vec<usize> = (0..graph.n_left()).collect();
    OptResult {
        value: crate::graph::coverage_of(graph, &all),
        witness: NodeSet::from_vec_unchecked(all),
        nodes_explored: 1,
        method,
        best_effort: false,
    }
}

/// Exact optimum by enumerating all subsets of size `min(k, n_left)`
/// (coverage is monotone, so smaller subsets never win).
///
/// Fails with a capacity error when `C(n_left, k)` exceeds `budget`.
pub fn opt_exhaustive(graph: &BipartiteGraph, k: usize, budget: u64) -> Result<OptResult> {
    let n = graph.n_left();
    if k >= n {
        return Ok(all_nodes_result(graph, OptMethod::Exhaustive));
    }
    let count = binomial(n as u64, k as u64);
    if count > budget {
        return Err(Error::Capacity(format!(
            "C({n}, {k}) = {count} subsets exceeds the exhaustive budget {budget}"
        )));
    }
    let bits = BitCover::new(graph);
    let words = bits.words;
    // covered[depth] is the union of the first `depth` chosen nodes
    let mut covered = vec![0u64; words * (k + 1)];
    let mut chosen = vec![0usize; k];
    let mut best = (0usize, Vec::new());
    let mut explored = 0u64;

    fn rec(
        bits: &BitCover,
        n: usize,
        k: usize,
        depth: usize,
        start: usize,
        covered: &mut [u64],
        chosen: &mut [usize],
        best: &mut (usize, Vec<usize>),
        explored: &mut u64,
    ) {
        let w = bits.words;
        if depth == k {
            *explored += 1;
            let value = popcount(&covered[depth * w..(depth + 1) * w]);
            if value > best.0 || best.1.is_empty() {
                *best = (value, chosen.to_vec());
            }
            return;
        }
        // leave room for the remaining k - depth - 1 picks
        for u in start..=n - (k - depth) {
            let (lo, hi) = covered.split_at_mut((depth + 1) * w);
            let parent = &lo[depth * w..];
            let child = &mut hi[..w];
            for ((c, p), a) in child.iter_mut().zip(parent).zip(bits.row(u)) {
                *c = p | a;
            }
            chosen[depth] = u;
            rec(bits, n, k, depth + 1, u + 1, covered, chosen, best, explored);
        }
    }

    rec(
        &bits,
        n,
        k,
        0,
        0,
        &mut covered,
        &mut chosen,
        &mut best,
        &mut explored,
    );
    Ok(OptResult {
        value: best.0,
        witness: NodeSet::from_vec_unchecked(best.1),
        nodes_explored: explored,
        method: OptMethod::Exhaustive,
        best_effort: false,
    })
}

/// Frontier entry of the best-first search.
struct Frontier {
    bound: usize,
    depth: usize,
    seq: u64,
    /// Index into the arena of partial solutions; `usize::MAX` is the root.
    trail: usize,
    chosen: usize,
    value: usize,
    covered: Vec<u64>,
}

impl Frontier {
    fn key(&self) -> (usize, usize, Reverse<u64>) {
        (self.bound, self.depth, Reverse(self.seq))
    }
}

impl PartialEq for Frontier {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}
impl Eq for Frontier {}
impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

/// Exact optimum by best-first branch and bound.
///
/// Each search node fixes the include/exclude decision for left nodes
/// `0..depth`. Its bound is the current coverage plus the sum of the
/// `k - chosen` largest residual gains among undecided nodes, capped by the
/// coverage of the current set together with every undecided node. The
/// incumbent starts from greedy. Expansion order is (bound, depth) highest
/// first, then creation order.
///
/// When the budget runs out the incumbent is returned with `best_effort`
/// set.
pub fn opt_branch_bound(
    graph: &BipartiteGraph,
    k: usize,
    budget: SearchBudget,
) -> Result<OptResult> {
    let n = graph.n_left();
    let m = graph.m_right();
    if k >= n {
        return Ok(all_nodes_result(graph, OptMethod::BranchBound));
    }
    let start = Instant::now();
    let incumbent_trace = greedy(graph, k)?;
    let mut best_value = incumbent_trace.coverage();
    let mut best_set = incumbent_trace.selections;

    let bits = BitCover::new(graph);
    let words = bits.words;
    let mut all_cover = vec![0u64; words];
    for u in 0..n {
        bits.union_into(&mut all_cover, u);
    }
    let mut top_degrees = graph.degrees();
    top_degrees.sort_unstable_by(|a, b| b.cmp(a));
    let trivial_ub = top_degrees[..k].iter().sum::<usize>().min(popcount(&all_cover)).min(m);
    if best_value >= trivial_ub {
        return Ok(OptResult {
            value: best_value,
            witness: NodeSet::from_vec_unchecked(best_set),
            nodes_explored: 0,
            method: OptMethod::BranchBound,
            best_effort: false,
        });
    }

    // arena of (parent, node) links for reconstructing the chosen set
    let mut arena: Vec<(usize, usize)> = Vec::new();
    let mut gains_scratch: Vec<usize> = Vec::with_capacity(n);
    let mut reach = vec![0u64; words];

    let mut bound_of = |covered: &[u64], value: usize, depth: usize, chosen: usize| -> usize {
        let slots = k - chosen;
        if slots == 0 || depth == n {
            return value;
        }
        gains_scratch.clear();
        reach.copy_from_slice(covered);
        for u in depth..n {
            let g = bits.gain(covered, u);
            if g > 0 {
                gains_scratch.push(g);
                bits.union_into(&mut reach, u);
            }
        }
        let top = if gains_scratch.len() > slots {
            gains_scratch.select_nth_unstable_by(slots - 1, |a, b| b.cmp(a));
            gains_scratch[..slots].iter().sum::<usize>()
        } else {
            gains_scratch.iter().sum()
        };
        (value + top).min(popcount(&reach))
    };

    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    let root_cover = vec![0u64; words];
    let root_bound = bound_of(&root_cover, 0, 0, 0).min(trivial_ub);
    heap.push(Frontier {
        bound: root_bound,
        depth: 0,
        seq,
        trail: usize::MAX,
        chosen: 0,
        value: 0,
        covered: root_cover,
    });
    let mut explored = 0u64;
    let mut best_effort = false;

    while let Some(node) = heap.pop() {
        if node.bound <= best_value {
            break;
        }
        explored += 1;
        if let Some(limit) = budget.max_nodes {
            if explored > limit {
                best_effort = true;
                break;
            }
        }
        if let Some(limit) = budget.max_time {
            if explored.is_multiple_of(256) && start.elapsed() > limit {
                best_effort = true;
                break;
            }
        }
        let u = node.depth;
        // include u
        let gain = bits.gain(&node.covered, u);
        if gain > 0 && node.chosen < k {
            let mut covered = node.covered.clone();
            bits.union_into(&mut covered, u);
            let value = node.value + gain;
            arena.push((node.trail, u));
            let trail = arena.len() - 1;
            if value > best_value {
                best_value = value;
                best_set = reconstruct(&arena, trail);
            }
            let bound = bound_of(&covered, value, u + 1, node.chosen + 1);
            if bound > best_value {
                seq += 1;
                heap.push(Frontier {
                    bound,
                    depth: u + 1,
                    seq,
                    trail,
                    chosen: node.chosen + 1,
                    value,
                    covered,
                });
            }
        }
        // exclude u
        let bound = bound_of(&node.covered, node.value, u + 1, node.chosen);
        if bound > best_value {
            seq += 1;
            heap.push(Frontier {
                bound,
                depth: u + 1,
                seq,
                trail: node.trail,
                chosen: node.chosen,
                value: node.value,
                covered: node.covered,
            });
        }
    }

    // pad with unused nodes so the witness has exactly k nodes
    if best_set.len() < k {
        let mut used = vec![false; n];
        best_set.iter().for_each(|&u| used[u] = true);
        best_set.extend((0..n).filter(|&u| !used[u]).take(k - best_set.len()));
    }
    Ok(OptResult {
        value: best_value,
        witness: NodeSet::from_vec_unchecked(best_set),
        nodes_explored: explored,
        method: OptMethod::BranchBound,
        best_effort,
    })
}

fn reconstruct(arena: &[(usize, usize)], mut at: usize) -> Vec<usize> {
    let mut nodes = Vec::new();
    while at != usize::MAX {
        let (parent, u) = arena[at];
        nodes.push(u);
        at = parent;
    }
    nodes.reverse();
    nodes
}
