//! Greedy, its phase-based reformulation AcceptReject, the greedy/fixed-set
//! hybrid, and the fixed-set baseline.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::graph::{top_by_gain, BipartiteGraph, CoverState, NodeSet};

/// Full record of a greedy run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GreedyTrace {
    pub k: usize,
    /// Selected nodes in selection order.
    pub selections: Vec<usize>,
    /// Marginal gain of each step.
    pub gains: Vec<usize>,
    /// Coverage after each step.
    pub coverage_prefix: Vec<usize>,
}

impl GreedyTrace {
    pub fn coverage(&self) -> usize {
        self.coverage_prefix.last().copied().unwrap_or(0)
    }

    /// Coverage of the first `t` selections.
    pub fn coverage_at(&self, t: usize) -> usize {
        if t == 0 {
            0
        } else {
            self.coverage_prefix[t - 1]
        }
    }

    pub fn solution(&self) -> NodeSet {
        NodeSet::from_vec_unchecked(self.selections.clone())
    }

    /// CSV with columns `step,node,gain,coverage`; steps count from 1.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,node,gain,coverage\n");
        for (i, ((u, g), c)) in self
            .selections
            .iter()
            .zip(&self.gains)
            .zip(&self.coverage_prefix)
            .enumerate()
        {
            let _ = writeln!(out, "{},{u},{g},{c}", i + 1);
        }
        out
    }
}

fn check_k(graph: &BipartiteGraph, k: usize) -> Result<()> {
    if k > graph.n_left() {
        return Err(invalid(format!(
            "k = {k} exceeds the number of left nodes ({})",
            graph.n_left()
        )));
    }
    Ok(())
}

/// Greedy maximum coverage with ties broken by ascending node index.
///
/// Uses lazy evaluation: a max-heap of stale gain upper bounds keyed by
/// (gain desc, index asc). A popped node whose refreshed gain still equals
/// its key beats every other node, because coverage gains only shrink.
pub fn greedy(graph: &BipartiteGraph, k: usize) -> Result<GreedyTrace> {
    check_k(graph, k)?;
    let mut heap: BinaryHeap<(usize, Reverse<usize>)> = (0..graph.n_left())
        .map(|u| (graph.degree(u), Reverse(u)))
        .collect();
    let mut state = CoverState::new(graph.m_right());
    let mut trace = GreedyTrace {
        k,
        selections: Vec::with_capacity(k),
        gains: Vec::with_capacity(k),
        coverage_prefix: Vec::with_capacity(k),
    };
    while trace.selections.len() < k {
        let (bound, Reverse(u)) = heap.pop().expect("k <= n_left keeps the heap non-empty");
        let gain = state.gain(graph, u);
        if gain == bound {
            state.add(graph, u);
            trace.selections.push(u);
            trace.gains.push(gain);
            trace.coverage_prefix.push(state.count());
        } else {
            heap.push((gain, Reverse(u)));
        }
    }
    Ok(trace)
}

/// One AcceptReject event: in phase `phase`, node `node` was examined.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PhaseEvent {
    pub phase: usize,
    pub node: usize,
    pub accepted: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AcceptRejectTrace {
    pub events: Vec<PhaseEvent>,
    pub accepted: Vec<usize>,
}

impl AcceptRejectTrace {
    /// Number of nodes accepted in phase `p`.
    pub fn accepted_in_phase(&self, p: usize) -> usize {
        self.events
            .iter()
            .filter(|e| e.phase == p && e.accepted)
            .count()
    }
}

/// AcceptReject: for `p` from the maximum degree down to 0, scan nodes in
/// index order and accept each unaccepted node whose marginal gain to the
/// accepted set is at least `p`, until `k` nodes are accepted.
///
/// Every examined (phase, node) pair is recorded; nodes already accepted
/// are skipped without an event. The scan stops as soon as `k` nodes are
/// accepted.
pub fn accept_reject(graph: &BipartiteGraph, k: usize) -> Result<AcceptRejectTrace> {
    check_k(graph, k)?;
    let n = graph.n_left();
    let mut state = CoverState::new(graph.m_right());
    let mut in_a = vec![false; n];
    let mut trace = AcceptRejectTrace {
        events: Vec::new(),
        accepted: Vec::with_capacity(k),
    };
    if k == 0 {
        return Ok(trace);
    }
    for p in (0..=graph.max_degree()).rev() {
        for u in 0..n {
            if in_a[u] {
                continue;
            }
            let accepted = state.gain(graph, u) >= p;
            trace.events.push(PhaseEvent {
                phase: p,
                node: u,
                accepted,
            });
            if accepted {
                state.add(graph, u);
                in_a[u] = true;
                trace.accepted.push(u);
                if trace.accepted.len() == k {
                    return Ok(trace);
                }
            }
        }
    }
    Ok(trace)
}

fn require_regular(graph: &BipartiteGraph) -> Result<usize> {
    if graph.n_left() == 0 {
        return Ok(0);
    }
    graph
        .regular_degree()
        .ok_or_else(|| invalid("t_d is defined for left-regular graphs only"))
}

/// `t_d`: the number of unrestricted greedy steps whose gain is the full
/// degree `d`. Zero for an empty left side.
pub fn t_d_count(graph: &BipartiteGraph) -> Result<usize> {
    let d = require_regular(graph)?;
    let trace = greedy(graph, graph.n_left())?;
    Ok(trace.gains.iter().take_while(|&&g| g == d).count())
}

/// Number of nodes accepted in the first AcceptReject phase (`p = d`) on a
/// `d`-left-regular graph with unlimited budget. Runs that phase only.
pub fn first_phase_accepts(graph: &BipartiteGraph) -> Result<usize> {
    let d = require_regular(graph)?;
    let mut state = CoverState::new(graph.m_right());
    let mut accepted = 0;
    for u in 0..graph.n_left() {
        if state.gain(graph, u) >= d {
            state.add(graph, u);
            accepted += 1;
        }
    }
    Ok(accepted)
}

/// `Y^t`: `t` greedy steps, then the `k - t` nodes with the largest
/// residual gain to the greedy prefix, in one shot.
pub fn hybrid(graph: &BipartiteGraph, k: usize, t: usize) -> Result<NodeSet> {
    check_k(graph, k)?;
    if t > k {
        return Err(invalid(format!("hybrid needs t <= k, got t = {t}, k = {k}")));
    }
    let prefix = greedy(graph, t)?;
    let mut state = CoverState::new(graph.m_right());
    let mut taken = vec![false; graph.n_left()];
    for &u in &prefix.selections {
        state.add(graph, u);
        taken[u] = true;
    }
    let mut nodes = prefix.selections;
    nodes.extend(top_by_gain(graph, &state, &taken, k - t));
    Ok(NodeSet::from_vec_unchecked(nodes))
}

/// `|N(Y^t)|` for every `t` in `0..=k`, sharing a single greedy run.
pub fn hybrid_coverages(graph: &BipartiteGraph, k: usize) -> Result<Vec<usize>> {
    check_k(graph, k)?;
    let trace = greedy(graph, k)?;
    let mut prefix_state = CoverState::new(graph.m_right());
    let mut taken = vec![false; graph.n_left()];
    let mut values = Vec::with_capacity(k + 1);
    for t in 0..=k {
        if t > 0 {
            let u = trace.selections[t - 1];
            prefix_state.add(graph, u);
            taken[u] = true;
        }
        let mut state = prefix_state.clone();
        for u in top_by_gain(graph, &prefix_state, &taken, k - t) {
            state.add(graph, u);
        }
        values.push(state.count());
    }
    Ok(values)
}

/// `H_k`: the `k` largest-degree nodes, ties by index (the first `k` nodes
/// on a left-regular graph), in rank order.
pub fn fixed_set(graph: &BipartiteGraph, k: usize) -> Result<NodeSet> {
    check_k(graph, k)?;
    let mut order: Vec<usize> = (0..graph.n_left()).collect();
    order.sort_by_key(|&u| (Reverse(graph.degree(u)), u));
    order.truncate(k);
    Ok(NodeSet::from_vec_unchecked(order))
}

/// `|N(H_k)|`.
pub fn fixed_set_value(graph: &BipartiteGraph, k: usize) -> Result<usize> {
    let set = fixed_set(graph, k)?;
    Ok(crate::graph::coverage_of(graph, set.as_slice()))
}
