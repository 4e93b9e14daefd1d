//! The degree-two reduction to maximum matching.
//!
//! For a 2-left-regular instance every left node is an edge between its two
//! right neighbors. The resulting simple graph `I_B` (parallel edges merged)
//! has a matching of size `s` exactly when `s` left nodes have pairwise
//! disjoint neighborhoods, which lower-bounds the optimum by `2 min(k, s)`.

use std::collections::VecDeque;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::graph::{BipartiteGraph, NodeSet};

/// Undirected simple graph: no self-loops, no parallel edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimpleGraph {
    n_vertices: usize,
    /// Normalized `(low, high)` pairs, sorted and distinct.
    edges: Vec<(u32, u32)>,
}

impl SimpleGraph {
    /// Builds a simple graph, merging parallel edges. Self-loops and
    /// out-of-range endpoints are errors.
    pub fn new(n_vertices: usize, edges: impl IntoIterator<Item = (u32, u32)>) -> Result<Self> {
        let mut normalized = Vec::new();
        for (a, b) in edges {
            if a == b {
                return Err(invalid(format!("self-loop at vertex {a}")));
            }
            if a as usize >= n_vertices || b as usize >= n_vertices {
                return Err(invalid(format!(
                    "edge ({a}, {b}) outside [0, {n_vertices})"
                )));
            }
            normalized.push((a.min(b), a.max(b)));
        }
        normalized.sort_unstable();
        normalized.dedup();
        Ok(Self {
            n_vertices,
            edges: normalized,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn has_edge(&self, a: u32, b: u32) -> bool {
        self.edges.binary_search(&(a.min(b), a.max(b))).is_ok()
    }

    pub fn adjacency(&self) -> Vec<Vec<u32>> {
        let mut adj = vec![Vec::new(); self.n_vertices];
        for &(a, b) in &self.edges {
            adj[a as usize].push(b);
            adj[b as usize].push(a);
        }
        adj
    }

    /// `V E` header, then one `u v` line per edge.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.n_vertices, self.edges.len());
        for &(a, b) in &self.edges {
            let _ = writeln!(out, "{a} {b}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let perr = |line: usize, msg: String| Error::Parse { line, msg };
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| perr(1, "empty input".into()))?;
        let nums: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| perr(1, format!("bad header token `{t}`"))))
            .collect::<Result<_>>()?;
        let [v, e] = nums[..] else {
            return Err(perr(1, "header must be `V E`".into()));
        };
        let mut edges = Vec::with_capacity(e);
        for i in 0..e {
            let line = lines
                .next()
                .ok_or_else(|| perr(i + 2, format!("expected {e} edges, found {i}")))?;
            let ends: Vec<u32> = line
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| perr(i + 2, format!("bad vertex `{t}`"))))
                .collect::<Result<_>>()?;
            let [a, b] = ends[..] else {
                return Err(perr(i + 2, "edge line must be `u v`".into()));
            };
            edges.push((a, b));
        }
        Self::new(v, edges).map_err(|err| match err {
            Error::InvalidInput(msg) => perr(0, msg),
            other => other,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MatchingResult {
    pub size: usize,
    /// Matched pairs `(low, high)`, sorted.
    pub pairs: Vec<(u32, u32)>,
}

fn require_two_regular(graph: &BipartiteGraph) -> Result<()> {
    if let Some(u) = (0..graph.n_left()).find(|&u| graph.degree(u) != 2) {
        return Err(invalid(format!(
            "left node {u} has degree {}; the matching reduction needs degree 2",
            graph.degree(u)
        )));
    }
    Ok(())
}

/// `I_B`: vertices are the right nodes, one edge per distinct neighbor pair.
pub fn build_incidence_graph(graph: &BipartiteGraph) -> Result<SimpleGraph> {
    require_two_regular(graph)?;
    let edges = (0..graph.n_left()).map(|u| {
        let nb = graph.neighbors(u);
        (nb[0], nb[1])
    });
    SimpleGraph::new(graph.m_right(), edges)
}

const NONE: u32 = u32::MAX;

/// Edmonds' blossom search state.
struct Blossom<'a> {
    adj: &'a [Vec<u32>],
    mate: Vec<u32>,
    parent: Vec<u32>,
    base: Vec<u32>,
    in_tree: Vec<bool>,
    in_blossom: Vec<bool>,
    lca_mark: Vec<u32>,
    lca_stamp: u32,
    touched: Vec<u32>,
    queue: VecDeque<u32>,
}

impl<'a> Blossom<'a> {
    fn new(adj: &'a [Vec<u32>]) -> Self {
        let n = adj.len();
        Self {
            adj,
            mate: vec![NONE; n],
            parent: vec![NONE; n],
            base: (0..n as u32).collect(),
            in_tree: vec![false; n],
            in_blossom: vec![false; n],
            lca_mark: vec![0; n],
            lca_stamp: 0,
            touched: Vec::new(),
            queue: VecDeque::new(),
        }
    }

    fn greedy_init(&mut self) {
        for v in 0..self.adj.len() {
            if self.mate[v] != NONE {
                continue;
            }
            if let Some(&w) = self.adj[v].iter().find(|&&w| self.mate[w as usize] == NONE) {
                self.mate[v] = w;
                self.mate[w as usize] = v as u32;
            }
        }
    }

    fn touch(&mut self, v: u32) {
        self.touched.push(v);
    }

    fn reset(&mut self) {
        for &v in &self.touched {
            let v = v as usize;
            self.parent[v] = NONE;
            self.base[v] = v as u32;
            self.in_tree[v] = false;
        }
        self.touched.clear();
        self.queue.clear();
    }

    fn lca(&mut self, mut a: u32, mut b: u32) -> u32 {
        self.lca_stamp = self.lca_stamp.wrapping_add(1);
        if self.lca_stamp == 0 {
            self.lca_mark.iter_mut().for_each(|m| *m = 0);
            self.lca_stamp = 1;
        }
        loop {
            a = self.base[a as usize];
            self.lca_mark[a as usize] = self.lca_stamp;
            let m = self.mate[a as usize];
            if m == NONE {
                break;
            }
            a = self.parent[m as usize];
        }
        loop {
            b = self.base[b as usize];
            if self.lca_mark[b as usize] == self.lca_stamp {
                return b;
            }
            b = self.parent[self.mate[b as usize] as usize];
        }
    }

    fn mark_path(&mut self, mut v: u32, b: u32, mut child: u32) {
        while self.base[v as usize] != b {
            let m = self.mate[v as usize];
            self.in_blossom[self.base[v as usize] as usize] = true;
            self.in_blossom[self.base[m as usize] as usize] = true;
            self.parent[v as usize] = child;
            child = m;
            v = self.parent[m as usize];
        }
    }

    /// Searches for an augmenting path from `root`; returns its free end.
    fn find_path(&mut self, root: u32) -> Option<u32> {
        self.reset();
        self.in_tree[root as usize] = true;
        self.touch(root);
        self.queue.push_back(root);
        while let Some(v) = self.queue.pop_front() {
            let adj = self.adj;
            for &to in &adj[v as usize] {
                let (vi, ti) = (v as usize, to as usize);
                if self.base[vi] == self.base[ti] || self.mate[vi] == to {
                    continue;
                }
                let to_mate = self.mate[ti];
                if to == root || (to_mate != NONE && self.parent[to_mate as usize] != NONE) {
                    let cur = self.lca(v, to);
                    for &t in &self.touched {
                        self.in_blossom[t as usize] = false;
                    }
                    self.mark_path(v, cur, to);
                    self.mark_path(to, cur, v);
                    let mut i = 0;
                    while i < self.touched.len() {
                        let t = self.touched[i] as usize;
                        if self.in_blossom[self.base[t] as usize] {
                            self.base[t] = cur;
                            if !self.in_tree[t] {
                                self.in_tree[t] = true;
                                self.queue.push_back(t as u32);
                            }
                        }
                        i += 1;
                    }
                } else if self.parent[ti] == NONE {
                    self.parent[ti] = v;
                    self.touch(to);
                    if to_mate == NONE {
                        return Some(to);
                    }
                    self.in_tree[to_mate as usize] = true;
                    self.touch(to_mate);
                    self.queue.push_back(to_mate);
                }
            }
        }
        None
    }

    fn augment(&mut self, mut v: u32) {
        while v != NONE {
            let pv = self.parent[v as usize];
            let next = self.mate[pv as usize];
            self.mate[v as usize] = pv;
            self.mate[pv as usize] = v;
            v = next;
        }
    }
}

/// Maximum-cardinality matching of a general graph (Edmonds' blossom
/// algorithm, started from a greedy maximal matching).
pub fn max_matching(g: &SimpleGraph) -> MatchingResult {
    let adj = g.adjacency();
    let mut state = Blossom::new(&adj);
    state.greedy_init();
    // a vertex with no augmenting path now never gains one later
    for root in 0..adj.len() as u32 {
        if state.mate[root as usize] != NONE || adj[root as usize].is_empty() {
            continue;
        }
        if let Some(end) = state.find_path(root) {
            state.augment(end);
        }
    }
    let pairs: Vec<(u32, u32)> = state
        .mate
        .iter()
        .enumerate()
        .filter(|&(v, &w)| w != NONE && (v as u32) < w)
        .map(|(v, &w)| (v as u32, w))
        .collect();
    MatchingResult {
        size: pairs.len(),
        pairs,
    }
}

/// `λ(B)`: the largest number of left nodes with pairwise disjoint
/// neighborhoods, computed as the maximum matching size of `I_B`.
pub fn lambda(graph: &BipartiteGraph) -> Result<usize> {
    Ok(max_matching(&build_incidence_graph(graph)?).size)
}

/// A maximum set of left nodes with pairwise disjoint neighborhoods: one
/// left node per matched edge of `I_B` (the lowest index realizing it).
pub fn disjoint_left_set(graph: &BipartiteGraph) -> Result<NodeSet> {
    let matching = max_matching(&build_incidence_graph(graph)?);
    let mut owner = std::collections::HashMap::with_capacity(graph.n_left());
    for u in (0..graph.n_left()).rev() {
        let nb = graph.neighbors(u);
        owner.insert((nb[0], nb[1]), u);
    }
    let mut nodes: Vec<usize> = matching.pairs.iter().map(|p| owner[p]).collect();
    nodes.sort_unstable();
    Ok(NodeSet::from_vec_unchecked(nodes))
}

/// `2 min(k, λ(B))`, a lower bound on the optimum with `k` nodes.
pub fn opt_lower_bound_d2(graph: &BipartiteGraph, k: usize) -> Result<usize> {
    Ok(2 * k.min(lambda(graph)?))
}
