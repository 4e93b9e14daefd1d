//! Bipartite coverage instances.
//!
//! A [`BipartiteGraph`] stores, for every left node, the sorted list of right
//! nodes it covers. Left nodes are indexed `0..n_left` and that index order is
//! the tie-breaking order used by every algorithm in the crate.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{invalid, Error, Result};

/// Left-adjacency representation of a coverage instance.
///
/// Neighbor lists are stored contiguously; `offsets[u]..offsets[u + 1]`
/// delimits the neighbors of left node `u`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BipartiteGraph {
    m_right: usize,
    offsets: Vec<usize>,
    neighbors: Vec<u32>,
}

impl BipartiteGraph {
    /// Builds a graph from per-node neighbor lists.
    ///
    /// Lists are sorted here; duplicates or indices `>= m_right` are rejected.
    pub fn from_adjacency(m_right: usize, adjacency: Vec<Vec<u32>>) -> Result<Self> {
        if m_right == 0 {
            return Err(invalid("a graph needs at least one right node"));
        }
        if m_right > u32::MAX as usize {
            return Err(invalid("right side too large for 32-bit indices"));
        }
        let mut offsets = Vec::with_capacity(adjacency.len() + 1);
        let total = adjacency.iter().map(Vec::len).sum();
        let mut neighbors = Vec::with_capacity(total);
        offsets.push(0);
        for (u, mut list) in adjacency.into_iter().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                return Err(invalid(format!("left node {u} lists right node {} twice", w[0])));
            }
            if let Some(&v) = list.last() {
                if v as usize >= m_right {
                    return Err(invalid(format!(
                        "left node {u} has neighbor {v} outside [0, {m_right})"
                    )));
                }
            }
            neighbors.extend_from_slice(&list);
            offsets.push(neighbors.len());
        }
        Ok(Self {
            m_right,
            offsets,
            neighbors,
        })
    }

    pub fn n_left(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn m_right(&self) -> usize {
        self.m_right
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.len()
    }

    /// Sorted neighbors of left node `u`. Panics if `u` is out of range.
    #[inline]
    pub fn neighbors(&self, u: usize) -> &[u32] {
        &self.neighbors[self.offsets[u]..self.offsets[u + 1]]
    }

    #[inline]
    pub fn degree(&self, u: usize) -> usize {
        self.offsets[u + 1] - self.offsets[u]
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.offsets.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn max_degree(&self) -> usize {
        self.offsets.windows(2).map(|w| w[1] - w[0]).max().unwrap_or(0)
    }

    /// The common degree if every left node has the same degree.
    pub fn regular_degree(&self) -> Option<usize> {
        let mut degrees = self.offsets.windows(2).map(|w| w[1] - w[0]);
        let first = degrees.next()?;
        degrees.all(|d| d == first).then_some(first)
    }

    pub fn adjacency(&self) -> Vec<Vec<u32>> {
        (0..self.n_left()).map(|u| self.neighbors(u).to_vec()).collect()
    }

    fn check_node(&self, u: usize) -> Result<()> {
        if u >= self.n_left() {
            return Err(invalid(format!(
                "left node {u} out of range (n_left = {})",
                self.n_left()
            )));
        }
        Ok(())
    }

    /// Serializes to the text format: `n m` header, then one line of
    /// space-separated neighbors per left node.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.neighbors.len() * 6 + 16);
        let _ = writeln!(out, "{} {}", self.n_left(), self.m_right);
        for u in 0..self.n_left() {
            let mut first = true;
            for &v in self.neighbors(u) {
                if !first {
                    out.push(' ');
                }
                first = false;
                let _ = write!(out, "{v}");
            }
            out.push('\n');
        }
        out
    }

    /// Parses the text format produced by [`BipartiteGraph::to_text`].
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
        let mut fields = header.split_whitespace();
        let n: usize = parse_field(fields.next(), 1, "n")?;
        let m: usize = parse_field(fields.next(), 1, "m")?;
        if fields.next().is_some() {
            return Err(parse_err(1, "header must be exactly `n m`"));
        }
        if m == 0 {
            return Err(parse_err(1, "m must be at least 1"));
        }
        let mut adjacency = Vec::with_capacity(n);
        for i in 0..n {
            let line_no = i + 2;
            let line = lines
                .next()
                .ok_or_else(|| parse_err(line_no, format!("expected {n} node lines, found {i}")))?;
            let mut list = Vec::new();
            for tok in line.split_whitespace() {
                let v: u64 = tok
                    .parse()
                    .map_err(|_| parse_err(line_no, format!("bad neighbor index `{tok}`")))?;
                if v >= m as u64 {
                    return Err(parse_err(
                        line_no,
                        format!("neighbor {v} outside [0, {m})"),
                    ));
                }
                list.push(v as u32);
            }
            adjacency.push(list);
        }
        if let Some((extra, line)) = lines.enumerate().find(|(_, l)| !l.trim().is_empty()) {
            return Err(parse_err(
                n + 2 + extra,
                format!("unexpected trailing content `{line}`"),
            ));
        }
        Self::from_adjacency(m, adjacency).map_err(|e| match e {
            Error::InvalidInput(msg) => parse_err(0, msg),
            other => other,
        })
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_field(tok: Option<&str>, line: usize, name: &str) -> Result<usize> {
    tok.ok_or_else(|| parse_err(line, format!("missing `{name}`")))?
        .parse()
        .map_err(|_| parse_err(line, format!("`{name}` is not a non-negative integer")))
}

pub fn save_graph(graph: &BipartiteGraph, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, graph.to_text())?;
    Ok(())
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<BipartiteGraph> {
    let text = fs::read_to_string(path)?;
    BipartiteGraph::from_text(&text)
}

/// Ordered set of distinct left nodes; order is insertion order.
#[derive(Clone, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct NodeSet(Vec<usize>);

impl NodeSet {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    /// Validates distinctness and range against `graph`.
    pub fn from_nodes(graph: &BipartiteGraph, nodes: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; graph.n_left()];
        for &u in &nodes {
            graph.check_node(u)?;
            if std::mem::replace(&mut seen[u], true) {
                return Err(invalid(format!("left node {u} appears twice")));
            }
        }
        Ok(Self(nodes))
    }

    /// Caller guarantees distinct, in-range nodes.
    pub(crate) fn from_vec_unchecked(nodes: Vec<usize>) -> Self {
        Self(nodes)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, u: usize) -> bool {
        self.0.contains(&u)
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }

    fn validate(&self, graph: &BipartiteGraph) -> Result<()> {
        let mut seen = vec![false; graph.n_left()];
        for &u in &self.0 {
            graph.check_node(u)?;
            if std::mem::replace(&mut seen[u], true) {
                return Err(invalid(format!("left node {u} appears twice")));
            }
        }
        Ok(())
    }
}

/// Incremental cover state: a mark per right node plus the covered count.
///
/// Reusable scratch for traces and Monte Carlo loops; one per thread.
#[derive(Clone, Debug)]
pub struct CoverState {
    covered: Vec<bool>,
    count: usize,
}

impl CoverState {
    pub fn new(m_right: usize) -> Self {
        Self {
            covered: vec![false; m_right],
            count: 0,
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn is_covered(&self, v: usize) -> bool {
        self.covered[v]
    }

    /// Number of neighbors of `u` not yet covered.
    #[inline]
    pub fn gain(&self, graph: &BipartiteGraph, u: usize) -> usize {
        graph
            .neighbors(u)
            .iter()
            .filter(|&&v| !self.covered[v as usize])
            .count()
    }

    /// Covers the neighbors of `u`, returning the number newly covered.
    #[inline]
    pub fn add(&mut self, graph: &BipartiteGraph, u: usize) -> usize {
        let mut fresh = 0;
        for &v in graph.neighbors(u) {
            let slot = &mut self.covered[v as usize];
            if !*slot {
                *slot = true;
                fresh += 1;
            }
        }
        self.count += fresh;
        fresh
    }

    pub fn clear(&mut self) {
        self.covered.iter_mut().for_each(|c| *c = false);
        self.count = 0;
    }
}

/// `|N(s)|`, the number of right nodes covered by `s`.
pub fn coverage(graph: &BipartiteGraph, s: &NodeSet) -> Result<usize> {
    s.validate(graph)?;
    Ok(coverage_of(graph, s.as_slice()))
}

/// Coverage of an arbitrary slice of in-range left nodes (duplicates allowed).
pub fn coverage_of(graph: &BipartiteGraph, nodes: &[usize]) -> usize {
    let mut state = CoverState::new(graph.m_right());
    for &u in nodes {
        state.add(graph, u);
    }
    state.count()
}

/// `|N(u) \ N(s)|`.
pub fn marginal_gain(graph: &BipartiteGraph, s: &NodeSet, u: usize) -> Result<usize> {
    s.validate(graph)?;
    graph.check_node(u)?;
    let mut state = CoverState::new(graph.m_right());
    for &w in s.as_slice() {
        state.add(graph, w);
    }
    Ok(state.gain(graph, u))
}

/// The `t` nodes outside `s` with the largest marginal gain to `s`, ties by
/// ascending index, listed in that rank order.
pub fn top_residual_set(graph: &BipartiteGraph, s: &NodeSet, t: usize) -> Result<NodeSet> {
    s.validate(graph)?;
    if t > graph.n_left() - s.len() {
        return Err(invalid(format!(
            "cannot pick {t} nodes outside a set of {} (n_left = {})",
            s.len(),
            graph.n_left()
        )));
    }
    let mut state = CoverState::new(graph.m_right());
    let mut in_s = vec![false; graph.n_left()];
    for &w in s.as_slice() {
        state.add(graph, w);
        in_s[w] = true;
    }
    Ok(NodeSet(top_by_gain(graph, &state, &in_s, t)))
}

/// Ranks nodes not flagged in `excluded` by (gain desc, index asc) and keeps
/// the first `t`.
pub(crate) fn top_by_gain(
    graph: &BipartiteGraph,
    state: &CoverState,
    excluded: &[bool],
    t: usize,
) -> Vec<usize> {
    if t == 0 {
        return Vec::new();
    }
    let mut ranked: Vec<(usize, usize)> = (0..graph.n_left())
        .filter(|&u| !excluded[u])
        .map(|u| (state.gain(graph, u), u))
        .collect();
    let key = |&(g, u): &(usize, usize)| (std::cmp::Reverse(g), u);
    if t < ranked.len() {
        ranked.select_nth_unstable_by_key(t - 1, key);
        ranked.truncate(t);
    }
    ranked.sort_unstable_by_key(key);
    ranked.into_iter().map(|(_, u)| u).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Bad instance with k = 2: R = {1,2}^2 enumerated lexicographically,
    /// nodes (a_1, b_1, b_2).
    fn bad2() -> BipartiteGraph {
        BipartiteGraph::from_adjacency(4, vec![vec![0, 1], vec![0, 2], vec![1, 3]]).unwrap()
    }

    fn set(g: &BipartiteGraph, nodes: &[usize]) -> NodeSet {
        NodeSet::from_nodes(g, nodes.to_vec()).unwrap()
    }

    #[test]
    fn coverage_examples() {
        let g = bad2();
        assert_eq!(coverage(&g, &NodeSet::new()).unwrap(), 0);
        assert_eq!(coverage(&g, &set(&g, &[0, 1])).unwrap(), 3);
        assert_eq!(coverage(&g, &set(&g, &[1, 2])).unwrap(), 4);
    }

    #[test]
    fn coverage_rejects_out_of_range() {
        let g = bad2();
        assert!(NodeSet::from_nodes(&g, vec![3]).is_err());
        assert!(NodeSet::from_nodes(&g, vec![1, 1]).is_err());
        assert!(marginal_gain(&g, &NodeSet::new(), 7).is_err());
    }

    #[test]
    fn marginal_gain_examples() {
        let g = bad2();
        assert_eq!(marginal_gain(&g, &NodeSet::new(), 2).unwrap(), 2);
        assert_eq!(marginal_gain(&g, &set(&g, &[0]), 1).unwrap(), 1);
        assert_eq!(marginal_gain(&g, &set(&g, &[1, 2]), 0).unwrap(), 0);
        // node already in the set gains nothing
        assert_eq!(marginal_gain(&g, &set(&g, &[0]), 0).unwrap(), 0);
    }

    #[test]
    fn top_residual_examples() {
        let g = BipartiteGraph::from_adjacency(
            6,
            vec![vec![0], vec![0, 1, 2], vec![3, 4], vec![1, 2, 5], vec![4, 5]],
        )
        .unwrap();
        assert!(top_residual_set(&g, &NodeSet::new(), 0).unwrap().is_empty());
        assert_eq!(
            top_residual_set(&g, &NodeSet::new(), 3).unwrap().as_slice(),
            &[1, 3, 2]
        );
        // after taking node 1, node 3 only adds {5}
        assert_eq!(
            top_residual_set(&g, &set(&g, &[1]), 2).unwrap().as_slice(),
            &[2, 4]
        );
        assert!(top_residual_set(&g, &set(&g, &[1]), 5).is_err());
    }

    #[test]
    fn text_round_trip_with_empty_line() {
        let g = BipartiteGraph::from_adjacency(5, vec![vec![4, 0], vec![], vec![2]]).unwrap();
        let text = g.to_text();
        assert_eq!(text, "3 5\n0 4\n\n2\n");
        assert_eq!(BipartiteGraph::from_text(&text).unwrap(), g);
        assert_eq!(g.degree(1), 0);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            BipartiteGraph::from_text("2 3\n0 1\n1 3\n"),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(BipartiteGraph::from_text("2 3\n0 1\n").is_err());
        assert!(BipartiteGraph::from_text("1 3\n0 0\n").is_err());
        assert!(BipartiteGraph::from_text("1 0\n\n").is_err());
        assert!(BipartiteGraph::from_text("1 3\n0 x\n").is_err());
        assert!(BipartiteGraph::from_text("").is_err());
    }

    #[test]
    fn cover_state_tracks_count() {
        let g = bad2();
        let mut st = CoverState::new(4);
        assert_eq!(st.add(&g, 0), 2);
        assert_eq!(st.gain(&g, 1), 1);
        assert_eq!(st.add(&g, 1), 1);
        assert_eq!(st.count(), 3);
        st.clear();
        assert_eq!(st.count(), 0);
    }
}
