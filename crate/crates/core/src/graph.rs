//! Simple graphs over opaque string identifiers.
//!
//! Identifiers are sorted once and mapped to dense indices; all hot-path
//! queries take indices, while the `*_of` variants accept identifiers and
//! report unknown ones as errors. Adjacency is a bit matrix, so shared-partner
//! counts are popcounts over row intersections.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::bitset::BitMatrix;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("unknown node id `{0}`")]
    UnknownNode(String),
    #[error("self-loop on `{0}` is not allowed")]
    SelfLoop(String),
    #[error("node pair must be distinct, got `{0}` twice")]
    SameNode(String),
}

/// Ordered, deduplicated set of node identifiers.
#[derive(Clone, Debug, Default)]
pub struct NodeSet {
    ids: Vec<String>,
    index: HashMap<String, usize>,
}

impl PartialEq for NodeSet {
    fn eq(&self, other: &Self) -> bool {
        self.ids == other.ids
    }
}

impl Eq for NodeSet {}

impl NodeSet {
    pub fn new<I, S>(ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let ids: BTreeSet<String> = ids.into_iter().map(Into::into).collect();
        let ids: Vec<String> = ids.into_iter().collect();
        let index = ids.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Self { ids, index }
    }

    /// Node set `0..n` with zero-padded numeric identifiers, so that the
    /// sorted order equals the numeric order.
    pub fn anonymous(n: usize) -> Self {
        let width = n.saturating_sub(1).to_string().len();
        Self::new((0..n).map(|i| format!("{i:0width$}")))
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn id(&self, i: usize) -> &str {
        &self.ids[i]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn require(&self, id: &str) -> Result<usize, GraphError> {
        self.index_of(id).ok_or_else(|| GraphError::UnknownNode(id.to_string()))
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }
}

/// Simple graph (no self-loops, no multi-edges), directed or undirected.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    nodes: Arc<NodeSet>,
    directed: bool,
    out: BitMatrix,
    // in-adjacency, only maintained for directed graphs
    inc: Option<BitMatrix>,
    out_deg: Vec<usize>,
    in_deg: Vec<usize>,
    edge_count: usize,
}

impl Graph {
    pub fn undirected(nodes: Arc<NodeSet>) -> Self {
        Self::with_direction(nodes, false)
    }

    pub fn directed(nodes: Arc<NodeSet>) -> Self {
        Self::with_direction(nodes, true)
    }

    /// Empty undirected graph on `n` anonymous nodes.
    pub fn empty(n: usize) -> Self {
        Self::undirected(Arc::new(NodeSet::anonymous(n)))
    }

    fn with_direction(nodes: Arc<NodeSet>, directed: bool) -> Self {
        let n = nodes.len();
        Self {
            directed,
            out: BitMatrix::new(n),
            inc: directed.then(|| BitMatrix::new(n)),
            out_deg: vec![0; n],
            in_deg: vec![0; n],
            edge_count: 0,
            nodes,
        }
    }

    /// Undirected graph on `n` anonymous nodes from index pairs. Duplicate
    /// pairs collapse; self-loops are rejected.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Self::empty(n);
        for (i, j) in edges {
            g.add_edge(i, j)?;
        }
        Ok(g)
    }

    /// Builds a graph from identifier pairs. Every endpoint must be in `nodes`.
    pub fn from_id_edges<'a, I>(nodes: Arc<NodeSet>, directed: bool, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut g = Self::with_direction(nodes, directed);
        for (a, b) in edges {
            let i = g.nodes.require(a)?;
            let j = g.nodes.require(b)?;
            g.add_edge(i, j)?;
        }
        Ok(g)
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn nodes(&self) -> &Arc<NodeSet> {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Number of node pairs that could carry an edge.
    pub fn dyad_count(&self) -> usize {
        let n = self.node_count();
        let pairs = n * n.saturating_sub(1);
        if self.directed {
            pairs
        } else {
            pairs / 2
        }
    }

    pub fn id(&self, i: usize) -> &str {
        self.nodes.id(i)
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.out.get(i, j)
    }

    /// Inserts edge `i -> j` (or `{i, j}`). Returns `false` if it was already present.
    pub fn add_edge(&mut self, i: usize, j: usize) -> Result<bool, GraphError> {
        if i == j {
            return Err(GraphError::SelfLoop(self.id(i).to_string()));
        }
        if self.has_edge(i, j) {
            return Ok(false);
        }
        self.set(i, j, true);
        Ok(true)
    }

    /// Removes edge `i -> j` (or `{i, j}`). Returns `false` if it was absent.
    pub fn remove_edge(&mut self, i: usize, j: usize) -> bool {
        if i == j || !self.has_edge(i, j) {
            return false;
        }
        self.set(i, j, false);
        true
    }

    /// Flips the dyad and returns its new state.
    ///
    /// Panics if `i == j`.
    #[inline]
    pub fn toggle(&mut self, i: usize, j: usize) -> bool {
        assert_ne!(i, j, "cannot toggle a self-loop");
        let present = !self.has_edge(i, j);
        self.set(i, j, present);
        present
    }

    fn set(&mut self, i: usize, j: usize, value: bool) {
        self.out.set(i, j, value);
        let delta = |d: &mut usize| {
            if value {
                *d += 1
            } else {
                *d -= 1
            }
        };
        if let Some(inc) = self.inc.as_mut() {
            inc.set(j, i, value);
            delta(&mut self.out_deg[i]);
            delta(&mut self.in_deg[j]);
        } else {
            self.out.set(j, i, value);
            delta(&mut self.out_deg[i]);
            delta(&mut self.out_deg[j]);
        }
        delta(&mut self.edge_count);
    }

    /// Number of neighbours; for directed graphs, in-degree plus out-degree.
    #[inline]
    pub fn degree(&self, i: usize) -> usize {
        if self.directed {
            self.out_deg[i] + self.in_deg[i]
        } else {
            self.out_deg[i]
        }
    }

    pub fn out_degree(&self, i: usize) -> usize {
        self.out_deg[i]
    }

    pub fn in_degree(&self, i: usize) -> usize {
        if self.directed {
            self.in_deg[i]
        } else {
            self.out_deg[i]
        }
    }

    pub fn degree_of(&self, id: &str) -> Result<usize, GraphError> {
        Ok(self.degree(self.nodes.require(id)?))
    }

    /// Out-neighbours (all neighbours when undirected), ascending.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.out.row_iter(i)
    }

    /// `|N(i) ∩ N(j)|` on the undirected adjacency. Neither endpoint can be
    /// its own neighbour, so `i` and `j` are never counted.
    #[inline]
    pub fn shared_partners(&self, i: usize, j: usize) -> usize {
        self.out.common(i, j)
    }

    pub fn shared_partner_iter(&self, i: usize, j: usize) -> impl Iterator<Item = usize> + '_ {
        self.out.common_iter(i, j)
    }

    pub fn shared_partners_of(&self, a: &str, b: &str) -> Result<usize, GraphError> {
        let i = self.nodes.require(a)?;
        let j = self.nodes.require(b)?;
        if i == j {
            return Err(GraphError::SameNode(a.to_string()));
        }
        Ok(self.shared_partners(i, j))
    }

    /// Edges in lexicographic order; undirected edges are reported once with `i < j`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let directed = self.directed;
        (0..self.node_count()).flat_map(move |i| {
            self.neighbors(i)
                .filter(move |&j| directed || i < j)
                .map(move |j| (i, j))
        })
    }

    pub fn id_edges(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.edges().map(|(i, j)| (self.id(i), self.id(j)))
    }

    /// Undirected projection over the same node set.
    pub fn to_undirected(&self) -> Graph {
        let mut g = Graph::undirected(self.nodes.clone());
        for (i, j) in self.edges() {
            g.add_edge(i, j).expect("no self-loops in source graph");
        }
        g
    }

    /// Induced subgraph on the given node indices; identifiers are kept.
    pub fn induced(&self, keep: &[usize]) -> Graph {
        let nodes = Arc::new(NodeSet::new(keep.iter().map(|&i| self.id(i).to_string())));
        let mut g = Graph::with_direction(nodes, self.directed);
        for (i, j) in self.edges() {
            if let (Some(a), Some(b)) = (g.nodes.index_of(self.id(i)), g.nodes.index_of(self.id(j))) {
                g.add_edge(a, b).expect("no self-loops in source graph");
            }
        }
        g
    }

    /// Weakly connected components, each sorted, ordered by smallest member.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut queue = VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                let fwd = self.out.row_iter(v);
                let back = self.inc.iter().flat_map(|inc| inc.row_iter(v));
                for w in fwd.chain(back) {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                        queue.push_back(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn component_ids(&self) -> Vec<Vec<String>> {
        self.connected_components()
            .into_iter()
            .map(|c| c.into_iter().map(|i| self.id(i).to_string()).collect())
            .collect()
    }

    /// BFS hop distances from `source` on the undirected adjacency.
    pub fn bfs_distances(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.node_count()];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(v) = queue.pop_front() {
            let d = dist[v].unwrap_or_default() + 1;
            for w in self.neighbors(v) {
                if dist[w].is_none() {
                    dist[w] = Some(d);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Shortest-path lengths over all unordered pairs (undirected adjacency).
    pub fn geodesic_distribution(&self) -> GeodesicHistogram {
        let n = self.node_count();
        let mut hist = GeodesicHistogram {
            counts: vec![0; n.max(1)],
            unreachable: 0,
        };
        for s in 0..n {
            for d in self.bfs_distances(s).into_iter().skip(s + 1) {
                match d {
                    Some(d) => hist.counts[d] += 1,
                    None => hist.unreachable += 1,
                }
            }
        }
        hist
    }

    /// `hist[k]` = number of nodes with degree `k`, for `k` in `0..n`.
    pub fn degree_histogram(&self) -> Vec<u64> {
        let n = self.node_count();
        let mut hist = vec![0u64; n.max(1)];
        for i in 0..n {
            hist[self.degree(i)] += 1;
        }
        hist
    }
}

/// Histogram of finite geodesic lengths plus a bucket for disconnected pairs.
/// `counts[d]` is the number of pairs at distance `d`; `counts[0]` is always 0.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GeodesicHistogram {
    pub counts: Vec<u64>,
    pub unreachable: u64,
}

impl GeodesicHistogram {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum::<u64>() + self.unreachable
    }

    pub fn get(&self, d: usize) -> u64 {
        self.counts.get(d).copied().unwrap_or(0)
    }
}

/// Two-mode graph; in this crate the left side holds firms and the right side countries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BipartiteGraph {
    left: Arc<NodeSet>,
    right: Arc<NodeSet>,
    by_left: Vec<BTreeSet<usize>>,
    by_right: Vec<BTreeSet<usize>>,
}

impl BipartiteGraph {
    pub fn new(left: Arc<NodeSet>, right: Arc<NodeSet>) -> Self {
        Self {
            by_left: vec![BTreeSet::new(); left.len()],
            by_right: vec![BTreeSet::new(); right.len()],
            left,
            right,
        }
    }

    pub fn left(&self) -> &Arc<NodeSet> {
        &self.left
    }

    pub fn right(&self) -> &Arc<NodeSet> {
        &self.right
    }

    pub fn add(&mut self, l: usize, r: usize) -> bool {
        self.by_right[r].insert(l);
        self.by_left[l].insert(r)
    }

    pub fn remove(&mut self, l: usize, r: usize) -> bool {
        self.by_right[r].remove(&l);
        self.by_left[l].remove(&r)
    }

    #[inline]
    pub fn contains(&self, l: usize, r: usize) -> bool {
        self.by_left[l].contains(&r)
    }

    pub fn right_of(&self, l: usize) -> &BTreeSet<usize> {
        &self.by_left[l]
    }

    pub fn left_of(&self, r: usize) -> &BTreeSet<usize> {
        &self.by_right[r]
    }

    pub fn edge_count(&self) -> usize {
        self.by_left.iter().map(BTreeSet::len).sum()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.by_left
            .iter()
            .enumerate()
            .flat_map(|(l, rs)| rs.iter().map(move |&r| (l, r)))
    }
}
