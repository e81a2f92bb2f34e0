//! Degree and shared-partner histograms of undirected graphs.

use intrafirm_core::Graph;
use serde::Serialize;

/// `degree[k]` nodes of degree k, `esp[k]` edges with k shared partners,
/// `dsp[k]` dyads (connected or not) with k shared partners.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Tallies {
    pub degree: Vec<u64>,
    pub esp: Vec<u64>,
    pub dsp: Vec<u64>,
}

impl Tallies {
    pub fn of(g: &Graph) -> Self {
        Self {
            degree: Self::degrees(g),
            esp: Self::edgewise_shared_partners(g),
            dsp: Self::dyadwise_shared_partners(g),
        }
    }

    /// Length `n` (at least 1).
    pub fn degrees(g: &Graph) -> Vec<u64> {
        let n = g.node_count();
        let mut h = vec![0; n.max(1)];
        for i in 0..n {
            h[g.degree(i)] += 1;
        }
        h
    }

    /// Length `n - 1` (at least 1).
    pub fn edgewise_shared_partners(g: &Graph) -> Vec<u64> {
        let mut h = vec![0; g.node_count().saturating_sub(1).max(1)];
        for (i, j) in g.edges() {
            h[g.shared_partners(i, j)] += 1;
        }
        h
    }

    /// Length `n - 1` (at least 1).
    pub fn dyadwise_shared_partners(g: &Graph) -> Vec<u64> {
        let n = g.node_count();
        let mut h = vec![0; n.saturating_sub(1).max(1)];
        for i in 0..n {
            for j in i + 1..n {
                h[g.shared_partners(i, j)] += 1;
            }
        }
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_plus_pendant() {
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (0, 2), (2, 3)]).unwrap();
        let t = Tallies::of(&g);
        assert_eq!(t.degree, vec![0, 1, 2, 1]);
        assert_eq!(t.esp, vec![1, 3, 0]);
        // dyads: 01,02,12 share one; 03,13 share node 2; 23 shares none
        assert_eq!(t.dsp, vec![1, 5, 0]);
        assert_eq!(t.dsp.iter().sum::<u64>(), 6);
    }
}
