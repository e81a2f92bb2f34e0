//! Descriptive statistics for undirected networks.

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::graph::Graph;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StatsError {
    #[error("{stat} needs at least {min} nodes, graph has {n}")]
    TooFewNodes { stat: &'static str, min: usize, n: usize },
    #[error("degree assortativity needs at least one edge")]
    NoEdges,
}

pub fn density(g: &Graph) -> Result<f64, StatsError> {
    let n = g.node_count();
    if n < 2 {
        return Err(StatsError::TooFewNodes {
            stat: "density",
            min: 2,
            n,
        });
    }
    Ok(2.0 * g.edge_count() as f64 / (n * (n - 1)) as f64)
}

/// `2m / n`; zero for the graph without nodes.
pub fn average_degree(g: &Graph) -> f64 {
    let n = g.node_count();
    if n == 0 {
        return 0.0;
    }
    2.0 * g.edge_count() as f64 / n as f64
}

/// Denominator used to normalise degree centralisation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CentralizationNorm {
    /// `(n - 1)(n - 2)`, the maximum attained by a star. Star graphs score 1.
    #[default]
    Freeman,
    /// `n (n - 1)`, the bound obtained when self-loops are admissible
    /// (igraph's default for `centr_degree`).
    WithLoops,
}

/// Freeman degree centralisation `Σ (d_max - d_v)` divided by `norm`'s bound.
pub fn degree_centralization(g: &Graph, norm: CentralizationNorm) -> Result<f64, StatsError> {
    let n = g.node_count();
    if n < 3 {
        return Err(StatsError::TooFewNodes {
            stat: "degree centralisation",
            min: 3,
            n,
        });
    }
    let degrees: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let max = degrees.iter().copied().max().unwrap_or(0);
    let spread: usize = degrees.iter().map(|d| max - d).sum();
    let bound = match norm {
        CentralizationNorm::Freeman => (n - 1) * (n - 2),
        CentralizationNorm::WithLoops => n * (n - 1),
    };
    Ok(spread as f64 / bound as f64)
}

/// Degree assortativity, or the reason it is not a number.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Assortativity {
    Value(f64),
    /// Every edge end has the same degree, so the correlation is 0/0.
    Undefined,
}

impl Assortativity {
    pub fn value(self) -> Option<f64> {
        match self {
            Assortativity::Value(v) => Some(v),
            Assortativity::Undefined => None,
        }
    }
}

impl Serialize for Assortativity {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Assortativity::Value(v) => s.serialize_f64(*v),
            Assortativity::Undefined => s.serialize_none(),
        }
    }
}

/// Pearson correlation of endpoint degrees over both orientations of every edge.
pub fn degree_assortativity(g: &Graph) -> Result<Assortativity, StatsError> {
    let m = g.edge_count();
    if m == 0 {
        return Err(StatsError::NoEdges);
    }
    // With both orientations the two marginals coincide, so
    // r = (E[d_u d_v] - E[d]^2) / (E[d^2] - E[d]^2) over the 2m edge ends.
    let ends = 2.0 * m as f64;
    let (mut sum, mut sum_sq, mut cross) = (0.0, 0.0, 0.0);
    for (i, j) in g.edges() {
        let (di, dj) = (g.degree(i) as f64, g.degree(j) as f64);
        sum += di + dj;
        sum_sq += di * di + dj * dj;
        cross += 2.0 * di * dj;
    }
    let mean = sum / ends;
    let var = sum_sq / ends - mean * mean;
    if var.abs() <= 1e-12 * (1.0 + mean * mean) {
        return Ok(Assortativity::Undefined);
    }
    let r = (cross / ends - mean * mean) / var;
    Ok(Assortativity::Value(r.clamp(-1.0, 1.0)))
}

/// One row of network descriptives.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NetworkSummary {
    #[serde(rename = "Network")]
    pub network: String,
    #[serde(rename = "Size")]
    pub size: usize,
    #[serde(rename = "Edges")]
    pub edges: usize,
    #[serde(rename = "Density")]
    pub density: Option<f64>,
    #[serde(rename = "Average Degree")]
    pub average_degree: f64,
    #[serde(rename = "Degree Centralisation")]
    pub degree_centralization: Option<f64>,
    #[serde(rename = "Degree Assortativity")]
    pub degree_assortativity: Option<Assortativity>,
}

pub const SUMMARY_HEADER: [&str; 7] = [
    "Network",
    "Size",
    "Edges",
    "Density",
    "Average Degree",
    "Degree Centralisation",
    "Degree Assortativity",
];

/// Value reported for statistics that are undefined or inapplicable.
pub const NA: &str = "NA";

impl NetworkSummary {
    /// Statistics that are not defined for `g` (too small, no edges, zero
    /// degree variance) are recorded as `None` / [`Assortativity::Undefined`].
    pub fn of(name: impl Into<String>, g: &Graph, norm: CentralizationNorm) -> Self {
        Self {
            network: name.into(),
            size: g.node_count(),
            edges: g.edge_count(),
            density: density(g).ok(),
            average_degree: average_degree(g),
            degree_centralization: degree_centralization(g, norm).ok(),
            degree_assortativity: degree_assortativity(g).ok(),
        }
    }

    /// CSV cells rounded to four decimals; undefined values as `NA`.
    pub fn csv_row(&self) -> Vec<String> {
        let f = |v: Option<f64>| v.map_or_else(|| NA.to_string(), |v| format!("{v:.4}"));
        vec![
            self.network.clone(),
            self.size.to_string(),
            self.edges.to_string(),
            f(self.density),
            f(Some(self.average_degree)),
            f(self.degree_centralization),
            f(self.degree_assortativity.and_then(Assortativity::value)),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn star(n: usize) -> Graph {
        Graph::from_edges(n, (1..n).map(|i| (0, i))).unwrap()
    }

    fn complete(n: usize) -> Graph {
        Graph::from_edges(n, (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)))).unwrap()
    }

    /// A graph with `n` nodes and exactly `m` edges, filled row by row.
    fn sized(n: usize, m: usize) -> Graph {
        let pairs = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).take(m);
        Graph::from_edges(n, pairs).unwrap()
    }

    #[test]
    fn density_examples() {
        assert!((density(&sized(15, 16)).unwrap() - 0.1524).abs() < 1e-4);
        assert_eq!(density(&complete(4)).unwrap(), 1.0);
        assert!((density(&sized(39, 151)).unwrap() - 0.2038).abs() < 1e-4);
        assert!(matches!(density(&Graph::empty(1)), Err(StatsError::TooFewNodes { .. })));
    }

    #[test]
    fn average_degree_examples() {
        assert_eq!(average_degree(&sized(32, 100)), 6.25);
        assert!((average_degree(&sized(17, 20)) - 2.3529).abs() < 1e-4);
        assert_eq!(average_degree(&Graph::empty(0)), 0.0);
        assert_eq!(average_degree(&Graph::empty(4)), 0.0);
    }

    #[test]
    fn centralization_examples() {
        assert_eq!(
            degree_centralization(&star(5), CentralizationNorm::Freeman).unwrap(),
            1.0
        );
        assert_eq!(
            degree_centralization(&complete(6), CentralizationNorm::Freeman).unwrap(),
            0.0
        );
        assert!(degree_centralization(&Graph::empty(2), CentralizationNorm::Freeman).is_err());
        // star on 5 nodes: spread 12 over n(n-1) = 20
        assert_eq!(
            degree_centralization(&star(5), CentralizationNorm::WithLoops).unwrap(),
            0.6
        );
    }

    #[test]
    fn with_loops_norm_matches_published_scale() {
        // n = 15, m = 16 with a hub of degree 6: spread 15*6 - 32 = 58, 58 / 210
        let mut edges: Vec<(usize, usize)> = (1..7).map(|i| (0, i)).collect();
        edges.extend((7..14).map(|i| (i, i + 1)));
        edges.extend([(1, 2), (3, 4), (5, 6)]);
        let g = Graph::from_edges(15, edges).unwrap();
        assert_eq!(g.edge_count(), 16);
        let c = degree_centralization(&g, CentralizationNorm::WithLoops).unwrap();
        assert!((c - 0.2762).abs() < 1e-4, "{c}");
    }

    #[test]
    fn assortativity_examples() {
        for n in 3..8 {
            assert_eq!(degree_assortativity(&star(n)).unwrap(), Assortativity::Value(-1.0));
        }
        assert_eq!(degree_assortativity(&complete(5)).unwrap(), Assortativity::Undefined);
        let cycle = Graph::from_edges(6, (0..6).map(|i| (i, (i + 1) % 6))).unwrap();
        assert_eq!(degree_assortativity(&cycle).unwrap(), Assortativity::Undefined);
        assert_eq!(degree_assortativity(&Graph::empty(3)), Err(StatsError::NoEdges));
    }

    #[test]
    fn summary_csv_uses_na_sentinel() {
        let s = NetworkSummary::of("K4", &complete(4), CentralizationNorm::Freeman);
        assert_eq!(s.csv_row(), ["K4", "4", "6", "1.0000", "3.0000", "0.0000", "NA"]);
        let tiny = NetworkSummary::of(
            "pair",
            &Graph::from_edges(2, [(0, 1)]).unwrap(),
            CentralizationNorm::Freeman,
        );
        assert_eq!(tiny.degree_centralization, None);
    }

    fn arb_graph() -> impl Strategy<Value = Graph> {
        (3usize..14).prop_flat_map(|n| {
            proptest::collection::vec((0..n, 0..n), 1..40)
                .prop_map(move |pairs| Graph::from_edges(n, pairs.into_iter().filter(|(i, j)| i != j)).unwrap())
        })
    }

    // Direct Pearson correlation over the explicit 2m orientation list.
    fn pearson_oracle(g: &Graph) -> Option<f64> {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (i, j) in g.edges() {
            let (di, dj) = (g.degree(i) as f64, g.degree(j) as f64);
            xs.extend([di, dj]);
            ys.extend([dj, di]);
        }
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
        (sxx > 1e-12 && syy > 1e-12).then(|| sxy / (sxx * syy).sqrt())
    }

    proptest! {
        #[test]
        fn density_average_degree_coupling(g in arb_graph()) {
            let n = g.node_count() as f64;
            let d = density(&g).unwrap();
            prop_assert!((d * (n - 1.0) - average_degree(&g)).abs() < 1e-12);
        }

        #[test]
        fn assortativity_matches_pearson(g in arb_graph()) {
            prop_assume!(g.edge_count() > 0);
            let ours = degree_assortativity(&g).unwrap().value();
            let oracle = pearson_oracle(&g);
            match (ours, oracle) {
                (Some(a), Some(b)) => {
                    prop_assert!((a - b).abs() < 1e-9);
                    prop_assert!((-1.0..=1.0).contains(&a));
                }
                (None, None) => {}
                other => prop_assert!(false, "mismatch {:?}", other),
            }
        }

        #[test]
        fn centralization_matches_degree_sequence(g in arb_graph()) {
            let n = g.node_count();
            let degs: Vec<f64> = (0..n).map(|v| g.degree(v) as f64).collect();
            let max = degs.iter().cloned().fold(0.0, f64::max);
            let oracle = degs.iter().map(|d| max - d).sum::<f64>() / ((n - 1) * (n - 2)) as f64;
            let c = degree_centralization(&g, CentralizationNorm::Freeman).unwrap();
            prop_assert!((c - oracle).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&c));
            let connected = g.connected_components().len() == 1;
            let is_star = g.edge_count() == n - 1 && degs.iter().any(|&d| d as usize == n - 1);
            if connected {
                prop_assert_eq!(c == 1.0, is_star);
            }
        }
    }
}
