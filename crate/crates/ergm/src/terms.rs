//! Model terms and the registry that builds them by name.
//!
//! Every term maps an undirected graph to a real statistic and reports the
//! change produced by adding one dyad. `change(g, i, j)` is always
//! `z(g + ij) - z(g - ij)` regardless of whether `ij` is present in `g`.

use std::collections::BTreeMap;
use std::fmt;

use intrafirm_core::Graph;
use serde::{Deserialize, Serialize};

use crate::tally::Tallies;
use crate::ModelError;

pub const DEFAULT_DECAY: f64 = 0.5;

pub trait Term: Send + Sync + fmt::Debug {
    /// Registry name of the term family.
    fn kind(&self) -> &'static str;
    fn compute(&self, g: &Graph) -> f64;
    fn change(&self, g: &Graph, i: usize, j: usize) -> f64;
    /// True when `change` does not depend on the rest of the graph.
    fn dyad_independent(&self) -> bool {
        false
    }
}

/// Declarative description of one model term.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermSpec {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay: Option<f64>,
    /// Node attribute (activity, difference) or dyadic matrix (edgecov).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub covariate: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl TermSpec {
    pub fn new(kind: &str) -> Self {
        Self {
            kind: kind.to_string(),
            decay: None,
            covariate: None,
            label: None,
        }
    }

    pub fn decay(mut self, tau: f64) -> Self {
        self.decay = Some(tau);
        self
    }

    pub fn covariate(mut self, name: &str) -> Self {
        self.covariate = Some(name.to_string());
        self
    }

    pub fn label(mut self, label: &str) -> Self {
        self.label = Some(label.to_string());
        self
    }

    /// The explicit label, or one derived from kind, covariate and decay.
    pub fn display_label(&self) -> String {
        if let Some(l) = &self.label {
            return l.clone();
        }
        match (&self.covariate, self.decay) {
            (Some(c), _) => format!("{}.{}", self.kind, c),
            (None, Some(t)) => format!("{}.{}", self.kind, t),
            (None, None) => self.kind.clone(),
        }
    }
}

/// Named covariates over the nodes `0..n` of a model graph.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Covariates {
    n: usize,
    node: BTreeMap<String, Vec<f64>>,
    /// row-major `n x n`, symmetric
    dyad: BTreeMap<String, Vec<f64>>,
}

impl Covariates {
    pub fn new(n: usize) -> Self {
        Self { n, ..Self::default() }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn insert_node(&mut self, name: &str, values: Vec<f64>) -> Result<(), ModelError> {
        if values.len() != self.n {
            return Err(ModelError::CovariateShape {
                name: name.to_string(),
                expected: self.n,
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(ModelError::NonFiniteCovariate {
                name: name.to_string(),
                index: i,
            });
        }
        self.node.insert(name.to_string(), values);
        Ok(())
    }

    /// Stores `f(i, j)` for every `i < j`, mirrored; the diagonal is zero.
    pub fn insert_dyad_with(&mut self, name: &str, mut f: impl FnMut(usize, usize) -> f64) -> Result<(), ModelError> {
        let n = self.n;
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let v = f(i, j);
                if !v.is_finite() {
                    return Err(ModelError::NonFiniteCovariate {
                        name: name.to_string(),
                        index: i * n + j,
                    });
                }
                m[i * n + j] = v;
                m[j * n + i] = v;
            }
        }
        self.dyad.insert(name.to_string(), m);
        Ok(())
    }

    pub fn node(&self, name: &str) -> Option<&[f64]> {
        self.node.get(name).map(Vec::as_slice)
    }

    pub fn dyad(&self, name: &str) -> Option<&[f64]> {
        self.dyad.get(name).map(Vec::as_slice)
    }

    pub fn node_names(&self) -> impl Iterator<Item = &str> {
        self.node.keys().map(String::as_str)
    }

    pub fn dyad_names(&self) -> impl Iterator<Item = &str> {
        self.dyad.keys().map(String::as_str)
    }
}

/// `w(k) = e^tau (1 - (1 - e^-tau)^k)`; `w(k+1) - w(k) = (1 - e^-tau)^k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeometricWeight {
    tau: f64,
    ratio: f64,
}

impl GeometricWeight {
    pub fn new(tau: f64) -> Self {
        Self {
            tau,
            ratio: 1.0 - (-tau).exp(),
        }
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn weight(&self, k: usize) -> f64 {
        self.tau.exp() * (1.0 - self.ratio.powi(k as i32))
    }

    /// `w(k + 1) - w(k)`
    pub fn increment(&self, k: usize) -> f64 {
        self.ratio.powi(k as i32)
    }

    pub fn weighted_sum(&self, histogram: &[u64]) -> f64 {
        histogram
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| self.weight(k) * c as f64)
            .sum()
    }
}

#[derive(Debug)]
pub struct Edges;

impl Term for Edges {
    fn kind(&self) -> &'static str {
        "edges"
    }
    fn compute(&self, g: &Graph) -> f64 {
        g.edge_count() as f64
    }
    fn change(&self, _: &Graph, _: usize, _: usize) -> f64 {
        1.0
    }
    fn dyad_independent(&self) -> bool {
        true
    }
}

#[derive(Debug)]
pub struct GwDegree(pub GeometricWeight);

impl Term for GwDegree {
    fn kind(&self) -> &'static str {
        "gwdegree"
    }
    fn compute(&self, g: &Graph) -> f64 {
        self.0.weighted_sum(&Tallies::degrees(g))
    }
    fn change(&self, g: &Graph, i: usize, j: usize) -> f64 {
        let present = usize::from(g.has_edge(i, j));
        self.0.increment(g.degree(i) - present) + self.0.increment(g.degree(j) - present)
    }
}

#[derive(Debug)]
pub struct Gwesp(pub GeometricWeight);

impl Term for Gwesp {
    fn kind(&self) -> &'static str {
        "gwesp"
    }
    fn compute(&self, g: &Graph) -> f64 {
        self.0.weighted_sum(&Tallies::edgewise_shared_partners(g))
    }
    fn change(&self, g: &Graph, i: usize, j: usize) -> f64 {
        // partner counts below are taken in g - ij, where j is not a
        // partner of (i, k) and i is not a partner of (j, k)
        let present = usize::from(g.has_edge(i, j));
        let mut delta = self.0.weight(g.shared_partners(i, j));
        for k in g.shared_partner_iter(i, j) {
            delta += self.0.increment(g.shared_partners(i, k) - present);
            delta += self.0.increment(g.shared_partners(j, k) - present);
        }
        delta
    }
}

#[derive(Debug)]
pub struct Gwdsp(pub GeometricWeight);

impl Term for Gwdsp {
    fn kind(&self) -> &'static str {
        "gwdsp"
    }
    fn compute(&self, g: &Graph) -> f64 {
        self.0.weighted_sum(&Tallies::dyadwise_shared_partners(g))
    }
    fn change(&self, g: &Graph, i: usize, j: usize) -> f64 {
        let present = usize::from(g.has_edge(i, j));
        let mut delta = 0.0;
        for k in g.neighbors(j).filter(|&k| k != i) {
            delta += self.0.increment(g.shared_partners(i, k) - present);
        }
        for k in g.neighbors(i).filter(|&k| k != j) {
            delta += self.0.increment(g.shared_partners(j, k) - present);
        }
        delta
    }
}

#[derive(Debug)]
pub struct Activity(pub Vec<f64>);

impl Term for Activity {
    fn kind(&self) -> &'static str {
        "activity"
    }
    fn compute(&self, g: &Graph) -> f64 {
        g.edges().map(|(i, j)| self.0[i] + self.0[j]).sum()
    }
    fn change(&self, _: &Graph, i: usize, j: usize) -> f64 {
        self.0[i] + self.0[j]
    }
    fn dyad_independent(&self) -> bool {
        true
    }
}

#[derive(Debug)]
pub struct Difference(pub Vec<f64>);

impl Term for Difference {
    fn kind(&self) -> &'static str {
        "difference"
    }
    fn compute(&self, g: &Graph) -> f64 {
        g.edges().map(|(i, j)| (self.0[i] - self.0[j]).abs()).sum()
    }
    fn change(&self, _: &Graph, i: usize, j: usize) -> f64 {
        (self.0[i] - self.0[j]).abs()
    }
    fn dyad_independent(&self) -> bool {
        true
    }
}

#[derive(Debug)]
pub struct EdgeCov {
    n: usize,
    weights: Vec<f64>,
}

impl Term for EdgeCov {
    fn kind(&self) -> &'static str {
        "edgecov"
    }
    fn compute(&self, g: &Graph) -> f64 {
        g.edges().map(|(i, j)| self.weights[i * self.n + j]).sum()
    }
    fn change(&self, _: &Graph, i: usize, j: usize) -> f64 {
        self.weights[i * self.n + j]
    }
    fn dyad_independent(&self) -> bool {
        true
    }
}

pub type TermFactory = fn(&TermSpec, &Covariates) -> Result<Box<dyn Term>, ModelError>;

struct Entry {
    factory: TermFactory,
    geometric: bool,
}

/// Term families available to model specifications, keyed by kind name.
pub struct TermRegistry {
    entries: BTreeMap<String, Entry>,
}

impl fmt::Debug for TermRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.entries.keys()).finish()
    }
}

impl Default for TermRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

fn no_covariate(spec: &TermSpec) -> Result<(), ModelError> {
    match &spec.covariate {
        Some(_) => Err(ModelError::UnexpectedCovariate(spec.kind.clone())),
        None => Ok(()),
    }
}

fn geometric(spec: &TermSpec) -> Result<GeometricWeight, ModelError> {
    no_covariate(spec)?;
    let tau = spec.decay.unwrap_or(DEFAULT_DECAY);
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(ModelError::InvalidDecay(tau));
    }
    Ok(GeometricWeight::new(tau))
}

fn node_covariate(spec: &TermSpec, cov: &Covariates) -> Result<Vec<f64>, ModelError> {
    let name = spec
        .covariate
        .as_deref()
        .ok_or_else(|| ModelError::MissingCovariateName(spec.kind.clone()))?;
    cov.node(name)
        .map(<[f64]>::to_vec)
        .ok_or_else(|| ModelError::UnknownCovariate(name.to_string()))
}

impl TermRegistry {
    pub fn empty() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register("edges", false, |spec, _| {
            no_covariate(spec)?;
            Ok(Box::new(Edges))
        });
        r.register("gwdegree", true, |spec, _| Ok(Box::new(GwDegree(geometric(spec)?))));
        r.register("gwesp", true, |spec, _| Ok(Box::new(Gwesp(geometric(spec)?))));
        r.register("gwdsp", true, |spec, _| Ok(Box::new(Gwdsp(geometric(spec)?))));
        r.register("activity", false, |spec, cov| {
            Ok(Box::new(Activity(node_covariate(spec, cov)?)))
        });
        r.register("difference", false, |spec, cov| {
            Ok(Box::new(Difference(node_covariate(spec, cov)?)))
        });
        r.register("edgecov", false, |spec, cov| {
            let name = spec
                .covariate
                .as_deref()
                .ok_or_else(|| ModelError::MissingCovariateName(spec.kind.clone()))?;
            let weights = cov
                .dyad(name)
                .ok_or_else(|| ModelError::UnknownCovariate(name.to_string()))?
                .to_vec();
            Ok(Box::new(EdgeCov {
                n: cov.node_count(),
                weights,
            }))
        });
        r.alias("gw_degree", "gwdegree");
        r.alias("edge_covariate", "edgecov");
        r
    }

    /// Adds or replaces a term family. `geometric` families accept a decay.
    pub fn register(&mut self, kind: &str, geometric: bool, factory: TermFactory) {
        self.entries.insert(kind.to_string(), Entry { factory, geometric });
    }

    fn alias(&mut self, alias: &str, target: &str) {
        let e = &self.entries[target];
        let entry = Entry {
            factory: e.factory,
            geometric: e.geometric,
        };
        self.entries.insert(alias.to_string(), entry);
    }

    pub fn kinds(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn contains(&self, kind: &str) -> bool {
        self.entries.contains_key(kind)
    }

    /// Whether `kind` takes a decay; `None` for unknown kinds.
    pub fn is_geometric(&self, kind: &str) -> Option<bool> {
        self.entries.get(kind).map(|e| e.geometric)
    }

    pub fn build(&self, spec: &TermSpec, cov: &Covariates) -> Result<Box<dyn Term>, ModelError> {
        let entry = self
            .entries
            .get(&spec.kind)
            .ok_or_else(|| ModelError::UnknownTerm(spec.kind.clone()))?;
        if spec.decay.is_some() && !entry.geometric {
            return Err(ModelError::UnexpectedDecay(spec.kind.clone()));
        }
        (entry.factory)(spec, cov)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Graph {
        Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    #[test]
    fn triangle_anchors() {
        for tau in [0.1, 0.5, 1.5] {
            let w = GeometricWeight::new(tau);
            assert!((Gwesp(w).compute(&triangle()) - 3.0).abs() < 1e-12);
            assert!((Gwdsp(w).compute(&triangle()) - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn path_closure_adds_three_to_gwesp() {
        let g = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        for tau in [0.1, 0.5, 1.5] {
            let d = Gwesp(GeometricWeight::new(tau)).change(&g, 0, 2);
            assert!((d - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn covariate_terms_on_single_edge() {
        let g = Graph::from_edges(2, [(0, 1)]).unwrap();
        assert_eq!(Activity(vec![2.0, 3.0]).compute(&g), 5.0);
        assert_eq!(Difference(vec![2.0, 3.0]).compute(&g), 1.0);
    }

    #[test]
    fn star_gwdegree_matches_formula() {
        let g = Graph::from_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        let tau: f64 = 0.5;
        let r = 1.0 - (-tau).exp();
        let expected = tau.exp() * (3.0 * (1.0 - r) + (1.0 - r.powi(3)));
        let got = GwDegree(GeometricWeight::new(tau)).compute(&g);
        assert!((got - expected).abs() < 1e-12);
    }

    #[test]
    fn registry_validates_specs() {
        let r = TermRegistry::builtin();
        let mut cov = Covariates::new(3);
        cov.insert_node("gdp", vec![1.0, 2.0, 3.0]).unwrap();
        assert!(r.build(&TermSpec::new("gwesp"), &cov).is_ok());
        assert!(r.build(&TermSpec::new("gw_degree").decay(1.0), &cov).is_ok());
        assert!(matches!(
            r.build(&TermSpec::new("edges").decay(0.5), &cov),
            Err(ModelError::UnexpectedDecay(_))
        ));
        assert!(matches!(
            r.build(&TermSpec::new("gwesp").decay(-0.1), &cov),
            Err(ModelError::InvalidDecay(_))
        ));
        assert!(matches!(
            r.build(&TermSpec::new("activity").covariate("rule_of_law"), &cov),
            Err(ModelError::UnknownCovariate(_))
        ));
        assert!(matches!(
            r.build(&TermSpec::new("triangles"), &cov),
            Err(ModelError::UnknownTerm(_))
        ));
        assert!(matches!(
            cov.insert_node("x", vec![1.0]),
            Err(ModelError::CovariateShape { .. })
        ));
    }
}
