use intrafirm_core::ingest::{DyadAttribute, NodeAttribute};
use intrafirm_core::Graph;

use crate::terms::{Covariates, Term, TermRegistry, TermSpec};
use crate::ModelError;

/// An ordered list of bound terms over a fixed node set.
#[derive(Debug)]
pub struct ErgmModel {
    n: usize,
    specs: Vec<TermSpec>,
    labels: Vec<String>,
    terms: Vec<Box<dyn Term>>,
}

impl ErgmModel {
    pub fn new(n: usize, specs: Vec<TermSpec>, covariates: &Covariates) -> Result<Self, ModelError> {
        Self::with_registry(n, specs, covariates, &TermRegistry::builtin())
    }

    pub fn with_registry(
        n: usize,
        specs: Vec<TermSpec>,
        covariates: &Covariates,
        registry: &TermRegistry,
    ) -> Result<Self, ModelError> {
        if specs.is_empty() {
            return Err(ModelError::NoTerms);
        }
        if covariates.node_count() != n {
            return Err(ModelError::CovariateShape {
                name: "<covariates>".into(),
                expected: n,
                got: covariates.node_count(),
            });
        }
        let mut labels = Vec::with_capacity(specs.len());
        let mut terms = Vec::with_capacity(specs.len());
        for spec in &specs {
            let label = spec.display_label();
            if labels.contains(&label) {
                return Err(ModelError::DuplicateLabel(label));
            }
            terms.push(registry.build(spec, covariates)?);
            labels.push(label);
        }
        Ok(Self {
            n,
            specs,
            labels,
            terms,
        })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn dyad_count(&self) -> usize {
        self.n * self.n.saturating_sub(1) / 2
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn specs(&self) -> &[TermSpec] {
        &self.specs
    }

    pub fn terms(&self) -> &[Box<dyn Term>] {
        &self.terms
    }

    pub fn dyad_independent(&self) -> bool {
        self.terms.iter().all(|t| t.dyad_independent())
    }

    pub fn check_graph(&self, g: &Graph) -> Result<(), ModelError> {
        if g.is_directed() {
            return Err(ModelError::Directed);
        }
        if g.node_count() != self.n {
            return Err(ModelError::GraphSize {
                expected: self.n,
                got: g.node_count(),
            });
        }
        Ok(())
    }

    /// Full statistic vector `z(g)`.
    pub fn statistics(&self, g: &Graph) -> Result<Vec<f64>, ModelError> {
        self.check_graph(g)?;
        Ok(self.terms.iter().map(|t| t.compute(g)).collect())
    }

    /// `z(g + ij) - z(g - ij)`.
    pub fn change_statistics(&self, g: &Graph, i: usize, j: usize) -> Result<Vec<f64>, ModelError> {
        self.check_graph(g)?;
        if i == j || i >= self.n || j >= self.n {
            return Err(ModelError::InvalidDyad(i, j));
        }
        let mut out = vec![0.0; self.len()];
        self.change_into(g, i, j, &mut out);
        Ok(out)
    }

    /// Unchecked variant for hot loops; `out.len()` must equal `self.len()`.
    pub(crate) fn change_into(&self, g: &Graph, i: usize, j: usize, out: &mut [f64]) {
        for (o, t) in out.iter_mut().zip(&self.terms) {
            *o = t.change(g, i, j);
        }
    }
}

fn attribute_label(attr: NodeAttribute) -> &'static str {
    match attr {
        NodeAttribute::Gdp => "GDP",
        NodeAttribute::GdpPerCapita => "GDP per capita",
        NodeAttribute::RuleOfLaw => "Rule of Law",
        NodeAttribute::ContractDays => "Contract Enforcement",
        NodeAttribute::FirmCount => "Investment",
    }
}

fn dyad_label(attr: DyadAttribute) -> &'static str {
    match attr {
        DyadAttribute::Distance => "Distance",
        DyadAttribute::CommonLanguage => "Common Language",
        DyadAttribute::SharedBorder => "Shared Border",
    }
}

/// The 17-term specification: structural terms, an activity and a
/// difference term per country attribute, and the three dyadic covariates.
pub fn standard_terms(decay: f64) -> Vec<TermSpec> {
    let mut specs = vec![
        TermSpec::new("edges").label("Edges"),
        TermSpec::new("gwdegree").decay(decay).label("Degree"),
        TermSpec::new("gwesp").decay(decay).label("GWESP"),
        TermSpec::new("gwdsp").decay(decay).label("GWDSP"),
    ];
    for attr in NodeAttribute::ALL {
        let name = attr.name();
        let label = attribute_label(attr);
        specs.push(
            TermSpec::new("activity")
                .covariate(name)
                .label(&format!("{label} Activity")),
        );
        specs.push(
            TermSpec::new("difference")
                .covariate(name)
                .label(&format!("{label} Difference")),
        );
    }
    for attr in DyadAttribute::ALL {
        specs.push(TermSpec::new("edgecov").covariate(attr.name()).label(dyad_label(attr)));
    }
    specs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_model_has_seventeen_unique_terms() {
        let specs = standard_terms(0.5);
        assert_eq!(specs.len(), 17);
        let mut cov = Covariates::new(4);
        for a in NodeAttribute::ALL {
            cov.insert_node(a.name(), vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        }
        for d in DyadAttribute::ALL {
            cov.insert_dyad_with(d.name(), |i, j| (i + j) as f64).unwrap();
        }
        let m = ErgmModel::new(4, specs, &cov).unwrap();
        assert_eq!(m.labels()[0], "Edges");
        assert_eq!(m.labels()[12], "Investment Activity");
        assert_eq!(m.labels()[16], "Shared Border");
        assert!(!m.dyad_independent());
        let empty = Graph::empty(4);
        assert!(m.statistics(&empty).unwrap().iter().all(|&z| z == 0.0));
        assert!(matches!(
            m.change_statistics(&empty, 1, 1),
            Err(ModelError::InvalidDyad(1, 1))
        ));
        assert!(matches!(
            m.statistics(&Graph::empty(3)),
            Err(ModelError::GraphSize { .. })
        ));
    }

    #[test]
    fn duplicate_labels_are_rejected() {
        let cov = Covariates::new(3);
        let specs = vec![TermSpec::new("edges"), TermSpec::new("edges")];
        assert!(matches!(
            ErgmModel::new(3, specs, &cov),
            Err(ModelError::DuplicateLabel(_))
        ));
    }
}
