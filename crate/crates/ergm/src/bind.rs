//! Aligns country attributes and dyadic covariates with a model graph.

use std::collections::BTreeSet;
use std::str::FromStr;

use intrafirm_core::ingest::{CountryAttributes, DyadAttribute, DyadCovariates, NodeAttribute};
use intrafirm_core::Graph;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::terms::{Covariates, TermSpec};
use crate::ModelError;

#[derive(Debug, Error, PartialEq)]
pub enum BindError {
    #[error("country `{country}` has no value for `{attribute}`")]
    MissingAttribute { country: String, attribute: String },
    #[error("no dyad covariate row for `{0}`-`{1}`")]
    MissingDyad(String, String),
    #[error("cannot take the log of {attribute} = {value} for `{country}`")]
    NonPositiveForLog {
        country: String,
        attribute: String,
        value: f64,
    },
    #[error("`{0}` is neither a country attribute nor a dyad covariate")]
    UnknownCovariate(String),
    #[error("every country was dropped for missing attributes")]
    NothingLeft,
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BindOptions {
    /// Natural log of GDP and GDP per capita.
    pub log_gdp: bool,
    /// Drop countries with missing attribute values instead of failing.
    pub drop_missing: bool,
    /// Segment used for firm counts; `None` counts firms in any segment.
    pub segment: Option<String>,
}

#[derive(Clone, Debug)]
pub struct BoundNetwork {
    pub graph: Graph,
    pub covariates: Covariates,
    pub dropped: Vec<String>,
}

fn node_value(
    attrs: &CountryAttributes,
    country: &str,
    attr: NodeAttribute,
    opts: &BindOptions,
) -> Result<Option<f64>, BindError> {
    let Some(v) = attrs.value(country, attr, opts.segment.as_deref()) else {
        return Ok(None);
    };
    let logged = opts.log_gdp && matches!(attr, NodeAttribute::Gdp | NodeAttribute::GdpPerCapita);
    if !logged {
        return Ok(Some(v));
    }
    if v <= 0.0 {
        return Err(BindError::NonPositiveForLog {
            country: country.to_string(),
            attribute: attr.name().to_string(),
            value: v,
        });
    }
    Ok(Some(v.ln()))
}

/// Binds the covariates referenced by `specs` for the nodes of `g`, whose
/// ids are country codes. Countries lacking a needed attribute are dropped
/// (with `drop_missing`) or rejected; a missing dyad row is always an error.
pub fn bind_covariates(
    g: &Graph,
    specs: &[TermSpec],
    attrs: &CountryAttributes,
    dyads: &DyadCovariates,
    opts: &BindOptions,
) -> Result<BoundNetwork, BindError> {
    let mut node_attrs = BTreeSet::new();
    let mut dyad_attrs = BTreeSet::new();
    for spec in specs {
        let Some(name) = spec.covariate.as_deref() else {
            continue;
        };
        if let Ok(a) = NodeAttribute::from_str(name) {
            node_attrs.insert(a);
        } else if let Ok(d) = DyadAttribute::from_str(name) {
            dyad_attrs.insert(d);
        } else {
            return Err(BindError::UnknownCovariate(name.to_string()));
        }
    }

    let mut keep = Vec::new();
    let mut dropped = Vec::new();
    for i in 0..g.node_count() {
        let country = g.id(i);
        let mut missing = None;
        for &a in &node_attrs {
            if node_value(attrs, country, a, opts)?.is_none() {
                missing = Some(a);
                break;
            }
        }
        match missing {
            None => keep.push(i),
            Some(_) if opts.drop_missing => dropped.push(country.to_string()),
            Some(a) => {
                return Err(BindError::MissingAttribute {
                    country: country.to_string(),
                    attribute: a.name().to_string(),
                })
            }
        }
    }
    if keep.is_empty() && g.node_count() > 0 {
        return Err(BindError::NothingLeft);
    }
    let graph = if dropped.is_empty() {
        g.clone()
    } else {
        g.induced(&keep)
    };

    let n = graph.node_count();
    let mut cov = Covariates::new(n);
    for &a in &node_attrs {
        let values = (0..n)
            .map(|i| node_value(attrs, graph.id(i), a, opts).map(|v| v.expect("checked above")))
            .collect::<Result<Vec<_>, _>>()?;
        cov.insert_node(a.name(), values)?;
    }
    for &d in &dyad_attrs {
        for i in 0..n {
            for j in i + 1..n {
                if dyads.get(graph.id(i), graph.id(j)).is_none() {
                    return Err(BindError::MissingDyad(graph.id(i).into(), graph.id(j).into()));
                }
            }
        }
        cov.insert_dyad_with(d.name(), |i, j| {
            dyads.value(graph.id(i), graph.id(j), d).expect("checked above")
        })?;
    }
    Ok(BoundNetwork {
        graph,
        covariates: cov,
        dropped,
    })
}
