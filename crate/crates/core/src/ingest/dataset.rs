use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::SegmentConfig;
use crate::graph::{BipartiteGraph, Graph, NodeSet};

/// Problem with a single input row.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum RowError {
    #[error("unknown country `{0}`")]
    UnknownCountry(String),
    #[error("unknown firm `{0}`")]
    UnknownFirm(String),
    #[error("unknown segment `{0}`")]
    UnknownSegment(String),
    #[error("product code `{0}` is not in any configured segment")]
    UnknownProductCode(String),
    #[error("trade value must be positive, got {0}")]
    NonPositiveValue(f64),
    #[error("self-loop on `{0}`")]
    SelfLoop(String),
    #[error("duplicate row")]
    Duplicate,
    #[error("conflicting values for `{0}`")]
    Inconsistent(String),
    #[error("invalid `{field}`: {message}")]
    Invalid { field: &'static str, message: String },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FirmSize {
    pub operating_revenue: Option<f64>,
    pub employees: Option<f64>,
}

/// Directed country trade layer with per-flow product values.
#[derive(Clone, Debug, PartialEq)]
pub struct TradeLayer {
    graph: Graph,
    flows: BTreeMap<(usize, usize), BTreeMap<String, f64>>,
}

impl TradeLayer {
    /// Directed reporter -> partner graph; an edge exists if any product flows.
    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn flow(&self, from: usize, to: usize, code: &str) -> Option<f64> {
        self.flows.get(&(from, to)).and_then(|m| m.get(code)).copied()
    }

    pub fn codes(&self, from: usize, to: usize) -> impl Iterator<Item = &str> {
        self.flows
            .get(&(from, to))
            .into_iter()
            .flat_map(|m| m.keys().map(String::as_str))
    }

    /// `(reporter, partner, code, value)` in sorted order.
    pub fn flows(&self) -> impl Iterator<Item = (usize, usize, &str, f64)> {
        self.flows
            .iter()
            .flat_map(|(&(a, b), m)| m.iter().map(move |(c, &v)| (a, b, c.as_str(), v)))
    }

    pub fn flow_count(&self) -> usize {
        self.flows.values().map(BTreeMap::len).sum()
    }
}

/// Firm ownership (micro), firm-country affiliation (meso) and country trade
/// (macro) layers over shared node sets.
#[derive(Clone, Debug, PartialEq)]
pub struct MultilevelNetwork {
    pub segments: SegmentConfig,
    pub countries: Arc<NodeSet>,
    pub firms: Arc<NodeSet>,
    pub trade: TradeLayer,
    /// parent -> child
    pub ownership: Graph,
    /// firms (left) x countries (right)
    pub affiliation: BipartiteGraph,
    /// indexed by firm
    pub firm_segments: Vec<BTreeSet<String>>,
    pub firm_size: Vec<FirmSize>,
}

impl MultilevelNetwork {
    pub fn firm_in_segment(&self, firm: usize, segment: &str) -> bool {
        self.firm_segments[firm].contains(segment)
    }

    /// Firms listed in the firm table but without any country affiliation.
    pub fn unaffiliated_firms(&self) -> Vec<&str> {
        (0..self.firms.len())
            .filter(|&f| self.affiliation.right_of(f).is_empty())
            .map(|f| self.firms.id(f))
            .collect()
    }
}

/// Country-level node attributes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CountryRecord {
    pub gdp: Option<f64>,
    pub gdp_per_capita: Option<f64>,
    pub rule_of_law: Option<f64>,
    pub contract_days: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeAttribute {
    Gdp,
    GdpPerCapita,
    RuleOfLaw,
    ContractDays,
    /// Firms of the analysed segment affiliated with the country.
    FirmCount,
}

impl NodeAttribute {
    pub const ALL: [NodeAttribute; 5] = [
        NodeAttribute::Gdp,
        NodeAttribute::GdpPerCapita,
        NodeAttribute::RuleOfLaw,
        NodeAttribute::ContractDays,
        NodeAttribute::FirmCount,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NodeAttribute::Gdp => "gdp",
            NodeAttribute::GdpPerCapita => "gdp_per_capita",
            NodeAttribute::RuleOfLaw => "rule_of_law",
            NodeAttribute::ContractDays => "contract_days",
            NodeAttribute::FirmCount => "firm_count",
        }
    }
}

impl fmt::Display for NodeAttribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for NodeAttribute {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown node attribute `{s}`"))
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CountryAttributes {
    records: BTreeMap<String, CountryRecord>,
    // segment -> country -> firms
    firm_counts: BTreeMap<String, BTreeMap<String, usize>>,
    // country -> firms in any segment
    all_firm_counts: BTreeMap<String, usize>,
}

impl CountryAttributes {
    /// Attaches firm counts derived from the affiliation layer.
    pub fn new(records: BTreeMap<String, CountryRecord>, network: &MultilevelNetwork) -> Self {
        let mut firm_counts: BTreeMap<String, BTreeMap<String, usize>> = network
            .segments
            .names()
            .map(|s| (s.to_string(), BTreeMap::new()))
            .collect();
        let mut all_firm_counts = BTreeMap::new();
        for c in 0..network.countries.len() {
            let country = network.countries.id(c).to_string();
            let firms = network.affiliation.left_of(c);
            all_firm_counts.insert(country.clone(), firms.len());
            for (segment, counts) in firm_counts.iter_mut() {
                let k = firms.iter().filter(|&&f| network.firm_in_segment(f, segment)).count();
                counts.insert(country.clone(), k);
            }
        }
        Self {
            records,
            firm_counts,
            all_firm_counts,
        }
    }

    pub fn records(&self) -> &BTreeMap<String, CountryRecord> {
        &self.records
    }

    pub fn get(&self, iso3: &str) -> Option<&CountryRecord> {
        self.records.get(iso3)
    }

    /// Firms affiliated with `iso3` in `segment`, or in any segment when `None`.
    pub fn firm_count(&self, iso3: &str, segment: Option<&str>) -> Option<usize> {
        match segment {
            Some(s) => self.firm_counts.get(s)?.get(iso3).copied(),
            None => self.all_firm_counts.get(iso3).copied(),
        }
    }

    /// Attribute value, `None` when missing in the input.
    pub fn value(&self, iso3: &str, attr: NodeAttribute, segment: Option<&str>) -> Option<f64> {
        let rec = self.records.get(iso3)?;
        match attr {
            NodeAttribute::Gdp => rec.gdp,
            NodeAttribute::GdpPerCapita => rec.gdp_per_capita,
            NodeAttribute::RuleOfLaw => rec.rule_of_law,
            NodeAttribute::ContractDays => rec.contract_days,
            NodeAttribute::FirmCount => self.firm_count(iso3, segment).map(|k| k as f64),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DyadRecord {
    pub distance_km: f64,
    pub common_language: u8,
    pub shared_border: u8,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DyadAttribute {
    Distance,
    CommonLanguage,
    SharedBorder,
}

impl DyadAttribute {
    pub const ALL: [DyadAttribute; 3] = [
        DyadAttribute::Distance,
        DyadAttribute::CommonLanguage,
        DyadAttribute::SharedBorder,
    ];

    pub fn name(self) -> &'static str {
        match self {
            DyadAttribute::Distance => "distance",
            DyadAttribute::CommonLanguage => "common_language",
            DyadAttribute::SharedBorder => "shared_border",
        }
    }
}

impl fmt::Display for DyadAttribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DyadAttribute {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown dyad covariate `{s}`"))
    }
}

/// Symmetric pair covariates keyed by the sorted country pair.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DyadCovariates {
    pairs: BTreeMap<(String, String), DyadRecord>,
}

impl DyadCovariates {
    fn key(a: &str, b: &str) -> (String, String) {
        if a <= b {
            (a.to_string(), b.to_string())
        } else {
            (b.to_string(), a.to_string())
        }
    }

    /// Inserts a pair; a repeated pair must carry identical values.
    pub fn insert(&mut self, a: &str, b: &str, rec: DyadRecord) -> Result<(), RowError> {
        if a == b {
            return Err(RowError::SelfLoop(a.to_string()));
        }
        if !(rec.distance_km >= 0.0) || !rec.distance_km.is_finite() {
            return Err(RowError::Invalid {
                field: "distance_km",
                message: format!("must be a finite value >= 0, got {}", rec.distance_km),
            });
        }
        for (field, v) in [
            ("common_language", rec.common_language),
            ("shared_border", rec.shared_border),
        ] {
            if v > 1 {
                return Err(RowError::Invalid {
                    field,
                    message: format!("must be 0 or 1, got {v}"),
                });
            }
        }
        match self.pairs.entry(Self::key(a, b)) {
            std::collections::btree_map::Entry::Occupied(e) => {
                if *e.get() != rec {
                    return Err(RowError::Inconsistent(format!("{a}-{b}")));
                }
            }
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(rec);
            }
        }
        Ok(())
    }

    pub fn get(&self, a: &str, b: &str) -> Option<&DyadRecord> {
        self.pairs.get(&Self::key(a, b))
    }

    pub fn value(&self, a: &str, b: &str, attr: DyadAttribute) -> Option<f64> {
        let r = self.get(a, b)?;
        Some(match attr {
            DyadAttribute::Distance => r.distance_km,
            DyadAttribute::CommonLanguage => f64::from(r.common_language),
            DyadAttribute::SharedBorder => f64::from(r.shared_border),
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, &DyadRecord)> {
        self.pairs.iter().map(|((a, b), r)| (a.as_str(), b.as_str(), r))
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// A complete, cross-validated input set.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub network: MultilevelNetwork,
    pub attributes: CountryAttributes,
    pub dyads: DyadCovariates,
}

/// Incremental, validating constructor for [`MultilevelNetwork`].
///
/// Country and firm universes are fixed up front; every row added afterwards
/// must reference them. Rows are stored in sorted containers so the result
/// does not depend on insertion order.
pub struct NetworkBuilder {
    segments: SegmentConfig,
    countries: Arc<NodeSet>,
    firms: Arc<NodeSet>,
    firm_segments: Vec<BTreeSet<String>>,
    firm_size: Vec<FirmSize>,
    flows: BTreeMap<(usize, usize), BTreeMap<String, f64>>,
    ownership: Graph,
    affiliation: BipartiteGraph,
}

impl NetworkBuilder {
    pub fn new<C, S>(segments: SegmentConfig, countries: C, firms: impl IntoIterator<Item = S>) -> Self
    where
        C: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let countries = Arc::new(NodeSet::new(countries));
        let firms = Arc::new(NodeSet::new(firms));
        Self {
            firm_segments: vec![BTreeSet::new(); firms.len()],
            firm_size: vec![FirmSize::default(); firms.len()],
            flows: BTreeMap::new(),
            ownership: Graph::directed(firms.clone()),
            affiliation: BipartiteGraph::new(firms.clone(), countries.clone()),
            segments,
            countries,
            firms,
        }
    }

    fn country(&self, id: &str) -> Result<usize, RowError> {
        self.countries
            .index_of(id)
            .ok_or_else(|| RowError::UnknownCountry(id.to_string()))
    }

    fn firm(&self, id: &str) -> Result<usize, RowError> {
        self.firms
            .index_of(id)
            .ok_or_else(|| RowError::UnknownFirm(id.to_string()))
    }

    /// Records a firm's membership in `segment` and its size. Repeated rows
    /// for the same firm must agree on size fields that are present in both.
    pub fn add_firm_segment(&mut self, firm: &str, segment: &str, size: FirmSize) -> Result<(), RowError> {
        let f = self.firm(firm)?;
        if !self.segments.contains(segment) {
            return Err(RowError::UnknownSegment(segment.to_string()));
        }
        for (field, v) in [
            ("operating_revenue", size.operating_revenue),
            ("employees", size.employees),
        ] {
            if let Some(v) = v {
                if !v.is_finite() || v < 0.0 {
                    return Err(RowError::Invalid {
                        field,
                        message: format!("must be a finite value >= 0, got {v}"),
                    });
                }
            }
        }
        let cur = &mut self.firm_size[f];
        merge_field(&mut cur.operating_revenue, size.operating_revenue, firm)?;
        merge_field(&mut cur.employees, size.employees, firm)?;
        if !self.firm_segments[f].insert(segment.to_string()) {
            return Err(RowError::Duplicate);
        }
        Ok(())
    }

    pub fn add_trade(&mut self, reporter: &str, partner: &str, code: &str, value: f64) -> Result<(), RowError> {
        let a = self.country(reporter)?;
        let b = self.country(partner)?;
        if a == b {
            return Err(RowError::SelfLoop(reporter.to_string()));
        }
        if !(value > 0.0) || !value.is_finite() {
            return Err(RowError::NonPositiveValue(value));
        }
        if self.segments.segment_of(code).is_none() {
            return Err(RowError::UnknownProductCode(code.to_string()));
        }
        let slot = self.flows.entry((a, b)).or_default();
        if slot.insert(code.to_string(), value).is_some() {
            return Err(RowError::Duplicate);
        }
        Ok(())
    }

    /// Repeated ownership rows are idempotent.
    pub fn add_ownership(&mut self, parent: &str, child: &str) -> Result<(), RowError> {
        let p = self.firm(parent)?;
        let c = self.firm(child)?;
        self.ownership
            .add_edge(p, c)
            .map_err(|_| RowError::SelfLoop(parent.to_string()))?;
        Ok(())
    }

    /// Repeated affiliation rows are idempotent.
    pub fn add_affiliation(&mut self, firm: &str, country: &str) -> Result<(), RowError> {
        let f = self.firm(firm)?;
        let c = self.country(country)?;
        self.affiliation.add(f, c);
        Ok(())
    }

    pub fn build(self) -> MultilevelNetwork {
        let mut graph = Graph::directed(self.countries.clone());
        for &(a, b) in self.flows.keys() {
            graph.add_edge(a, b).expect("self-loops rejected on insert");
        }
        MultilevelNetwork {
            segments: self.segments,
            countries: self.countries,
            firms: self.firms,
            trade: TradeLayer {
                graph,
                flows: self.flows,
            },
            ownership: self.ownership,
            affiliation: self.affiliation,
            firm_segments: self.firm_segments,
            firm_size: self.firm_size,
        }
    }
}

fn merge_field(cur: &mut Option<f64>, new: Option<f64>, firm: &str) -> Result<(), RowError> {
    match (*cur, new) {
        (Some(a), Some(b)) if a != b => Err(RowError::Inconsistent(firm.to_string())),
        (None, Some(b)) => {
            *cur = Some(b);
            Ok(())
        }
        _ => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn builder() -> NetworkBuilder {
        NetworkBuilder::new(SegmentConfig::automotive(), ["USA", "DEU", "JPN"], ["f1", "f2"])
    }

    #[test]
    fn trade_row_validation() {
        let mut b = builder();
        assert_eq!(
            b.add_trade("USA", "USA", "71323", 100.0),
            Err(RowError::SelfLoop("USA".into()))
        );
        assert_eq!(
            b.add_trade("USA", "XXX", "71323", 100.0),
            Err(RowError::UnknownCountry("XXX".into()))
        );
        assert_eq!(
            b.add_trade("USA", "DEU", "71323", 0.0),
            Err(RowError::NonPositiveValue(0.0))
        );
        assert_eq!(
            b.add_trade("USA", "DEU", "00000", 1.0),
            Err(RowError::UnknownProductCode("00000".into()))
        );
        b.add_trade("USA", "DEU", "71323", 1.0).unwrap();
        assert_eq!(b.add_trade("USA", "DEU", "71323", 2.0), Err(RowError::Duplicate));
    }

    #[test]
    fn dangling_firm_rejected() {
        let mut b = builder();
        assert_eq!(b.add_ownership("f1", "f9"), Err(RowError::UnknownFirm("f9".into())));
        assert_eq!(b.add_affiliation("f9", "USA"), Err(RowError::UnknownFirm("f9".into())));
    }

    #[test]
    fn firm_size_must_agree_across_segments() {
        let mut b = builder();
        let size = FirmSize {
            operating_revenue: Some(10.0),
            employees: None,
        };
        b.add_firm_segment("f1", "Engines & Parts", size).unwrap();
        b.add_firm_segment("f1", "Electrical Parts", FirmSize::default())
            .unwrap();
        let other = FirmSize {
            operating_revenue: Some(11.0),
            employees: None,
        };
        assert!(matches!(
            b.add_firm_segment("f1", "Rubber & Metal Parts", other),
            Err(RowError::Inconsistent(_))
        ));
        assert_eq!(
            b.add_firm_segment("f2", "Glass", FirmSize::default()),
            Err(RowError::UnknownSegment("Glass".into()))
        );
    }

    #[test]
    fn dyads_symmetric_and_checked() {
        let mut d = DyadCovariates::default();
        let rec = DyadRecord {
            distance_km: 10.0,
            common_language: 1,
            shared_border: 0,
        };
        d.insert("USA", "CAN", rec).unwrap();
        d.insert("CAN", "USA", rec).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d.value("USA", "CAN", DyadAttribute::CommonLanguage), Some(1.0));
        let other = DyadRecord {
            distance_km: 11.0,
            ..rec
        };
        assert!(matches!(d.insert("CAN", "USA", other), Err(RowError::Inconsistent(_))));
        let bad = DyadRecord {
            shared_border: 2,
            ..rec
        };
        assert!(matches!(d.insert("USA", "MEX", bad), Err(RowError::Invalid { .. })));
        let neg = DyadRecord {
            distance_km: -1.0,
            ..rec
        };
        assert!(matches!(d.insert("USA", "MEX", neg), Err(RowError::Invalid { .. })));
    }

    #[test]
    fn attribute_names_parse() {
        for a in NodeAttribute::ALL {
            assert_eq!(a.name().parse::<NodeAttribute>(), Ok(a));
        }
        for a in DyadAttribute::ALL {
            assert_eq!(a.name().parse::<DyadAttribute>(), Ok(a));
        }
        assert!("gdpx".parse::<NodeAttribute>().is_err());
    }
}
