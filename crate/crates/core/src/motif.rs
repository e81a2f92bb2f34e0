//! Potential intra-firm trade: detection of the two-country / two-firm motif
//! in a multilevel network and the country network it induces.
//!
//! A motif is two countries `a` and `b` that trade a qualifying product, a
//! firm `f` affiliated with `a`, a firm `g` affiliated with `b`, and an
//! ownership tie between `f` and `g`. The configuration is discarded when `f`
//! is also affiliated with `b` or `g` with `a`. Exclusion applies to the
//! individual configuration, never to the country pair.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::csvio;
use crate::graph::{Graph, NodeSet};
use crate::ingest::MultilevelNetwork;

#[derive(Debug, Error)]
pub enum MotifError {
    #[error("unknown segment `{0}`")]
    UnknownSegment(String),
    #[error("{path}: {source}")]
    Csv {
        path: std::path::PathBuf,
        source: csv::Error,
    },
    #[error("{path}: {message}")]
    Format { path: std::path::PathBuf, message: String },
}

/// Which ownership ties and product codes feed the motif.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SegmentMode {
    /// Both firms in the segment, product code in the segment.
    Intra(String),
    /// Firms with disjoint segment sets, any configured product code.
    Inter,
}

impl SegmentMode {
    pub const INTER: &'static str = "inter";

    pub fn segment(&self) -> Option<&str> {
        match self {
            SegmentMode::Intra(s) => Some(s),
            SegmentMode::Inter => None,
        }
    }

    /// Filesystem-friendly name, e.g. `engines_parts` for "Engines & Parts".
    pub fn slug(&self) -> String {
        let name = self.to_string().to_lowercase();
        let mut out = String::new();
        for ch in name.chars() {
            if ch.is_ascii_alphanumeric() {
                out.push(ch);
            } else if !out.ends_with('_') && !out.is_empty() {
                out.push('_');
            }
        }
        out.trim_end_matches('_').to_string()
    }
}

impl fmt::Display for SegmentMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SegmentMode::Intra(s) => f.write_str(s),
            SegmentMode::Inter => f.write_str(Self::INTER),
        }
    }
}

impl FromStr for SegmentMode {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(if s.eq_ignore_ascii_case(Self::INTER) {
            SegmentMode::Inter
        } else {
            SegmentMode::Intra(s.to_string())
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TradeDirection {
    #[serde(rename = "a->b")]
    AToB,
    #[serde(rename = "b->a")]
    BToA,
    #[serde(rename = "both")]
    Both,
}

impl TradeDirection {
    fn from_flows(a_to_b: bool, b_to_a: bool) -> Option<Self> {
        match (a_to_b, b_to_a) {
            (true, true) => Some(TradeDirection::Both),
            (true, false) => Some(TradeDirection::AToB),
            (false, true) => Some(TradeDirection::BToA),
            (false, false) => None,
        }
    }
}

/// One detected configuration. `country_a < country_b`; `firm_f` is the firm
/// affiliated with `country_a`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Motif {
    #[serde(rename = "iso3_a")]
    pub country_a: String,
    #[serde(rename = "iso3_b")]
    pub country_b: String,
    pub firm_f: String,
    pub firm_g: String,
    pub product_code: String,
    pub direction: TradeDirection,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DetectOptions {
    /// Accept indirect ownership chains (same ownership component) instead of
    /// direct ties only.
    pub ownership_closure: bool,
}

fn check_mode(net: &MultilevelNetwork, mode: &SegmentMode) -> Result<(), MotifError> {
    match mode {
        SegmentMode::Intra(s) if !net.segments.contains(s) => Err(MotifError::UnknownSegment(s.clone())),
        _ => Ok(()),
    }
}

fn firm_eligible(net: &MultilevelNetwork, mode: &SegmentMode, f: usize) -> bool {
    match mode {
        SegmentMode::Intra(s) => net.firm_in_segment(f, s),
        SegmentMode::Inter => true,
    }
}

fn pair_eligible(net: &MultilevelNetwork, mode: &SegmentMode, f: usize, g: usize) -> bool {
    match mode {
        SegmentMode::Intra(s) => net.firm_in_segment(f, s) && net.firm_in_segment(g, s),
        SegmentMode::Inter => net.firm_segments[f].is_disjoint(&net.firm_segments[g]),
    }
}

fn qualifying_codes<'a>(net: &'a MultilevelNetwork, mode: &SegmentMode) -> BTreeSet<&'a str> {
    match mode {
        SegmentMode::Intra(s) => net
            .segments
            .codes(s)
            .into_iter()
            .flatten()
            .map(String::as_str)
            .collect(),
        SegmentMode::Inter => net
            .segments
            .names()
            .flat_map(|s| net.segments.codes(s).into_iter().flatten())
            .map(String::as_str)
            .collect(),
    }
}

/// Unordered firm pairs `(f, g)` with `f < g` linked by ownership under `mode`.
fn ownership_pairs(net: &MultilevelNetwork, mode: &SegmentMode, options: &DetectOptions) -> BTreeSet<(usize, usize)> {
    if !options.ownership_closure {
        return net
            .ownership
            .edges()
            .map(|(p, c)| (p.min(c), p.max(c)))
            .filter(|&(f, g)| pair_eligible(net, mode, f, g))
            .collect();
    }
    // chains may only pass through firms eligible for the mode
    let eligible: Vec<usize> = (0..net.firms.len()).filter(|&f| firm_eligible(net, mode, f)).collect();
    let sub = net.ownership.induced(&eligible);
    let mut pairs = BTreeSet::new();
    for comp in sub.connected_components() {
        let members: Vec<usize> = comp.iter().map(|&i| eligible[i]).collect();
        for (k, &f) in members.iter().enumerate() {
            for &g in &members[k + 1..] {
                if pair_eligible(net, mode, f, g) {
                    pairs.insert((f, g));
                }
            }
        }
    }
    pairs
}

/// All motifs in `net` under `mode`, sorted.
pub fn detect_motifs(
    net: &MultilevelNetwork,
    mode: &SegmentMode,
    options: &DetectOptions,
) -> Result<Vec<Motif>, MotifError> {
    check_mode(net, mode)?;
    let codes = qualifying_codes(net, mode);
    let aff = &net.affiliation;
    let mut found = BTreeSet::new();
    for (f, g) in ownership_pairs(net, mode, options) {
        for &x in aff.right_of(f).difference(aff.right_of(g)) {
            for &y in aff.right_of(g).difference(aff.right_of(f)) {
                // x is f's country, y is g's; orient so that a < b
                let (a, b, ff, gg) = if x < y { (x, y, f, g) } else { (y, x, g, f) };
                let forward: BTreeSet<&str> = net.trade.codes(a, b).collect();
                let backward: BTreeSet<&str> = net.trade.codes(b, a).collect();
                for code in forward.union(&backward) {
                    if !codes.contains(code) {
                        continue;
                    }
                    let direction = TradeDirection::from_flows(forward.contains(code), backward.contains(code))
                        .expect("code taken from one of the flows");
                    found.insert(Motif {
                        country_a: net.countries.id(a).to_string(),
                        country_b: net.countries.id(b).to_string(),
                        firm_f: net.firms.id(ff).to_string(),
                        firm_g: net.firms.id(gg).to_string(),
                        product_code: code.to_string(),
                        direction,
                    });
                }
            }
        }
    }
    Ok(found.into_iter().collect())
}

/// Why a motif fails re-validation against a network.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum MotifViolation {
    #[error("unknown id `{0}`")]
    UnknownId(String),
    #[error("countries or firms coincide")]
    Degenerate,
    #[error("countries not in canonical order")]
    Order,
    #[error("no trade in `{0}` matching the recorded direction")]
    Trade(String),
    #[error("product code not eligible for the mode")]
    Code,
    #[error("missing affiliation `{0}`-`{1}`")]
    MissingAffiliation(String, String),
    #[error("excluded: `{0}` is affiliated with both countries")]
    Excluded(String),
    #[error("no ownership tie between the firms")]
    Ownership,
    #[error("firm segments not eligible for the mode")]
    Segment,
}

impl Motif {
    /// Re-checks every defining condition directly against the raw layers.
    pub fn check(&self, net: &MultilevelNetwork, mode: &SegmentMode) -> Result<(), MotifViolation> {
        let c = |id: &str| {
            net.countries
                .index_of(id)
                .ok_or_else(|| MotifViolation::UnknownId(id.to_string()))
        };
        let fi = |id: &str| {
            net.firms
                .index_of(id)
                .ok_or_else(|| MotifViolation::UnknownId(id.to_string()))
        };
        let (a, b, f, g) = (
            c(&self.country_a)?,
            c(&self.country_b)?,
            fi(&self.firm_f)?,
            fi(&self.firm_g)?,
        );
        if a == b || f == g {
            return Err(MotifViolation::Degenerate);
        }
        if self.country_a > self.country_b {
            return Err(MotifViolation::Order);
        }
        let ab = net.trade.flow(a, b, &self.product_code).is_some();
        let ba = net.trade.flow(b, a, &self.product_code).is_some();
        if TradeDirection::from_flows(ab, ba) != Some(self.direction) {
            return Err(MotifViolation::Trade(self.product_code.clone()));
        }
        let code_ok = match mode {
            SegmentMode::Intra(s) => net.segments.segment_of(&self.product_code) == Some(s),
            SegmentMode::Inter => net.segments.segment_of(&self.product_code).is_some(),
        };
        if !code_ok {
            return Err(MotifViolation::Code);
        }
        for (firm, country) in [(f, a), (g, b)] {
            if !net.affiliation.contains(firm, country) {
                return Err(MotifViolation::MissingAffiliation(
                    net.firms.id(firm).to_string(),
                    net.countries.id(country).to_string(),
                ));
            }
        }
        if net.affiliation.contains(f, b) {
            return Err(MotifViolation::Excluded(self.firm_f.clone()));
        }
        if net.affiliation.contains(g, a) {
            return Err(MotifViolation::Excluded(self.firm_g.clone()));
        }
        if !(net.ownership.has_edge(f, g) || net.ownership.has_edge(g, f)) {
            return Err(MotifViolation::Ownership);
        }
        if !pair_eligible(net, mode, f, g) {
            return Err(MotifViolation::Segment);
        }
        Ok(())
    }
}

/// Undirected country network of potential intra-firm trade.
#[derive(Clone, Debug, PartialEq)]
pub struct FilteredTradeNetwork {
    pub mode: SegmentMode,
    pub graph: Graph,
    /// Supporting motifs per edge, keyed by the sorted country pair.
    pub provenance: BTreeMap<(String, String), Vec<Motif>>,
}

/// Collapses motifs into one undirected edge per country pair. The node set is
/// the countries touched by a motif plus any `extra_nodes`.
pub fn build_filtered_network<I, S>(mode: SegmentMode, motifs: &[Motif], extra_nodes: I) -> FilteredTradeNetwork
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let mut provenance: BTreeMap<(String, String), Vec<Motif>> = BTreeMap::new();
    for m in motifs {
        provenance
            .entry((m.country_a.clone(), m.country_b.clone()))
            .or_default()
            .push(m.clone());
    }
    let nodes = NodeSet::new(
        provenance
            .keys()
            .flat_map(|(a, b)| [a.clone(), b.clone()])
            .chain(extra_nodes.into_iter().map(Into::into)),
    );
    let graph = Graph::from_id_edges(
        Arc::new(nodes),
        false,
        provenance.keys().map(|(a, b)| (a.as_str(), b.as_str())),
    )
    .expect("motif countries are distinct and in the node set");
    FilteredTradeNetwork {
        mode,
        graph,
        provenance,
    }
}

/// Countries with at least one flow in a code qualifying under `mode`.
pub fn trading_countries(net: &MultilevelNetwork, mode: &SegmentMode) -> Vec<String> {
    let codes = qualifying_codes(net, mode);
    let mut out = BTreeSet::new();
    for (a, b, code, _) in net.trade.flows() {
        if codes.contains(code) {
            out.insert(a);
            out.insert(b);
        }
    }
    out.into_iter().map(|c| net.countries.id(c).to_string()).collect()
}

pub const EDGE_LIST_HEADER: [&str; 3] = ["iso3_a", "iso3_b", "n_motifs"];
pub const PROVENANCE_HEADER: [&str; 6] = ["iso3_a", "iso3_b", "firm_f", "firm_g", "product_code", "direction"];

#[derive(Serialize, Deserialize)]
struct EdgeRow {
    iso3_a: String,
    iso3_b: String,
    n_motifs: usize,
}

impl FilteredTradeNetwork {
    pub fn motif_count(&self) -> usize {
        self.provenance.values().map(Vec::len).sum()
    }

    /// Edge list `iso3_a,iso3_b,n_motifs`. Isolated nodes are written as a row
    /// with an empty `iso3_b` and zero motifs, so the node set survives a round trip.
    pub fn write_edge_list(&self, path: &Path, preamble: Option<&str>) -> Result<(), csv::Error> {
        let g = &self.graph;
        let isolates = (0..g.node_count()).filter(|&v| g.degree(v) == 0).map(|v| EdgeRow {
            iso3_a: g.id(v).to_string(),
            iso3_b: String::new(),
            n_motifs: 0,
        });
        let edges = self.provenance.iter().map(|((a, b), ms)| EdgeRow {
            iso3_a: a.clone(),
            iso3_b: b.clone(),
            n_motifs: ms.len(),
        });
        csvio::write(path, preamble, &EDGE_LIST_HEADER, edges.chain(isolates))
    }

    pub fn write_provenance(&self, path: &Path, preamble: Option<&str>) -> Result<(), csv::Error> {
        csvio::write(path, preamble, &PROVENANCE_HEADER, self.provenance.values().flatten())
    }
}

/// Reads an edge list written by [`FilteredTradeNetwork::write_edge_list`]
/// into an undirected graph.
pub fn read_edge_list(path: &Path) -> Result<Graph, MotifError> {
    let csv_err = |source| MotifError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = csvio::reader(path).map_err(csv_err)?;
    let mut nodes = BTreeSet::new();
    let mut edges = Vec::new();
    for row in reader.deserialize::<EdgeRow>() {
        let row = row.map_err(csv_err)?;
        nodes.insert(row.iso3_a.clone());
        if !row.iso3_b.is_empty() {
            nodes.insert(row.iso3_b.clone());
            edges.push((row.iso3_a, row.iso3_b));
        }
    }
    Graph::from_id_edges(
        Arc::new(NodeSet::new(nodes)),
        false,
        edges.iter().map(|(a, b)| (a.as_str(), b.as_str())),
    )
    .map_err(|e| MotifError::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Sample moments of one firm-size variable. Missing values are excluded
/// from the moments but the firm still counts toward the population size.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Moments {
    pub observed: usize,
    pub mean: Option<f64>,
    /// Sample standard deviation (n - 1 denominator).
    pub sd: Option<f64>,
}

impl Moments {
    pub fn from_values(values: &[f64]) -> Self {
        let n = values.len();
        let mean = (n > 0).then(|| values.iter().sum::<f64>() / n as f64);
        let sd = mean.filter(|_| n > 1).map(|m| {
            let ss: f64 = values.iter().map(|v| (v - m).powi(2)).sum();
            (ss / (n - 1) as f64).sqrt()
        });
        Self { observed: n, mean, sd }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PopulationStats {
    pub n_firms: usize,
    pub operating_revenue: Moments,
    pub employees: Moments,
}

/// Firm descriptives for a segment: all firms versus firms tied to at least
/// one other segment firm by ownership.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FirmDescriptives {
    pub segment: String,
    pub all: PopulationStats,
    pub connected: PopulationStats,
}

fn population(net: &MultilevelNetwork, firms: &[usize]) -> PopulationStats {
    let revenue: Vec<f64> = firms
        .iter()
        .filter_map(|&f| net.firm_size[f].operating_revenue)
        .collect();
    let employees: Vec<f64> = firms.iter().filter_map(|&f| net.firm_size[f].employees).collect();
    PopulationStats {
        n_firms: firms.len(),
        operating_revenue: Moments::from_values(&revenue),
        employees: Moments::from_values(&employees),
    }
}

pub fn firm_descriptives(net: &MultilevelNetwork, segment: &str) -> Result<FirmDescriptives, MotifError> {
    if !net.segments.contains(segment) {
        return Err(MotifError::UnknownSegment(segment.to_string()));
    }
    let members: Vec<usize> = (0..net.firms.len())
        .filter(|&f| net.firm_in_segment(f, segment))
        .collect();
    let sub = net.ownership.induced(&members);
    let connected: Vec<usize> = sub
        .connected_components()
        .into_iter()
        .filter(|c| c.len() > 1)
        .flatten()
        .map(|i| members[i])
        .collect();
    let mut connected = connected;
    connected.sort_unstable();
    Ok(FirmDescriptives {
        segment: segment.to_string(),
        all: population(net, &members),
        connected: population(net, &connected),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{FirmSize, NetworkBuilder, SegmentConfig};

    const ENG: &str = "Engines & Parts";
    const ELEC: &str = "Electrical Parts";

    fn two_country_fixture(extra_affiliation: Option<(&str, &str)>) -> MultilevelNetwork {
        let mut b = NetworkBuilder::new(SegmentConfig::automotive(), ["AAA", "BBB", "CCC"], ["f", "g"]);
        for firm in ["f", "g"] {
            b.add_firm_segment(firm, ENG, FirmSize::default()).unwrap();
        }
        b.add_trade("AAA", "BBB", "71323", 10.0).unwrap();
        b.add_affiliation("f", "AAA").unwrap();
        b.add_affiliation("g", "BBB").unwrap();
        b.add_ownership("f", "g").unwrap();
        if let Some((firm, c)) = extra_affiliation {
            b.add_affiliation(firm, c).unwrap();
        }
        b.build()
    }

    fn eng() -> SegmentMode {
        SegmentMode::Intra(ENG.into())
    }

    #[test]
    fn basic_configuration_detected() {
        let net = two_country_fixture(None);
        let ms = detect_motifs(&net, &eng(), &DetectOptions::default()).unwrap();
        assert_eq!(
            ms,
            vec![Motif {
                country_a: "AAA".into(),
                country_b: "BBB".into(),
                firm_f: "f".into(),
                firm_g: "g".into(),
                product_code: "71323".into(),
                direction: TradeDirection::AToB,
            }]
        );
        assert!(ms[0].check(&net, &eng()).is_ok());
    }

    #[test]
    fn dual_affiliation_excludes() {
        for extra in [("f", "BBB"), ("g", "AAA")] {
            let net = two_country_fixture(Some(extra));
            let ms = detect_motifs(&net, &eng(), &DetectOptions::default()).unwrap();
            assert!(ms.is_empty(), "{extra:?}");
        }
        // an affiliation with an unrelated country changes nothing
        let net = two_country_fixture(Some(("f", "CCC")));
        assert_eq!(detect_motifs(&net, &eng(), &DetectOptions::default()).unwrap().len(), 1);
    }

    #[test]
    fn segment_rules() {
        let net = two_country_fixture(None);
        // wrong segment: neither firm nor code in Electrical Parts
        let elec = SegmentMode::Intra(ELEC.into());
        assert!(detect_motifs(&net, &elec, &DetectOptions::default())
            .unwrap()
            .is_empty());
        // both firms share a segment, so no inter-segment tie
        assert!(detect_motifs(&net, &SegmentMode::Inter, &DetectOptions::default())
            .unwrap()
            .is_empty());
        assert!(matches!(
            detect_motifs(&net, &SegmentMode::Intra("Glass".into()), &DetectOptions::default()),
            Err(MotifError::UnknownSegment(_))
        ));
    }

    #[test]
    fn inter_segment_uses_disjoint_firms_and_any_code() {
        let mut b = NetworkBuilder::new(SegmentConfig::automotive(), ["AAA", "BBB"], ["f", "g"]);
        b.add_firm_segment("f", ENG, FirmSize::default()).unwrap();
        b.add_firm_segment("g", ELEC, FirmSize::default()).unwrap();
        b.add_trade("BBB", "AAA", "62510", 1.0).unwrap();
        b.add_trade("AAA", "BBB", "62510", 1.0).unwrap();
        b.add_affiliation("g", "AAA").unwrap();
        b.add_affiliation("f", "BBB").unwrap();
        b.add_ownership("g", "f").unwrap();
        let net = b.build();
        let ms = detect_motifs(&net, &SegmentMode::Inter, &DetectOptions::default()).unwrap();
        assert_eq!(ms.len(), 1);
        assert_eq!((ms[0].firm_f.as_str(), ms[0].firm_g.as_str()), ("g", "f"));
        assert_eq!(ms[0].direction, TradeDirection::Both);
        assert!(ms[0].check(&net, &SegmentMode::Inter).is_ok());
    }

    #[test]
    fn no_ownership_no_motifs() {
        let mut b = NetworkBuilder::new(SegmentConfig::automotive(), ["AAA", "BBB"], ["f", "g"]);
        for firm in ["f", "g"] {
            b.add_firm_segment(firm, ENG, FirmSize::default()).unwrap();
        }
        b.add_trade("AAA", "BBB", "71323", 10.0).unwrap();
        b.add_affiliation("f", "AAA").unwrap();
        b.add_affiliation("g", "BBB").unwrap();
        let net = b.build();
        assert!(detect_motifs(&net, &eng(), &DetectOptions::default())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn ownership_closure_flag() {
        let mut b = NetworkBuilder::new(SegmentConfig::automotive(), ["AAA", "BBB", "CCC"], ["f", "g", "h"]);
        for firm in ["f", "g", "h"] {
            b.add_firm_segment(firm, ENG, FirmSize::default()).unwrap();
        }
        b.add_trade("AAA", "BBB", "71323", 10.0).unwrap();
        b.add_affiliation("f", "AAA").unwrap();
        b.add_affiliation("h", "CCC").unwrap();
        b.add_affiliation("g", "BBB").unwrap();
        b.add_ownership("f", "h").unwrap();
        b.add_ownership("h", "g").unwrap();
        let net = b.build();
        assert!(detect_motifs(&net, &eng(), &DetectOptions::default())
            .unwrap()
            .is_empty());
        let closure = DetectOptions {
            ownership_closure: true,
        };
        assert_eq!(detect_motifs(&net, &eng(), &closure).unwrap().len(), 1);
    }

    fn motif(a: &str, b: &str, f: &str) -> Motif {
        Motif {
            country_a: a.into(),
            country_b: b.into(),
            firm_f: f.into(),
            firm_g: "g".into(),
            product_code: "71323".into(),
            direction: TradeDirection::AToB,
        }
    }

    #[test]
    fn filtered_network_examples() {
        let net = build_filtered_network(
            eng(),
            &[motif("A", "B", "f"), motif("A", "B", "h")],
            Vec::<String>::new(),
        );
        assert_eq!(net.graph.edge_count(), 1);
        assert_eq!(net.provenance[&("A".into(), "B".into())].len(), 2);

        let path = build_filtered_network(
            eng(),
            &[motif("A", "B", "f"), motif("B", "C", "f")],
            Vec::<String>::new(),
        );
        assert_eq!(path.graph.nodes().ids(), ["A", "B", "C"]);
        assert_eq!(path.graph.edge_count(), 2);
        assert_eq!(path.graph.degree(1), 2);

        let empty = build_filtered_network(eng(), &[], Vec::<String>::new());
        assert_eq!(empty.graph.node_count(), 0);

        let with_iso = build_filtered_network(eng(), &[motif("A", "B", "f")], ["Z"]);
        assert_eq!(with_iso.graph.node_count(), 3);
    }

    #[test]
    fn edge_list_round_trip_keeps_isolates() {
        let dir = tempfile::tempdir().unwrap();
        let net = build_filtered_network(eng(), &[motif("A", "B", "f"), motif("B", "C", "f")], ["Z"]);
        let path = dir.path().join("edges.csv");
        net.write_edge_list(&path, Some("stage=filter")).unwrap();
        let g = read_edge_list(&path).unwrap();
        assert_eq!(g, net.graph);
    }

    #[test]
    fn slugs() {
        assert_eq!(eng().slug(), "engines_parts");
        assert_eq!(
            SegmentMode::Intra("Rubber & Metal Parts".into()).slug(),
            "rubber_metal_parts"
        );
        assert_eq!(SegmentMode::Inter.slug(), "inter");
        assert_eq!("INTER".parse::<SegmentMode>().unwrap(), SegmentMode::Inter);
    }

    #[test]
    fn firm_descriptive_counts_and_moments() {
        let firms = ["a", "b", "c", "d", "e"];
        let mut b = NetworkBuilder::new(SegmentConfig::automotive(), ["AAA"], firms);
        for (i, f) in firms.iter().enumerate() {
            let size = FirmSize {
                operating_revenue: Some([100.0, 300.0, 5.0, 7.0, 9.0][i]),
                employees: if i == 0 { None } else { Some(10.0) },
            };
            b.add_firm_segment(f, ENG, size).unwrap();
        }
        b.add_ownership("a", "b").unwrap();
        let d = firm_descriptives(&b.build(), ENG).unwrap();
        assert_eq!(d.all.n_firms, 5);
        assert_eq!(d.connected.n_firms, 2);
        let rev = d.connected.operating_revenue;
        assert_eq!(rev.mean, Some(200.0));
        assert!((rev.sd.unwrap() - 141.421356).abs() < 1e-5);
        // missing employee value excluded from moments, still counted
        assert_eq!(d.connected.employees.observed, 1);
        assert_eq!(d.connected.employees.sd, None);
    }
}
