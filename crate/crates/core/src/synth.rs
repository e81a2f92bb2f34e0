//! Synthetic multilevel datasets with planted intra-firm trade motifs.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::csvio;
use crate::ingest::{
    CountryAttributes, CountryRecord, Dataset, DyadCovariates, DyadRecord, FirmSize, NetworkBuilder, SegmentConfig,
};
use crate::motif::{Motif, SegmentMode, TradeDirection};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synthetic spec: {0}")]
    Invalid(String),
    #[error("cannot plant {wanted} motifs, placed {placed} before giving up")]
    Infeasible { wanted: usize, placed: usize },
}

/// Closed interval `[lo, hi]` for uniformly drawn attributes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
}

impl Range {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    fn sample(&self, rng: &mut impl Rng) -> f64 {
        if self.hi > self.lo {
            rng.random_range(self.lo..=self.hi)
        } else {
            self.lo
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    pub n_countries: usize,
    /// Firms whose primary segment is the key.
    pub firms_per_segment: BTreeMap<String, usize>,
    /// Chance that a firm also belongs to one further segment.
    pub second_segment_prob: f64,
    /// Chance of an ownership tie for each unordered firm pair.
    pub ownership_prob: f64,
    /// Relative weights for a firm being affiliated with 1, 2, 3, ... countries.
    pub affiliation_weights: Vec<f64>,
    /// Chance of a flow for each ordered country pair and product code.
    pub trade_density: f64,
    pub planted_motifs: usize,
    /// Chance that a firm-size field is left blank.
    pub missing_size_prob: f64,
    pub gdp: Range,
    pub gdp_per_capita: Range,
    pub rule_of_law: Range,
    pub contract_days: Range,
    /// Countries are placed uniformly in a box of this width and height (km).
    pub map_km: (f64, f64),
    /// Pairs closer than this share a border.
    pub border_km: f64,
    pub common_language_prob: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        let segments = SegmentConfig::automotive();
        Self {
            n_countries: 40,
            firms_per_segment: segments.names().map(|s| (s.to_string(), 120)).collect(),
            second_segment_prob: 0.1,
            ownership_prob: 0.002,
            affiliation_weights: vec![0.6, 0.3, 0.1],
            trade_density: 0.05,
            planted_motifs: 10,
            missing_size_prob: 0.05,
            // GDP in trillions, GDP per capita in thousands
            gdp: Range::new(0.05, 5.0),
            gdp_per_capita: Range::new(1.0, 60.0),
            rule_of_law: Range::new(-2.0, 2.0),
            contract_days: Range::new(200.0, 1200.0),
            map_km: (16000.0, 8000.0),
            border_km: 1500.0,
            common_language_prob: 0.15,
            seed: 1,
        }
    }
}

impl SynthSpec {
    fn validate(&self, segments: &SegmentConfig) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::Invalid(m));
        for (name, p) in [
            ("second_segment_prob", self.second_segment_prob),
            ("ownership_prob", self.ownership_prob),
            ("trade_density", self.trade_density),
            ("missing_size_prob", self.missing_size_prob),
            ("common_language_prob", self.common_language_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} must be in [0, 1], got {p}"));
            }
        }
        if self.affiliation_weights.is_empty()
            || self.affiliation_weights.iter().any(|w| !(*w >= 0.0))
            || self.affiliation_weights.iter().sum::<f64>() <= 0.0
        {
            return bad("affiliation_weights must be non-negative with a positive sum".into());
        }
        if self.affiliation_weights.len() > self.n_countries {
            return bad("affiliation multiplicity exceeds the number of countries".into());
        }
        for s in self.firms_per_segment.keys() {
            if !segments.contains(s) {
                return bad(format!("unknown segment `{s}`"));
            }
        }
        for (name, r) in [
            ("gdp", self.gdp),
            ("gdp_per_capita", self.gdp_per_capita),
            ("rule_of_law", self.rule_of_law),
            ("contract_days", self.contract_days),
        ] {
            if !(r.lo <= r.hi) {
                return bad(format!("{name} range is empty"));
            }
        }
        if self.contract_days.lo < 0.0 {
            return bad("contract_days must be non-negative".into());
        }
        Ok(())
    }
}

/// A generated dataset together with the motifs planted into it.
#[derive(Clone, Debug)]
pub struct SynthOutput {
    pub dataset: Dataset,
    pub planted: Vec<(SegmentMode, Motif)>,
}

/// Three-letter identifier for country `i`: AAA, AAB, ... (sorted like `i`).
pub fn country_code(i: usize) -> String {
    let b = |k: usize| (b'A' + (k % 26) as u8) as char;
    [b(i / 676), b(i / 26), b(i)].iter().collect()
}

struct Planted {
    segment: String,
    f: usize,
    g: usize,
    a: usize,
    b: usize,
    code: String,
}

pub fn generate_synthetic(spec: &SynthSpec, segments: &SegmentConfig) -> Result<SynthOutput, SynthError> {
    spec.validate(segments)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let nc = spec.n_countries;
    let countries: Vec<String> = (0..nc).map(country_code).collect();
    let segment_names: Vec<String> = segments.names().map(str::to_string).collect();

    // firms and their segments
    let mut firm_segments: Vec<BTreeSet<String>> = Vec::new();
    for (s, &count) in &spec.firms_per_segment {
        for _ in 0..count {
            let mut set = BTreeSet::from([s.clone()]);
            if segment_names.len() > 1 && rng.random_bool(spec.second_segment_prob) {
                let others: Vec<&String> = segment_names.iter().filter(|x| *x != s).collect();
                set.insert(others.choose(&mut rng).copied().cloned().expect("non-empty"));
            }
            firm_segments.push(set);
        }
    }
    let nf = firm_segments.len();
    let width = nf.to_string().len().max(4);
    let firms: Vec<String> = (0..nf).map(|i| format!("F{:0width$}", i + 1)).collect();

    let revenue_dist: LogNormal<f64> = LogNormal::new(11.0, 1.5).expect("valid lognormal");
    let employee_dist: LogNormal<f64> = LogNormal::new(6.0, 1.2).expect("valid lognormal");
    let sizes: Vec<FirmSize> = (0..nf)
        .map(|_| {
            let revenue: f64 = revenue_dist.sample(&mut rng);
            let revenue = revenue.round();
            let employees: f64 = employee_dist.sample(&mut rng);
            let employees = employees.round().max(1.0);
            FirmSize {
                operating_revenue: (!rng.random_bool(spec.missing_size_prob)).then_some(revenue),
                employees: (!rng.random_bool(spec.missing_size_prob)).then_some(employees),
            }
        })
        .collect();

    // affiliations
    let total_w: f64 = spec.affiliation_weights.iter().sum();
    let mut affiliation: BTreeSet<(usize, usize)> = BTreeSet::new();
    let country_idx: Vec<usize> = (0..nc).collect();
    if nc > 0 {
        for f in 0..nf {
            let mut u = rng.random_range(0.0..total_w);
            let mut k = spec.affiliation_weights.len();
            for (i, w) in spec.affiliation_weights.iter().enumerate() {
                if u < *w {
                    k = i + 1;
                    break;
                }
                u -= w;
            }
            for &c in country_idx.choose_multiple(&mut rng, k) {
                affiliation.insert((f, c));
            }
        }
    }

    // ownership, random direction
    let mut ownership: BTreeSet<(usize, usize)> = BTreeSet::new();
    if spec.ownership_prob > 0.0 {
        for f in 0..nf {
            for g in f + 1..nf {
                if rng.random_bool(spec.ownership_prob) {
                    ownership.insert(if rng.random_bool(0.5) { (f, g) } else { (g, f) });
                }
            }
        }
    }

    // trade flows
    let all_codes: Vec<String> = segment_names
        .iter()
        .flat_map(|s| segments.codes(s).into_iter().flatten().cloned())
        .collect();
    let value_dist: LogNormal<f64> = LogNormal::new(12.0, 2.0).expect("valid lognormal");
    let mut flows: BTreeMap<(usize, usize, String), f64> = BTreeMap::new();
    for a in 0..nc {
        for b in 0..nc {
            if a == b {
                continue;
            }
            for code in &all_codes {
                if rng.random_bool(spec.trade_density) {
                    flows.insert((a, b, code.clone()), value_dist.sample(&mut rng).round().max(1.0));
                }
            }
        }
    }

    let planted = plant_motifs(
        spec,
        segments,
        &firm_segments,
        &mut affiliation,
        &mut ownership,
        &mut flows,
        &value_dist,
        &mut rng,
    )?;

    // attributes and dyads
    let mut records = BTreeMap::new();
    let mut coords = Vec::with_capacity(nc);
    for c in &countries {
        records.insert(
            c.clone(),
            CountryRecord {
                gdp: Some(round_to(spec.gdp.sample(&mut rng), 4)),
                gdp_per_capita: Some(round_to(spec.gdp_per_capita.sample(&mut rng), 3)),
                rule_of_law: Some(round_to(spec.rule_of_law.sample(&mut rng), 3)),
                contract_days: Some(spec.contract_days.sample(&mut rng).round()),
            },
        );
        coords.push((
            rng.random_range(0.0..=spec.map_km.0),
            rng.random_range(0.0..=spec.map_km.1),
        ));
    }
    let mut dyads = DyadCovariates::default();
    for a in 0..nc {
        for b in a + 1..nc {
            let (dx, dy) = (coords[a].0 - coords[b].0, coords[a].1 - coords[b].1);
            let distance_km = (dx * dx + dy * dy).sqrt().round();
            let rec = DyadRecord {
                distance_km,
                common_language: u8::from(rng.random_bool(spec.common_language_prob)),
                shared_border: u8::from(distance_km < spec.border_km),
            };
            dyads
                .insert(&countries[a], &countries[b], rec)
                .expect("generated dyads are valid");
        }
    }

    let mut builder = NetworkBuilder::new(segments.clone(), countries.iter().cloned(), firms.iter().cloned());
    for (f, segs) in firm_segments.iter().enumerate() {
        for s in segs {
            builder
                .add_firm_segment(&firms[f], s, sizes[f])
                .expect("generated firm rows are valid");
        }
    }
    for ((a, b, code), value) in &flows {
        builder
            .add_trade(&countries[*a], &countries[*b], code, *value)
            .expect("generated trade rows are valid");
    }
    for &(p, c) in &ownership {
        builder
            .add_ownership(&firms[p], &firms[c])
            .expect("generated ownership rows are valid");
    }
    for &(f, c) in &affiliation {
        builder
            .add_affiliation(&firms[f], &countries[c])
            .expect("generated affiliation rows are valid");
    }
    let network = builder.build();
    let attributes = CountryAttributes::new(records, &network);

    let planted = planted
        .into_iter()
        .map(|p| {
            let (a, b, f, g) = if p.a < p.b {
                (p.a, p.b, p.f, p.g)
            } else {
                (p.b, p.a, p.g, p.f)
            };
            let ab = flows.contains_key(&(a, b, p.code.clone()));
            let ba = flows.contains_key(&(b, a, p.code.clone()));
            let direction = match (ab, ba) {
                (true, true) => TradeDirection::Both,
                (true, false) => TradeDirection::AToB,
                _ => TradeDirection::BToA,
            };
            (
                SegmentMode::Intra(p.segment),
                Motif {
                    country_a: countries[a].clone(),
                    country_b: countries[b].clone(),
                    firm_f: firms[f].clone(),
                    firm_g: firms[g].clone(),
                    product_code: p.code,
                    direction,
                },
            )
        })
        .collect();

    Ok(SynthOutput {
        dataset: Dataset {
            network,
            attributes,
            dyads,
        },
        planted,
    })
}

fn round_to(v: f64, digits: i32) -> f64 {
    let s = 10f64.powi(digits);
    (v * s).round() / s
}

#[allow(clippy::too_many_arguments)]
fn plant_motifs(
    spec: &SynthSpec,
    segments: &SegmentConfig,
    firm_segments: &[BTreeSet<String>],
    affiliation: &mut BTreeSet<(usize, usize)>,
    ownership: &mut BTreeSet<(usize, usize)>,
    flows: &mut BTreeMap<(usize, usize, String), f64>,
    value_dist: &LogNormal<f64>,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Planted>, SynthError> {
    let mut planted: Vec<Planted> = Vec::new();
    if spec.planted_motifs == 0 {
        return Ok(planted);
    }
    let nc = spec.n_countries;
    let by_segment: Vec<(String, Vec<usize>)> = segments
        .names()
        .map(|s| {
            let members = (0..firm_segments.len())
                .filter(|&f| firm_segments[f].contains(s))
                .collect::<Vec<_>>();
            (s.to_string(), members)
        })
        .filter(|(_, m)| m.len() >= 2)
        .collect();
    let infeasible = |placed| SynthError::Infeasible {
        wanted: spec.planted_motifs,
        placed,
    };
    if nc < 2 || by_segment.is_empty() {
        return Err(infeasible(0));
    }
    let holds = |aff: &BTreeSet<(usize, usize)>, p: &Planted| {
        aff.contains(&(p.f, p.a))
            && aff.contains(&(p.g, p.b))
            && !aff.contains(&(p.f, p.b))
            && !aff.contains(&(p.g, p.a))
    };
    let max_attempts = 200 * spec.planted_motifs;
    for _ in 0..max_attempts {
        if planted.len() == spec.planted_motifs {
            break;
        }
        let (segment, members) = by_segment.choose(rng).expect("non-empty");
        let pair: Vec<usize> = members.choose_multiple(rng, 2).copied().collect();
        let (f, g) = (pair[0], pair[1]);
        let mut cs: Vec<usize> = (0..nc).collect();
        cs.shuffle(rng);
        let (a, b) = (cs[0], cs[1]);
        let codes: Vec<&String> = segments.codes(segment).into_iter().flatten().collect();
        let code = (*codes.choose(rng).expect("segments are non-empty")).clone();
        let candidate = Planted {
            segment: segment.clone(),
            f,
            g,
            a,
            b,
            code,
        };
        // affiliations are only ever added, so check the candidate and all
        // earlier plants against the tentative set before committing
        let mut trial = affiliation.clone();
        trial.insert((f, a));
        trial.insert((g, b));
        if !holds(&trial, &candidate) || !planted.iter().all(|p| holds(&trial, p)) {
            continue;
        }
        *affiliation = trial;
        if !ownership.contains(&(f, g)) && !ownership.contains(&(g, f)) {
            ownership.insert((f, g));
        }
        let (fwd, back) = ((a, b, candidate.code.clone()), (b, a, candidate.code.clone()));
        if !flows.contains_key(&fwd) && !flows.contains_key(&back) {
            flows.insert(fwd, value_dist.sample(rng).round().max(1.0));
        }
        planted.push(candidate);
    }
    if planted.len() < spec.planted_motifs {
        return Err(infeasible(planted.len()));
    }
    Ok(planted)
}

pub const PLANTED_HEADER: [&str; 7] = [
    "segment",
    "iso3_a",
    "iso3_b",
    "firm_f",
    "firm_g",
    "product_code",
    "direction",
];

/// Ground-truth motif table `segment,iso3_a,iso3_b,firm_f,firm_g,product_code,direction`.
pub fn write_planted(path: &Path, planted: &[(SegmentMode, Motif)], preamble: Option<&str>) -> Result<(), csv::Error> {
    let rows = planted.iter().map(|(mode, m)| {
        (
            mode.to_string(),
            m.country_a.as_str(),
            m.country_b.as_str(),
            m.firm_f.as_str(),
            m.firm_g.as_str(),
            m.product_code.as_str(),
            m.direction,
        )
    });
    csvio::write(path, preamble, &PLANTED_HEADER, rows)
}
