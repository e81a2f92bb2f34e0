//! Input files, their validation, and the assembled multilevel network.

mod dataset;
mod segments;

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dataset::{
    CountryAttributes, CountryRecord, Dataset, DyadAttribute, DyadCovariates, DyadRecord, FirmSize, MultilevelNetwork,
    NetworkBuilder, NodeAttribute, RowError, TradeLayer,
};
pub use segments::SegmentConfig;

use crate::csvio;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("segment config: {0}")]
    Config(String),
    #[error("segment `{0}` declared twice")]
    DuplicateSegment(String),
    #[error("segment `{0}` has no product codes")]
    EmptySegment(String),
    #[error("product code `{code}` appears in both `{first}` and `{second}`")]
    DuplicateCode {
        code: String,
        first: String,
        second: String,
    },
    #[error("{file}:{line}: {source}")]
    Row { file: String, line: u64, source: RowError },
}

impl IngestError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        IngestError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn csv(path: &Path, source: csv::Error) -> Self {
        if let csv::ErrorKind::Io(_) = source.kind() {
            let csv::ErrorKind::Io(e) = source.into_kind() else {
                unreachable!()
            };
            return IngestError::io(path, e);
        }
        IngestError::Csv {
            path: path.to_path_buf(),
            source,
        }
    }

    /// True for failures to read or write files, as opposed to bad content.
    pub fn is_io(&self) -> bool {
        matches!(self, IngestError::Io { .. })
    }
}

/// Non-fatal findings surfaced during loading.
#[derive(Clone, Debug, PartialEq)]
pub enum IngestWarning {
    /// Self-loop row skipped under lenient ingestion.
    DroppedSelfLoop { file: String, line: u64, id: String },
    /// Trade rows below the configured minimum value.
    BelowMinTradeValue { rows: usize, min: f64 },
    /// Firm present in the firm table without any country affiliation.
    UnaffiliatedFirm(String),
}

impl fmt::Display for IngestWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IngestWarning::DroppedSelfLoop { file, line, id } => {
                write!(f, "{file}:{line}: dropped self-loop on `{id}`")
            }
            IngestWarning::BelowMinTradeValue { rows, min } => {
                write!(f, "dropped {rows} trade rows with value below {min}")
            }
            IngestWarning::UnaffiliatedFirm(id) => {
                write!(f, "firm `{id}` has no country affiliation")
            }
        }
    }
}

pub const TRADE_FILE: &str = "trade.csv";
pub const OWNERSHIP_FILE: &str = "ownership.csv";
pub const AFFILIATION_FILE: &str = "affiliation.csv";
pub const FIRMS_FILE: &str = "firms.csv";
pub const ATTRIBUTES_FILE: &str = "attributes.csv";
pub const DYADS_FILE: &str = "dyads.csv";

pub const TRADE_HEADER: [&str; 4] = ["reporter_iso3", "partner_iso3", "product_code", "value"];
pub const OWNERSHIP_HEADER: [&str; 2] = ["parent_firm_id", "child_firm_id"];
pub const AFFILIATION_HEADER: [&str; 2] = ["firm_id", "country_iso3"];
pub const FIRMS_HEADER: [&str; 4] = ["firm_id", "segment", "operating_revenue", "employees"];
pub const ATTRIBUTES_HEADER: [&str; 5] = ["iso3", "gdp", "gdp_per_capita", "rule_of_law", "contract_days"];
pub const DYADS_HEADER: [&str; 5] = ["iso3_a", "iso3_b", "distance_km", "common_language", "shared_border"];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetPaths {
    pub trade: PathBuf,
    pub ownership: PathBuf,
    pub affiliation: PathBuf,
    pub firms: PathBuf,
    pub attributes: PathBuf,
    pub dyads: PathBuf,
}

impl DatasetPaths {
    /// The six standard file names inside `dir`.
    pub fn in_dir(dir: impl AsRef<Path>) -> Self {
        let dir = dir.as_ref();
        Self {
            trade: dir.join(TRADE_FILE),
            ownership: dir.join(OWNERSHIP_FILE),
            affiliation: dir.join(AFFILIATION_FILE),
            firms: dir.join(FIRMS_FILE),
            attributes: dir.join(ATTRIBUTES_FILE),
            dyads: dir.join(DYADS_FILE),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LoadOptions {
    /// Trade rows with a value below this are discarded (after the positivity check).
    pub min_trade_value: f64,
    /// Skip self-loop rows with a warning instead of failing.
    pub lenient: bool,
}

impl Default for LoadOptions {
    fn default() -> Self {
        Self {
            min_trade_value: 0.0,
            lenient: false,
        }
    }
}

#[derive(Debug)]
pub struct Loaded {
    pub dataset: Dataset,
    pub warnings: Vec<IngestWarning>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TradeRow {
    reporter_iso3: String,
    partner_iso3: String,
    product_code: String,
    value: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct OwnershipRow {
    parent_firm_id: String,
    child_firm_id: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct AffiliationRow {
    firm_id: String,
    country_iso3: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct FirmRow {
    firm_id: String,
    segment: String,
    operating_revenue: Option<f64>,
    employees: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct AttributeRow {
    iso3: String,
    gdp: Option<f64>,
    gdp_per_capita: Option<f64>,
    rule_of_law: Option<f64>,
    contract_days: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct DyadRow {
    iso3_a: String,
    iso3_b: String,
    distance_km: f64,
    common_language: u8,
    shared_border: u8,
}

fn file_label(path: &Path) -> String {
    path.file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<(u64, T)>, IngestError> {
    let mut reader = csvio::reader(path).map_err(|e| IngestError::csv(path, e))?;
    let headers = reader.headers().map_err(|e| IngestError::csv(path, e))?.clone();
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| IngestError::csv(path, e))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let row: T = rec.deserialize(Some(&headers)).map_err(|e| IngestError::csv(path, e))?;
        out.push((line, row));
    }
    Ok(out)
}

/// Reads, validates and cross-links the six input files.
pub fn load_dataset(
    paths: &DatasetPaths,
    segments: &SegmentConfig,
    options: &LoadOptions,
) -> Result<Loaded, IngestError> {
    let mut warnings = Vec::new();
    let row_err = |path: &Path, line: u64| {
        let file = file_label(path);
        move |source: RowError| IngestError::Row {
            file: file.clone(),
            line,
            source,
        }
    };

    let attr_rows: Vec<(u64, AttributeRow)> = read_rows(&paths.attributes)?;
    let mut records = BTreeMap::new();
    for (line, row) in &attr_rows {
        let err = row_err(&paths.attributes, *line);
        if let Some(days) = row.contract_days {
            if days < 0.0 {
                return Err(err(RowError::Invalid {
                    field: "contract_days",
                    message: format!("must be >= 0, got {days}"),
                }));
            }
        }
        let rec = CountryRecord {
            gdp: row.gdp,
            gdp_per_capita: row.gdp_per_capita,
            rule_of_law: row.rule_of_law,
            contract_days: row.contract_days,
        };
        if records.insert(row.iso3.clone(), rec).is_some() {
            return Err(err(RowError::Duplicate));
        }
    }

    let firm_rows: Vec<(u64, FirmRow)> = read_rows(&paths.firms)?;
    let mut builder = NetworkBuilder::new(
        segments.clone(),
        records.keys().cloned(),
        firm_rows.iter().map(|(_, r)| r.firm_id.clone()),
    );
    for (line, row) in &firm_rows {
        let size = FirmSize {
            operating_revenue: row.operating_revenue,
            employees: row.employees,
        };
        builder
            .add_firm_segment(&row.firm_id, &row.segment, size)
            .map_err(row_err(&paths.firms, *line))?;
    }

    let mut below_min = 0;
    for (line, row) in read_rows::<TradeRow>(&paths.trade)? {
        if options.lenient && row.reporter_iso3 == row.partner_iso3 {
            warnings.push(IngestWarning::DroppedSelfLoop {
                file: file_label(&paths.trade),
                line,
                id: row.reporter_iso3,
            });
            continue;
        }
        if row.value > 0.0 && row.value < options.min_trade_value {
            below_min += 1;
            continue;
        }
        builder
            .add_trade(&row.reporter_iso3, &row.partner_iso3, &row.product_code, row.value)
            .map_err(row_err(&paths.trade, line))?;
    }
    if below_min > 0 {
        warnings.push(IngestWarning::BelowMinTradeValue {
            rows: below_min,
            min: options.min_trade_value,
        });
    }

    for (line, row) in read_rows::<OwnershipRow>(&paths.ownership)? {
        if options.lenient && row.parent_firm_id == row.child_firm_id {
            warnings.push(IngestWarning::DroppedSelfLoop {
                file: file_label(&paths.ownership),
                line,
                id: row.parent_firm_id,
            });
            continue;
        }
        builder
            .add_ownership(&row.parent_firm_id, &row.child_firm_id)
            .map_err(row_err(&paths.ownership, line))?;
    }

    for (line, row) in read_rows::<AffiliationRow>(&paths.affiliation)? {
        builder
            .add_affiliation(&row.firm_id, &row.country_iso3)
            .map_err(row_err(&paths.affiliation, line))?;
    }

    let network = builder.build();
    warnings.extend(
        network
            .unaffiliated_firms()
            .into_iter()
            .map(|f| IngestWarning::UnaffiliatedFirm(f.to_string())),
    );

    let mut dyads = DyadCovariates::default();
    for (line, row) in read_rows::<DyadRow>(&paths.dyads)? {
        let err = row_err(&paths.dyads, line);
        for id in [&row.iso3_a, &row.iso3_b] {
            if !network.countries.contains(id) {
                return Err(err(RowError::UnknownCountry(id.clone())));
            }
        }
        let rec = DyadRecord {
            distance_km: row.distance_km,
            common_language: row.common_language,
            shared_border: row.shared_border,
        };
        dyads.insert(&row.iso3_a, &row.iso3_b, rec).map_err(err)?;
    }

    let attributes = CountryAttributes::new(records, &network);
    Ok(Loaded {
        dataset: Dataset {
            network,
            attributes,
            dyads,
        },
        warnings,
    })
}

/// Writes the dataset as the six standard CSV files in `dir`, rows sorted.
pub fn write_dataset(dataset: &Dataset, dir: impl AsRef<Path>) -> Result<DatasetPaths, IngestError> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| IngestError::io(dir, e))?;
    let paths = DatasetPaths::in_dir(dir);
    let net = &dataset.network;
    let country = |i: usize| net.countries.id(i).to_string();
    let firm = |i: usize| net.firms.id(i).to_string();

    let trade = net.trade.flows().map(|(a, b, code, value)| TradeRow {
        reporter_iso3: country(a),
        partner_iso3: country(b),
        product_code: code.to_string(),
        value,
    });
    csvio::write(&paths.trade, None, &TRADE_HEADER, trade).map_err(|e| IngestError::csv(&paths.trade, e))?;

    let ownership = net.ownership.edges().map(|(p, c)| OwnershipRow {
        parent_firm_id: firm(p),
        child_firm_id: firm(c),
    });
    csvio::write(&paths.ownership, None, &OWNERSHIP_HEADER, ownership)
        .map_err(|e| IngestError::csv(&paths.ownership, e))?;

    let affiliation = net.affiliation.edges().map(|(f, c)| AffiliationRow {
        firm_id: firm(f),
        country_iso3: country(c),
    });
    csvio::write(&paths.affiliation, None, &AFFILIATION_HEADER, affiliation)
        .map_err(|e| IngestError::csv(&paths.affiliation, e))?;

    let firms = (0..net.firms.len()).flat_map(|f| {
        let size = net.firm_size[f];
        net.firm_segments[f].iter().map(move |s| FirmRow {
            firm_id: firm(f),
            segment: s.clone(),
            operating_revenue: size.operating_revenue,
            employees: size.employees,
        })
    });
    csvio::write(&paths.firms, None, &FIRMS_HEADER, firms).map_err(|e| IngestError::csv(&paths.firms, e))?;

    let attrs = dataset.attributes.records().iter().map(|(iso3, r)| AttributeRow {
        iso3: iso3.clone(),
        gdp: r.gdp,
        gdp_per_capita: r.gdp_per_capita,
        rule_of_law: r.rule_of_law,
        contract_days: r.contract_days,
    });
    csvio::write(&paths.attributes, None, &ATTRIBUTES_HEADER, attrs)
        .map_err(|e| IngestError::csv(&paths.attributes, e))?;

    let dyads = dataset.dyads.iter().map(|(a, b, r)| DyadRow {
        iso3_a: a.to_string(),
        iso3_b: b.to_string(),
        distance_km: r.distance_km,
        common_language: r.common_language,
        shared_border: r.shared_border,
    });
    csvio::write(&paths.dyads, None, &DYADS_HEADER, dyads).map_err(|e| IngestError::csv(&paths.dyads, e))?;
    Ok(paths)
}
