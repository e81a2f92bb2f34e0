//! Run configuration: a TOML file, command-line overrides and defaults, in
//! that order of precedence.

use std::path::{Path, PathBuf};

use intrafirm_core::ingest::{DatasetPaths, DyadAttribute, NodeAttribute, SegmentConfig};
use intrafirm_core::motif::SegmentMode;
use intrafirm_core::netstats::CentralizationNorm;
use intrafirm_ergm::terms::DEFAULT_DECAY;
use intrafirm_ergm::{standard_terms, Covariates, ErgmModel, McmcParams, MleOptions, TermRegistry, TermSpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputConfig {
    /// Directory holding the six standard input files.
    pub dir: Option<PathBuf>,
    pub trade: Option<PathBuf>,
    pub ownership: Option<PathBuf>,
    pub affiliation: Option<PathBuf>,
    pub firms: Option<PathBuf>,
    pub attributes: Option<PathBuf>,
    pub dyads: Option<PathBuf>,
    /// Segment definition TOML; the built-in automotive table when absent.
    pub segments: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    /// Decay for geometrically weighted terms that do not set their own.
    pub decay: f64,
    /// Term list; the standard 17-term specification when absent.
    pub terms: Option<Vec<TermSpec>>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            decay: DEFAULT_DECAY,
            terms: None,
        }
    }
}

/// Sampler settings; seeds are derived per mode from the master seed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McmcConfig {
    pub burn_in: u64,
    pub interval: u64,
    pub sample_size: usize,
    pub chains: usize,
    pub min_acceptance: f64,
    pub absorb_limit: u64,
}

impl Default for McmcConfig {
    fn default() -> Self {
        let p = McmcParams::default();
        Self {
            burn_in: p.burn_in,
            interval: p.interval,
            sample_size: p.sample_size,
            chains: p.chains,
            min_acceptance: p.min_acceptance,
            absorb_limit: p.absorb_limit,
        }
    }
}

impl McmcConfig {
    pub fn params(&self, seed: u64) -> McmcParams {
        McmcParams {
            burn_in: self.burn_in,
            interval: self.interval,
            sample_size: self.sample_size,
            chains: self.chains,
            seed,
            min_acceptance: self.min_acceptance,
            absorb_limit: self.absorb_limit,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GofConfig {
    pub n_sim: usize,
}

impl Default for GofConfig {
    fn default() -> Self {
        Self { n_sim: 100 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub out: PathBuf,
    /// Segment names and/or `inter`; every configured segment plus `inter`
    /// when empty.
    pub modes: Vec<String>,
    pub min_trade_value: f64,
    /// Keep countries that trade qualifying codes but carry no motif.
    pub include_isolates: bool,
    pub log_gdp: bool,
    pub lenient: bool,
    pub drop_missing: bool,
    pub ownership_closure: bool,
    pub centralization: CentralizationNorm,
    pub input: InputConfig,
    pub model: ModelConfig,
    pub mcmc: McmcConfig,
    pub mle: MleOptions,
    pub gof: GofConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            out: PathBuf::from("out"),
            modes: Vec::new(),
            min_trade_value: 0.0,
            include_isolates: false,
            log_gdp: false,
            lenient: false,
            drop_missing: false,
            ownership_closure: false,
            centralization: CentralizationNorm::default(),
            input: InputConfig::default(),
            model: ModelConfig::default(),
            mcmc: McmcConfig::default(),
            mle: MleOptions::default(),
            gof: GofConfig::default(),
        }
    }
}

/// Command-line values that replace the file's.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub modes: Option<Vec<String>>,
    pub min_trade_value: Option<f64>,
    pub include_isolates: bool,
    pub log_gdp: bool,
    pub input_dir: Option<PathBuf>,
    pub segment_config: Option<PathBuf>,
}

fn rebase(base: &Path, p: &mut Option<PathBuf>) {
    if let Some(path) = p {
        if path.is_relative() {
            *path = base.join(&*path);
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))
    }

    /// Reads a config file; relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg =
            Self::from_toml_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let i = &mut cfg.input;
        for p in [
            &mut i.dir,
            &mut i.trade,
            &mut i.ownership,
            &mut i.affiliation,
            &mut i.firms,
            &mut i.attributes,
            &mut i.dyads,
            &mut i.segments,
        ] {
            rebase(base, p);
        }
        if cfg.out.is_relative() {
            cfg.out = base.join(&cfg.out);
        }
        Ok(cfg)
    }

    /// File (or default) configuration with `overrides` applied on top.
    pub fn resolve(file: Option<&Path>, overrides: &Overrides) -> Result<Self, CliError> {
        let mut cfg = match file {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        cfg.apply(overrides);
        Ok(cfg)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(out) = &o.out {
            self.out = out.clone();
        }
        if let Some(m) = &o.modes {
            self.modes = m.clone();
        }
        if let Some(v) = o.min_trade_value {
            self.min_trade_value = v;
        }
        self.include_isolates |= o.include_isolates;
        self.log_gdp |= o.log_gdp;
        if let Some(d) = &o.input_dir {
            self.input.dir = Some(d.clone());
        }
        if let Some(s) = &o.segment_config {
            self.input.segments = Some(s.clone());
        }
    }

    /// Input files: `dir` joined with the standard names, each replaceable
    /// by an explicit path. Without `dir` all six paths must be given.
    pub fn dataset_paths(&self) -> Result<DatasetPaths, CliError> {
        let i = &self.input;
        let explicit = [
            &i.trade,
            &i.ownership,
            &i.affiliation,
            &i.firms,
            &i.attributes,
            &i.dyads,
        ];
        if i.dir.is_none() && explicit.iter().any(|p| p.is_none()) {
            return Err(CliError::Validation(
                "no input configured: set [input] dir (or --input) or all six file paths".into(),
            ));
        }
        let mut p = DatasetPaths::in_dir(i.dir.clone().unwrap_or_default());
        for (slot, given) in [
            (&mut p.trade, &i.trade),
            (&mut p.ownership, &i.ownership),
            (&mut p.affiliation, &i.affiliation),
            (&mut p.firms, &i.firms),
            (&mut p.attributes, &i.attributes),
            (&mut p.dyads, &i.dyads),
        ] {
            if let Some(g) = given {
                *slot = g.clone();
            }
        }
        Ok(p)
    }

    pub fn has_input(&self) -> bool {
        self.dataset_paths().is_ok()
    }

    pub fn segment_config(&self) -> Result<SegmentConfig, CliError> {
        match &self.input.segments {
            Some(p) => SegmentConfig::load(p).map_err(CliError::from),
            None => Ok(SegmentConfig::automotive()),
        }
    }

    /// Requested modes checked against `segments`, in request order.
    pub fn modes(&self, segments: &SegmentConfig) -> Result<Vec<SegmentMode>, CliError> {
        if self.modes.is_empty() {
            let mut all: Vec<SegmentMode> = segments.names().map(|s| SegmentMode::Intra(s.into())).collect();
            all.push(SegmentMode::Inter);
            return Ok(all);
        }
        let mut out = Vec::new();
        for name in &self.modes {
            let mode: SegmentMode = name.trim().parse().expect("infallible");
            if let SegmentMode::Intra(s) = &mode {
                if !segments.contains(s) {
                    let known: Vec<&str> = segments.names().collect();
                    return Err(CliError::Validation(format!(
                        "unknown segment `{s}` (configured: {}, or `inter`)",
                        known.join(", ")
                    )));
                }
            }
            if out.contains(&mode) {
                return Err(CliError::Validation(format!("mode `{mode}` listed twice")));
            }
            out.push(mode);
        }
        Ok(out)
    }

    /// Term list with the model-wide decay filled in for geometric terms.
    pub fn terms(&self) -> Vec<TermSpec> {
        let Some(terms) = &self.model.terms else {
            return standard_terms(self.model.decay);
        };
        let registry = TermRegistry::builtin();
        terms
            .iter()
            .cloned()
            .map(|mut t| {
                if t.decay.is_none() && registry.is_geometric(&t.kind) == Some(true) {
                    t.decay = Some(self.model.decay);
                }
                t
            })
            .collect()
    }

    /// Checks everything that can be checked without reading input data.
    pub fn validate(&self) -> Result<(SegmentConfig, Vec<SegmentMode>), CliError> {
        let segments = self.segment_config()?;
        let modes = self.modes(&segments)?;
        if !(self.min_trade_value >= 0.0) {
            return Err(CliError::Validation("min_trade_value must be non-negative".into()));
        }
        self.mcmc
            .params(self.seed)
            .validate()
            .map_err(|e| CliError::Validation(e.to_string()))?;
        if self.gof.n_sim < intrafirm_ergm::gof::MIN_SIMULATIONS {
            return Err(CliError::Validation(format!(
                "gof.n_sim must be at least {}",
                intrafirm_ergm::gof::MIN_SIMULATIONS
            )));
        }
        if self.mle.bridges == 0 || self.mle.max_iterations == 0 {
            return Err(CliError::Validation(
                "mle.bridges and mle.max_iterations must be positive".into(),
            ));
        }
        // build the model on a placeholder graph carrying every covariate
        let mut cov = Covariates::new(2);
        for a in NodeAttribute::ALL {
            cov.insert_node(a.name(), vec![0.0; 2]).expect("shape matches");
        }
        for d in DyadAttribute::ALL {
            cov.insert_dyad_with(d.name(), |_, _| 0.0).expect("shape matches");
        }
        let terms = self.terms();
        let model = ErgmModel::new(2, terms, &cov).map_err(|e| CliError::Validation(format!("model: {e}")))?;
        if let Some(init) = &self.mle.init {
            if init.len() != model.len() {
                return Err(CliError::Validation(format!(
                    "mle.init has {} values for {} terms",
                    init.len(),
                    model.len()
                )));
            }
        }
        Ok((segments, modes))
    }

    /// SHA-256 of the configuration, ignoring the output directory.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out = PathBuf::new();
        let text = serde_json::to_string(&c).expect("config serializes");
        hex(&Sha256::digest(text.as_bytes()))
    }
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
