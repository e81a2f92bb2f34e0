//! The analysis stages and the full run. Each stage writes self-describing
//! artifacts under the output directory: CSV files open with a
//! `# stage=... config_hash=...` line, JSON files carry a `meta` object.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use intrafirm_core::csvio;
use intrafirm_core::ingest::{load_dataset, write_dataset, Dataset, LoadOptions, Loaded, SegmentConfig};
use intrafirm_core::motif::{
    build_filtered_network, detect_motifs, firm_descriptives, read_edge_list, trading_countries, DetectOptions,
    FilteredTradeNetwork, FirmDescriptives, SegmentMode,
};
use intrafirm_core::netstats::{CentralizationNorm, NetworkSummary, SUMMARY_HEADER};
use intrafirm_core::synth::{generate_synthetic, write_planted, SynthSpec};
use intrafirm_core::Graph;
use intrafirm_ergm::report::{format_fit, write_table};
use intrafirm_ergm::{
    bind_covariates, derive_seed, goodness_of_fit, mcmc_mle, sample_networks, BindOptions, BoundNetwork, ErgmFit,
    ErgmModel, GofReport, Sample, TermSpec,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{hex, RunConfig};
use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EDGES_FILE: &str = "edges.csv";
pub const MOTIFS_FILE: &str = "motifs.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const FIT_FILE: &str = "fit.json";
pub const FIT_TABLE_FILE: &str = "fit_table.csv";
pub const GOF_FILE: &str = "gof.json";
pub const SIMULATE_FILE: &str = "simulate.csv";
pub const BUILD_FILE: &str = "build.json";
pub const TABLE_FILE: &str = "models.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Histogram families whose bins count toward GOF coverage.
pub const COVERAGE_FAMILIES: [&str; 3] = ["degree", "esp", "geodesic"];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Meta {
    pub stage: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    pub config_hash: String,
    pub version: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitArtifact {
    pub meta: Meta,
    /// Countries removed for missing attribute values.
    pub dropped: Vec<String>,
    pub fit: ErgmFit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coverage {
    pub inside: usize,
    pub total: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GofArtifact {
    pub meta: Meta,
    pub coverage: Coverage,
    pub report: GofReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct BuildSummary {
    pub meta: Meta,
    pub countries: usize,
    pub firms: usize,
    pub trade_flows: usize,
    pub ownership_ties: usize,
    pub affiliations: usize,
    pub firm_descriptives: Vec<FirmDescriptives>,
    pub warnings: Vec<String>,
}

/// Column name used for a mode in summary and model tables.
pub fn mode_label(mode: &SegmentMode) -> String {
    match mode {
        SegmentMode::Intra(s) => s.clone(),
        SegmentMode::Inter => "Inter Segment".into(),
    }
}

/// A validated configuration with everything derived from it.
#[derive(Clone, Debug)]
pub struct Context {
    pub cfg: RunConfig,
    pub segments: SegmentConfig,
    pub modes: Vec<SegmentMode>,
    pub config_hash: String,
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("artifact serializes");
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path, producer: &'static str) -> Result<T, CliError> {
    if !path.exists() {
        return Err(CliError::MissingArtifact {
            path: path.to_path_buf(),
            producer,
        });
    }
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::io(path, e))
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> CliError + '_ {
    move |e| CliError::io(path, e)
}

fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(hex(&Sha256::digest(&bytes)))
}

impl Context {
    /// Validates `cfg` without touching input data.
    pub fn new(cfg: RunConfig) -> Result<Self, CliError> {
        let (segments, modes) = cfg.validate()?;
        let config_hash = cfg.hash();
        Ok(Self {
            cfg,
            segments,
            modes,
            config_hash,
        })
    }

    pub fn meta(&self, stage: &str, mode: Option<&SegmentMode>) -> Meta {
        Meta {
            stage: stage.into(),
            mode: mode.map(SegmentMode::slug),
            config_hash: self.config_hash.clone(),
            version: VERSION.into(),
        }
    }

    pub fn preamble(&self, stage: &str, mode: Option<&SegmentMode>) -> String {
        let mode = mode.map(|m| format!(" mode={}", m.slug())).unwrap_or_default();
        format!("stage={stage}{mode} config_hash={} version={VERSION}", self.config_hash)
    }

    pub fn mode_dir(&self, mode: &SegmentMode) -> PathBuf {
        self.cfg.out.join(mode.slug())
    }

    /// Seed for `stage` of `mode`, derived from the master seed.
    pub fn seed(&self, mode: &SegmentMode, stage: &str) -> u64 {
        derive_seed(self.cfg.seed, &format!("{}/{stage}", mode.slug()))
    }

    pub fn load(&self) -> Result<Loaded, CliError> {
        let paths = self.cfg.dataset_paths()?;
        let opts = LoadOptions {
            min_trade_value: self.cfg.min_trade_value,
            lenient: self.cfg.lenient,
        };
        Ok(load_dataset(&paths, &self.segments, &opts)?)
    }

    fn bind_options(&self, mode: &SegmentMode) -> BindOptions {
        BindOptions {
            log_gdp: self.cfg.log_gdp,
            drop_missing: self.cfg.drop_missing,
            segment: mode.segment().map(str::to_string),
        }
    }

    /// Covariates for `graph` and the model over them.
    pub fn model(
        &self,
        dataset: &Dataset,
        mode: &SegmentMode,
        graph: &Graph,
        specs: Vec<TermSpec>,
    ) -> Result<(BoundNetwork, ErgmModel), CliError> {
        let bound = bind_covariates(
            graph,
            &specs,
            &dataset.attributes,
            &dataset.dyads,
            &self.bind_options(mode),
        )?;
        let model = ErgmModel::new(bound.graph.node_count(), specs, &bound.covariates)
            .map_err(|e| CliError::Validation(format!("model: {e}")))?;
        Ok((bound, model))
    }

    fn artifact(&self, mode: &SegmentMode, file: &str) -> PathBuf {
        self.mode_dir(mode).join(file)
    }

    /// The filtered network exported by the filter stage.
    pub fn read_filtered(&self, mode: &SegmentMode) -> Result<Graph, CliError> {
        let path = self.artifact(mode, EDGES_FILE);
        if !path.exists() {
            return Err(CliError::MissingArtifact {
                path,
                producer: "filter",
            });
        }
        Ok(read_edge_list(&path)?)
    }

    pub fn read_fit(&self, mode: &SegmentMode) -> Result<FitArtifact, CliError> {
        let art: FitArtifact = read_json(&self.artifact(mode, FIT_FILE), "fit")?;
        if art.meta.config_hash != self.config_hash {
            eprintln!(
                "warning: {} was produced under config {}, current config is {}",
                self.artifact(mode, FIT_FILE).display(),
                art.meta.config_hash,
                self.config_hash
            );
        }
        Ok(art)
    }
}

pub fn build_stage(ctx: &Context, loaded: &Loaded) -> Result<(BuildSummary, PathBuf), CliError> {
    ensure_dir(&ctx.cfg.out)?;
    let net = &loaded.dataset.network;
    let firm_descriptives = ctx
        .segments
        .names()
        .map(|s| firm_descriptives(net, s))
        .collect::<Result<Vec<_>, _>>()?;
    let summary = BuildSummary {
        meta: ctx.meta("build", None),
        countries: net.countries.len(),
        firms: net.firms.len(),
        trade_flows: net.trade.flow_count(),
        ownership_ties: net.ownership.edge_count(),
        affiliations: net.affiliation.edge_count(),
        firm_descriptives,
        warnings: loaded.warnings.iter().map(ToString::to_string).collect(),
    };
    let path = ctx.cfg.out.join(BUILD_FILE);
    write_json(&path, &summary)?;
    Ok((summary, path))
}

pub fn filter_stage(
    ctx: &Context,
    dataset: &Dataset,
    mode: &SegmentMode,
) -> Result<(FilteredTradeNetwork, Vec<PathBuf>), CliError> {
    let net = &dataset.network;
    let opts = DetectOptions {
        ownership_closure: ctx.cfg.ownership_closure,
    };
    let motifs = detect_motifs(net, mode, &opts)?;
    let extra = if ctx.cfg.include_isolates {
        trading_countries(net, mode)
    } else {
        Vec::new()
    };
    let filtered = build_filtered_network(mode.clone(), &motifs, extra);
    let dir = ctx.mode_dir(mode);
    ensure_dir(&dir)?;
    let preamble = ctx.preamble("filter", Some(mode));
    let edges = dir.join(EDGES_FILE);
    filtered
        .write_edge_list(&edges, Some(&preamble))
        .map_err(csv_err(&edges))?;
    let prov = dir.join(MOTIFS_FILE);
    filtered
        .write_provenance(&prov, Some(&preamble))
        .map_err(csv_err(&prov))?;
    Ok((filtered, vec![edges, prov]))
}

pub fn summarize(name: &str, g: &Graph, norm: CentralizationNorm) -> NetworkSummary {
    NetworkSummary::of(name, g, norm)
}

/// Writes a descriptive-statistics table with one row per summary.
pub fn write_summaries(path: &Path, preamble: &str, rows: &[NetworkSummary]) -> Result<(), CliError> {
    csvio::write(
        path,
        Some(preamble),
        &SUMMARY_HEADER,
        rows.iter().map(NetworkSummary::csv_row),
    )
    .map_err(csv_err(path))
}

pub fn stats_stage(ctx: &Context, mode: &SegmentMode, g: &Graph) -> Result<(NetworkSummary, PathBuf), CliError> {
    let summary = summarize(&mode_label(mode), g, ctx.cfg.centralization);
    let dir = ctx.mode_dir(mode);
    ensure_dir(&dir)?;
    let path = dir.join(SUMMARY_FILE);
    write_summaries(
        &path,
        &ctx.preamble("stats", Some(mode)),
        std::slice::from_ref(&summary),
    )?;
    Ok((summary, path))
}

pub fn fit_stage(
    ctx: &Context,
    dataset: &Dataset,
    mode: &SegmentMode,
    g: &Graph,
) -> Result<(FitArtifact, Vec<PathBuf>), CliError> {
    let (bound, model) = ctx.model(dataset, mode, g, ctx.cfg.terms())?;
    let params = ctx.cfg.mcmc.params(ctx.seed(mode, "fit"));
    let fit = mcmc_mle(&model, &bound.graph, &params, &ctx.cfg.mle)?;
    let art = FitArtifact {
        meta: ctx.meta("fit", Some(mode)),
        dropped: bound.dropped,
        fit,
    };
    let dir = ctx.mode_dir(mode);
    ensure_dir(&dir)?;
    let json = dir.join(FIT_FILE);
    write_json(&json, &art)?;
    let table = dir.join(FIT_TABLE_FILE);
    write_table(
        &table,
        Some(&ctx.preamble("fit", Some(mode))),
        &[(mode_label(mode), format_fit(&art.fit))],
    )
    .map_err(csv_err(&table))?;
    Ok((art, vec![json, table]))
}

pub fn gof_stage(
    ctx: &Context,
    dataset: &Dataset,
    mode: &SegmentMode,
    g: &Graph,
    fit: &ErgmFit,
) -> Result<(GofArtifact, Vec<PathBuf>), CliError> {
    let (bound, model) = ctx.model(dataset, mode, g, fit.terms.clone())?;
    let params = ctx.cfg.mcmc.params(ctx.seed(mode, "gof"));
    let report = goodness_of_fit(&bound.graph, &model, &fit.theta, ctx.cfg.gof.n_sim, &params)?;
    let (inside, total) = report.coverage(&COVERAGE_FAMILIES);
    let dir = ctx.mode_dir(mode);
    ensure_dir(&dir)?;
    report
        .write_csv(&dir, Some(&ctx.preamble("gof", Some(mode))))
        .map_err(csv_err(&dir))?;
    let mut written: Vec<PathBuf> = report
        .families
        .iter()
        .map(|f| dir.join(format!("gof_{}.csv", f.name)))
        .collect();
    let art = GofArtifact {
        meta: ctx.meta("gof", Some(mode)),
        coverage: Coverage { inside, total },
        report,
    };
    let json = dir.join(GOF_FILE);
    write_json(&json, &art)?;
    written.push(json);
    Ok((art, written))
}

/// Draws `n` networks at the fitted parameters; writes their statistics and,
/// with `keep_graphs`, each network as an edge list under `simulated/`.
pub fn simulate_stage(
    ctx: &Context,
    dataset: &Dataset,
    mode: &SegmentMode,
    g: &Graph,
    fit: &ErgmFit,
    n: usize,
    keep_graphs: bool,
) -> Result<(Sample, Vec<PathBuf>), CliError> {
    let (bound, model) = ctx.model(dataset, mode, g, fit.terms.clone())?;
    let params = intrafirm_ergm::McmcParams {
        sample_size: n,
        ..ctx.cfg.mcmc.params(ctx.seed(mode, "simulate"))
    };
    let sample = sample_networks(&model, &fit.theta, &bound.graph, &params, keep_graphs)?;
    let dir = ctx.mode_dir(mode);
    ensure_dir(&dir)?;
    let preamble = ctx.preamble("simulate", Some(mode));
    let path = dir.join(SIMULATE_FILE);
    let mut header = vec!["draw".to_string()];
    header.extend(model.labels().iter().cloned());
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = sample.stats.iter().enumerate().map(|(k, z)| {
        let mut row = vec![k.to_string()];
        row.extend(z.iter().map(|v| v.to_string()));
        row
    });
    csvio::write(&path, Some(&preamble), &header, rows).map_err(csv_err(&path))?;
    let mut written = vec![path];
    if keep_graphs {
        let sim_dir = dir.join("simulated");
        ensure_dir(&sim_dir)?;
        let width = n.to_string().len();
        for (k, h) in sample.graphs.iter().enumerate() {
            let p = sim_dir.join(format!("draw_{k:0width$}.csv"));
            // edge-list layout of the filter stage, isolates with an empty partner
            let rows = h
                .id_edges()
                .map(|(a, b)| [a.to_string(), b.to_string(), "0".into()])
                .chain(
                    (0..h.node_count())
                        .filter(|&v| h.degree(v) == 0)
                        .map(|v| [h.id(v).to_string(), String::new(), "0".into()]),
                );
            csvio::write(&p, Some(&preamble), &intrafirm_core::motif::EDGE_LIST_HEADER, rows).map_err(csv_err(&p))?;
            written.push(p);
        }
    }
    Ok((sample, written))
}

/// What one segment mode produced during a run.
#[derive(Debug)]
pub struct ModeOutcome {
    pub mode: SegmentMode,
    pub completed: Vec<&'static str>,
    pub motifs: Option<usize>,
    pub summary: Option<NetworkSummary>,
    pub fit: Option<FitArtifact>,
    pub gof: Option<GofArtifact>,
    pub error: Option<CliError>,
    pub written: Vec<PathBuf>,
}

fn run_mode(ctx: &Context, dataset: &Dataset, mode: &SegmentMode) -> ModeOutcome {
    let mut out = ModeOutcome {
        mode: mode.clone(),
        completed: Vec::new(),
        motifs: None,
        summary: None,
        fit: None,
        gof: None,
        error: None,
        written: Vec::new(),
    };
    let label = mode_label(mode);
    let fail = |out: &mut ModeOutcome, stage, e: CliError| out.error = Some(e.in_stage(&label, stage));

    let filtered = match filter_stage(ctx, dataset, mode) {
        Ok((f, w)) => {
            out.written.extend(w);
            out.motifs = Some(f.motif_count());
            out.completed.push("filter");
            f
        }
        Err(e) => {
            fail(&mut out, "filter", e);
            return out;
        }
    };
    let g = &filtered.graph;
    match stats_stage(ctx, mode, g) {
        Ok((s, p)) => {
            out.written.push(p);
            out.summary = Some(s);
            out.completed.push("stats");
        }
        Err(e) => {
            fail(&mut out, "stats", e);
            return out;
        }
    }
    let fit = match fit_stage(ctx, dataset, mode, g) {
        Ok((f, w)) => {
            out.written.extend(w);
            out.completed.push("fit");
            f
        }
        Err(e) => {
            fail(&mut out, "fit", e);
            return out;
        }
    };
    match gof_stage(ctx, dataset, mode, g, &fit.fit) {
        Ok((r, w)) => {
            out.written.extend(w);
            out.gof = Some(r);
            out.completed.push("gof");
        }
        Err(e) => fail(&mut out, "gof", e),
    }
    out.fit = Some(fit);
    out
}

#[derive(Debug)]
pub struct RunReport {
    pub config_hash: String,
    pub warnings: Vec<String>,
    pub outcomes: Vec<ModeOutcome>,
    pub written: Vec<PathBuf>,
}

impl RunReport {
    /// 0 when every mode completed, otherwise the largest failure code.
    pub fn exit_code(&self) -> i32 {
        self.outcomes
            .iter()
            .filter_map(|o| o.error.as_ref().map(CliError::exit_code))
            .max()
            .unwrap_or(0)
    }

    pub fn errors(&self) -> impl Iterator<Item = &CliError> {
        self.outcomes.iter().filter_map(|o| o.error.as_ref())
    }
}

#[derive(Serialize)]
struct ManifestMode {
    mode: String,
    slug: String,
    seeds: BTreeMap<&'static str, u64>,
    status: &'static str,
    completed: Vec<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    motifs: Option<usize>,
}

#[derive(Serialize)]
struct Manifest {
    tool: &'static str,
    version: &'static str,
    config_hash: String,
    seed: u64,
    config: RunConfig,
    inputs: BTreeMap<&'static str, String>,
    modes: Vec<ManifestMode>,
    /// SHA-256 of every artifact, keyed by path relative to the output directory.
    artifacts: BTreeMap<String, String>,
}

fn write_manifest(ctx: &Context, outcomes: &[ModeOutcome], written: &[PathBuf]) -> Result<PathBuf, CliError> {
    let paths = ctx.cfg.dataset_paths()?;
    let mut inputs = BTreeMap::new();
    for (name, p) in [
        ("trade", &paths.trade),
        ("ownership", &paths.ownership),
        ("affiliation", &paths.affiliation),
        ("firms", &paths.firms),
        ("attributes", &paths.attributes),
        ("dyads", &paths.dyads),
    ] {
        inputs.insert(name, sha256_file(p)?);
    }
    if let Some(p) = &ctx.cfg.input.segments {
        inputs.insert("segments", sha256_file(p)?);
    }
    let mut artifacts = BTreeMap::new();
    for p in written {
        let rel = p.strip_prefix(&ctx.cfg.out).unwrap_or(p);
        let key = rel
            .components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/");
        artifacts.insert(key, sha256_file(p)?);
    }
    let modes = outcomes
        .iter()
        .map(|o| ManifestMode {
            mode: o.mode.to_string(),
            slug: o.mode.slug(),
            seeds: ["fit", "gof"].into_iter().map(|s| (s, ctx.seed(&o.mode, s))).collect(),
            status: if o.error.is_some() { "failed" } else { "ok" },
            completed: o.completed.clone(),
            error: o.error.as_ref().map(ToString::to_string),
            motifs: o.motifs,
        })
        .collect();
    let mut config = ctx.cfg.clone();
    config.out = PathBuf::new();
    let manifest = Manifest {
        tool: "intrafirm",
        version: VERSION,
        config_hash: ctx.config_hash.clone(),
        seed: ctx.cfg.seed,
        config,
        inputs,
        modes,
        artifacts,
    };
    let path = ctx.cfg.out.join(MANIFEST_FILE);
    write_json(&path, &manifest)?;
    Ok(path)
}

/// Combined model table with one column per fitted mode.
pub fn write_model_table(ctx: &Context, fits: &[(SegmentMode, &ErgmFit)]) -> Result<PathBuf, CliError> {
    let path = ctx.cfg.out.join(TABLE_FILE);
    let columns: Vec<_> = fits.iter().map(|(m, f)| (mode_label(m), format_fit(f))).collect();
    write_table(&path, Some(&ctx.preamble("fit", None)), &columns).map_err(csv_err(&path))?;
    Ok(path)
}

/// Validate, build, then filter, stats, fit and gof for every mode (modes in
/// parallel). A failing stage stops its own mode only; failures are listed
/// in the report and the manifest.
pub fn run_pipeline(cfg: RunConfig) -> Result<RunReport, CliError> {
    let ctx = Context::new(cfg)?;
    let loaded = ctx.load()?;
    let (build, build_path) = build_stage(&ctx, &loaded)?;
    let outcomes: Vec<ModeOutcome> = ctx
        .modes
        .par_iter()
        .map(|m| run_mode(&ctx, &loaded.dataset, m))
        .collect();

    let mut written = vec![build_path];
    let summaries: Vec<NetworkSummary> = outcomes.iter().filter_map(|o| o.summary.clone()).collect();
    let summary_path = ctx.cfg.out.join(SUMMARY_FILE);
    write_summaries(&summary_path, &ctx.preamble("stats", None), &summaries)?;
    written.push(summary_path);
    let fits: Vec<(SegmentMode, &ErgmFit)> = outcomes
        .iter()
        .filter_map(|o| o.fit.as_ref().map(|f| (o.mode.clone(), &f.fit)))
        .collect();
    written.push(write_model_table(&ctx, &fits)?);
    for o in &outcomes {
        written.extend(o.written.iter().cloned());
    }
    write_manifest(&ctx, &outcomes, &written)?;
    Ok(RunReport {
        config_hash: ctx.config_hash,
        warnings: build.warnings,
        outcomes,
        written,
    })
}

/// Runs `f` for every mode in parallel and returns the results in mode
/// order, or the first failure in mode order.
pub fn for_each_mode<T, F>(ctx: &Context, stage: &'static str, f: F) -> Result<Vec<(SegmentMode, T)>, CliError>
where
    T: Send,
    F: Fn(&SegmentMode) -> Result<T, CliError> + Sync,
{
    ctx.modes
        .par_iter()
        .map(|m| {
            f(m).map(|t| (m.clone(), t))
                .map_err(|e| e.in_stage(&mode_label(m), stage))
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

/// Generates a synthetic dataset in `dir` with its planted motifs, the
/// segment table and a run configuration pointing at both.
pub fn synth_stage(spec: &SynthSpec, segments: &SegmentConfig, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let out = generate_synthetic(spec, segments).map_err(|e| CliError::Validation(e.to_string()))?;
    let paths = write_dataset(&out.dataset, dir)?;
    let planted = dir.join("planted_motifs.csv");
    let preamble = format!("stage=synth seed={} version={VERSION}", spec.seed);
    write_planted(&planted, &out.planted, Some(&preamble)).map_err(csv_err(&planted))?;
    let seg_path = dir.join("segments.toml");
    fs::write(&seg_path, segments.to_toml_string()).map_err(|e| CliError::io(&seg_path, e))?;
    let run_path = dir.join("run.toml");
    let run = format!(
        "# stage=synth seed={}\nseed = {}\nout = \"results\"\n\n[input]\ndir = \".\"\nsegments = \"segments.toml\"\n",
        spec.seed, spec.seed
    );
    fs::write(&run_path, run).map_err(|e| CliError::io(&run_path, e))?;
    Ok(vec![
        paths.trade,
        paths.ownership,
        paths.affiliation,
        paths.firms,
        paths.attributes,
        paths.dyads,
        planted,
        seg_path,
        run_path,
    ])
}
