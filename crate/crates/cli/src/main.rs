use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use intrafirm_cli::pipeline::{
    build_stage, filter_stage, fit_stage, for_each_mode, gof_stage, mode_label, simulate_stage, stats_stage, summarize,
    synth_stage, write_model_table, write_summaries,
};
use intrafirm_cli::{run_pipeline, CliError, Context, Overrides, RunConfig};
use intrafirm_core::ingest::SegmentConfig;
use intrafirm_core::motif::read_edge_list;
use intrafirm_core::netstats::SUMMARY_HEADER;
use intrafirm_core::synth::SynthSpec;

#[derive(Debug, Parser)]
#[command(
    name = "intrafirm",
    version,
    about = "Potential intra-firm trade networks: filtering, statistics and ERGM fits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Default, Args)]
struct Common {
    /// Run configuration file (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed for every random stream.
    #[arg(long)]
    seed: Option<u64>,
    /// Segment modes to analyse, comma separated: segment names and/or `inter`.
    #[arg(long, value_delimiter = ',')]
    segments: Option<Vec<String>>,
    /// Drop trade rows below this value.
    #[arg(long)]
    min_trade_value: Option<f64>,
    /// Keep trading countries that carry no motif as isolated nodes.
    #[arg(long)]
    include_isolates: bool,
    /// Natural log of GDP and GDP per capita.
    #[arg(long)]
    log_gdp: bool,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory holding the input CSV files.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Segment definition file (TOML).
    #[arg(long)]
    segment_config: Option<PathBuf>,
}

impl Common {
    fn config(&self) -> Result<RunConfig, CliError> {
        let o = Overrides {
            seed: self.seed,
            out: self.out.clone(),
            modes: self.segments.clone(),
            min_trade_value: self.min_trade_value,
            include_isolates: self.include_isolates,
            log_gdp: self.log_gdp,
            input_dir: self.input.clone(),
            segment_config: self.segment_config.clone(),
        };
        RunConfig::resolve(self.config.as_deref(), &o)
    }

    fn context(&self) -> Result<Context, CliError> {
        Context::new(self.config()?)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the configuration and, when inputs are configured, the input files.
    Validate(Common),
    /// Load the inputs and report the multilevel network.
    Build(Common),
    /// Detect motifs and export the filtered trade network per mode.
    Filter(Common),
    /// Descriptive statistics of the filtered networks.
    Stats {
        #[command(flatten)]
        common: Common,
        /// Summarise this edge list instead of the filter output.
        #[arg(long)]
        edges: Option<PathBuf>,
        /// Row name used with --edges.
        #[arg(long, default_value = "network")]
        name: String,
    },
    /// Fit the model to each filtered network.
    Fit(Common),
    /// Goodness of fit at the fitted parameters.
    Gof(Common),
    /// Draw networks at the fitted parameters.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Number of networks to draw.
        #[arg(long, default_value_t = 100)]
        draws: usize,
        /// Also write every drawn network as an edge list.
        #[arg(long)]
        keep_graphs: bool,
    },
    /// Generate a synthetic dataset with planted motifs.
    Synth {
        /// Directory for the generated files.
        #[arg(long)]
        out: PathBuf,
        /// Generator settings (TOML).
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Segment definition file (TOML).
        #[arg(long)]
        segment_config: Option<PathBuf>,
    },
    /// The whole pipeline: validate, build, filter, stats, fit, gof.
    Run(Common),
}

fn print_summaries(rows: &[intrafirm_core::netstats::NetworkSummary]) {
    let mut w = csv::Writer::from_writer(std::io::stdout());
    let _ = w.write_record(SUMMARY_HEADER);
    for r in rows {
        let _ = w.write_record(r.csv_row());
    }
    let _ = w.flush();
}

fn validate(c: &Common) -> Result<i32, CliError> {
    let ctx = c.context()?;
    let modes: Vec<String> = ctx.modes.iter().map(ToString::to_string).collect();
    println!("configuration ok (config_hash {})", ctx.config_hash);
    println!("segments: {}", ctx.segments.names().collect::<Vec<_>>().join(", "));
    println!("modes: {}", modes.join(", "));
    if !ctx.cfg.has_input() {
        println!("no input files configured; inputs not checked");
        return Ok(0);
    }
    let loaded = ctx.load()?;
    let net = &loaded.dataset.network;
    println!(
        "inputs ok: {} countries, {} firms, {} trade flows, {} ownership ties, {} affiliations",
        net.countries.len(),
        net.firms.len(),
        net.trade.flow_count(),
        net.ownership.edge_count(),
        net.affiliation.edge_count()
    );
    for w in &loaded.warnings {
        eprintln!("warning: {w}");
    }
    Ok(0)
}

fn build(c: &Common) -> Result<i32, CliError> {
    let ctx = c.context()?;
    let loaded = ctx.load()?;
    let (summary, path) = build_stage(&ctx, &loaded)?;
    for w in &summary.warnings {
        eprintln!("warning: {w}");
    }
    println!(
        "{} countries, {} firms, {} trade flows -> {}",
        summary.countries,
        summary.firms,
        summary.trade_flows,
        path.display()
    );
    Ok(0)
}

fn filter(c: &Common) -> Result<i32, CliError> {
    let ctx = c.context()?;
    let loaded = ctx.load()?;
    let results = for_each_mode(&ctx, "filter", |m| filter_stage(&ctx, &loaded.dataset, m))?;
    for (m, (f, _)) in results {
        println!(
            "{}: {} motifs, {} countries, {} edges",
            mode_label(&m),
            f.motif_count(),
            f.graph.node_count(),
            f.graph.edge_count()
        );
    }
    Ok(0)
}

fn stats(c: &Common, edges: Option<&PathBuf>, name: &str) -> Result<i32, CliError> {
    let cfg = c.config()?;
    if let Some(path) = edges {
        let g = read_edge_list(path)?;
        print_summaries(&[summarize(name, &g, cfg.centralization)]);
        return Ok(0);
    }
    let ctx = Context::new(cfg)?;
    let results = for_each_mode(&ctx, "stats", |m| stats_stage(&ctx, m, &ctx.read_filtered(m)?))?;
    let rows: Vec<_> = results.into_iter().map(|(_, (s, _))| s).collect();
    write_summaries(
        &ctx.cfg.out.join(intrafirm_cli::pipeline::SUMMARY_FILE),
        &ctx.preamble("stats", None),
        &rows,
    )?;
    print_summaries(&rows);
    Ok(0)
}

fn fit(c: &Common) -> Result<i32, CliError> {
    let ctx = c.context()?;
    let loaded = ctx.load()?;
    let results = for_each_mode(&ctx, "fit", |m| {
        fit_stage(&ctx, &loaded.dataset, m, &ctx.read_filtered(m)?)
    })?;
    let fits: Vec<_> = results.iter().map(|(m, (a, _))| (m.clone(), &a.fit)).collect();
    let table = write_model_table(&ctx, &fits)?;
    for (m, (a, _)) in &results {
        println!(
            "{}: {} terms, log likelihood {:.4}, AIC {:.4}, BIC {:.4}, {} iterations",
            mode_label(m),
            a.fit.theta.len(),
            a.fit.log_likelihood,
            a.fit.aic,
            a.fit.bic,
            a.fit.iterations
        );
    }
    println!("table -> {}", table.display());
    Ok(0)
}

fn gof(c: &Common) -> Result<i32, CliError> {
    let ctx = c.context()?;
    let loaded = ctx.load()?;
    let results = for_each_mode(&ctx, "gof", |m| {
        let fit = ctx.read_fit(m)?;
        gof_stage(&ctx, &loaded.dataset, m, &ctx.read_filtered(m)?, &fit.fit)
    })?;
    for (m, (a, _)) in results {
        println!(
            "{}: {} of {} histogram bins inside the 5-95% envelope",
            mode_label(&m),
            a.coverage.inside,
            a.coverage.total
        );
    }
    Ok(0)
}

fn simulate(c: &Common, draws: usize, keep_graphs: bool) -> Result<i32, CliError> {
    let ctx = c.context()?;
    let loaded = ctx.load()?;
    let results = for_each_mode(&ctx, "simulate", |m| {
        let fit = ctx.read_fit(m)?;
        simulate_stage(
            &ctx,
            &loaded.dataset,
            m,
            &ctx.read_filtered(m)?,
            &fit.fit,
            draws,
            keep_graphs,
        )
    })?;
    for (m, (sample, written)) in results {
        println!(
            "{}: {} draws, acceptance {:.4} -> {}",
            mode_label(&m),
            sample.len(),
            sample.acceptance_rate,
            written[0].display()
        );
    }
    Ok(0)
}

fn synth(
    out: &Path,
    spec: Option<&PathBuf>,
    seed: Option<u64>,
    segment_config: Option<&PathBuf>,
) -> Result<i32, CliError> {
    let mut s = match spec {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            toml::from_str::<SynthSpec>(&text).map_err(|e| CliError::Validation(format!("{}: {e}", p.display())))?
        }
        None => SynthSpec::default(),
    };
    if let Some(seed) = seed {
        s.seed = seed;
    }
    let segments = match segment_config {
        Some(p) => SegmentConfig::load(p)?,
        None => SegmentConfig::automotive(),
    };
    let written = synth_stage(&s, &segments, out)?;
    for p in written {
        println!("{}", p.display());
    }
    Ok(0)
}

fn run(c: &Common) -> Result<i32, CliError> {
    let report = run_pipeline(c.config()?)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    for o in &report.outcomes {
        let status = if o.error.is_some() { "failed" } else { "ok" };
        println!("{}: {} [{}]", mode_label(&o.mode), status, o.completed.join(", "));
    }
    for e in report.errors() {
        eprintln!("error: {e}");
    }
    Ok(report.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Validate(c) => validate(c),
        Command::Build(c) => build(c),
        Command::Filter(c) => filter(c),
        Command::Stats { common, edges, name } => stats(common, edges.as_ref(), name),
        Command::Fit(c) => fit(c),
        Command::Gof(c) => gof(c),
        Command::Simulate {
            common,
            draws,
            keep_graphs,
        } => simulate(common, *draws, *keep_graphs),
        Command::Synth {
            out,
            spec,
            seed,
            segment_config,
        } => synth(out, spec.as_ref(), *seed, segment_config.as_ref()),
        Command::Run(c) => run(c),
    };
    let _ = std::io::stdout().flush();
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
