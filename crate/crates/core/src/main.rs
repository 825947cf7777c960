use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use netmon::config::PipelineConfig;
use netmon::error::{invalid, Error, Result};
use netmon::output;
use netmon::pipeline::{self, measure_slug, Dataset};
use netmon::simulate::{simulate_csv, SimConfig};
use netmon::treedist::tree_distance_series;

#[derive(Parser, Debug)]
#[command(
    name = "netmon",
    version,
    about = "Rolling-window stock networks, dendrogram distances and control charts"
)]
struct Cli {
    /// Flat `key = value` config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (`auto` or a positive integer).
    #[arg(long, global = true)]
    threads: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a synthetic factor-model price panel in the input CSV format.
    Simulate(SimArgs),
    /// Log returns of the input panel.
    Returns(PipelineArgs),
    /// Per-window dissimilarity matrices.
    Dissim {
        #[command(flatten)]
        args: PipelineArgs,
        #[arg(long, default_value = "csv", value_parser = ["csv", "json"])]
        format: String,
    },
    /// Graph centers per window and their frequencies.
    Center(PipelineArgs),
    /// Single-linkage dendrograms as Newick.
    Cluster {
        #[command(flatten)]
        args: PipelineArgs,
        /// One file per window instead of a single multi-tree file.
        #[arg(long)]
        per_window: bool,
    },
    /// Distances between consecutive dendrograms.
    Treedist {
        #[command(flatten)]
        args: PipelineArgs,
        /// Multi-tree file written by `cluster`; recomputed from --input if absent.
        #[arg(long)]
        trees: Option<PathBuf>,
        /// Series label when reading --trees.
        #[arg(long)]
        label: Option<String>,
    },
    /// Shewhart charts and the monitoring VAR.
    Monitor(PipelineArgs),
    /// The full pipeline with a manifest.
    Run(PipelineArgs),
}

#[derive(Args, Debug, Default)]
struct PipelineArgs {
    #[arg(long)]
    input: Option<String>,
    /// Comma-separated network tickers.
    #[arg(long)]
    tickers: Option<String>,
    /// Index column used by the monitoring VAR; excluded from the network.
    #[arg(long)]
    index_ticker: Option<String>,
    #[arg(long)]
    drop_incomplete_rows: bool,
    #[arg(long)]
    window: Option<String>,
    #[arg(long)]
    step: Option<String>,
    /// pccd, gvdd or both.
    #[arg(long)]
    measure: Option<String>,
    #[arg(long)]
    var_lag: Option<String>,
    #[arg(long)]
    horizon: Option<String>,
    /// A nonnegative value, `auto` or `off`.
    #[arg(long)]
    ridge: Option<String>,
    /// Eccentricity convention for directed graphs: out or in.
    #[arg(long)]
    ecc: Option<String>,
    /// Tree distance: rf or cid.
    #[arg(long)]
    metric: Option<String>,
    /// Control-chart multiplier.
    #[arg(long)]
    k: Option<String>,
    /// mean+ksd or ksd.
    #[arg(long)]
    threshold_mode: Option<String>,
    /// Baseline date range FROM..TO for the control chart.
    #[arg(long)]
    baseline: Option<String>,
    /// Largest lag tried by Hannan–Quinn for the monitoring VAR.
    #[arg(long)]
    monitor_max_lag: Option<String>,
    /// Also write every window's dissimilarity matrix (`run` only).
    #[arg(long)]
    dump_matrices: bool,
}

#[derive(Args, Debug)]
struct SimArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 28)]
    n_tickers: usize,
    /// Number of price rows.
    #[arg(long, default_value_t = 252)]
    days: usize,
    /// Factor loading in [0, 1).
    #[arg(long, default_value_t = 0.8)]
    rho: f64,
    #[arg(long, default_value = "OMX")]
    index_ticker: String,
    /// Omit the index column.
    #[arg(long)]
    no_index: bool,
    /// Destination file; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

impl PipelineArgs {
    fn apply(&self, cfg: &mut PipelineConfig) -> Result<()> {
        let pairs = [
            ("input", &self.input),
            ("tickers", &self.tickers),
            ("index_ticker", &self.index_ticker),
            ("window", &self.window),
            ("step", &self.step),
            ("measure", &self.measure),
            ("var_lag", &self.var_lag),
            ("horizon", &self.horizon),
            ("ridge", &self.ridge),
            ("ecc", &self.ecc),
            ("metric", &self.metric),
            ("k", &self.k),
            ("threshold_mode", &self.threshold_mode),
            ("baseline", &self.baseline),
            ("monitor_max_lag", &self.monitor_max_lag),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        if self.drop_incomplete_rows {
            cfg.drop_incomplete_rows = true;
        }
        if self.dump_matrices {
            cfg.dump_matrices = true;
        }
        Ok(())
    }
}

fn base_config(cli: &Cli) -> Result<PipelineConfig> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    if let Some(t) = &cli.threads {
        cfg.set("threads", t)?;
    }
    Ok(cfg)
}

fn configured(cli: &Cli, args: &PipelineArgs) -> Result<PipelineConfig> {
    let mut cfg = base_config(cli)?;
    args.apply(&mut cfg)?;
    cfg.validate()?;
    Ok(cfg)
}

fn write(cfg: &PipelineConfig, rel: impl AsRef<Path>, contents: &str) -> Result<()> {
    let path = cfg.out.join(rel);
    output::write_file(&path, contents)?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn measure_runs(cfg: &PipelineConfig, ds: &Dataset) -> Result<Vec<pipeline::MeasureRun>> {
    pipeline::with_pool(cfg, || {
        cfg.measure
            .measures()
            .into_iter()
            .map(|m| pipeline::run_measure(ds, cfg, m))
            .collect::<Result<Vec<_>>>()
    })?
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Simulate(a) => {
            let base = base_config(cli)?;
            let sim = SimConfig {
                seed: a.seed.unwrap_or(base.seed),
                n_tickers: a.n_tickers,
                n_days: a.days,
                factor_loading: a.rho,
                index_ticker: (!a.no_index).then(|| a.index_ticker.clone()),
                ..SimConfig::default()
            };
            let csv = simulate_csv(&sim)?;
            match &a.output {
                Some(p) => output::write_file(p, &csv)?,
                None => print!("{csv}"),
            }
        }
        Command::Returns(args) => {
            let cfg = configured(cli, args)?;
            let ds = pipeline::load_dataset(&cfg)?;
            write(&cfg, "returns.csv", &output::returns_csv(&ds.returns))?;
        }
        Command::Dissim { args, format } => {
            let cfg = configured(cli, args)?;
            let ds = pipeline::load_dataset(&cfg)?;
            for m in cfg.measure.measures() {
                let matrices = pipeline::with_pool(&cfg, || {
                    pipeline::compute_matrices(&ds.returns, &cfg, m)
                })??;
                let slug = measure_slug(m);
                if format == "json" {
                    let all: Vec<_> = matrices.iter().map(output::matrix_json).collect();
                    write(
                        &cfg,
                        format!("matrices_{slug}.json"),
                        &output::to_json_text(&serde_json::Value::Array(all))?,
                    )?;
                } else {
                    for mat in &matrices {
                        let date = mat.window_end_date.format("%Y-%m-%d");
                        output::write_file(
                            &cfg.out.join(format!("matrices/{slug}_{date}.csv")),
                            &output::matrix_csv(mat),
                        )?;
                    }
                    eprintln!(
                        "wrote {} matrices to {}",
                        matrices.len(),
                        cfg.out.join("matrices").display()
                    );
                }
            }
        }
        Command::Center(args) => {
            let cfg = configured(cli, args)?;
            let ds = pipeline::load_dataset(&cfg)?;
            for m in cfg.measure.measures() {
                let report = pipeline::with_pool(&cfg, || {
                    pipeline::compute_matrices(&ds.returns, &cfg, m)
                        .and_then(|mats| pipeline::window_centers(&mats, &cfg))
                })??;
                let slug = measure_slug(m);
                write(
                    &cfg,
                    format!("centers_{slug}.csv"),
                    &output::centers_csv(&report),
                )?;
                write(
                    &cfg,
                    format!("center_freq_{slug}.csv"),
                    &output::center_frequency_csv(&report),
                )?;
            }
        }
        Command::Cluster { args, per_window } => {
            let cfg = configured(cli, args)?;
            let ds = pipeline::load_dataset(&cfg)?;
            for m in cfg.measure.measures() {
                let trees = pipeline::with_pool(&cfg, || {
                    pipeline::compute_matrices(&ds.returns, &cfg, m)
                        .and_then(|mats| pipeline::window_trees(&mats))
                })??;
                let slug = measure_slug(m);
                if *per_window {
                    for (d, t) in &trees {
                        let name = format!("tree_{}_{slug}.nwk", d.format("%Y-%m-%d"));
                        output::write_file(
                            &cfg.out.join(name),
                            &format!("{}\n", netmon::hclust::to_newick(t)),
                        )?;
                    }
                    eprintln!("wrote {} trees to {}", trees.len(), cfg.out.display());
                } else {
                    write(
                        &cfg,
                        format!("trees_{slug}.nwk"),
                        &output::multi_newick(&trees),
                    )?;
                }
            }
        }
        Command::Treedist { args, trees, label } => {
            let cfg = configured(cli, args)?;
            match trees {
                Some(path) => {
                    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                    let parsed = output::read_multi_newick(&text)?;
                    let label = label.clone().unwrap_or_else(|| {
                        path.file_stem()
                            .map(|s| {
                                s.to_string_lossy()
                                    .trim_start_matches("trees_")
                                    .to_uppercase()
                            })
                            .unwrap_or_else(|| "TREES".into())
                    });
                    let series = tree_distance_series(&parsed, cfg.metric, &label)?;
                    write(
                        &cfg,
                        format!("treedist_{}.csv", label.to_lowercase()),
                        &output::distance_csv(&series),
                    )?;
                }
                None => {
                    let ds = pipeline::load_dataset(&cfg)?;
                    for run in measure_runs(&cfg, &ds)? {
                        let slug = measure_slug(run.measure);
                        write(
                            &cfg,
                            format!("treedist_{slug}.csv"),
                            &output::distance_csv(&run.distances),
                        )?;
                    }
                }
            }
        }
        Command::Monitor(args) => {
            let cfg = configured(cli, args)?;
            let ds = pipeline::load_dataset(&cfg)?;
            let runs = measure_runs(&cfg, &ds)?;
            for r in &runs {
                write(
                    &cfg,
                    format!("chart_{}.csv", r.measure.label()),
                    &output::chart_csv(&r.distances, &r.chart),
                )?;
                eprintln!(
                    "{}: mean {} sd {} threshold {} alarms {}",
                    r.measure,
                    netmon::numfmt::fmt_f64(r.chart.mean),
                    netmon::numfmt::fmt_f64(r.chart.sd),
                    netmon::numfmt::fmt_f64(r.chart.threshold),
                    r.chart.alarm_count
                );
            }
            let series: Vec<_> = runs.iter().map(|r| r.distances.clone()).collect();
            match pipeline::fit_monitoring_var(&series, &ds, &cfg)? {
                Some(fit) => write(&cfg, "varfit.json", &output::to_json_text(&fit.to_json())?)?,
                None => {
                    eprintln!("series too short for the monitoring VAR; varfit.json not written")
                }
            }
        }
        Command::Run(args) => {
            let cfg = configured(cli, args)?;
            if cfg.input.is_none() {
                return Err(invalid("--input is required"));
            }
            let summary = pipeline::run_pipeline(&cfg)?;
            eprintln!(
                "wrote {} artifacts and manifest.json to {}",
                summary.artifacts.len(),
                cfg.out.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.class().exit_code() as u8)
        }
    }
}
