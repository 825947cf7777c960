//! End-to-end orchestration: prices → windows → dissimilarities →
//! centers and dendrograms → tree-distance series → control charts and the
//! monitoring VAR.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::PipelineConfig;
use crate::dissim::{window_dissimilarity, DissimilarityMatrix, Measure};
use crate::error::{invalid, Error, Result};
use crate::graph::{center, shortest_path_matrix, CenterReport, WeightedGraph};
use crate::hclust::{single_linkage, symmetrize_max, Dendrogram};
use crate::ingest::{load_prices_with, log_returns, rolling_windows, LoadOptions, ReturnPanel};
use crate::monitor::{
    select_and_fit, shewhart_with, ChartConfig, ControlChartReport, DistanceSeries, VarFitReport,
};
use crate::output;
use crate::treedist::tree_distance_series;

/// Network returns plus the optional index return column.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub returns: ReturnPanel,
    pub index: Option<(String, Vec<f64>)>,
    pub input_sha256: String,
}

impl Dataset {
    pub fn from_returns(
        all: &ReturnPanel,
        network: &[String],
        index: Option<&str>,
    ) -> Result<Dataset> {
        let returns = all.select(network)?;
        let index = match index {
            None => None,
            Some(name) => Some((
                name.to_owned(),
                all.column(name)
                    .ok_or_else(|| Error::MissingTicker(name.to_owned()))?,
            )),
        };
        Ok(Dataset {
            returns,
            index,
            input_sha256: String::new(),
        })
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn load_dataset(cfg: &PipelineConfig) -> Result<Dataset> {
    let path = cfg
        .input
        .as_ref()
        .ok_or_else(|| invalid("--input is required"))?;
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let filter = cfg.tickers.as_ref().map(|t| {
        let mut cols = t.clone();
        if let Some(idx) = &cfg.index_ticker {
            if !cols.contains(idx) {
                cols.push(idx.clone());
            }
        }
        cols
    });
    let opts = LoadOptions {
        tickers: filter,
        drop_incomplete_rows: cfg.drop_incomplete_rows,
    };
    let prices = load_prices_with(path, &opts)?;
    let all = log_returns(&prices)?;
    let network: Vec<String> = match &cfg.tickers {
        Some(t) => t
            .iter()
            .filter(|x| Some(*x) != cfg.index_ticker.as_ref())
            .cloned()
            .collect(),
        None => all
            .tickers()
            .iter()
            .filter(|x| Some(*x) != cfg.index_ticker.as_ref())
            .cloned()
            .collect(),
    };
    if network.len() < 2 {
        return Err(Error::TooFewTickers {
            need: 2,
            got: network.len(),
        });
    }
    let mut ds = Dataset::from_returns(&all, &network, cfg.index_ticker.as_deref())?;
    ds.input_sha256 = sha256_hex(&bytes);
    Ok(ds)
}

/// Runs `f` on a worker pool sized by the config.
pub fn with_pool<T: Send>(cfg: &PipelineConfig, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.threads.0 {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| invalid(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// One matrix per window, in window order.
pub fn compute_matrices(
    returns: &ReturnPanel,
    cfg: &PipelineConfig,
    measure: Measure,
) -> Result<Vec<DissimilarityMatrix>> {
    let windows = rolling_windows(returns, cfg.window, cfg.step)?;
    windows
        .par_iter()
        .map(|w| window_dissimilarity(w, measure, cfg.var_lag, cfg.horizon, cfg.ridge))
        .collect()
}

pub fn window_centers(
    matrices: &[DissimilarityMatrix],
    cfg: &PipelineConfig,
) -> Result<CenterReport> {
    let per_window = matrices
        .par_iter()
        .map(|m| {
            let g = WeightedGraph::from_dissimilarity(m)?;
            let dm = shortest_path_matrix(&g).with_eccentricity(cfg.ecc);
            Ok((m.window_end_date, center(&dm)))
        })
        .collect::<Result<Vec<_>>>()?;
    CenterReport::new(per_window)
}

/// Single-linkage dendrogram per window; asymmetric matrices are
/// symmetrized by the elementwise maximum first.
pub fn window_trees(matrices: &[DissimilarityMatrix]) -> Result<Vec<(NaiveDate, Dendrogram)>> {
    matrices
        .par_iter()
        .map(|m| {
            let sym = if m.kind.is_symmetric() {
                m.values.clone()
            } else {
                symmetrize_max(&m.values)
            };
            Ok((m.window_end_date, single_linkage(&sym, m.labels.clone())?))
        })
        .collect()
}

/// Columns: each distance series, then the index return on the same date.
pub fn monitoring_matrix(
    series: &[DistanceSeries],
    dataset: &Dataset,
) -> Result<(Vec<String>, DMatrix<f64>)> {
    let first = series
        .first()
        .ok_or_else(|| invalid("no distance series to monitor"))?;
    let dates = &first.timestamps;
    if series.iter().any(|s| &s.timestamps != dates) {
        return Err(invalid("distance series are not aligned"));
    }
    let mut names: Vec<String> = series.iter().map(|s| s.label.clone()).collect();
    let mut columns: Vec<Vec<f64>> = series.iter().map(|s| s.values.clone()).collect();
    if let Some((name, values)) = &dataset.index {
        let all_dates = dataset.returns.dates();
        let col = dates
            .iter()
            .map(|d| {
                all_dates
                    .binary_search(d)
                    .map(|i| values[i])
                    .map_err(|_| invalid(format!("no index return on {d}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        names.push(name.clone());
        columns.push(col);
    }
    let m = DMatrix::from_fn(dates.len(), columns.len(), |r, c| columns[c][r]);
    Ok((names, m))
}

/// Everything computed for one dissimilarity measure.
#[derive(Debug, Clone)]
pub struct MeasureRun {
    pub measure: Measure,
    pub matrices: Vec<DissimilarityMatrix>,
    pub centers: CenterReport,
    pub trees: Vec<(NaiveDate, Dendrogram)>,
    pub distances: DistanceSeries,
    pub chart: ControlChartReport,
}

pub fn run_measure(
    dataset: &Dataset,
    cfg: &PipelineConfig,
    measure: Measure,
) -> Result<MeasureRun> {
    let matrices = compute_matrices(&dataset.returns, cfg, measure)?;
    let centers = window_centers(&matrices, cfg)?;
    let trees = window_trees(&matrices)?;
    let distances = tree_distance_series(&trees, cfg.metric, measure.label())?;
    let chart = shewhart_with(&distances, &chart_config(cfg))?;
    Ok(MeasureRun {
        measure,
        matrices,
        centers,
        trees,
        distances,
        chart,
    })
}

pub fn chart_config(cfg: &PipelineConfig) -> ChartConfig {
    ChartConfig {
        k: cfg.k,
        mode: cfg.threshold_mode,
        baseline: cfg.baseline,
    }
}

/// Hannan–Quinn selection up to the configured lag, capped at what the
/// series length supports; `None` when not even a VAR(1) is estimable.
pub fn fit_monitoring_var(
    series: &[DistanceSeries],
    dataset: &Dataset,
    cfg: &PipelineConfig,
) -> Result<Option<VarFitReport>> {
    let (names, data) = monitoring_matrix(series, dataset)?;
    let (t, n) = data.shape();
    let p_max = (1..=cfg.monitor_max_lag)
        .rev()
        .find(|&p| t > p * n + p + 1)
        .unwrap_or(0);
    if p_max == 0 {
        return Ok(None);
    }
    select_and_fit(&data, &names, p_max).map(Some)
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub runs: Vec<MeasureRun>,
    pub varfit: Option<VarFitReport>,
    /// Paths relative to the output directory, in write order.
    pub artifacts: Vec<PathBuf>,
}

struct ArtifactWriter<'a> {
    root: &'a Path,
    written: Vec<PathBuf>,
}

impl ArtifactWriter<'_> {
    fn write(&mut self, rel: impl Into<PathBuf>, contents: &str) -> Result<()> {
        let rel = rel.into();
        output::write_file(&self.root.join(&rel), contents)?;
        self.written.push(rel);
        Ok(())
    }
}

pub fn measure_slug(m: Measure) -> &'static str {
    match m {
        Measure::Pccd => "pccd",
        Measure::Gvdd => "gvdd",
    }
}

/// Runs the whole pipeline and writes all artifacts plus `manifest.json`
/// into `cfg.out`. Data files carry no clock values; only the manifest's
/// `generated_at` field varies between identical runs.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<RunSummary> {
    cfg.validate()?;
    let dataset = load_dataset(cfg)?;
    let runs = with_pool(cfg, || {
        cfg.measure
            .measures()
            .into_iter()
            .map(|m| run_measure(&dataset, cfg, m))
            .collect::<Result<Vec<_>>>()
    })??;
    let series: Vec<DistanceSeries> = runs.iter().map(|r| r.distances.clone()).collect();
    let varfit = fit_monitoring_var(&series, &dataset, cfg)?;

    let mut w = ArtifactWriter {
        root: &cfg.out,
        written: Vec::new(),
    };
    for run in &runs {
        let slug = measure_slug(run.measure);
        if cfg.dump_matrices {
            for m in &run.matrices {
                w.write(
                    format!(
                        "matrices/{slug}_{}.csv",
                        m.window_end_date.format("%Y-%m-%d")
                    ),
                    &output::matrix_csv(m),
                )?;
            }
        }
        w.write(
            format!("centers_{slug}.csv"),
            &output::centers_csv(&run.centers),
        )?;
        w.write(
            format!("center_freq_{slug}.csv"),
            &output::center_frequency_csv(&run.centers),
        )?;
        w.write(
            format!("trees_{slug}.nwk"),
            &output::multi_newick(&run.trees),
        )?;
        w.write(
            format!("treedist_{slug}.csv"),
            &output::distance_csv(&run.distances),
        )?;
        w.write(
            format!("chart_{}.csv", run.measure.label()),
            &output::chart_csv(&run.distances, &run.chart),
        )?;
    }
    let charts: Vec<Value> = runs.iter().map(|r| output::chart_json(&r.chart)).collect();
    w.write("charts.json", &output::to_json_text(&Value::Array(charts))?)?;
    if let Some(fit) = &varfit {
        w.write("varfit.json", &output::to_json_text(&fit.to_json())?)?;
    }

    let artifacts = w.written;
    let manifest = manifest_json(cfg, &dataset, &artifacts)?;
    output::write_file(
        &cfg.out.join("manifest.json"),
        &output::to_json_text(&manifest)?,
    )?;

    Ok(RunSummary {
        runs,
        varfit,
        artifacts,
    })
}

fn manifest_json(cfg: &PipelineConfig, dataset: &Dataset, artifacts: &[PathBuf]) -> Result<Value> {
    let config: serde_json::Map<String, Value> = cfg
        .entries()
        .into_iter()
        .map(|(k, v)| (k.to_owned(), Value::String(v)))
        .collect();
    let mut listed = Vec::with_capacity(artifacts.len());
    for rel in artifacts {
        let path = cfg.out.join(rel);
        let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
        listed.push(json!({
            "path": rel.display().to_string(),
            "bytes": bytes.len(),
            "sha256": sha256_hex(&bytes),
        }));
    }
    let generated_at = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    Ok(json!({
        "tool": "netmon",
        "version": env!("CARGO_PKG_VERSION"),
        "generated_at": generated_at,
        "config": config,
        "input": {
            "path": cfg.input.as_ref().map(|p| p.display().to_string()),
            "sha256": dataset.input_sha256,
        },
        "artifacts": listed,
    }))
}
