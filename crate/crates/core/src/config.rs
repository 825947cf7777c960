//! Pipeline configuration and its flat `key = value` file format.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::NaiveDate;

use crate::dissim::{Measure, RidgeMode};
use crate::error::{invalid, Error, Result};
use crate::graph::Eccentricity;
use crate::ingest::{DEFAULT_STEP, DEFAULT_WINDOW};
use crate::monitor::{ThresholdMode, DEFAULT_K};
use crate::treedist::TreeMetric;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MeasureSelection {
    Pccd,
    Gvdd,
    #[default]
    Both,
}

impl MeasureSelection {
    pub fn measures(self) -> Vec<Measure> {
        match self {
            MeasureSelection::Pccd => vec![Measure::Pccd],
            MeasureSelection::Gvdd => vec![Measure::Gvdd],
            MeasureSelection::Both => vec![Measure::Pccd, Measure::Gvdd],
        }
    }
}

impl FromStr for MeasureSelection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pccd" => Ok(MeasureSelection::Pccd),
            "gvdd" => Ok(MeasureSelection::Gvdd),
            "both" => Ok(MeasureSelection::Both),
            _ => Err(invalid(format!(
                "measure must be pccd, gvdd or both, got `{s}`"
            ))),
        }
    }
}

impl std::fmt::Display for MeasureSelection {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            MeasureSelection::Pccd => "pccd",
            MeasureSelection::Gvdd => "gvdd",
            MeasureSelection::Both => "both",
        })
    }
}

/// Worker count; `None` lets the pool pick one per core.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Threads(pub Option<usize>);

impl FromStr for Threads {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(Threads(None));
        }
        match s.parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Threads(Some(n))),
            _ => Err(invalid(format!(
                "threads must be a positive integer or `auto`, got `{s}`"
            ))),
        }
    }
}

impl std::fmt::Display for Threads {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.0 {
            None => f.write_str("auto"),
            Some(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub input: Option<PathBuf>,
    pub tickers: Option<Vec<String>>,
    pub index_ticker: Option<String>,
    pub drop_incomplete_rows: bool,
    pub window: usize,
    pub step: usize,
    pub measure: MeasureSelection,
    pub var_lag: usize,
    pub horizon: usize,
    pub ridge: RidgeMode,
    pub ecc: Eccentricity,
    pub metric: TreeMetric,
    pub k: f64,
    pub threshold_mode: ThresholdMode,
    pub baseline: Option<(NaiveDate, NaiveDate)>,
    /// Largest lag considered by Hannan–Quinn for the monitoring VAR.
    pub monitor_max_lag: usize,
    pub out: PathBuf,
    pub threads: Threads,
    pub seed: u64,
    pub dump_matrices: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            input: None,
            tickers: None,
            index_ticker: None,
            drop_incomplete_rows: false,
            window: DEFAULT_WINDOW,
            step: DEFAULT_STEP,
            measure: MeasureSelection::Both,
            var_lag: 1,
            horizon: 10,
            ridge: RidgeMode::Off,
            ecc: Eccentricity::Out,
            metric: TreeMetric::Cid,
            k: DEFAULT_K,
            threshold_mode: ThresholdMode::MeanPlusKSd,
            baseline: None,
            monitor_max_lag: 5,
            out: PathBuf::from("out"),
            threads: Threads(None),
            seed: 42,
            dump_matrices: false,
        }
    }
}

fn parse_bool(s: &str) -> Result<bool> {
    match s {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(invalid(format!("expected a boolean, got `{s}`"))),
    }
}

fn parse_num<T: FromStr>(key: &str, s: &str) -> Result<T> {
    s.parse()
        .map_err(|_| invalid(format!("{key}: cannot parse `{s}`")))
}

pub fn parse_ticker_list(s: &str) -> Vec<String> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect()
}

pub fn parse_baseline(s: &str) -> Result<(NaiveDate, NaiveDate)> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| invalid(format!("baseline must look like FROM..TO, got `{s}`")))?;
    let date = |x: &str| {
        NaiveDate::parse_from_str(x.trim(), "%Y-%m-%d")
            .map_err(|_| invalid(format!("baseline: bad date `{x}`")))
    };
    let (from, to) = (date(a)?, date(b)?);
    if from > to {
        return Err(invalid("baseline range is reversed"));
    }
    Ok((from, to))
}

impl PipelineConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "input" => self.input = (!v.is_empty()).then(|| PathBuf::from(v)),
            "tickers" => self.tickers = (!v.is_empty()).then(|| parse_ticker_list(v)),
            "index_ticker" => self.index_ticker = (!v.is_empty()).then(|| v.to_owned()),
            "drop_incomplete_rows" => self.drop_incomplete_rows = parse_bool(v)?,
            "window" => self.window = parse_num(key, v)?,
            "step" => self.step = parse_num(key, v)?,
            "measure" => self.measure = v.parse()?,
            "var_lag" => self.var_lag = parse_num(key, v)?,
            "horizon" => self.horizon = parse_num(key, v)?,
            "ridge" => self.ridge = v.parse()?,
            "ecc" => self.ecc = v.parse()?,
            "metric" => self.metric = v.parse()?,
            "k" => self.k = parse_num(key, v)?,
            "threshold_mode" => self.threshold_mode = v.parse()?,
            "baseline" => {
                self.baseline = if v.is_empty() {
                    None
                } else {
                    Some(parse_baseline(v)?)
                }
            }
            "monitor_max_lag" => self.monitor_max_lag = parse_num(key, v)?,
            "out" => self.out = PathBuf::from(v),
            "threads" => self.threads = v.parse()?,
            "seed" => self.seed = parse_num(key, v)?,
            "dump_matrices" => self.dump_matrices = parse_bool(v)?,
            other => return Err(invalid(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Parses a config file body; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = PipelineConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Config {
                line: i + 1,
                msg: "expected `key = value`".into(),
            })?;
            cfg.set(k, v).map_err(|e| Error::Config {
                line: i + 1,
                msg: e.to_string(),
            })?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        PipelineConfig::parse(&text)
    }

    /// Ordered key/value pairs, the inverse of [`PipelineConfig::parse`].
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let path = |p: &Option<PathBuf>| {
            p.as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_default()
        };
        vec![
            ("input", path(&self.input)),
            (
                "tickers",
                self.tickers
                    .as_ref()
                    .map(|t| t.join(","))
                    .unwrap_or_default(),
            ),
            (
                "index_ticker",
                self.index_ticker.clone().unwrap_or_default(),
            ),
            (
                "drop_incomplete_rows",
                self.drop_incomplete_rows.to_string(),
            ),
            ("window", self.window.to_string()),
            ("step", self.step.to_string()),
            ("measure", self.measure.to_string()),
            ("var_lag", self.var_lag.to_string()),
            ("horizon", self.horizon.to_string()),
            ("ridge", self.ridge.to_string()),
            ("ecc", self.ecc.to_string()),
            ("metric", self.metric.to_string()),
            ("k", self.k.to_string()),
            ("threshold_mode", self.threshold_mode.to_string()),
            (
                "baseline",
                self.baseline
                    .map(|(a, b)| format!("{a}..{b}"))
                    .unwrap_or_default(),
            ),
            ("monitor_max_lag", self.monitor_max_lag.to_string()),
            ("out", self.out.display().to_string()),
            ("threads", self.threads.to_string()),
            ("seed", self.seed.to_string()),
            ("dump_matrices", self.dump_matrices.to_string()),
        ]
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.entries() {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    pub fn validate(&self) -> Result<()> {
        if self.window < 2 {
            return Err(invalid(format!(
                "--window must be >= 2 (got {})",
                self.window
            )));
        }
        if self.step < 1 {
            return Err(invalid("--step must be >= 1"));
        }
        if self.var_lag < 1 {
            return Err(invalid("--var-lag must be >= 1"));
        }
        if self.horizon < 1 {
            return Err(invalid("--horizon must be >= 1"));
        }
        if !(self.k > 0.0) || !self.k.is_finite() {
            return Err(invalid(format!("--k must be > 0 (got {})", self.k)));
        }
        if self.monitor_max_lag < 1 {
            return Err(invalid("monitor_max_lag must be >= 1"));
        }
        if matches!(
            self.measure,
            MeasureSelection::Pccd | MeasureSelection::Both
        ) && self.window < 3
        {
            return Err(invalid("--window must be >= 3 for PCCD"));
        }
        if matches!(
            self.measure,
            MeasureSelection::Gvdd | MeasureSelection::Both
        ) && self.window <= self.var_lag + 1
        {
            return Err(invalid("--window must exceed --var-lag + 1 for GVDD"));
        }
        Ok(())
    }
}
