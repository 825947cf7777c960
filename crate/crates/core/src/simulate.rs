//! Synthetic price panels from a one-factor model, for fixtures and demos.
//!
//! Log returns follow `r_it = mu + rho_f · f_t + e_it` with independent
//! Gaussian `f_t ~ N(0, sigma_f²)` and `e_it ~ N(0, sigma_e²)`, so the
//! implied cross-correlation is
//! `rho_f² sigma_f² / (rho_f² sigma_f² + sigma_e²)`.

use std::fmt::Write as _;

use chrono::{Datelike, Days, NaiveDate, Weekday};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{invalid, Result};
use crate::ingest::PricePanel;
use crate::numfmt::fmt_f64;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub seed: u64,
    pub n_tickers: usize,
    /// Number of price rows (trading days).
    pub n_days: usize,
    pub factor_loading: f64,
    pub factor_sd: f64,
    pub idio_sd: f64,
    pub drift: f64,
    /// Adds an index column under this name: the equal-weighted mean
    /// return plus independent tracking noise.
    pub index_ticker: Option<String>,
    pub tracking_sd: f64,
    pub start: NaiveDate,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            seed: 42,
            n_tickers: 28,
            n_days: 252,
            factor_loading: 0.8,
            factor_sd: 0.01,
            idio_sd: 0.01,
            drift: 0.0002,
            index_ticker: Some("OMX".to_owned()),
            tracking_sd: 0.001,
            start: NaiveDate::from_ymd_opt(2021, 1, 4).expect("valid date"),
        }
    }
}

impl SimConfig {
    pub fn implied_correlation(&self) -> f64 {
        let common = (self.factor_loading * self.factor_sd).powi(2);
        common / (common + self.idio_sd.powi(2))
    }

    fn validate(&self) -> Result<()> {
        if self.n_tickers < 2 {
            return Err(invalid("simulate: at least 2 tickers required"));
        }
        if self.n_days < 2 {
            return Err(invalid("simulate: at least 2 days required"));
        }
        if !(0.0..1.0).contains(&self.factor_loading) {
            return Err(invalid("simulate: factor loading must lie in [0, 1)"));
        }
        if !(self.factor_sd > 0.0)
            || !(self.idio_sd > 0.0)
            || !(self.tracking_sd >= 0.0)
            || !self.drift.is_finite()
        {
            return Err(invalid("simulate: standard deviations must be > 0"));
        }
        Ok(())
    }
}

pub fn ticker_name(i: usize) -> String {
    format!("S{:02}", i + 1)
}

fn trading_days(start: NaiveDate, n: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(n);
    let mut d = start;
    while out.len() < n {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d = d + Days::new(1);
    }
    out
}

pub fn simulate_panel(cfg: &SimConfig) -> Result<PricePanel> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let factor = Normal::new(0.0, cfg.factor_sd).map_err(|e| invalid(e.to_string()))?;
    let idio = Normal::new(0.0, cfg.idio_sd).map_err(|e| invalid(e.to_string()))?;
    let tracking = Normal::new(0.0, cfg.tracking_sd).map_err(|e| invalid(e.to_string()))?;
    let n = cfg.n_tickers;
    let cols = n + usize::from(cfg.index_ticker.is_some());

    let mut log_price = vec![100f64.ln(); cols];
    let mut prices = DMatrix::<f64>::zeros(cfg.n_days, cols);
    for t in 0..cfg.n_days {
        if t > 0 {
            let f = factor.sample(&mut rng);
            let mut sum = 0.0;
            for lp in log_price.iter_mut().take(n) {
                let r = cfg.drift + cfg.factor_loading * f + idio.sample(&mut rng);
                *lp += r;
                sum += r;
            }
            if cols > n {
                log_price[n] += sum / n as f64 + tracking.sample(&mut rng);
            }
        }
        for c in 0..cols {
            prices[(t, c)] = log_price[c].exp();
        }
    }
    let mut tickers: Vec<String> = (0..n).map(ticker_name).collect();
    if let Some(idx) = &cfg.index_ticker {
        tickers.push(idx.clone());
    }
    PricePanel::new(trading_days(cfg.start, cfg.n_days), tickers, prices)
}

/// CSV in the ingest format, prices at 15 significant digits.
pub fn to_csv(panel: &PricePanel) -> String {
    let mut s = String::from("Date");
    for t in panel.tickers() {
        s.push(',');
        s.push_str(t);
    }
    s.push('\n');
    for (r, d) in panel.dates().iter().enumerate() {
        let _ = write!(s, "{}", d.format("%Y-%m-%d"));
        for c in 0..panel.n_tickers() {
            s.push(',');
            s.push_str(&fmt_f64(panel.prices()[(r, c)]));
        }
        s.push('\n');
    }
    s
}

pub fn simulate_csv(cfg: &SimConfig) -> Result<String> {
    Ok(to_csv(&simulate_panel(cfg)?))
}
