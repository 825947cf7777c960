//! Price panels, log returns and rolling windows.
//!
//! The input format is a plain CSV with a `Date` column followed by one
//! column per ticker holding adjusted closing prices.

use std::collections::HashSet;
use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;
use nalgebra::{DMatrix, DMatrixView};

use crate::error::{invalid, Error, Result};

pub const DEFAULT_WINDOW: usize = 63;
pub const DEFAULT_STEP: usize = 1;

/// Daily adjusted closing prices, one row per trading day.
#[derive(Debug, Clone, PartialEq)]
pub struct PricePanel {
    dates: Vec<NaiveDate>,
    tickers: Vec<String>,
    prices: DMatrix<f64>,
}

/// Log returns; the date of each row is the later of the two prices.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnPanel {
    dates: Vec<NaiveDate>,
    tickers: Vec<String>,
    returns: DMatrix<f64>,
}

/// A contiguous block of rows of a [`ReturnPanel`].
#[derive(Debug, Clone)]
pub struct WindowView<'a> {
    pub index: usize,
    pub start_date: NaiveDate,
    pub end_date: NaiveDate,
    pub tickers: &'a [String],
    pub data: DMatrixView<'a, f64>,
}

#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    /// Restrict (and reorder) columns to these tickers.
    pub tickers: Option<Vec<String>>,
    /// Delete rows with an empty or non-numeric cell instead of failing.
    pub drop_incomplete_rows: bool,
}

impl PricePanel {
    pub fn new(dates: Vec<NaiveDate>, tickers: Vec<String>, prices: DMatrix<f64>) -> Result<Self> {
        if prices.nrows() != dates.len() || prices.ncols() != tickers.len() {
            return Err(invalid(format!(
                "price matrix is {}x{}, expected {}x{}",
                prices.nrows(),
                prices.ncols(),
                dates.len(),
                tickers.len()
            )));
        }
        check_tickers(&tickers)?;
        for w in dates.windows(2) {
            if w[1] == w[0] {
                return Err(Error::DuplicateDate(w[1]));
            }
            if w[1] < w[0] {
                return Err(invalid("dates must be strictly increasing"));
            }
        }
        for c in 0..prices.ncols() {
            for r in 0..prices.nrows() {
                let v = prices[(r, c)];
                if !v.is_finite() || v <= 0.0 {
                    return Err(Error::NonpositivePrice {
                        row: r + 1,
                        col: c + 1,
                    });
                }
            }
        }
        Ok(PricePanel {
            dates,
            tickers,
            prices,
        })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn prices(&self) -> &DMatrix<f64> {
        &self.prices
    }

    pub fn n_rows(&self) -> usize {
        self.dates.len()
    }

    pub fn n_tickers(&self) -> usize {
        self.tickers.len()
    }

    /// Column subset in the requested order.
    pub fn select(&self, tickers: &[String]) -> Result<PricePanel> {
        let idx = column_indices(&self.tickers, tickers)?;
        let prices = self.prices.select_columns(idx.iter());
        PricePanel::new(self.dates.clone(), tickers.to_vec(), prices)
    }
}

impl ReturnPanel {
    pub fn new(dates: Vec<NaiveDate>, tickers: Vec<String>, returns: DMatrix<f64>) -> Result<Self> {
        if returns.nrows() != dates.len() || returns.ncols() != tickers.len() {
            return Err(invalid("return matrix shape does not match dates/tickers"));
        }
        if returns.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                module: "ingest",
                what: "log returns",
            });
        }
        Ok(ReturnPanel {
            dates,
            tickers,
            returns,
        })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn tickers(&self) -> &[String] {
        &self.tickers
    }

    pub fn returns(&self) -> &DMatrix<f64> {
        &self.returns
    }

    pub fn n_rows(&self) -> usize {
        self.dates.len()
    }

    pub fn column(&self, ticker: &str) -> Option<Vec<f64>> {
        let c = self.tickers.iter().position(|t| t == ticker)?;
        Some(self.returns.column(c).iter().copied().collect())
    }

    pub fn select(&self, tickers: &[String]) -> Result<ReturnPanel> {
        let idx = column_indices(&self.tickers, tickers)?;
        let returns = self.returns.select_columns(idx.iter());
        ReturnPanel::new(self.dates.clone(), tickers.to_vec(), returns)
    }

    /// The whole panel as a single window.
    pub fn as_window(&self) -> WindowView<'_> {
        WindowView {
            index: 0,
            start_date: self.dates[0],
            end_date: self.dates[self.dates.len() - 1],
            tickers: &self.tickers,
            data: self.returns.rows(0, self.returns.nrows()),
        }
    }
}

impl WindowView<'_> {
    pub fn n_obs(&self) -> usize {
        self.data.nrows()
    }

    pub fn n_assets(&self) -> usize {
        self.data.ncols()
    }
}

fn check_tickers(tickers: &[String]) -> Result<()> {
    if tickers.len() < 2 {
        return Err(Error::TooFewTickers {
            need: 2,
            got: tickers.len(),
        });
    }
    let mut seen = HashSet::new();
    for t in tickers {
        if !seen.insert(t.as_str()) {
            return Err(Error::DuplicateTicker(t.clone()));
        }
    }
    Ok(())
}

fn column_indices(available: &[String], wanted: &[String]) -> Result<Vec<usize>> {
    wanted
        .iter()
        .map(|t| {
            available
                .iter()
                .position(|a| a == t)
                .ok_or_else(|| Error::MissingTicker(t.clone()))
        })
        .collect()
}

pub fn load_prices(path: &Path, ticker_filter: Option<&[String]>) -> Result<PricePanel> {
    let opts = LoadOptions {
        tickers: ticker_filter.map(<[String]>::to_vec),
        drop_incomplete_rows: false,
    };
    load_prices_with(path, &opts)
}

pub fn load_prices_with(path: &Path, opts: &LoadOptions) -> Result<PricePanel> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_prices(file, opts)
}

/// Parses a price CSV. Reported cell positions are 1-based file
/// coordinates (the header is row 1, the `Date` column is col 1).
pub fn read_prices<R: Read>(reader: R, opts: &LoadOptions) -> Result<PricePanel> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    match headers.first() {
        Some(h) if h.trim_start_matches('\u{feff}') == "Date" => {}
        Some(h) => return Err(Error::BadHeader(h.clone())),
        None => return Err(Error::BadHeader(String::new())),
    }
    let all_tickers = headers[1..].to_vec();
    check_tickers(&all_tickers)?;
    let tickers = match &opts.tickers {
        Some(f) => f.clone(),
        None => all_tickers.clone(),
    };
    check_tickers(&tickers)?;
    // file column (0-based) of each selected ticker
    let cols: Vec<usize> = column_indices(&all_tickers, &tickers)?
        .into_iter()
        .map(|c| c + 1)
        .collect();

    let mut rows: Vec<(NaiveDate, Vec<f64>)> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let file_row = i + 2;
        let date_cell = rec.get(0).unwrap_or("");
        let date =
            NaiveDate::parse_from_str(date_cell, "%Y-%m-%d").map_err(|_| Error::MalformedCell {
                row: file_row,
                col: 1,
                value: date_cell.to_owned(),
            })?;
        let mut values = Vec::with_capacity(cols.len());
        let mut incomplete = false;
        for &c in &cols {
            let cell = rec.get(c).unwrap_or("");
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => {
                    if v <= 0.0 {
                        return Err(Error::NonpositivePrice {
                            row: file_row,
                            col: c + 1,
                        });
                    }
                    values.push(v);
                }
                _ if opts.drop_incomplete_rows => {
                    incomplete = true;
                    break;
                }
                _ => {
                    return Err(Error::MalformedCell {
                        row: file_row,
                        col: c + 1,
                        value: cell.to_owned(),
                    })
                }
            }
        }
        if !incomplete {
            rows.push((date, values));
        }
    }

    rows.sort_by_key(|(d, _)| *d);
    let n = tickers.len();
    let dates: Vec<NaiveDate> = rows.iter().map(|(d, _)| *d).collect();
    let prices = DMatrix::from_fn(rows.len(), n, |r, c| rows[r].1[c]);
    PricePanel::new(dates, tickers, prices)
}

pub fn log_returns(panel: &PricePanel) -> Result<ReturnPanel> {
    let t = panel.n_rows();
    if t < 2 {
        return Err(Error::TooFewRows {
            module: "ingest",
            need: 2,
            got: t,
        });
    }
    let p = &panel.prices;
    let returns = DMatrix::from_fn(t - 1, panel.n_tickers(), |r, c| {
        p[(r + 1, c)].ln() - p[(r, c)].ln()
    });
    ReturnPanel::new(panel.dates[1..].to_vec(), panel.tickers.clone(), returns)
}

/// Number of full windows; partial windows at the end are not emitted.
pub fn window_count(rows: usize, window_len: usize, step: usize) -> usize {
    if rows < window_len || step == 0 {
        0
    } else {
        (rows - window_len) / step + 1
    }
}

pub fn rolling_windows(
    panel: &ReturnPanel,
    window_len: usize,
    step: usize,
) -> Result<Vec<WindowView<'_>>> {
    if window_len < 2 {
        return Err(invalid(format!(
            "window length must be >= 2, got {window_len}"
        )));
    }
    if step < 1 {
        return Err(invalid("step must be >= 1"));
    }
    if panel.n_rows() < window_len {
        return Err(Error::TooFewRows {
            module: "ingest",
            need: window_len,
            got: panel.n_rows(),
        });
    }
    let windows = (0..window_count(panel.n_rows(), window_len, step))
        .map(|k| {
            let start = k * step;
            WindowView {
                index: k,
                start_date: panel.dates[start],
                end_date: panel.dates[start + window_len - 1],
                tickers: &panel.tickers,
                data: panel.returns.rows(start, window_len),
            }
        })
        .collect();
    Ok(windows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(s: &str) -> Result<PricePanel> {
        read_prices(s.as_bytes(), &LoadOptions::default())
    }

    fn d(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    #[test]
    fn parses_three_rows() {
        let p = read("Date,A,B\n2020-01-01,1,2\n2020-01-02,1.5,2.5\n2020-01-03,2,3\n").unwrap();
        assert_eq!(p.n_rows(), 3);
        assert_eq!(p.n_tickers(), 2);
        assert_eq!(p.prices()[(1, 1)], 2.5);
    }

    #[test]
    fn zero_price_rejected() {
        let err = read("Date,A,B\n2020-01-01,1,2\n2020-01-02,0.0,2.5\n").unwrap_err();
        assert!(matches!(err, Error::NonpositivePrice { row: 3, col: 2 }));
        assert!(err.to_string().contains("nonpositive price at (3,2)"));
    }

    #[test]
    fn shuffled_dates_are_sorted() {
        let csv = "Date,A,B\n2020-01-03,3,30\n2020-01-01,1,10\n2020-01-02,2,20\n";
        let p = read(csv).unwrap();
        // sort the raw rows externally and compare
        let mut raw: Vec<(String, f64, f64)> = csv
            .lines()
            .skip(1)
            .map(|l| {
                let f: Vec<&str> = l.split(',').collect();
                (
                    f[0].to_owned(),
                    f[1].parse().unwrap(),
                    f[2].parse().unwrap(),
                )
            })
            .collect();
        raw.sort_by(|a, b| a.0.cmp(&b.0));
        for (r, (date, a, b)) in raw.iter().enumerate() {
            assert_eq!(p.dates()[r], d(date));
            assert_eq!(p.prices()[(r, 0)], *a);
            assert_eq!(p.prices()[(r, 1)], *b);
        }
    }

    #[test]
    fn duplicate_date_and_ticker() {
        assert!(matches!(
            read("Date,A,B\n2020-01-01,1,2\n2020-01-01,1,2\n"),
            Err(Error::DuplicateDate(_))
        ));
        assert!(matches!(
            read("Date,A,A\n2020-01-01,1,2\n"),
            Err(Error::DuplicateTicker(_))
        ));
    }

    #[test]
    fn malformed_and_missing_cells() {
        let err = read("Date,A,B\n2020-01-01,1,x\n").unwrap_err();
        assert!(matches!(err, Error::MalformedCell { row: 2, col: 3, .. }));
        let err = read("Date,A,B\n2020-01-01,1,\n").unwrap_err();
        assert!(matches!(err, Error::MalformedCell { .. }));
        let err = read("Date,A,B\n01/02/2020,1,2\n").unwrap_err();
        assert!(matches!(err, Error::MalformedCell { col: 1, .. }));
        assert!(matches!(read("Day,A,B\n"), Err(Error::BadHeader(_))));
    }

    #[test]
    fn drop_incomplete_rows() {
        let opts = LoadOptions {
            tickers: None,
            drop_incomplete_rows: true,
        };
        let p = read_prices(
            "Date,A,B\n2020-01-01,1,2\n2020-01-02,,2\n2020-01-03,1,2\n".as_bytes(),
            &opts,
        )
        .unwrap();
        assert_eq!(p.n_rows(), 2);
    }

    #[test]
    fn ticker_filter_reorders_and_validates() {
        let opts = LoadOptions {
            tickers: Some(vec!["C".into(), "A".into()]),
            drop_incomplete_rows: false,
        };
        let p = read_prices("Date,A,B,C\n2020-01-01,1,2,3\n".as_bytes(), &opts).unwrap();
        assert_eq!(p.tickers(), ["C", "A"]);
        assert_eq!(p.prices()[(0, 0)], 3.0);

        let opts = LoadOptions {
            tickers: Some(vec!["A".into(), "Z".into()]),
            drop_incomplete_rows: false,
        };
        let err = read_prices("Date,A,B\n2020-01-01,1,2\n".as_bytes(), &opts).unwrap_err();
        assert!(matches!(err, Error::MissingTicker(t) if t == "Z"));
    }

    #[test]
    fn missing_file() {
        let err = load_prices(Path::new("/nonexistent/prices.csv"), None).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    fn single_column(prices: &[f64]) -> PricePanel {
        let dates = (0..prices.len())
            .map(|i| d("2020-01-01") + chrono::Days::new(i as u64))
            .collect();
        let m = DMatrix::from_fn(prices.len(), 2, |r, _| prices[r]);
        PricePanel::new(dates, vec!["A".into(), "B".into()], m).unwrap()
    }

    #[test]
    fn log_return_values() {
        let r = log_returns(&single_column(&[100.0, 100.0, 100.0])).unwrap();
        assert_eq!(r.returns().column(0).as_slice(), &[0.0, 0.0]);

        let r = log_returns(&single_column(&[1.0, std::f64::consts::E])).unwrap();
        assert!((r.returns()[(0, 0)] - 1.0).abs() < 1e-15);

        let r = log_returns(&single_column(&[100.0, 110.0, 99.0])).unwrap();
        assert!((r.returns()[(0, 0)] - 0.0953102).abs() < 1e-7);
        assert!((r.returns()[(1, 0)] - -0.1053605).abs() < 1e-7);
        assert_eq!(r.dates()[0], d("2020-01-02"));

        assert!(log_returns(&single_column(&[100.0])).is_err());
    }

    fn returns_panel(rows: usize) -> ReturnPanel {
        let dates = (0..rows)
            .map(|i| d("2020-01-01") + chrono::Days::new(i as u64))
            .collect();
        let m = DMatrix::from_fn(rows, 2, |r, c| (r * 2 + c) as f64);
        ReturnPanel::new(dates, vec!["A".into(), "B".into()], m).unwrap()
    }

    #[test]
    fn window_boundaries() {
        let p = returns_panel(65);
        let w = rolling_windows(&p, 63, 1).unwrap();
        assert_eq!(w.len(), 3);
        for (k, win) in w.iter().enumerate() {
            assert_eq!(win.data[(0, 0)], (k * 2) as f64);
            assert_eq!(win.n_obs(), 63);
            assert_eq!(win.end_date, p.dates()[k + 62]);
        }

        assert_eq!(rolling_windows(&returns_panel(63), 63, 1).unwrap().len(), 1);

        let p = returns_panel(10);
        let starts: Vec<f64> = rolling_windows(&p, 4, 3)
            .unwrap()
            .iter()
            .map(|w| w.data[(0, 0)] / 2.0)
            .collect();
        assert_eq!(starts, vec![0.0, 3.0, 6.0]);

        assert!(rolling_windows(&returns_panel(5), 6, 1).is_err());
        assert!(rolling_windows(&returns_panel(5), 1, 1).is_err());
    }
}
