//! Monthly return data: parsing, rolling estimation windows, reference
//! points and zero-probability state augmentation.
//!
//! All returns are in percent per month, keyed by `YYYYMM`.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::distribution::DiscreteReturnDistribution;
use crate::error::{Error, Result};
use crate::milp::AssetPanel;

/// Values the data library uses for missing observations.
const SENTINELS: [f64; 2] = [-99.99, -999.0];
const GRID_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct YearMonth {
    pub year: i32,
    pub month: u32,
}

impl YearMonth {
    pub fn new(year: i32, month: u32) -> Option<Self> {
        (1..=12).contains(&month).then_some(Self { year, month })
    }

    pub fn index(self) -> i64 {
        i64::from(self.year) * 12 + i64::from(self.month) - 1
    }

    fn from_index(i: i64) -> Self {
        Self {
            year: i.div_euclid(12) as i32,
            month: i.rem_euclid(12) as u32 + 1,
        }
    }

    pub fn plus(self, months: i64) -> Self {
        Self::from_index(self.index() + months)
    }

    pub fn months_until(self, other: Self) -> i64 {
        other.index() - self.index()
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}{:02}", self.year, self.month)
    }
}

impl FromStr for YearMonth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Data(format!("`{s}` is not a YYYYMM month"));
        if s.len() != 6 || !s.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let year = s[..4].parse().map_err(|_| bad())?;
        let month = s[4..].parse().map_err(|_| bad())?;
        Self::new(year, month).ok_or_else(bad)
    }
}

/// A contiguous monthly series. Missing observations are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSeries {
    pub label: String,
    pub start: YearMonth,
    pub values: Vec<Option<f64>>,
}

impl ReturnSeries {
    pub fn new(label: impl Into<String>, start: YearMonth, values: Vec<Option<f64>>) -> Self {
        Self {
            label: label.into(),
            start,
            values,
        }
    }

    /// A series without gaps.
    pub fn complete(label: impl Into<String>, start: YearMonth, values: Vec<f64>) -> Self {
        Self::new(label, start, values.into_iter().map(Some).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Last month covered. Equal to `start` for an empty series.
    pub fn end(&self) -> YearMonth {
        self.start.plus(self.len().max(1) as i64 - 1)
    }

    pub fn date(&self, i: usize) -> YearMonth {
        self.start.plus(i as i64)
    }

    pub fn get(&self, month: YearMonth) -> Option<f64> {
        let i = self.start.months_until(month);
        if i < 0 {
            return None;
        }
        self.values.get(i as usize).copied().flatten()
    }

    /// Months with a missing observation.
    pub fn gaps(&self) -> Vec<YearMonth> {
        (0..self.len())
            .filter(|&i| self.values[i].is_none())
            .map(|i| self.date(i))
            .collect()
    }

    /// Sub-series for `[from, from + len)`. `None` outside the data.
    pub fn slice(&self, from: YearMonth, len: usize) -> Option<Vec<Option<f64>>> {
        let i = self.start.months_until(from);
        if i < 0 || i as usize + len > self.len() {
            return None;
        }
        Some(self.values[i as usize..i as usize + len].to_vec())
    }

    /// Elementwise sum, over the months both series cover.
    pub fn plus_series(&self, other: &ReturnSeries, label: impl Into<String>) -> Result<ReturnSeries> {
        let (start, len) = common_range(&[self, other])?;
        let a = self.slice(start, len).expect("in range");
        let b = other.slice(start, len).expect("in range");
        let values = a
            .into_iter()
            .zip(b)
            .map(|(x, y)| Some(x? + y?))
            .collect();
        Ok(ReturnSeries::new(label, start, values))
    }
}

impl ReturnSeries {
    /// The part of the series inside `[from, to]`, either end optional.
    pub fn clip(&self, from: Option<YearMonth>, to: Option<YearMonth>) -> ReturnSeries {
        let lo = from.map_or(0, |f| self.start.months_until(f).clamp(0, self.len() as i64) as usize);
        let hi = to.map_or(self.len(), |t| (self.start.months_until(t) + 1).clamp(0, self.len() as i64) as usize);
        let hi = hi.max(lo);
        ReturnSeries::new(self.label.clone(), self.start.plus(lo as i64), self.values[lo..hi].to_vec())
    }
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: PathBuf::from(path),
        line,
        message: message.into(),
    }
}

fn fields(line: &str) -> Vec<&str> {
    if line.contains(',') {
        line.split(',').map(str::trim).collect()
    } else {
        line.split_whitespace().collect()
    }
}

fn is_data_line(line: &str) -> bool {
    fields(line).first().is_some_and(|f| f.parse::<YearMonth>().is_ok())
}

fn is_sentinel(v: f64) -> bool {
    SENTINELS.iter().any(|s| (v - s).abs() < 1e-9)
}

/// Parses the first block of `YYYYMM` rows at or after line `from`, with
/// the labels taken from the header line just above it.
fn parse_block(text: &str, path: &Path, from: usize) -> Result<Vec<ReturnSeries>> {
    let lines: Vec<&str> = text.lines().collect();
    let Some(first) = (from..lines.len()).find(|&i| is_data_line(lines[i])) else {
        return Err(parse_err(path, from + 1, "no YYYYMM data rows"));
    };
    let width = fields(lines[first]).len() - 1;
    if width == 0 {
        return Err(parse_err(path, first + 1, "row has no values"));
    }
    let header = lines[from..first]
        .iter()
        .rev()
        .find(|l| !l.trim().is_empty())
        .map(|l| fields(l))
        .map(|f| {
            let f: Vec<&str> = if f.first().is_some_and(|s| s.is_empty()) { f[1..].to_vec() } else { f };
            if f.len() == width + 1 { f[1..].to_vec() } else { f }
        })
        .filter(|f| f.len() == width && f.iter().any(|s| s.parse::<f64>().is_err()));
    let labels: Vec<String> = match header {
        Some(h) => h.iter().map(|s| s.to_string()).collect(),
        None => (1..=width).map(|j| format!("col{j}")).collect(),
    };

    let start: YearMonth = fields(lines[first])[0].parse()?;
    let mut columns: Vec<Vec<Option<f64>>> = vec![Vec::new(); width];
    let mut expected = start;
    for (no, line) in lines.iter().enumerate().skip(first) {
        if !is_data_line(line) {
            break;
        }
        let f = fields(line);
        let month: YearMonth = f[0].parse()?;
        if month != expected {
            let what = if month < expected { "duplicate or out-of-order" } else { "missing month before" };
            return Err(parse_err(path, no + 1, format!("{what} {month}")));
        }
        if f.len() != width + 1 {
            return Err(parse_err(
                path,
                no + 1,
                format!("expected {} fields, found {}", width + 1, f.len()),
            ));
        }
        for (j, cell) in f[1..].iter().enumerate() {
            let v: f64 = cell
                .parse()
                .map_err(|_| parse_err(path, no + 1, format!("bad value `{cell}`")))?;
            if !v.is_finite() {
                return Err(parse_err(path, no + 1, format!("bad value `{cell}`")));
            }
            columns[j].push((!is_sentinel(v)).then_some(v));
        }
        expected = expected.plus(1);
    }
    Ok(labels
        .into_iter()
        .zip(columns)
        .map(|(l, v)| ReturnSeries::new(l, start, v))
        .collect())
}

/// Reads a monthly table: an optional header line of labels followed by
/// rows `YYYYMM v1 v2 ...`, comma or blank separated. Only the first block
/// of monthly rows is read; annual blocks further down are ignored.
pub fn parse_table(path: &Path) -> Result<Vec<ReturnSeries>> {
    let text = std::fs::read_to_string(path)?;
    parse_block(&text, path, 0)
}

/// Reads the value-weighted monthly block of a 49-industry portfolio file.
pub fn parse_ff49(path: &Path) -> Result<Vec<ReturnSeries>> {
    let text = std::fs::read_to_string(path)?;
    let from = text
        .lines()
        .position(|l| {
            let l = l.to_ascii_lowercase();
            l.contains("value weighted") && l.contains("monthly")
        })
        .unwrap_or(0);
    let series = parse_block(&text, path, from)?;
    if series.len() != 49 {
        return Err(parse_err(
            path,
            from + 1,
            format!("expected 49 industry columns, found {}", series.len()),
        ));
    }
    Ok(series)
}

/// Reads one series from a `YYYYMM,value` file. `column` picks a labeled
/// column from a wider table; by default the first value column is used.
pub fn parse_series(path: &Path, column: Option<&str>) -> Result<ReturnSeries> {
    let text = std::fs::read_to_string(path)?;
    if text.trim().is_empty() {
        return Err(parse_err(path, 1, "empty file"));
    }
    let mut table = parse_block(&text, path, 0)?;
    let mut s = match column {
        None => table.swap_remove(0),
        Some(c) => {
            let i = table
                .iter()
                .position(|s| s.label.eq_ignore_ascii_case(c))
                .ok_or_else(|| parse_err(path, 1, format!("no column `{c}`")))?;
            table.swap_remove(i)
        }
    };
    if column.is_none() && s.label == "col1" {
        s.label = path
            .file_stem()
            .map_or_else(|| "series".into(), |f| f.to_string_lossy().into_owned());
    }
    Ok(s)
}

/// Reads plain numbers separated by commas or blanks, one state after
/// another. Lines starting with `#` are skipped.
pub fn read_values(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        for cell in line.split(|c: char| c == ',' || c.is_whitespace()).filter(|c| !c.is_empty()) {
            out.push(number(cell, path, no)?);
        }
    }
    if out.is_empty() {
        return Err(parse_err(path, 1, "no values"));
    }
    Ok(out)
}

fn number(cell: &str, path: &Path, no: usize) -> Result<f64> {
    cell.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| parse_err(path, no + 1, format!("bad value `{cell}`")))
}

/// Reads a state-by-asset table: one row per state, one column per asset,
/// with an optional header line of labels. Returns labels and
/// `returns[asset][state]`.
pub fn read_state_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let text = std::fs::read_to_string(path)?;
    let mut labels: Option<Vec<String>> = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let f = fields(trimmed);
        if rows.is_empty() && labels.is_none() && f.iter().any(|c| c.parse::<f64>().is_err()) {
            labels = Some(f.iter().map(|c| c.to_string()).collect());
            continue;
        }
        let width = labels.as_ref().map_or_else(|| rows.first().map(Vec::len), |l| Some(l.len()));
        if let Some(w) = width {
            if f.len() != w {
                return Err(parse_err(path, no + 1, format!("expected {w} fields, found {}", f.len())));
            }
        }
        rows.push(f.iter().map(|c| number(c, path, no)).collect::<Result<_>>()?);
    }
    if rows.is_empty() {
        return Err(parse_err(path, 1, "no data rows"));
    }
    let m = rows[0].len();
    let labels = labels.unwrap_or_else(|| (1..=m).map(|j| format!("A{j}")).collect());
    let returns = (0..m).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
    Ok((labels, returns))
}

/// Market return and T-bill rate from a factors file: market is
/// `Mkt-RF + RF`.
pub fn parse_ff_factors(path: &Path) -> Result<(ReturnSeries, ReturnSeries)> {
    let table = parse_table(path)?;
    let find = |name: &str| {
        table
            .iter()
            .find(|s| s.label.eq_ignore_ascii_case(name))
            .ok_or_else(|| parse_err(path, 1, format!("no `{name}` column")))
    };
    let excess = find("Mkt-RF")?;
    let rf = find("RF")?.clone();
    let market = excess.plus_series(&rf, "Market")?;
    Ok((market, rf))
}

/// The months every series covers.
pub fn common_range(series: &[&ReturnSeries]) -> Result<(YearMonth, usize)> {
    let start = series
        .iter()
        .map(|s| s.start)
        .max()
        .ok_or_else(|| Error::Data("no series given".into()))?;
    let end = series.iter().map(|s| s.start.plus(s.len() as i64)).min().expect("non-empty");
    let len = start.months_until(end).max(0) as usize;
    Ok((start, len))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceMode {
    /// Geometric mean of the T-bill rate over the window.
    RiskFree,
    /// Lower-middle order statistic of the benchmark returns.
    Median,
}

impl fmt::Display for ReferenceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReferenceMode::RiskFree => "rf",
            ReferenceMode::Median => "median",
        })
    }
}

impl FromStr for ReferenceMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rf" | "riskfree" | "risk-free" => Ok(ReferenceMode::RiskFree),
            "median" => Ok(ReferenceMode::Median),
            _ => Err(Error::Data(format!("unknown reference mode `{s}`"))),
        }
    }
}

/// One estimation window. States are sorted by benchmark return; `months`
/// records the month behind each state (`None` for an added state).
#[derive(Debug, Clone, PartialEq)]
pub struct EstimationWindow {
    pub id: usize,
    pub start: YearMonth,
    pub end: YearMonth,
    pub months: Vec<Option<YearMonth>>,
    pub panel: AssetPanel,
    pub benchmark: DiscreteReturnDistribution,
    /// T-bill rates in calendar order, empty when no series was given.
    pub riskfree: Vec<f64>,
    pub augmented: bool,
}

impl EstimationWindow {
    /// Builds a window from calendar-ordered data with equal state
    /// probabilities, sorting the states by benchmark return.
    pub fn from_months(
        id: usize,
        start: YearMonth,
        assets: Vec<Vec<f64>>,
        labels: Vec<String>,
        benchmark: Vec<f64>,
        riskfree: Vec<f64>,
    ) -> Result<Self> {
        let n = benchmark.len();
        if n == 0 {
            return Err(Error::InsufficientData { needed: 1, available: 0 });
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| benchmark[a].total_cmp(&benchmark[b]));
        let y: Vec<f64> = order.iter().map(|&i| benchmark[i]).collect();
        let returns: Vec<Vec<f64>> = assets
            .iter()
            .map(|a| order.iter().map(|&i| a[i]).collect())
            .collect();
        let probs = vec![1.0 / n as f64; n];
        Ok(Self {
            id,
            start,
            end: start.plus(n as i64 - 1),
            months: order.iter().map(|&i| Some(start.plus(i as i64))).collect(),
            panel: AssetPanel::new(returns, labels, probs.clone())?,
            benchmark: DiscreteReturnDistribution::new(y, probs)?,
            riskfree,
            augmented: false,
        })
    }

    pub fn num_states(&self) -> usize {
        self.benchmark.len()
    }
}

/// A window skipped because some series has no observation in it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectedWindow {
    pub id: usize,
    pub start: YearMonth,
    pub end: YearMonth,
    /// `(series label, month)` of every missing observation.
    pub missing: Vec<(String, YearMonth)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowSet {
    pub windows: Vec<EstimationWindow>,
    pub rejected: Vec<RejectedWindow>,
}

/// Number of windows of `window` months, stepping by `step`, in `months`.
pub fn window_count(months: usize, window: usize, step: usize) -> usize {
    if window == 0 || step == 0 || months < window {
        0
    } else {
        (months - window) / step + 1
    }
}

/// Rolling windows `[t, t + window)` from the start of the range all series
/// share, advancing by `step`. Windows touching a missing observation are
/// reported in `rejected` instead of being built.
pub fn rolling_windows(
    assets: &[ReturnSeries],
    benchmark: &ReturnSeries,
    riskfree: Option<&ReturnSeries>,
    window: usize,
    step: usize,
) -> Result<WindowSet> {
    if window == 0 || step == 0 {
        return Err(Error::Data("window and step must be positive".into()));
    }
    if assets.is_empty() {
        return Err(Error::Data("no asset series".into()));
    }
    let mut all: Vec<&ReturnSeries> = assets.iter().collect();
    all.push(benchmark);
    all.extend(riskfree);
    let (start, len) = common_range(&all)?;
    if len < window {
        return Err(Error::InsufficientData {
            needed: window,
            available: len,
        });
    }
    let labels: Vec<String> = assets.iter().map(|s| s.label.clone()).collect();
    let mut out = WindowSet {
        windows: Vec::new(),
        rejected: Vec::new(),
    };
    for id in 0..window_count(len, window, step) {
        let from = start.plus((id * step) as i64);
        let cut = |s: &ReturnSeries| s.slice(from, window).expect("inside the common range");
        let mut missing = Vec::new();
        let mut take = |s: &ReturnSeries| -> Vec<f64> {
            cut(s)
                .into_iter()
                .enumerate()
                .map(|(i, v)| {
                    v.unwrap_or_else(|| {
                        missing.push((s.label.clone(), from.plus(i as i64)));
                        f64::NAN
                    })
                })
                .collect()
        };
        let x: Vec<Vec<f64>> = assets.iter().map(&mut take).collect();
        let y = take(benchmark);
        let rf = riskfree.map(&mut take).unwrap_or_default();
        if missing.is_empty() {
            out.windows.push(EstimationWindow::from_months(id, from, x, labels.clone(), y, rf)?);
        } else {
            out.rejected.push(RejectedWindow {
                id,
                start: from,
                end: from.plus(window as i64 - 1),
                missing,
            });
        }
    }
    Ok(out)
}

/// `100 [(Π (1 + r_i / 100))^(1/n) - 1]` for monthly rates in percent.
pub fn geometric_mean_rate(rates: &[f64]) -> Result<f64> {
    if rates.is_empty() {
        return Err(Error::Data("no risk-free observations".into()));
    }
    let log: f64 = rates.iter().map(|r| (1.0 + r / 100.0).ln()).sum();
    Ok(100.0 * ((log / rates.len() as f64).exp() - 1.0))
}

/// Smallest return `y` with `P(Y <= y) >= 1/2`. With equal probabilities
/// this is the middle return, or the lower middle one for even `n`.
pub fn lower_median(dist: &DiscreteReturnDistribution) -> f64 {
    let mut states: Vec<(f64, f64)> = dist
        .returns()
        .iter()
        .copied()
        .zip(dist.probs().iter().copied())
        .filter(|(_, p)| *p > 0.0)
        .collect();
    states.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut cum = 0.0;
    for &(y, p) in &states {
        cum += p;
        if cum >= 0.5 - GRID_TOL {
            return y;
        }
    }
    states.last().map_or(f64::NAN, |s| s.0)
}

/// Reference point for `window`: the compounded mean T-bill rate, or the
/// benchmark's lower median. The median is always a benchmark grid point.
pub fn reference_point(window: &EstimationWindow, mode: ReferenceMode) -> Result<f64> {
    match mode {
        ReferenceMode::RiskFree => {
            if window.riskfree.is_empty() {
                return Err(Error::Data("the window has no risk-free series".into()));
            }
            geometric_mean_rate(&window.riskfree)
        }
        ReferenceMode::Median => Ok(lower_median(&window.benchmark)),
    }
}

/// Makes `r` a benchmark grid point by adding a zero-probability state in
/// which the benchmark and every asset return `r`. Unchanged if `r` is
/// already on the grid.
pub fn augment_reference_state(window: &EstimationWindow, r: f64) -> Result<EstimationWindow> {
    let y = window.benchmark.returns();
    if y.iter().any(|v| (v - r).abs() <= GRID_TOL) {
        return Ok(window.clone());
    }
    let at = y.partition_point(|&v| v < r);
    let insert = |v: &[f64], value: f64| {
        let mut v = v.to_vec();
        v.insert(at, value);
        v
    };
    let probs = insert(window.benchmark.probs(), 0.0);
    let returns: Vec<Vec<f64>> = window.panel.returns().iter().map(|a| insert(a, r)).collect();
    let mut months = window.months.clone();
    months.insert(at, None);
    Ok(EstimationWindow {
        months,
        panel: AssetPanel::new(returns, window.panel.labels().to_vec(), probs.clone())?,
        benchmark: DiscreteReturnDistribution::new(insert(y, r), probs)?,
        augmented: true,
        ..window.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn ym(s: &str) -> YearMonth {
        s.parse().unwrap()
    }

    fn file(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    fn window(y: Vec<f64>, rf: Vec<f64>) -> EstimationWindow {
        let x = vec![y.iter().map(|v| v + 1.0).collect(), y.clone()];
        EstimationWindow::from_months(0, ym("200001"), x, vec!["a".into(), "b".into()], y, rf).unwrap()
    }

    #[test]
    fn year_month_arithmetic() {
        let a = ym("196401");
        assert_eq!(a.plus(35).to_string(), "196612");
        assert_eq!(a.months_until(ym("202412")), 731);
        assert!("196413".parse::<YearMonth>().is_err());
        assert!("19641".parse::<YearMonth>().is_err());
    }

    #[test]
    fn ff49_layout() {
        let labels: Vec<String> = (1..=49).map(|j| format!("I{j}")).collect();
        let row = |m: &str, first: &str| {
            let mut cells = vec![first.to_string()];
            cells.extend((1..49).map(|j| format!("{:.2}", j as f64 / 10.0)));
            format!("{m},{}", cells.join(","))
        };
        let text = format!(
            "  This file was created by a script.\n\n  Average Value Weighted Returns -- Monthly\n,{}\n{}\n{}\n\n  Average Equal Weighted Returns -- Monthly\n,{}\n{}\n",
            labels.join(","),
            row("196401", "1.50"),
            row("196402", "-99.99"),
            labels.join(","),
            row("196401", "7.00"),
        );
        let f = file(&text);
        let s = parse_ff49(f.path()).unwrap();
        assert_eq!(s.len(), 49);
        assert_eq!(s[0].label, "I1");
        assert_eq!(s[0].start, ym("196401"));
        assert_eq!(s[0].values, vec![Some(1.5), None]);
        assert_eq!(s[0].gaps(), vec![ym("196402")]);
        assert_eq!(s[48].values[1], Some(4.8));
    }

    #[test]
    fn ff49_errors() {
        let f = file("  Average Value Weighted Returns -- Monthly\n,A,B\n196401,1,2\n196402,1\n");
        assert!(matches!(parse_ff49(f.path()), Err(Error::Parse { line: 4, .. })));
        let f = file(",A,B\n196401,1,2\n");
        assert!(matches!(parse_ff49(f.path()), Err(Error::Parse { .. })));
    }

    #[test]
    fn two_column_series() {
        let f = file("YYYYMM,rf\n196401,0.3\n196402,0.28\n");
        let s = parse_series(f.path(), None).unwrap();
        assert_eq!(s.label, "rf");
        assert_eq!(s.values, vec![Some(0.3), Some(0.28)]);

        let f = file("196401,0.3\n196401,0.28\n");
        assert!(matches!(parse_series(f.path(), None), Err(Error::Parse { line: 2, .. })));
        let f = file("196401,0.3\n196403,0.28\n");
        assert!(parse_series(f.path(), None).is_err());
        let f = file("");
        assert!(parse_series(f.path(), None).is_err());
    }

    #[test]
    fn factors_file() {
        let f = file("Monthly factors\n,Mkt-RF,SMB,HML,RF\n196401,2.0,0.1,0.2,0.3\n196402,-1.0,0.1,0.2,0.25\n\n Annual Factors\n,Mkt-RF,SMB,HML,RF\n1964,10,1,1,3\n");
        let (mkt, rf) = parse_ff_factors(f.path()).unwrap();
        assert_eq!(mkt.values, vec![Some(2.3), Some(-0.75)]);
        assert_eq!(rf.values.len(), 2);
    }

    #[test]
    fn window_counts() {
        assert_eq!(window_count(732, 36, 12), 59);
        assert_eq!(window_count(36, 36, 12), 1);
        assert_eq!(window_count(35, 36, 12), 0);
        let series = |n: usize| ReturnSeries::complete("s", ym("196401"), (0..n).map(|i| i as f64).collect());
        let ws = rolling_windows(&[series(732)], &series(732), Some(&series(732)), 36, 12).unwrap();
        assert_eq!(ws.windows.len(), 59);
        assert_eq!(ws.windows[0].start, ym("196401"));
        assert_eq!(ws.windows[0].end, ym("196612"));
        assert_eq!(ws.windows[58].end, ym("202412"));
        assert!(matches!(
            rolling_windows(&[series(35)], &series(35), None, 36, 12),
            Err(Error::InsufficientData { needed: 36, available: 35 })
        ));
    }

    #[test]
    fn gaps_reject_windows() {
        let mut a = ReturnSeries::complete("a", ym("200001"), vec![1.0; 48]);
        a.values[13] = None;
        let y = ReturnSeries::complete("y", ym("200001"), vec![0.5; 48]);
        let ws = rolling_windows(&[a], &y, None, 12, 12).unwrap();
        assert_eq!(ws.windows.len(), 3);
        assert_eq!(ws.rejected.len(), 1);
        assert_eq!(ws.rejected[0].missing, vec![("a".to_string(), ym("200102"))]);
    }

    #[test]
    fn windows_sort_states_and_align() {
        let a = ReturnSeries::complete("a", ym("199912"), vec![9.0, 1.0, 2.0, 3.0]);
        let y = ReturnSeries::complete("y", ym("200001"), vec![0.3, -0.1, 0.2]);
        let w = &rolling_windows(&[a], &y, None, 3, 1).unwrap().windows[0];
        assert_eq!(w.start, ym("200001"));
        assert_eq!(w.benchmark.returns(), &[-0.1, 0.2, 0.3]);
        assert_eq!(w.panel.asset(0), &[2.0, 3.0, 1.0]);
        assert_eq!(w.months[0], Some(ym("200002")));
    }

    #[test]
    fn reference_points() {
        let w = window(vec![-1.0, 0.0, 2.0], vec![0.4; 3]);
        assert!((reference_point(&w, ReferenceMode::RiskFree).unwrap() - 0.4).abs() < 1e-12);
        assert_eq!(reference_point(&w, ReferenceMode::Median).unwrap(), 0.0);
        let w = window(vec![2.0, -1.0, 1.0, 0.0], vec![]);
        assert_eq!(reference_point(&w, ReferenceMode::Median).unwrap(), 0.0);
        assert!(reference_point(&w, ReferenceMode::RiskFree).is_err());
        // (1.01 * 1.03)^(1/2) - 1
        let w = window(vec![0.0, 1.0], vec![1.0, 3.0]);
        let r = reference_point(&w, ReferenceMode::RiskFree).unwrap();
        assert!((r - 100.0 * ((1.01f64 * 1.03).sqrt() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn augmentation() {
        let w = window(vec![-1.0, 0.0, 2.0], vec![]);
        let same = augment_reference_state(&w, 0.0).unwrap();
        assert!(!same.augmented);
        assert_eq!(same, w);

        let aug = augment_reference_state(&w, 0.4).unwrap();
        assert!(aug.augmented);
        assert_eq!(aug.num_states(), 4);
        assert_eq!(aug.benchmark.returns(), &[-1.0, 0.0, 0.4, 2.0]);
        assert_eq!(aug.benchmark.probs()[2], 0.0);
        assert_eq!(aug.panel.asset(0)[2], 0.4);
        assert_eq!(aug.months[2], None);
        assert_eq!(reference_point(&aug, ReferenceMode::Median).unwrap(), 0.0);
        for t in [-2.0, -0.5, 0.4, 1.0, 3.0] {
            assert_eq!(aug.benchmark.integrated_cdf(t), w.benchmark.integrated_cdf(t));
            assert_eq!(aug.benchmark.cdf(t), w.benchmark.cdf(t));
        }
        assert_eq!(aug.benchmark.expected_return(), w.benchmark.expected_return());
        let lam = [0.3, 0.7];
        let before = DiscreteReturnDistribution::new(w.panel.portfolio(&lam), w.panel.probs().to_vec()).unwrap();
        let after = DiscreteReturnDistribution::new(aug.panel.portfolio(&lam), aug.panel.probs().to_vec()).unwrap();
        assert!((aug.panel.portfolio(&lam)[2] - 0.4).abs() < 1e-12);
        assert_eq!(after.expected_return(), before.expected_return());
    }

    #[test]
    fn weighted_median() {
        let d = DiscreteReturnDistribution::new(vec![-1.0, 0.0, 2.0], vec![0.6, 0.2, 0.2]).unwrap();
        assert_eq!(lower_median(&d), -1.0);
        let d = DiscreteReturnDistribution::new(vec![-1.0, 0.0, 2.0], vec![0.1, 0.2, 0.7]).unwrap();
        assert_eq!(lower_median(&d), 2.0);
        let d = DiscreteReturnDistribution::uniform(vec![-3.0, -1.0, 0.0, 2.0]).unwrap();
        assert_eq!(lower_median(&d), -1.0);
    }

    #[test]
    fn plain_values_and_state_tables() {
        let f = file("# candidate\n0, 1\n3\n");
        assert_eq!(read_values(f.path()).unwrap(), vec![0.0, 1.0, 3.0]);
        let f = file("1\nx\n");
        assert!(matches!(read_values(f.path()), Err(Error::Parse { line: 2, .. })));
        assert!(read_values(file("# nothing\n").path()).is_err());

        let f = file("Food,Steel\n1,2\n-1,0.5\n");
        let (labels, r) = read_state_table(f.path()).unwrap();
        assert_eq!(labels, vec!["Food", "Steel"]);
        assert_eq!(r, vec![vec![1.0, -1.0], vec![2.0, 0.5]]);
        let (labels, r) = read_state_table(file("1 2\n3 4\n").path()).unwrap();
        assert_eq!(labels, vec!["A1", "A2"]);
        assert_eq!(r[1], vec![2.0, 4.0]);
        assert!(matches!(read_state_table(file("1 2\n3\n").path()), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn clipping() {
        let s = ReturnSeries::complete("a", ym("200001"), (0..24).map(f64::from).collect());
        let c = s.clip(Some(ym("200006")), Some(ym("200012")));
        assert_eq!(c.start, ym("200006"));
        assert_eq!(c.len(), 7);
        assert_eq!(c.values[0], Some(5.0));
        assert_eq!(s.clip(None, None), s);
        assert_eq!(s.clip(Some(ym("199001")), Some(ym("200002"))).len(), 2);
        assert!(s.clip(Some(ym("203001")), None).is_empty());
    }
}
