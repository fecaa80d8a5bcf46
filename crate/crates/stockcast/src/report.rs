//! Accuracy metrics for teacher-forced testing and rendering of the
//! multi-stock prediction table.

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::training::EvalPair;

#[derive(Debug, Clone, PartialEq)]
pub struct MetricSet {
    /// Mean absolute percentage error, in percent.
    pub mape: f64,
    /// Root mean squared error, in price units.
    pub rmse: f64,
    /// Fraction of correctly predicted up/down moves.
    pub directional_accuracy: f64,
    pub n: usize,
}

pub fn mape(pairs: &[(f64, f64)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::UndefinedMetric("mape over zero pairs".into()));
    }
    let mut sum = 0.0;
    for (predicted, actual) in pairs {
        if *actual <= 0.0 {
            return Err(Error::UndefinedMetric(format!(
                "mape undefined for actual {actual}"
            )));
        }
        sum += (predicted - actual).abs() / actual;
    }
    Ok(100.0 * sum / pairs.len() as f64)
}

pub fn rmse(pairs: &[(f64, f64)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::UndefinedMetric("rmse over zero pairs".into()));
    }
    let sum: f64 = pairs.iter().map(|(p, a)| (p - a) * (p - a)).sum();
    Ok((sum / pairs.len() as f64).sqrt())
}

/// Fraction of days where the predicted move direction (relative to the
/// previous actual) matches the actual move direction. Zero moves match
/// only if both are zero.
pub fn directional_accuracy(pairs: &[EvalPair]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::UndefinedMetric(
            "directional accuracy over zero pairs".into(),
        ));
    }
    let hits = pairs
        .iter()
        .filter(|p| {
            let pred = p.predicted - p.prev_actual;
            let act = p.actual - p.prev_actual;
            sign(pred) == sign(act)
        })
        .count();
    Ok(hits as f64 / pairs.len() as f64)
}

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

impl MetricSet {
    pub fn compute(pairs: &[EvalPair]) -> Result<MetricSet> {
        let pa: Vec<(f64, f64)> = pairs.iter().map(|p| (p.predicted, p.actual)).collect();
        Ok(MetricSet {
            mape: mape(&pa)?,
            rmse: rmse(&pa)?,
            directional_accuracy: directional_accuracy(pairs)?,
            n: pairs.len(),
        })
    }

    /// `key = value` lines for the metric report.
    pub fn to_text(&self) -> String {
        format!(
            "n = {}\nmape_percent = {:.6}\nrmse = {:.6}\ndirectional_accuracy = {:.6}\n",
            self.n, self.mape, self.rmse, self.directional_accuracy
        )
    }
}

/// One stock's column of a prediction table.
#[derive(Debug, Clone)]
pub struct TableColumn {
    pub symbol: String,
    pub run_label: String,
    pub run_id: String,
    /// One predicted price per table date, in date order.
    pub prices: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct PredictionTable {
    pub dates: Vec<NaiveDate>,
    pub columns: Vec<TableColumn>,
}

/// Round half away from zero to two decimals, the convention of the
/// rendered table. Machine outputs keep full precision.
pub fn round2(price: f64) -> f64 {
    (price * 100.0).round() / 100.0
}

/// Tab-delimited table: a stock-code header, an "ANN-model" row of run
/// labels, a "Test-ID" row of run ids, then one row per date with prices
/// rendered to 2 decimals. Byte-deterministic for golden-file tests.
pub fn render_table(table: &PredictionTable) -> Result<String> {
    if table.dates.is_empty() || table.columns.is_empty() {
        return Err(Error::Shape {
            expected: 1,
            got: 0,
        });
    }
    for col in &table.columns {
        if col.prices.len() != table.dates.len() {
            return Err(Error::Shape {
                expected: table.dates.len(),
                got: col.prices.len(),
            });
        }
    }
    let mut out = String::new();
    let row = |label: &str, cells: Vec<String>| {
        let mut line = String::from(label);
        for c in cells {
            line.push('\t');
            line.push_str(&c);
        }
        line.push('\n');
        line
    };
    out.push_str(&row(
        "Stock",
        table.columns.iter().map(|c| c.symbol.clone()).collect(),
    ));
    out.push_str(&row(
        "ANN-model",
        table.columns.iter().map(|c| c.run_label.clone()).collect(),
    ));
    out.push_str(&row(
        "Test-ID",
        table.columns.iter().map(|c| c.run_id.clone()).collect(),
    ));
    for (i, date) in table.dates.iter().enumerate() {
        out.push_str(&row(
            &date.format("%d-%b-%y").to_string(),
            table
                .columns
                .iter()
                .map(|c| format!("{:.2}", round2(c.prices[i])))
                .collect(),
        ));
    }
    Ok(out)
}
