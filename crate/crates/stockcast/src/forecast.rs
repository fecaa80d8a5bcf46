//! Recursive predict-populate forecasting over future trade dates.
//!
//! A rolling buffer starts from the last known prices; each prediction is
//! appended and becomes an input for the next step, so a horizon of any
//! length can be covered with no knowledge of actual future prices.

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::training::TrainedModel;

#[derive(Debug, Clone)]
pub struct ForecastRequest {
    pub model: TrainedModel,
    /// Last `window` known (date, price) observations, oldest first.
    pub seed_history: Vec<(NaiveDate, f64)>,
    /// Future trade dates, strictly increasing, all after the seed.
    pub horizon_dates: Vec<NaiveDate>,
}

impl ForecastRequest {
    pub fn new(
        model: TrainedModel,
        seed_history: Vec<(NaiveDate, f64)>,
        horizon_dates: Vec<NaiveDate>,
    ) -> Result<Self> {
        if seed_history.len() != model.window {
            return Err(Error::Shape {
                expected: model.window,
                got: seed_history.len(),
            });
        }
        let last_seed = seed_history.last().map(|(d, _)| *d).unwrap();
        for pair in horizon_dates.windows(2) {
            if pair[1] <= pair[0] {
                return Err(Error::Config(format!(
                    "horizon dates not strictly increasing at {}",
                    pair[1]
                )));
            }
        }
        if horizon_dates.first().is_some_and(|d| *d <= last_seed) {
            return Err(Error::Config(format!(
                "horizon starts {} on or before last seed date {last_seed}",
                horizon_dates[0]
            )));
        }
        Ok(ForecastRequest {
            model,
            seed_history,
            horizon_dates,
        })
    }
}

/// One forecast step: the date, the price, and how many of the window
/// inputs were themselves predictions.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastStep {
    pub date: NaiveDate,
    pub predicted: f64,
    pub predicted_inputs_used: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForecastResult {
    pub symbol: String,
    pub run_label: String,
    pub run_id: String,
    pub steps: Vec<ForecastStep>,
}

impl ForecastResult {
    pub fn prices(&self) -> impl Iterator<Item = f64> + '_ {
        self.steps.iter().map(|s| s.predicted)
    }
}

/// Scale the window, run the network, unscale the output.
pub fn predict_next(model: &TrainedModel, last_window_prices: &[f64]) -> Result<f64> {
    if last_window_prices.len() != model.window {
        return Err(Error::Shape {
            expected: model.window,
            got: last_window_prices.len(),
        });
    }
    let scaled: Vec<f64> = last_window_prices
        .iter()
        .map(|p| model.scaler.scale(*p))
        .collect();
    let out = model.network.predict(&scaled)?;
    Ok(model.scaler.unscale(out))
}

/// The predict-populate loop: step k's input window contains
/// min(k, window) previously predicted values.
pub fn forecast_recursive(request: &ForecastRequest) -> Result<ForecastResult> {
    let window = request.model.window;
    let mut buffer: Vec<f64> = request.seed_history.iter().map(|(_, p)| *p).collect();
    let mut steps = Vec::with_capacity(request.horizon_dates.len());
    for (k, date) in request.horizon_dates.iter().enumerate() {
        let inputs = &buffer[buffer.len() - window..];
        let predicted = predict_next(&request.model, inputs)?;
        buffer.push(predicted);
        steps.push(ForecastStep {
            date: *date,
            predicted,
            predicted_inputs_used: k.min(window),
        });
    }
    Ok(ForecastResult {
        symbol: request.model.symbol.clone(),
        run_label: request.model.run_label.clone(),
        run_id: request.model.run_id.clone(),
        steps,
    })
}

/// Flags a forecast whose spread (max - min) is at or below `tolerance`
/// price units. Informational only.
#[derive(Debug, Clone, PartialEq)]
pub struct SaturationDiagnostic {
    pub flagged: bool,
    pub spread: f64,
    /// Mean predicted price; the reported "constant level" when flagged.
    pub level: f64,
}

pub const DEFAULT_SATURATION_TOLERANCE: f64 = 0.005;

pub fn detect_saturation(result: &ForecastResult, tolerance: f64) -> SaturationDiagnostic {
    let min = result.prices().fold(f64::INFINITY, f64::min);
    let max = result.prices().fold(f64::NEG_INFINITY, f64::max);
    let n = result.steps.len() as f64;
    let level = result.prices().sum::<f64>() / n;
    SaturationDiagnostic {
        flagged: result.steps.len() >= 2 && max - min <= tolerance,
        spread: max - min,
        level,
    }
}
