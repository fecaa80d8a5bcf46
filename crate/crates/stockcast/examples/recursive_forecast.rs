//! Forecast future trading days by feeding predictions back as inputs.
//!
//! Trains a model on a synthetic daily series, then asks for ten trading
//! days past the end of the data. Each step slides the input window forward,
//! so later steps rest on progressively more predicted (rather than
//! observed) prices; `predicted_inputs_used` records exactly how many.
//!
//! Run with: cargo run --example recursive_forecast

use chrono::{Datelike, NaiveDate, Weekday};
use stockcast::calendar::TradingCalendar;
use stockcast::forecast::{detect_saturation, forecast_recursive, ForecastRequest, DEFAULT_SATURATION_TOLERANCE};
use stockcast::market::{split_by_ratio, DEFAULT_UNIT_HIGH, DEFAULT_UNIT_LOW};
use stockcast::{build_windows, train_best_of_n, PriceSeries, Scaler, TrainConfig};

fn weekday_series(symbol: &str, days: usize) -> stockcast::Result<PriceSeries> {
    let mut date = NaiveDate::from_ymd_opt(2024, 1, 1).unwrap();
    let mut rows = Vec::new();
    while rows.len() < days {
        if !matches!(date.weekday(), Weekday::Sat | Weekday::Sun) {
            let t = rows.len() as f64 / 15.0;
            rows.push((date, 20.0 + 3.0 * t.sin() + 0.5 * (3.0 * t).cos()));
        }
        date = date.succ_opt().unwrap();
    }
    PriceSeries::new(symbol, rows)
}

fn main() -> stockcast::Result<()> {
    let series = weekday_series("DEMO", 220)?;
    let config = TrainConfig {
        epochs: 400,
        repetitions: 2,
        ..TrainConfig::default()
    };

    let (train, _holdout) = split_by_ratio(&series, 0.8, config.window)?;
    let scaler = Scaler::fit(&train, DEFAULT_UNIT_LOW, DEFAULT_UNIT_HIGH)?;
    let dataset = build_windows(&train, config.window, &scaler);
    let (model, errors) = train_best_of_n(&dataset, &config, series.symbol())?;
    println!("final-epoch mse per run: {errors:?}");
    println!("retained {} (id {})", model.run_label, model.run_id);

    // Seed with the last observed window, then step across the next ten
    // weekdays after the series ends.
    let last = series.last_date().unwrap();
    let horizon = TradingCalendar::weekdays().next_trade_dates(last, 10)?;
    let request = ForecastRequest::new(model, series.tail(config.window).to_vec(), horizon)?;
    let result = forecast_recursive(&request)?;

    println!("forecast for {} ({}):", result.symbol, result.run_label);
    for step in &result.steps {
        println!(
            "  {}  {:8.4}  ({} of {} inputs predicted)",
            step.date, step.predicted, step.predicted_inputs_used, config.window
        );
    }

    let diag = detect_saturation(&result, DEFAULT_SATURATION_TOLERANCE);
    if diag.flagged {
        println!("warning: near-constant forecast at level {:.4} (spread {:.6})", diag.level, diag.spread);
    } else {
        println!("saturation check: ok (spread {:.4})", diag.spread);
    }
    Ok(())
}
