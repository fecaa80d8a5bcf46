//! Score a trained model on held-out days with teacher-forced
//! next-day predictions.
//!
//! Every holdout prediction uses the actual preceding prices (never earlier
//! predictions), then the predicted/actual pairs are reduced to MAPE, RMSE
//! and directional accuracy.
//!
//! Run with: cargo run --example evaluate_holdout

use chrono::NaiveDate;
use stockcast::market::{split_by_ratio, DEFAULT_UNIT_HIGH, DEFAULT_UNIT_LOW};
use stockcast::report::MetricSet;
use stockcast::training::evaluate_next_day;
use stockcast::{build_windows, train_best_of_n, PriceSeries, Scaler, TrainConfig};

fn main() -> stockcast::Result<()> {
    let start = NaiveDate::from_ymd_opt(2024, 1, 1).unwrap();
    let rows: Vec<(NaiveDate, f64)> = (0..200)
        .map(|i| {
            let t = i as f64 / 12.0;
            (start + chrono::Days::new(i), 15.0 + 2.5 * t.sin())
        })
        .collect();
    let series = PriceSeries::new("DEMO", rows)?;

    let config = TrainConfig {
        epochs: 600,
        repetitions: 3,
        ..TrainConfig::default()
    };
    let (train, holdout) = split_by_ratio(&series, 0.8, config.window)?;
    let scaler = Scaler::fit(&train, DEFAULT_UNIT_LOW, DEFAULT_UNIT_HIGH)?;
    let dataset = build_windows(&train, config.window, &scaler);
    let (model, _) = train_best_of_n(&dataset, &config, series.symbol())?;

    let pairs = evaluate_next_day(&model, &holdout, &series)?;
    println!("first holdout days:");
    for pair in pairs.iter().take(5) {
        println!("  {}  predicted {:8.4}  actual {:8.4}", pair.date, pair.predicted, pair.actual);
    }

    let metrics = MetricSet::compute(&pairs)?;
    print!("{}", metrics.to_text());
    Ok(())
}
