//! The whole pipeline in one call: train per-stock bundles, score them on
//! the holdout, and forecast forward — exactly what the `stockcast pipeline`
//! subcommand runs.
//!
//! Two synthetic stocks are written as CSVs into a temporary directory;
//! the pipeline leaves behind `<symbol>.model` / `<symbol>.scaler` bundles,
//! `forecast.csv`, `table.txt` and a reproducibility manifest.
//!
//! Run with: cargo run --example full_pipeline

use chrono::{Datelike, NaiveDate, Weekday};
use stockcast::cli::{cmd_pipeline, Horizon};
use stockcast::{PriceSeries, TrainConfig};

fn weekday_series(symbol: &str, days: usize, phase: f64) -> stockcast::Result<PriceSeries> {
    let mut date = NaiveDate::from_ymd_opt(2023, 1, 2).unwrap();
    let mut rows = Vec::new();
    while rows.len() < days {
        if !matches!(date.weekday(), Weekday::Sat | Weekday::Sun) {
            let t = rows.len() as f64 / 18.0;
            rows.push((date, 12.0 + 2.0 * (t + phase).sin() + 0.3 * (2.7 * t).cos()));
        }
        date = date.succ_opt().unwrap();
    }
    PriceSeries::new(symbol, rows)
}

fn main() -> stockcast::Result<()> {
    let dir = tempfile::tempdir().expect("create temp dir");
    let out = dir.path().join("out");

    let mut csvs = Vec::new();
    for (symbol, phase) in [("ALPHA", 0.0), ("BETA", 1.3)] {
        let series = weekday_series(symbol, 260, phase)?;
        let path = dir.path().join(format!("{symbol}.csv"));
        std::fs::write(&path, series.to_csv()).expect("write csv");
        csvs.push(path);
    }

    let config = TrainConfig {
        epochs: 400,
        repetitions: 3,
        ..TrainConfig::default()
    };

    let (train_report, forecast_report) =
        cmd_pipeline(&csvs, &config, &out, &Horizon::Count(7), true)?;

    println!("\n--- pipeline artifacts ---");
    for outcome in &train_report.outcomes {
        println!(
            "{}: retained {} (mse {:.6}) -> {}",
            outcome.symbol,
            outcome.model.run_label,
            outcome.model.training_mse,
            outcome.model_path.display()
        );
    }
    println!("manifest: {}", train_report.manifest_path.display());
    println!("forecast csv: {}", forecast_report.csv_path.display());
    if let Some(table) = &forecast_report.table_path {
        println!("table:\n{}", std::fs::read_to_string(table).expect("read table"));
    }
    Ok(())
}
