//! Command wiring: ingestion, training, evaluation, forecasting and report
//! emission, with a run manifest for reproducibility.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use sha2::{Digest, Sha256};

use crate::calendar::{parse_holiday_file, TradingCalendar};
use crate::error::{Error, Result};
use crate::forecast::{
    detect_saturation, forecast_recursive, ForecastRequest, ForecastResult,
    SaturationDiagnostic, DEFAULT_SATURATION_TOLERANCE,
};
use crate::market::{
    build_windows, parse_price_csv, split_by_date, split_by_ratio, PriceSeries, Scaler,
    DEFAULT_UNIT_HIGH, DEFAULT_UNIT_LOW,
};
use crate::report::{render_table, MetricSet, PredictionTable, TableColumn};
use crate::training::{
    evaluate_next_day, load_bundle, save_bundle, train_best_of_n, SplitSpec, TrainConfig,
    TrainedModel,
};

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    // write-then-rename keeps partially written outputs off disk
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, text).map_err(|e| Error::io(tmp.display().to_string(), e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Symbol is the CSV file stem, e.g. `data/600010.csv` -> `600010`.
pub fn symbol_from_path(path: &Path) -> Result<String> {
    path.file_stem()
        .and_then(|s| s.to_str())
        .map(str::to_string)
        .ok_or_else(|| Error::Config(format!("cannot derive symbol from '{}'", path.display())))
}

fn load_holidays(config: &TrainConfig) -> Result<BTreeSet<NaiveDate>> {
    match &config.holiday_file {
        Some(path) => parse_holiday_file(&read_file(Path::new(path))?),
        None => Ok(BTreeSet::new()),
    }
}

fn split_series(series: &PriceSeries, config: &TrainConfig) -> Result<(PriceSeries, PriceSeries)> {
    match &config.split {
        SplitSpec::DateRange { start, end } => split_by_date(series, *start, *end),
        SplitSpec::Ratio(fraction) => split_by_ratio(series, *fraction, config.window),
    }
}

/// Per-stock result of `cmd_train`.
#[derive(Debug)]
pub struct StockOutcome {
    pub symbol: String,
    pub model: TrainedModel,
    pub all_errors: Vec<f64>,
    pub model_path: PathBuf,
    pub scaler_path: PathBuf,
}

#[derive(Debug)]
pub struct TrainReport {
    pub outcomes: Vec<StockOutcome>,
    /// (path, error text) for stocks that failed in non-strict mode.
    pub failures: Vec<(PathBuf, String)>,
    pub manifest_path: PathBuf,
}

fn train_one_file(
    path: &Path,
    config: &TrainConfig,
    out_dir: &Path,
) -> Result<StockOutcome> {
    let symbol = symbol_from_path(path)?;
    let text = read_file(path)?;
    let series = parse_price_csv(&text, &symbol, &config.price_column)?;
    let (train, _holdout) = split_series(&series, config)?;
    let scaler = Scaler::fit(&train, DEFAULT_UNIT_LOW, DEFAULT_UNIT_HIGH)?;
    let dataset = build_windows(&train, config.window, &scaler);
    let (model, all_errors) = train_best_of_n(&dataset, config, &symbol)?;
    let (model_path, scaler_path) = save_bundle(&model, out_dir)?;
    Ok(StockOutcome {
        symbol,
        model,
        all_errors,
        model_path,
        scaler_path,
    })
}

/// Train one bundle per input CSV via best-of-N retention and write the run
/// manifest. In non-strict mode a failing stock is reported and skipped.
pub fn cmd_train(
    csv_paths: &[PathBuf],
    config: &TrainConfig,
    out_dir: &Path,
    strict: bool,
) -> Result<TrainReport> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir.display().to_string(), e))?;
    let mut outcomes = Vec::new();
    let mut failures = Vec::new();
    for path in csv_paths {
        match train_one_file(path, config, out_dir) {
            Ok(outcome) => {
                for (i, err) in outcome.all_errors.iter().enumerate() {
                    println!("{}: run T{} final mse {err:.8}", outcome.symbol, i + 1);
                }
                println!(
                    "{}: retained {} (run_id {})",
                    outcome.symbol, outcome.model.run_label, outcome.model.run_id
                );
                outcomes.push(outcome);
            }
            Err(e) if !strict => {
                eprintln!("{}: {e}", path.display());
                failures.push((path.clone(), e.to_string()));
            }
            Err(e) => return Err(e),
        }
    }
    let manifest_path = write_manifest(out_dir, config, csv_paths, &outcomes, &[])?;
    Ok(TrainReport {
        outcomes,
        failures,
        manifest_path,
    })
}

/// Teacher-forced next-day evaluation of a saved bundle over the holdout
/// defined by the split spec.
pub fn cmd_test(model_path: &Path, csv_path: &Path, config: &TrainConfig) -> Result<MetricSet> {
    let model = load_bundle(model_path)?;
    let symbol = symbol_from_path(csv_path)?;
    if model.symbol != symbol {
        return Err(Error::Config(format!(
            "bundle is for '{}' but data file is '{symbol}'",
            model.symbol
        )));
    }
    let series = parse_price_csv(&read_file(csv_path)?, &symbol, &config.price_column)?;
    let (_train, holdout) = split_series(&series, config)?;
    if holdout.is_empty() {
        return Err(Error::Config("holdout partition is empty".into()));
    }
    let pairs = evaluate_next_day(&model, &holdout, &series)?;
    let metrics = MetricSet::compute(&pairs)?;
    print!("{}", metrics.to_text());
    Ok(metrics)
}

/// Shared future horizon for a forecast run.
#[derive(Debug, Clone)]
pub enum Horizon {
    /// Trade dates in [start, end] under the weekday calendar.
    Range { start: NaiveDate, end: NaiveDate },
    /// The first `count` trade dates after each stock's last seed date.
    Count(usize),
}

#[derive(Debug)]
pub struct ForecastReport {
    pub results: Vec<ForecastResult>,
    pub diagnostics: Vec<(String, SaturationDiagnostic)>,
    pub csv_path: PathBuf,
    pub table_path: Option<PathBuf>,
}

/// Recursive forecasts for every stock over the shared horizon; writes
/// `forecast.csv` (full precision) plus the rendered `table.txt` and prints
/// saturation diagnostics.
pub fn cmd_forecast(
    csv_paths: &[PathBuf],
    config: &TrainConfig,
    out_dir: &Path,
    horizon: &Horizon,
) -> Result<ForecastReport> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir.display().to_string(), e))?;
    let calendar = TradingCalendar::weekdays_except(load_holidays(config)?);

    let mut results: Vec<ForecastResult> = Vec::new();
    let mut shared_dates: Option<Vec<NaiveDate>> = None;
    let mut sorted: Vec<&PathBuf> = csv_paths.iter().collect();
    sorted.sort();
    for path in sorted {
        let symbol = symbol_from_path(path)?;
        let model = load_bundle(&out_dir.join(format!("{symbol}.model")))?;
        let series = parse_price_csv(&read_file(path)?, &symbol, &config.price_column)?;
        if series.len() < model.window {
            return Err(Error::Coverage(series.last_date().unwrap_or(NaiveDate::MIN)));
        }
        let seed: Vec<(NaiveDate, f64)> = series.tail(model.window).to_vec();
        let last_seed = seed.last().unwrap().0;
        let dates = match horizon {
            Horizon::Range { start, end } => calendar.trade_dates_between(*start, *end)?,
            Horizon::Count(count) => calendar.next_trade_dates(last_seed, *count)?,
        };
        shared_dates.get_or_insert_with(|| dates.clone());
        let request = ForecastRequest::new(model, seed, dates)?;
        results.push(forecast_recursive(&request)?);
    }

    let dates = shared_dates.unwrap_or_default();
    let csv_path = out_dir.join("forecast.csv");
    let mut csv = String::from("date,symbol,predicted_close,predicted_inputs_used\n");
    for result in &results {
        for step in &result.steps {
            let _ = writeln!(
                csv,
                "{},{},{:?},{}",
                step.date.format("%Y-%m-%d"),
                result.symbol,
                step.predicted,
                step.predicted_inputs_used
            );
        }
    }
    write_file(&csv_path, &csv)?;

    let mut diagnostics = Vec::new();
    for result in &results {
        if result.steps.len() >= 2 {
            let diag = detect_saturation(result, DEFAULT_SATURATION_TOLERANCE);
            if diag.flagged {
                println!(
                    "{}: constant forecast at {:.2} (spread {:.4})",
                    result.symbol, diag.level, diag.spread
                );
            }
            diagnostics.push((result.symbol.clone(), diag));
        }
    }

    let table_path = if dates.is_empty() {
        eprintln!("warning: empty horizon, no table rendered");
        None
    } else {
        let table = PredictionTable {
            dates,
            columns: results
                .iter()
                .map(|r| TableColumn {
                    symbol: r.symbol.clone(),
                    run_label: r.run_label.clone(),
                    run_id: r.run_id.clone(),
                    prices: r.prices().collect(),
                })
                .collect(),
        };
        let path = out_dir.join("table.txt");
        write_file(&path, &render_table(&table)?)?;
        Some(path)
    };

    Ok(ForecastReport {
        results,
        diagnostics,
        csv_path,
        table_path,
    })
}

/// train -> test -> forecast over the same inputs.
pub fn cmd_pipeline(
    csv_paths: &[PathBuf],
    config: &TrainConfig,
    out_dir: &Path,
    horizon: &Horizon,
    strict: bool,
) -> Result<(TrainReport, ForecastReport)> {
    let train_report = cmd_train(csv_paths, config, out_dir, strict)?;
    for outcome in &train_report.outcomes {
        let csv_path = csv_paths
            .iter()
            .find(|p| symbol_from_path(p).ok().as_deref() == Some(&outcome.symbol))
            .expect("outcome symbol came from csv_paths");
        match cmd_test(&outcome.model_path, csv_path, config) {
            Ok(metrics) => println!(
                "{}: holdout mape {:.4}% rmse {:.4} dir-acc {:.4}",
                outcome.symbol, metrics.mape, metrics.rmse, metrics.directional_accuracy
            ),
            Err(e) => eprintln!("{}: test skipped: {e}", outcome.symbol),
        }
    }
    let trained: Vec<PathBuf> = csv_paths
        .iter()
        .filter(|p| {
            symbol_from_path(p)
                .map(|s| train_report.outcomes.iter().any(|o| o.symbol == s))
                .unwrap_or(false)
        })
        .cloned()
        .collect();
    let forecast_report = cmd_forecast(&trained, config, out_dir, horizon)?;
    Ok((train_report, forecast_report))
}

fn write_manifest(
    out_dir: &Path,
    config: &TrainConfig,
    inputs: &[PathBuf],
    outcomes: &[StockOutcome],
    extra_outputs: &[PathBuf],
) -> Result<PathBuf> {
    let mut text = String::from("manifest v1\n");
    let _ = writeln!(
        text,
        "timestamp {}",
        chrono::Utc::now().format("%Y-%m-%dT%H:%M:%SZ")
    );
    text.push_str("[config]\n");
    text.push_str(&config.canonical_text());
    text.push_str("[inputs]\n");
    for path in inputs {
        let digest = match std::fs::read(path) {
            Ok(bytes) => sha256_hex(&bytes),
            Err(_) => "unreadable".into(),
        };
        let _ = writeln!(text, "{} sha256 {digest}", path.display());
    }
    text.push_str("[stocks]\n");
    for o in outcomes {
        let _ = writeln!(
            text,
            "{} retained {} run_id {} mse {:?}",
            o.symbol, o.model.run_label, o.model.run_id, o.model.training_mse
        );
    }
    text.push_str("[outputs]\n");
    for o in outcomes {
        let _ = writeln!(text, "{}", o.model_path.display());
        let _ = writeln!(text, "{}", o.scaler_path.display());
    }
    for path in extra_outputs {
        let _ = writeln!(text, "{}", path.display());
    }
    let path = out_dir.join("manifest.txt");
    write_file(&path, &text)?;
    Ok(path)
}
