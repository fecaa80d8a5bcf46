//! Parse a price CSV, split it, fit a leakage-free scaler and build the
//! sliding-window training set.
//!
//! The scaler maps the training price range onto [0.1, 0.9] and is fitted on
//! the training split only, so the holdout never influences the inputs the
//! network sees.
//!
//! Run with: cargo run --example window_dataset

use stockcast::market::{split_by_ratio, DEFAULT_UNIT_HIGH, DEFAULT_UNIT_LOW};
use stockcast::{build_windows, parse_price_csv, Scaler};

fn main() -> stockcast::Result<()> {
    // A hand-written slice of daily closes; rows may also arrive
    // newest-first, the parser normalizes to ascending dates.
    let csv = "\
Date,Open,High,Low,Close
2024-01-01,10.0,10.5,9.9,10.20
2024-01-02,10.2,10.6,10.0,10.45
2024-01-03,10.4,10.8,10.3,10.61
2024-01-04,10.6,10.9,10.2,10.33
2024-01-05,10.3,10.7,10.1,10.52
2024-01-08,10.5,11.0,10.4,10.90
2024-01-09,10.9,11.2,10.7,11.05
2024-01-10,11.0,11.3,10.8,10.84
2024-01-11,10.8,11.1,10.6,10.71
2024-01-12,10.7,11.0,10.5,10.95
2024-01-15,10.9,11.4,10.8,11.21
2024-01-16,11.2,11.5,11.0,11.10
";
    let series = parse_price_csv(csv, "DEMO", "Close")?;
    println!("{}: {} observations, last date {:?}", series.symbol(), series.len(), series.last_date().unwrap());

    let window = 5;
    let (train, holdout) = split_by_ratio(&series, 0.8, window)?;
    println!("split: {} train rows, {} holdout rows", train.len(), holdout.len());

    let scaler = Scaler::fit(&train, DEFAULT_UNIT_LOW, DEFAULT_UNIT_HIGH)?;
    let (lo, hi) = scaler.representable();
    println!("scaler: representable price interval [{lo:.4}, {hi:.4}]");

    let dataset = build_windows(&train, window, &scaler);
    println!(
        "dataset: {} samples of {} scaled inputs each (rows - window = {})",
        dataset.samples.len(),
        dataset.window,
        train.len() - window
    );

    let first = &dataset.samples[0];
    println!("first sample input  {:?}", first.input);
    println!("first sample target {:.6} (unscales to {:.2})", first.target, scaler.unscale(first.target));
    Ok(())
}
