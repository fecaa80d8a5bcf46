//! Render a multi-stock prediction table.
//!
//! The table carries one column per stock — stock code, model label and test
//! id in the header rows — and one row per forecast date with prices at two
//! decimals. The output is tab-delimited and byte-deterministic.
//!
//! Run with: cargo run --example render_table

use chrono::NaiveDate;
use stockcast::calendar::TradingCalendar;
use stockcast::report::{render_table, round2, PredictionTable, TableColumn};

fn main() -> stockcast::Result<()> {
    let after = NaiveDate::from_ymd_opt(2024, 3, 1).unwrap();
    let dates = TradingCalendar::weekdays().next_trade_dates(after, 5)?;

    // In the full pipeline these prices come from forecast_recursive; here
    // they are fabricated to keep the example focused on the rendering.
    let columns = vec![
        TableColumn {
            symbol: "ALPHA".into(),
            run_label: "T2".into(),
            run_id: "a1b2c3d4e5f6".into(),
            prices: vec![10.124, 10.316, 10.498, 10.655, 10.787],
        },
        TableColumn {
            symbol: "BETA".into(),
            run_label: "T0".into(),
            run_id: "0f9e8d7c6b5a".into(),
            prices: vec![55.901, 55.835, 55.792, 55.764, 55.749],
        },
        TableColumn {
            symbol: "GAMMA".into(),
            run_label: "T4".into(),
            run_id: "123456abcdef".into(),
            prices: vec![7.005, 7.115, 7.2249, 7.3351, 7.445],
        },
    ];

    let table = PredictionTable { dates, columns };
    print!("{}", render_table(&table)?);

    // The table rounds half away from zero.
    println!("\nround2(7.2249) = {}, round2(7.3351) = {}", round2(7.2249), round2(7.3351));
    Ok(())
}
