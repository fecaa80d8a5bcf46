//! End-to-end acceptance suite. Each test checks one criterion and prints a
//! pass line; run with `cargo test --test acceptance -- --nocapture` to see
//! them.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use chrono::{Datelike, Days, NaiveDate, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stockcast::calendar::TradingCalendar;
use stockcast::cli::{cmd_forecast, cmd_train, Horizon};
use stockcast::forecast::{
    detect_saturation, forecast_recursive, predict_next, ForecastRequest,
    DEFAULT_SATURATION_TOLERANCE,
};
use stockcast::market::{build_windows, split_by_date, split_by_ratio, PriceSeries, Scaler};
use stockcast::mlp::{Network, Topology, TrainSample};
use stockcast::report::MetricSet;
use stockcast::training::{
    evaluate_next_day, train_best_of_n, SplitSpec, TrainConfig, TrainedModel,
};

fn date(s: &str) -> NaiveDate {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
}

// -------------------------------------------------------------------------
// Criterion 1: backprop gradients match central finite differences on 50
// random networks (topologies up to 5:8:8:1) within 1e-5 relative error.
// The oracle below is independent of the backprop code path: it only calls
// the forward pass.

fn fd_loss(net: &Network, sample: &TrainSample) -> f64 {
    let o = net.predict(&sample.input).unwrap();
    0.5 * (o - sample.target) * (o - sample.target)
}

#[test]
fn acceptance_1_gradient_oracle() {
    let started = Instant::now();
    let topologies = [
        vec![5, 8, 8, 1],
        vec![5, 8, 1],
        vec![3, 4, 4, 1],
        vec![2, 2, 1],
        vec![4, 6, 3, 1],
    ];
    let h = 1e-5;
    let mut rng = ChaCha8Rng::seed_from_u64(2016);
    let mut checked = 0usize;
    for case in 0..50 {
        let sizes = topologies[case % topologies.len()].clone();
        let topology = Topology::new(sizes.clone()).unwrap();
        let net = Network::random(topology, 100 + case as u64);
        let sample = TrainSample {
            input: (0..sizes[0]).map(|_| rng.random::<f64>()).collect(),
            target: 0.05 + 0.9 * rng.random::<f64>(),
        };
        let (gw, gb) = net.gradients(&sample).unwrap();
        for l in 0..net.topology().depth() {
            let fan_in = sizes[l];
            let units = sizes[l + 1];
            for u in 0..units {
                for i in 0..fan_in {
                    let orig = net.weight(l, u, i);
                    let mut plus = net.clone();
                    plus.set_weight(l, u, i, orig + h);
                    let mut minus = net.clone();
                    minus.set_weight(l, u, i, orig - h);
                    let fd = (fd_loss(&plus, &sample) - fd_loss(&minus, &sample)) / (2.0 * h);
                    let bp = gw[l][u * fan_in + i];
                    let denom = fd.abs().max(bp.abs()).max(1e-8);
                    assert!(
                        (fd - bp).abs() / denom < 1e-5,
                        "case {case} layer {l} unit {u} input {i}: fd {fd} vs bp {bp}"
                    );
                    checked += 1;
                }
                let orig = net.bias(l, u);
                let mut plus = net.clone();
                plus.set_bias(l, u, orig + h);
                let mut minus = net.clone();
                minus.set_bias(l, u, orig - h);
                let fd = (fd_loss(&plus, &sample) - fd_loss(&minus, &sample)) / (2.0 * h);
                let bp = gb[l][u];
                let denom = fd.abs().max(bp.abs()).max(1e-8);
                assert!(
                    (fd - bp).abs() / denom < 1e-5,
                    "case {case} layer {l} bias {u}: fd {fd} vs bp {bp}"
                );
                checked += 1;
            }
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    println!(
        "[PASS] criterion 1: gradient oracle, {checked} partials on 50 networks in {elapsed:?}"
    );
}

// -------------------------------------------------------------------------
// Criterion 2: forecast_recursive is bit-equal to a manual predict-populate
// loop for 20 random models and every horizon 1..25.

fn random_model(seed: u64) -> TrainedModel {
    TrainedModel {
        network: Network::random(Topology::default(), seed),
        scaler: Scaler {
            price_min: 2.0 + (seed % 5) as f64,
            price_max: 9.0 + (seed % 7) as f64,
            unit_low: 0.1,
            unit_high: 0.9,
        },
        window: 5,
        training_mse: 0.0,
        run_index: 1,
        run_label: "T1".into(),
        run_id: format!("seed{seed}"),
        symbol: format!("SYM{seed}"),
    }
}

#[test]
fn acceptance_2_recursion_oracle() {
    let started = Instant::now();
    let calendar = TradingCalendar::weekdays();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for m in 0..20u64 {
        let model = random_model(m);
        let seed_history: Vec<(NaiveDate, f64)> = (0..5)
            .map(|i| {
                (
                    date("2016-09-08") + Days::new(i),
                    model.scaler.price_min + 3.0 * rng.random::<f64>(),
                )
            })
            .collect();
        for horizon in 1..=25usize {
            let dates = calendar.next_trade_dates(date("2016-09-14"), horizon).unwrap();
            let request =
                ForecastRequest::new(model.clone(), seed_history.clone(), dates.clone()).unwrap();
            let result = forecast_recursive(&request).unwrap();

            // manual predict-populate with a hand-managed buffer
            let mut buffer: Vec<f64> = seed_history.iter().map(|(_, p)| *p).collect();
            for (k, d) in dates.iter().enumerate() {
                let w = buffer.len() - 5;
                let p = predict_next(&model, &buffer[w..]).unwrap();
                buffer.push(p);
                assert_eq!(result.steps[k].date, *d);
                assert_eq!(
                    result.steps[k].predicted.to_bits(),
                    p.to_bits(),
                    "model {m} horizon {horizon} step {k}"
                );
            }
        }
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    println!("[PASS] criterion 2: recursion oracle, 20 models x horizons 1..25 in {elapsed:?}");
}

// -------------------------------------------------------------------------
// Shared synthetic data: weekday-daily prices over a date range.

fn synthetic_csv(seed: u64, start: NaiveDate, end: NaiveDate) -> String {
    let mut text = String::from("Date,Close\n");
    let mut day = start;
    let mut i = 0u64;
    while day <= end {
        let wd = day.weekday();
        if wd != Weekday::Sat && wd != Weekday::Sun {
            let t = i as f64 / 40.0;
            let price = 6.0 + 2.5 * (t + seed as f64).sin() + 0.4 * (3.1 * t + 0.5).cos();
            let _ = writeln!(text, "{},{:.4}", day.format("%Y-%m-%d"), price);
            i += 1;
        }
        day = day + Days::new(1);
    }
    text
}

fn write_stock_files(dir: &std::path::Path, count: usize) -> Vec<PathBuf> {
    (0..count)
        .map(|i| {
            let path = dir.join(format!("6000{i:02}.csv"));
            std::fs::write(
                &path,
                synthetic_csv(i as u64, date("2012-01-01"), date("2016-09-14")),
            )
            .unwrap();
            path
        })
        .collect()
}

// Criterion 3: full train + forecast at default epochs over 7 synthetic
// stocks reproduces the prediction-table structure: 19 rows per stock
// ending 2016-10-11, and a table of 3 header lines + 19 data rows with 7
// stock columns.

#[test]
fn acceptance_3_pipeline_shape() {
    let started = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let csvs = write_stock_files(dir.path(), 7);
    let out = dir.path().join("out");
    let config = TrainConfig::default(); // epochs 5000, reps 5, 5:21:21:1

    let report = cmd_train(&csvs, &config, &out, true).unwrap();
    assert_eq!(report.outcomes.len(), 7);
    let total_runs: usize = report.outcomes.iter().map(|o| o.all_errors.len()).sum();
    assert_eq!(total_runs, 35);

    let fr = cmd_forecast(
        &csvs,
        &config,
        &out,
        &Horizon::Range {
            start: date("2016-09-15"),
            end: date("2016-10-11"),
        },
    )
    .unwrap();
    for result in &fr.results {
        assert_eq!(result.steps.len(), 19);
        assert_eq!(result.steps.last().unwrap().date, date("2016-10-11"));
    }
    let table = std::fs::read_to_string(fr.table_path.clone().unwrap()).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 3 + 19);
    assert!(lines[0].starts_with("Stock"));
    assert!(lines[1].starts_with("ANN-model"));
    assert!(lines[2].starts_with("Test-ID"));
    for line in &lines {
        assert_eq!(line.split('\t').count(), 1 + 7, "bad column count: {line}");
    }
    let forecast_csv = std::fs::read_to_string(&fr.csv_path).unwrap();
    assert_eq!(forecast_csv.lines().count(), 1 + 7 * 19);

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 300.0, "took {elapsed:?}");
    println!("[PASS] criterion 3: pipeline shape, 7 stocks x 19 days in {elapsed:?}");
}

// -------------------------------------------------------------------------
// Criterion 4: a saturated network yields a constant recursive forecast and
// detect_saturation flags it.

#[test]
fn acceptance_4_constant_forecast() {
    let mut network = Network::zeroed(Topology::default());
    network.set_bias(2, 0, 8.0); // output pinned near sigma(8) ~ 0.99966
    let model = TrainedModel {
        network,
        scaler: Scaler {
            price_min: 4.0,
            price_max: 6.0,
            unit_low: 0.1,
            unit_high: 0.9,
        },
        window: 5,
        training_mse: 0.0,
        run_index: 1,
        run_label: "T1".into(),
        run_id: "saturated".into(),
        symbol: "600028".into(),
    };
    let seed_history: Vec<(NaiveDate, f64)> = (0..5)
        .map(|i| (date("2016-09-08") + Days::new(i), 4.9 + 0.01 * i as f64))
        .collect();
    let dates = TradingCalendar::weekdays()
        .next_trade_dates(date("2016-09-14"), 19)
        .unwrap();
    let result =
        forecast_recursive(&ForecastRequest::new(model, seed_history, dates).unwrap()).unwrap();
    let min = result.prices().fold(f64::INFINITY, f64::min);
    let max = result.prices().fold(f64::NEG_INFINITY, f64::max);
    assert!(max - min < 0.005, "spread {}", max - min);
    let diag = detect_saturation(&result, DEFAULT_SATURATION_TOLERANCE);
    assert!(diag.flagged);
    println!(
        "[PASS] criterion 4: constant forecast flagged at level {:.2} (spread {:.2e})",
        diag.level, diag.spread
    );
}

// -------------------------------------------------------------------------
// Criterion 5: on a noiseless scaled sine series (200 points, window 5,
// defaults) the retained model's teacher-forced holdout MAPE is below 2%.

#[test]
fn acceptance_5_learnability() {
    let started = Instant::now();
    let obs: Vec<(NaiveDate, f64)> = (0..200)
        .map(|i| {
            (
                date("2015-01-05") + Days::new(i),
                6.0 + 2.0 * (i as f64 / 10.0).sin(),
            )
        })
        .collect();
    let series = PriceSeries::new("SINE", obs).unwrap();
    let config = TrainConfig::default();
    let (train, holdout) = split_by_ratio(&series, 0.8, config.window).unwrap();
    let scaler = Scaler::fit(&train, 0.1, 0.9).unwrap();
    let dataset = build_windows(&train, config.window, &scaler);
    let (model, _) = train_best_of_n(&dataset, &config, "SINE").unwrap();
    let pairs = evaluate_next_day(&model, &holdout, &series).unwrap();
    let metrics = MetricSet::compute(&pairs).unwrap();
    let elapsed = started.elapsed();
    assert!(metrics.mape < 2.0, "mape {}%", metrics.mape);
    assert!(elapsed.as_secs_f64() < 120.0, "took {elapsed:?}");
    println!(
        "[PASS] criterion 5: sine holdout mape {:.4}% (rmse {:.4}) in {elapsed:?}",
        metrics.mape, metrics.rmse
    );
}

// -------------------------------------------------------------------------
// Criterion 6: two runs with identical inputs and config produce
// byte-identical model files, forecast CSVs and tables.

#[test]
fn acceptance_6_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let csvs = write_stock_files(dir.path(), 2);
    let config = TrainConfig {
        epochs: 200,
        repetitions: 3,
        ..TrainConfig::default()
    };
    let horizon = Horizon::Range {
        start: date("2016-09-15"),
        end: date("2016-10-11"),
    };
    let mut outputs: Vec<Vec<u8>> = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        cmd_train(&csvs, &config, &out, true).unwrap();
        cmd_forecast(&csvs, &config, &out, &horizon).unwrap();
        let mut bytes = Vec::new();
        for name in [
            "600000.model",
            "600000.scaler",
            "600001.model",
            "600001.scaler",
            "forecast.csv",
            "table.txt",
        ] {
            bytes.extend(std::fs::read(out.join(name)).unwrap());
        }
        outputs.push(bytes);
    }
    assert_eq!(outputs[0], outputs[1]);
    println!("[PASS] criterion 6: repeated pipeline runs are byte-identical");
}

// -------------------------------------------------------------------------
// Criterion 7: the retained run always has the minimum logged error, ties
// broken toward the lowest run index.

#[test]
fn acceptance_7_best_of_five_retention() {
    let dir = tempfile::tempdir().unwrap();
    let csvs = write_stock_files(dir.path(), 3);
    let config = TrainConfig {
        epochs: 100,
        repetitions: 5,
        ..TrainConfig::default()
    };
    for (i, csv) in csvs.iter().enumerate() {
        let text = std::fs::read_to_string(csv).unwrap();
        let series = stockcast::parse_price_csv(&text, &format!("6000{i:02}"), "Close").unwrap();
        let (train, _) = split_by_ratio(&series, 0.8, config.window).unwrap();
        let scaler = Scaler::fit(&train, 0.1, 0.9).unwrap();
        let dataset = build_windows(&train, config.window, &scaler);
        let (best, errors) = train_best_of_n(&dataset, &config, series.symbol()).unwrap();
        assert_eq!(errors.len(), 5);
        let min = errors.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(best.training_mse, min);
        let first_argmin = errors.iter().position(|e| *e == min).unwrap() + 1;
        assert_eq!(best.run_index, first_argmin);
        assert_eq!(best.run_label, format!("T{first_argmin}"));
    }
    println!("[PASS] criterion 7: best-of-5 retention is argmin with low-index ties");
}

// -------------------------------------------------------------------------
// Criterion 8: mutating holdout / post-seed-date rows changes neither the
// fitted scaler nor any forecast value (100 randomized mutations).

#[test]
fn acceptance_8_data_hygiene() {
    let base: Vec<(NaiveDate, f64)> = (0..200)
        .map(|i| {
            (
                date("2015-01-05") + Days::new(i),
                5.0 + 1.5 * (i as f64 / 13.0).sin(),
            )
        })
        .collect();
    let series = PriceSeries::new("HYG", base.clone()).unwrap();
    let train_end = base[119].0;
    let config = TrainConfig {
        epochs: 50,
        repetitions: 1,
        split: SplitSpec::DateRange {
            start: base[0].0,
            end: train_end,
        },
        ..TrainConfig::default()
    };
    let (train, _) = split_by_date(&series, base[0].0, train_end).unwrap();
    let scaler = Scaler::fit(&train, 0.1, 0.9).unwrap();
    let dataset = build_windows(&train, config.window, &scaler);
    let (model, _) = train_best_of_n(&dataset, &config, "HYG").unwrap();

    // seed the forecast at observation 150; everything after is "future"
    let seed_idx = 150usize;
    let seed: Vec<(NaiveDate, f64)> = base[seed_idx - 5..seed_idx].to_vec();
    let horizon = TradingCalendar::weekdays()
        .next_trade_dates(seed.last().unwrap().0, 10)
        .unwrap();
    let baseline = forecast_recursive(
        &ForecastRequest::new(model.clone(), seed.clone(), horizon.clone()).unwrap(),
    )
    .unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for trial in 0..100 {
        let mut mutated = base.clone();
        // mutate a random row strictly after the seed window
        let idx = seed_idx + (rng.random::<u64>() as usize) % (mutated.len() - seed_idx);
        mutated[idx].1 = 0.5 + 10.0 * rng.random::<f64>();
        let mutated_series = PriceSeries::new("HYG", mutated).unwrap();

        let (mutated_train, _) = split_by_date(&mutated_series, base[0].0, train_end).unwrap();
        let refit = Scaler::fit(&mutated_train, 0.1, 0.9).unwrap();
        assert_eq!(refit, scaler, "trial {trial}: scaler leaked holdout data");

        let mutated_seed: Vec<(NaiveDate, f64)> =
            mutated_series.observations()[seed_idx - 5..seed_idx].to_vec();
        let result = forecast_recursive(
            &ForecastRequest::new(model.clone(), mutated_seed, horizon.clone()).unwrap(),
        )
        .unwrap();
        for (a, b) in baseline.steps.iter().zip(result.steps.iter()) {
            assert_eq!(
                a.predicted.to_bits(),
                b.predicted.to_bits(),
                "trial {trial}: forecast leaked future data"
            );
        }
    }
    println!("[PASS] criterion 8: 100 holdout mutations left scaler and forecasts unchanged");
}
