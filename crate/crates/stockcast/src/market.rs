//! Historical price ingestion, train/holdout splitting, price scaling and
//! sliding-window sample construction.

use chrono::NaiveDate;

use crate::error::{Error, Result};
use crate::mlp::TrainSample;

/// Ordered daily (trade date, closing price) observations for one symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    symbol: String,
    observations: Vec<(NaiveDate, f64)>,
}

impl PriceSeries {
    /// Validates strictly increasing dates and positive finite prices.
    pub fn new(symbol: impl Into<String>, observations: Vec<(NaiveDate, f64)>) -> Result<Self> {
        for window in observations.windows(2) {
            if window[1].0 <= window[0].0 {
                return Err(Error::DuplicateDate(window[1].0));
            }
        }
        for (date, price) in &observations {
            if !price.is_finite() || *price <= 0.0 {
                return Err(Error::Config(format!("invalid price {price} on {date}")));
            }
        }
        Ok(PriceSeries {
            symbol: symbol.into(),
            observations,
        })
    }

    pub fn symbol(&self) -> &str {
        &self.symbol
    }

    pub fn observations(&self) -> &[(NaiveDate, f64)] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn prices(&self) -> impl Iterator<Item = f64> + '_ {
        self.observations.iter().map(|(_, p)| *p)
    }

    pub fn dates(&self) -> impl Iterator<Item = NaiveDate> + '_ {
        self.observations.iter().map(|(d, _)| *d)
    }

    pub fn last_date(&self) -> Option<NaiveDate> {
        self.observations.last().map(|(d, _)| *d)
    }

    /// The `count` observations ending at the last one.
    pub fn tail(&self, count: usize) -> &[(NaiveDate, f64)] {
        let start = self.len().saturating_sub(count);
        &self.observations[start..]
    }

    /// Canonical CSV text: `Date,Close` header plus one row per observation.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("Date,Close\n");
        for (date, price) in &self.observations {
            out.push_str(&format!("{},{:?}\n", date.format("%Y-%m-%d"), price));
        }
        out
    }
}

/// Parse a historical-price CSV. The header must name `Date` and the price
/// column; extra columns are ignored; descending files are reversed to
/// ascending order.
pub fn parse_price_csv(text: &str, symbol: &str, price_column: &str) -> Result<PriceSeries> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::EmptyInput)?;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    let date_idx = columns
        .iter()
        .position(|c| c.eq_ignore_ascii_case("Date"))
        .ok_or_else(|| Error::Schema("header lacks a 'Date' column".into()))?;
    let price_idx = columns
        .iter()
        .position(|c| c.eq_ignore_ascii_case(price_column))
        .ok_or_else(|| Error::Schema(format!("header lacks a '{price_column}' column")))?;

    let mut rows: Vec<(NaiveDate, f64)> = Vec::new();
    for (n, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() <= date_idx.max(price_idx) {
            return Err(Error::Parse {
                line: n + 1,
                msg: format!("expected at least {} fields", date_idx.max(price_idx) + 1),
            });
        }
        let date = NaiveDate::parse_from_str(fields[date_idx], "%Y-%m-%d").map_err(|e| {
            Error::Parse {
                line: n + 1,
                msg: format!("bad date '{}': {e}", fields[date_idx]),
            }
        })?;
        let raw = fields[price_idx];
        let price: f64 = raw.parse().map_err(|_| Error::Parse {
            line: n + 1,
            msg: format!("bad price '{raw}'"),
        })?;
        if !price.is_finite() || price <= 0.0 {
            return Err(Error::Parse {
                line: n + 1,
                msg: format!("rejected price {raw}"),
            });
        }
        rows.push((date, price));
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput);
    }
    if rows.len() >= 2 && rows[0].0 > rows[rows.len() - 1].0 {
        rows.reverse();
    }
    PriceSeries::new(symbol, rows)
}

/// Date-range split: train gets [train_start, train_end], holdout gets
/// everything after train_end; observations before train_start are dropped.
pub fn split_by_date(
    series: &PriceSeries,
    train_start: NaiveDate,
    train_end: NaiveDate,
) -> Result<(PriceSeries, PriceSeries)> {
    if train_start > train_end {
        return Err(Error::Config(format!(
            "train_start {train_start} after train_end {train_end}"
        )));
    }
    let train: Vec<_> = series
        .observations
        .iter()
        .filter(|(d, _)| *d >= train_start && *d <= train_end)
        .cloned()
        .collect();
    let holdout: Vec<_> = series
        .observations
        .iter()
        .filter(|(d, _)| *d > train_end)
        .cloned()
        .collect();
    if train.is_empty() {
        return Err(Error::Config(format!(
            "no observations in train range {train_start}..{train_end}"
        )));
    }
    Ok((
        PriceSeries::new(series.symbol.clone(), train)?,
        PriceSeries::new(series.symbol.clone(), holdout)?,
    ))
}

/// Chronological fraction split: first floor(n * train_fraction) observations
/// train, remainder holdout.
pub fn split_by_ratio(
    series: &PriceSeries,
    train_fraction: f64,
    window: usize,
) -> Result<(PriceSeries, PriceSeries)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::Config(format!(
            "train fraction must be in (0,1), got {train_fraction}"
        )));
    }
    let cut = (series.len() as f64 * train_fraction).floor() as usize;
    if cut < window + 1 {
        return Err(Error::Config(format!(
            "train partition of {cut} rows is shorter than window + 1 = {}",
            window + 1
        )));
    }
    let train = series.observations[..cut].to_vec();
    let holdout = series.observations[cut..].to_vec();
    Ok((
        PriceSeries::new(series.symbol.clone(), train)?,
        PriceSeries::new(series.symbol.clone(), holdout)?,
    ))
}

/// Affine map between prices and a sub-interval of (0,1).
///
/// Default target is [0.1, 0.9]; sigmoid outputs cannot reach 0 or 1, so the
/// margins keep endpoint targets learnable. Out-of-range prices extrapolate
/// linearly.
#[derive(Debug, Clone, PartialEq)]
pub struct Scaler {
    pub price_min: f64,
    pub price_max: f64,
    pub unit_low: f64,
    pub unit_high: f64,
}

pub const DEFAULT_UNIT_LOW: f64 = 0.1;
pub const DEFAULT_UNIT_HIGH: f64 = 0.9;

impl Scaler {
    /// Fit on the train partition only; holdout and future data never
    /// influence the price range.
    pub fn fit(train: &PriceSeries, unit_low: f64, unit_high: f64) -> Result<Self> {
        if train.len() < 2 {
            return Err(Error::Config(format!(
                "need at least 2 observations to fit a scaler, got {}",
                train.len()
            )));
        }
        if unit_high <= unit_low {
            return Err(Error::Config(format!(
                "unit_high {unit_high} must exceed unit_low {unit_low}"
            )));
        }
        let price_min = train.prices().fold(f64::INFINITY, f64::min);
        let price_max = train.prices().fold(f64::NEG_INFINITY, f64::max);
        if price_max <= price_min {
            return Err(Error::DegenerateRange(price_min));
        }
        Ok(Scaler {
            price_min,
            price_max,
            unit_low,
            unit_high,
        })
    }

    pub fn scale(&self, price: f64) -> f64 {
        self.unit_low
            + (price - self.price_min) * (self.unit_high - self.unit_low)
                / (self.price_max - self.price_min)
    }

    pub fn unscale(&self, unit: f64) -> f64 {
        self.price_min
            + (unit - self.unit_low) * (self.price_max - self.price_min)
                / (self.unit_high - self.unit_low)
    }

    /// Open interval of prices reachable by a sigmoid output.
    pub fn representable(&self) -> (f64, f64) {
        (self.unscale(0.0), self.unscale(1.0))
    }
}

/// Sliding-window samples over a series: inputs are the `window` preceding
/// scaled prices, target is the next scaled price.
#[derive(Debug, Clone)]
pub struct WindowDataset {
    pub window: usize,
    pub samples: Vec<TrainSample>,
    pub scaler: Scaler,
}

pub fn build_windows(series: &PriceSeries, window: usize, scaler: &Scaler) -> WindowDataset {
    let prices: Vec<f64> = series.prices().collect();
    let mut samples = Vec::new();
    if prices.len() > window {
        for i in window..prices.len() {
            samples.push(TrainSample {
                input: prices[i - window..i].iter().map(|p| scaler.scale(*p)).collect(),
                target: scaler.scale(prices[i]),
            });
        }
    }
    WindowDataset {
        window,
        samples,
        scaler: scaler.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    fn series(prices: &[f64]) -> PriceSeries {
        let start = d("2012-01-02");
        let obs: Vec<_> = prices
            .iter()
            .enumerate()
            .map(|(i, p)| (start + chrono::Days::new(i as u64), *p))
            .collect();
        PriceSeries::new("TEST", obs).unwrap()
    }

    #[test]
    fn parse_descending_csv_reverses() {
        let text = "Date,Open,Close\n2012-01-05,6.00,5.98\n2012-01-04,6.01,6.04\n";
        let s = parse_price_csv(text, "600010", "Close").unwrap();
        assert_eq!(
            s.observations(),
            &[(d("2012-01-04"), 6.04), (d("2012-01-05"), 5.98)]
        );
    }

    #[test]
    fn parse_missing_close_column() {
        let text = "Date,Open\n2012-01-04,6.01\n";
        assert!(matches!(
            parse_price_csv(text, "X", "Close"),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn parse_duplicate_date() {
        let text = "Date,Close\n2016-09-14,4.93\n2016-09-14,4.94\n";
        assert!(matches!(
            parse_price_csv(text, "X", "Close"),
            Err(Error::DuplicateDate(_))
        ));
    }

    #[test]
    fn parse_rejects_zero_price_with_line_number() {
        let text = "Date,Close\n2012-01-04,6.04\n2012-01-05,0\n";
        match parse_price_csv(text, "X", "Close") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn parse_empty_body() {
        assert!(matches!(
            parse_price_csv("Date,Close\n", "X", "Close"),
            Err(Error::EmptyInput)
        ));
    }

    #[test]
    fn parse_reserialize_is_idempotent() {
        let text = "Date,Close\n2012-01-04,6.04\n2012-01-05,5.98\n2012-01-06,6.1\n";
        let a = parse_price_csv(text, "S", "Close").unwrap();
        let b = parse_price_csv(&a.to_csv(), "S", "Close").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn split_by_date_partitions_2012_2016() {
        let obs = vec![
            (d("2012-01-04"), 6.0),
            (d("2013-06-03"), 6.5),
            (d("2015-12-31"), 7.0),
            (d("2016-01-04"), 7.2),
            (d("2016-09-14"), 7.5),
        ];
        let s = PriceSeries::new("S", obs).unwrap();
        let (train, holdout) = split_by_date(&s, d("2012-01-01"), d("2015-12-31")).unwrap();
        assert_eq!(train.len(), 3);
        assert_eq!(holdout.len(), 2);
        assert_eq!(holdout.dates().next().unwrap(), d("2016-01-04"));
    }

    #[test]
    fn split_by_date_empty_holdout_ok_empty_train_err() {
        let s = series(&[1.0, 2.0, 3.0]);
        let (train, holdout) = split_by_date(&s, d("2012-01-01"), d("2020-01-01")).unwrap();
        assert_eq!(train.len(), 3);
        assert!(holdout.is_empty());
        assert!(split_by_date(&s, d("2018-01-01"), d("2019-01-01")).is_err());
    }

    #[test]
    fn split_by_ratio_floor() {
        let s = series(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0]);
        let (train, holdout) = split_by_ratio(&s, 0.8, 5).unwrap();
        assert_eq!(train.len(), 8);
        assert_eq!(holdout.len(), 2);
    }

    #[test]
    fn split_by_ratio_too_short() {
        let s = series(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        assert!(matches!(
            split_by_ratio(&s, 0.8, 5),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn scaler_fit_and_midpoint() {
        let s = series(&[2.0, 4.0, 6.0]);
        let sc = Scaler::fit(&s, 0.1, 0.9).unwrap();
        assert_eq!(sc.price_min, 2.0);
        assert_eq!(sc.price_max, 6.0);
        assert_eq!(sc.scale(4.0), 0.5);
        assert!((sc.scale(8.0) - 1.3).abs() < 1e-12);
        assert!((sc.unscale(0.9) - 6.0).abs() < 1e-12);
    }

    #[test]
    fn scaler_constant_series_degenerate() {
        let s = series(&[5.0, 5.0, 5.0]);
        assert!(matches!(
            Scaler::fit(&s, 0.1, 0.9),
            Err(Error::DegenerateRange(_))
        ));
    }

    #[test]
    fn scaler_full_unit_range() {
        let s = series(&[1.0, 10.0]);
        let sc = Scaler::fit(&s, 0.0, 1.0).unwrap();
        assert_eq!(sc.price_min, 1.0);
        assert_eq!(sc.price_max, 10.0);
    }

    #[test]
    fn window_counts() {
        let sc = Scaler {
            price_min: 1.0,
            price_max: 30.0,
            unit_low: 0.1,
            unit_high: 0.9,
        };
        let six = series(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let ds = build_windows(&six, 5, &sc);
        assert_eq!(ds.samples.len(), 1);
        assert!((ds.scaler.unscale(ds.samples[0].target) - 6.0).abs() < 1e-12);

        let prices: Vec<f64> = (1..=24).map(|i| i as f64).collect();
        assert_eq!(build_windows(&series(&prices), 5, &sc).samples.len(), 19);
        let five = series(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(build_windows(&five, 5, &sc).samples.len(), 0);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn scale_unscale_inverse(price in 0.01f64..1e6) {
                let sc = Scaler { price_min: 2.0, price_max: 6.0, unit_low: 0.1, unit_high: 0.9 };
                let back = sc.unscale(sc.scale(price));
                prop_assert!((back - price).abs() <= 1e-12 * price.abs().max(1.0));
            }

            #[test]
            fn sample_count_law(n in 0usize..40, window in 1usize..10) {
                let prices: Vec<f64> = (0..n).map(|i| 1.0 + i as f64).collect();
                if n >= 1 {
                    let s = series(&prices);
                    let sc = Scaler { price_min: 0.5, price_max: 50.0, unit_low: 0.1, unit_high: 0.9 };
                    let ds = build_windows(&s, window, &sc);
                    prop_assert_eq!(ds.samples.len(), n.saturating_sub(window));
                }
            }

            #[test]
            fn window_targets_unscale_to_raw_prices(seed in 0u64..1000) {
                use rand::{Rng, SeedableRng};
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                let prices: Vec<f64> = (0..20).map(|_| 1.0 + 9.0 * rng.random::<f64>()).collect();
                let s = series(&prices);
                let sc = Scaler { price_min: 1.0, price_max: 10.0, unit_low: 0.1, unit_high: 0.9 };
                let ds = build_windows(&s, 5, &sc);
                for (k, sample) in ds.samples.iter().enumerate() {
                    let raw = prices[k + 5];
                    prop_assert!((sc.unscale(sample.target) - raw).abs() <= 1e-12 * raw);
                }
            }
        }
    }
}
