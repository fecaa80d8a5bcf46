//! Best-of-N training: train N independently seeded networks on the same
//! windowed dataset, record every training error, retain the lowest.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::forecast::predict_next;
use crate::market::{PriceSeries, Scaler, WindowDataset};
use crate::mlp::{Network, Topology};

/// How to partition a series into train and holdout.
#[derive(Debug, Clone, PartialEq)]
pub enum SplitSpec {
    DateRange { start: NaiveDate, end: NaiveDate },
    Ratio(f64),
}

impl std::fmt::Display for SplitSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SplitSpec::DateRange { start, end } => write!(f, "dates {start} {end}"),
            SplitSpec::Ratio(r) => write!(f, "ratio {r}"),
        }
    }
}

impl FromStr for SplitSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split_whitespace().collect();
        match parts.as_slice() {
            ["ratio", r] => {
                let r: f64 = r
                    .parse()
                    .map_err(|_| Error::Config(format!("bad split ratio '{r}'")))?;
                Ok(SplitSpec::Ratio(r))
            }
            ["dates", start, end] => {
                let start = NaiveDate::parse_from_str(start, "%Y-%m-%d")
                    .map_err(|e| Error::Config(format!("bad split start '{start}': {e}")))?;
                let end = NaiveDate::parse_from_str(end, "%Y-%m-%d")
                    .map_err(|e| Error::Config(format!("bad split end '{end}': {e}")))?;
                Ok(SplitSpec::DateRange { start, end })
            }
            _ => Err(Error::Config(format!(
                "split must be 'ratio <f>' or 'dates <start> <end>', got '{s}'"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub topology: Topology,
    pub learning_rate: f64,
    pub epochs: usize,
    pub repetitions: usize,
    pub base_seed: u64,
    pub split: SplitSpec,
    pub window: usize,
    pub price_column: String,
    pub holiday_file: Option<String>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            topology: Topology::default(),
            learning_rate: 0.1,
            epochs: 5000,
            repetitions: 5,
            base_seed: 1,
            split: SplitSpec::Ratio(0.8),
            window: 5,
            price_column: "Close".into(),
            holiday_file: None,
        }
    }
}

impl TrainConfig {
    /// Per-run seed: base_seed * 1000 + run_index keeps the N runs
    /// independent yet reproducible.
    pub fn run_seed(&self, run_index: usize) -> u64 {
        self.base_seed.wrapping_mul(1000).wrapping_add(run_index as u64)
    }

    /// Canonical text form; feeds the run_id digest and the manifest.
    pub fn canonical_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "topology = {}", self.topology);
        let _ = writeln!(s, "rate = {:?}", self.learning_rate);
        let _ = writeln!(s, "epochs = {}", self.epochs);
        let _ = writeln!(s, "repetitions = {}", self.repetitions);
        let _ = writeln!(s, "seed = {}", self.base_seed);
        let _ = writeln!(s, "split = {}", self.split);
        let _ = writeln!(s, "window = {}", self.window);
        let _ = writeln!(s, "price_column = {}", self.price_column);
        if let Some(h) = &self.holiday_file {
            let _ = writeln!(s, "holidays = {h}");
        }
        s
    }

    /// Overlay `key = value` lines from a config file onto this config.
    /// Unknown keys are rejected; `#` comments and blank lines are allowed.
    pub fn apply_file(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(Error::Parse {
                line: n + 1,
                msg: format!("expected 'key = value', got '{line}'"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |msg: String| Error::Parse { line: n + 1, msg };
            match key {
                "topology" => self.topology = value.parse().map_err(|e| bad(format!("{e}")))?,
                "rate" | "learning_rate" => {
                    self.learning_rate = value
                        .parse()
                        .map_err(|_| bad(format!("bad learning rate '{value}'")))?
                }
                "epochs" => {
                    self.epochs = value
                        .parse()
                        .map_err(|_| bad(format!("bad epoch count '{value}'")))?
                }
                "repetitions" | "reps" => {
                    self.repetitions = value
                        .parse()
                        .map_err(|_| bad(format!("bad repetition count '{value}'")))?
                }
                "seed" => {
                    self.base_seed = value
                        .parse()
                        .map_err(|_| bad(format!("bad seed '{value}'")))?
                }
                "split" => self.split = value.parse().map_err(|e| bad(format!("{e}")))?,
                "window" => {
                    self.window = value
                        .parse()
                        .map_err(|_| bad(format!("bad window '{value}'")))?
                }
                "price_column" => self.price_column = value.to_string(),
                "holidays" => self.holiday_file = Some(value.to_string()),
                _ => return Err(bad(format!("unknown config key '{key}'"))),
            }
        }
        if self.repetitions == 0 || self.epochs == 0 {
            return Err(Error::Config("repetitions and epochs must be >= 1".into()));
        }
        Ok(())
    }
}

/// One retained network plus everything needed to use and identify it.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub network: Network,
    pub scaler: Scaler,
    pub window: usize,
    pub training_mse: f64,
    pub run_index: usize,
    pub run_label: String,
    pub run_id: String,
    pub symbol: String,
}

fn run_id(config: &TrainConfig, symbol: &str, run_index: usize) -> String {
    let mut hasher = Sha256::new();
    hasher.update(config.canonical_text().as_bytes());
    hasher.update(symbol.as_bytes());
    hasher.update(config.run_seed(run_index).to_le_bytes());
    let digest = hasher.finalize();
    digest[..6].iter().map(|b| format!("{b:02x}")).collect()
}

/// Flushes subnormal floats to zero on x86-64 and restores the previous
/// FPU state when dropped. Gradient terms shrink toward zero as a run
/// converges; once they enter the subnormal range, most x86 cores take a
/// microcode assist on every operation touching them, which can add 50%
/// to late-run epoch times. The flushed quantities are below ~1e-308 and
/// have no measurable effect on the trained weights.
struct FlushSubnormals {
    #[cfg(target_arch = "x86_64")]
    saved: u32,
}

impl FlushSubnormals {
    fn enable() -> Self {
        #[cfg(target_arch = "x86_64")]
        {
            // FTZ (bit 15) flushes subnormal results, DAZ (bit 6) treats
            // subnormal inputs as zero.
            unsafe {
                use core::arch::x86_64::{_mm_getcsr, _mm_setcsr};
                let saved = _mm_getcsr();
                _mm_setcsr(saved | (1 << 15) | (1 << 6));
                FlushSubnormals { saved }
            }
        }
        #[cfg(not(target_arch = "x86_64"))]
        FlushSubnormals {}
    }
}

impl Drop for FlushSubnormals {
    fn drop(&mut self) {
        #[cfg(target_arch = "x86_64")]
        unsafe {
            use core::arch::x86_64::_mm_setcsr;
            _mm_setcsr(self.saved);
        }
    }
}

/// Train one network from the run's derived seed for the configured number
/// of epochs. The recorded error is the final epoch's MSE.
pub fn train_once(
    dataset: &WindowDataset,
    config: &TrainConfig,
    symbol: &str,
    run_index: usize,
) -> Result<TrainedModel> {
    if dataset.samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut network = Network::random(config.topology.clone(), config.run_seed(run_index));
    let _flush_guard = FlushSubnormals::enable();
    let mut mse = f64::INFINITY;
    for epoch in 1..=config.epochs {
        mse = network
            .train_epoch(&dataset.samples, config.learning_rate)
            .map_err(|e| match e {
                Error::NonFinite(_) => Error::Diverged { epoch, run_index },
                other => other,
            })?;
    }
    Ok(TrainedModel {
        network,
        scaler: dataset.scaler.clone(),
        window: dataset.window,
        training_mse: mse,
        run_index,
        run_label: format!("T{run_index}"),
        run_id: run_id(config, symbol, run_index),
        symbol: symbol.to_string(),
    })
}

/// N independently seeded runs; keep the one with minimum training MSE,
/// ties to the lowest run index. Returns the retained model and all N
/// recorded errors (diverged runs record infinity).
pub fn train_best_of_n(
    dataset: &WindowDataset,
    config: &TrainConfig,
    symbol: &str,
) -> Result<(TrainedModel, Vec<f64>)> {
    let mut best: Option<TrainedModel> = None;
    let mut errors = Vec::with_capacity(config.repetitions);
    for run_index in 1..=config.repetitions {
        match train_once(dataset, config, symbol, run_index) {
            Ok(model) => {
                errors.push(model.training_mse);
                let better = match &best {
                    Some(b) => model.training_mse < b.training_mse,
                    None => true,
                };
                if better {
                    best = Some(model);
                }
            }
            Err(Error::Diverged { .. }) => errors.push(f64::INFINITY),
            Err(e) => return Err(e),
        }
    }
    match best {
        Some(model) => Ok((model, errors)),
        None => Err(Error::TrainingFailed(config.repetitions)),
    }
}

/// One teacher-forced next-day evaluation record.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalPair {
    pub date: NaiveDate,
    pub predicted: f64,
    pub actual: f64,
    pub prev_actual: f64,
}

/// Next-day predictions over the holdout using actual preceding prices only.
/// `history` is the full series; no price dated on or after the predicted
/// date is ever read.
pub fn evaluate_next_day(
    model: &TrainedModel,
    holdout: &PriceSeries,
    history: &PriceSeries,
) -> Result<Vec<EvalPair>> {
    let obs = history.observations();
    let mut pairs = Vec::with_capacity(holdout.len());
    for (date, actual) in holdout.observations() {
        let idx = obs
            .iter()
            .position(|(d, _)| d == date)
            .ok_or(Error::Coverage(*date))?;
        if idx < model.window {
            return Err(Error::Coverage(*date));
        }
        let inputs: Vec<f64> = obs[idx - model.window..idx].iter().map(|(_, p)| *p).collect();
        let predicted = predict_next(model, &inputs)?;
        pairs.push(EvalPair {
            date: *date,
            predicted,
            actual: *actual,
            prev_actual: obs[idx - 1].1,
        });
    }
    Ok(pairs)
}

/// Scaler/metadata sidecar stored next to the `.model` file.
pub fn sidecar_text(model: &TrainedModel) -> String {
    let mut s = String::from("mlpscaler v1\n");
    let _ = writeln!(s, "symbol {}", model.symbol);
    let _ = writeln!(s, "window {}", model.window);
    let _ = writeln!(s, "price_min {:?}", model.scaler.price_min);
    let _ = writeln!(s, "price_max {:?}", model.scaler.price_max);
    let _ = writeln!(s, "unit_low {:?}", model.scaler.unit_low);
    let _ = writeln!(s, "unit_high {:?}", model.scaler.unit_high);
    let _ = writeln!(s, "run_index {}", model.run_index);
    let _ = writeln!(s, "run_label {}", model.run_label);
    let _ = writeln!(s, "run_id {}", model.run_id);
    let _ = writeln!(s, "training_mse {:?}", model.training_mse);
    s
}

fn parse_sidecar(text: &str) -> Result<TrainedModel> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == "mlpscaler v1" => {}
        other => {
            return Err(Error::Parse {
                line: 1,
                msg: format!("expected 'mlpscaler v1' header, got {other:?}"),
            })
        }
    }
    let mut symbol = None;
    let mut window = None;
    let mut price_min = None;
    let mut price_max = None;
    let mut unit_low = None;
    let mut unit_high = None;
    let mut run_index = None;
    let mut run_label = None;
    let mut run_id = None;
    let mut training_mse = None;
    for (n, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once(' ').ok_or(Error::Parse {
            line: n + 1,
            msg: format!("expected 'key value', got '{line}'"),
        })?;
        let bad = |msg: String| Error::Parse { line: n + 1, msg };
        let float = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| bad(format!("bad number '{v}'")))
        };
        match key {
            "symbol" => symbol = Some(value.to_string()),
            "window" => {
                window = Some(
                    value
                        .parse::<usize>()
                        .map_err(|_| bad(format!("bad window '{value}'")))?,
                )
            }
            "price_min" => price_min = Some(float(value)?),
            "price_max" => price_max = Some(float(value)?),
            "unit_low" => unit_low = Some(float(value)?),
            "unit_high" => unit_high = Some(float(value)?),
            "run_index" => {
                run_index = Some(
                    value
                        .parse::<usize>()
                        .map_err(|_| bad(format!("bad run_index '{value}'")))?,
                )
            }
            "run_label" => run_label = Some(value.to_string()),
            "run_id" => run_id = Some(value.to_string()),
            "training_mse" => training_mse = Some(float(value)?),
            _ => return Err(bad(format!("unknown sidecar key '{key}'"))),
        }
    }
    let missing = |field: &str| Error::Schema(format!("sidecar missing '{field}'"));
    Ok(TrainedModel {
        network: Network::zeroed(Topology::default()), // replaced by load_bundle
        scaler: Scaler {
            price_min: price_min.ok_or_else(|| missing("price_min"))?,
            price_max: price_max.ok_or_else(|| missing("price_max"))?,
            unit_low: unit_low.ok_or_else(|| missing("unit_low"))?,
            unit_high: unit_high.ok_or_else(|| missing("unit_high"))?,
        },
        window: window.ok_or_else(|| missing("window"))?,
        training_mse: training_mse.ok_or_else(|| missing("training_mse"))?,
        run_index: run_index.ok_or_else(|| missing("run_index"))?,
        run_label: run_label.ok_or_else(|| missing("run_label"))?,
        run_id: run_id.ok_or_else(|| missing("run_id"))?,
        symbol: symbol.ok_or_else(|| missing("symbol"))?,
    })
}

/// Write `<symbol>.model` and `<symbol>.scaler` into `dir`.
pub fn save_bundle(model: &TrainedModel, dir: &Path) -> Result<(std::path::PathBuf, std::path::PathBuf)> {
    let model_path = dir.join(format!("{}.model", model.symbol));
    let scaler_path = dir.join(format!("{}.scaler", model.symbol));
    std::fs::write(&model_path, model.network.serialize())
        .map_err(|e| Error::io(model_path.display().to_string(), e))?;
    std::fs::write(&scaler_path, sidecar_text(model))
        .map_err(|e| Error::io(scaler_path.display().to_string(), e))?;
    Ok((model_path, scaler_path))
}

/// Load a bundle from its `.model` path; the `.scaler` sidecar must sit
/// next to it.
pub fn load_bundle(model_path: &Path) -> Result<TrainedModel> {
    let text = std::fs::read_to_string(model_path)
        .map_err(|e| Error::io(model_path.display().to_string(), e))?;
    let network = Network::deserialize(&text)?;
    let scaler_path = model_path.with_extension("scaler");
    let sidecar = std::fs::read_to_string(&scaler_path)
        .map_err(|e| Error::io(scaler_path.display().to_string(), e))?;
    let mut model = parse_sidecar(&sidecar)?;
    if network.topology().input_size() != model.window {
        return Err(Error::Schema(format!(
            "network input size {} does not match sidecar window {}",
            network.topology().input_size(),
            model.window
        )));
    }
    model.network = network;
    Ok(model)
}
