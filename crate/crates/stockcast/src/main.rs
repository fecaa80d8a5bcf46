use std::path::PathBuf;
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};

use stockcast::cli::{cmd_forecast, cmd_pipeline, cmd_test, cmd_train, Horizon};
use stockcast::training::{SplitSpec, TrainConfig};

#[derive(Parser)]
#[command(name = "stockcast", about = "Train, test and forecast stock prices with a small sigmoid network")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Flat `key = value` config file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for models, forecasts and the manifest
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Base seed for the deterministic run streams
    #[arg(long, env = "STOCKCAST_SEED")]
    seed: Option<u64>,
    /// Training repetitions per stock (best one retained)
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    /// Learning rate
    #[arg(long)]
    rate: Option<f64>,
    /// Sliding-window length
    #[arg(long)]
    window: Option<usize>,
    /// CSV column holding the price
    #[arg(long)]
    price_column: Option<String>,
    /// Holiday-exclusion file (one YYYY-MM-DD per line)
    #[arg(long)]
    holidays: Option<PathBuf>,
    /// Split spec: `ratio 0.8` or `dates 2012-01-01 2015-12-31`
    #[arg(long)]
    split: Option<String>,
    /// Abort on the first failing stock instead of skipping it
    #[arg(long)]
    strict: bool,
}

impl ConfigArgs {
    fn resolve(&self) -> stockcast::Result<TrainConfig> {
        let mut config = TrainConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| stockcast::Error::io(path.display().to_string(), e))?;
            config.apply_file(&text)?;
        }
        if let Some(seed) = self.seed {
            config.base_seed = seed;
        }
        if let Some(reps) = self.reps {
            config.repetitions = reps;
        }
        if let Some(epochs) = self.epochs {
            config.epochs = epochs;
        }
        if let Some(rate) = self.rate {
            config.learning_rate = rate;
        }
        if let Some(window) = self.window {
            config.window = window;
        }
        if let Some(col) = &self.price_column {
            config.price_column = col.clone();
        }
        if let Some(holidays) = &self.holidays {
            config.holiday_file = Some(holidays.display().to_string());
        }
        if let Some(split) = &self.split {
            config.split = split.parse::<SplitSpec>()?;
        }
        Ok(config)
    }
}

#[derive(Args)]
struct HorizonArgs {
    /// First horizon date (YYYY-MM-DD)
    #[arg(long)]
    start: Option<NaiveDate>,
    /// Last horizon date (YYYY-MM-DD)
    #[arg(long)]
    end: Option<NaiveDate>,
    /// Number of trade days to forecast (alternative to --start/--end)
    #[arg(long)]
    count: Option<usize>,
}

impl HorizonArgs {
    fn resolve(&self) -> stockcast::Result<Horizon> {
        match (self.start, self.end, self.count) {
            (Some(start), Some(end), None) => Ok(Horizon::Range { start, end }),
            (None, None, Some(count)) => Ok(Horizon::Count(count)),
            _ => Err(stockcast::Error::Config(
                "specify either --start with --end, or --count".into(),
            )),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Train one best-of-N model bundle per input CSV
    Train {
        #[command(flatten)]
        config: ConfigArgs,
        /// Historical price CSV files, one per stock
        csv: Vec<PathBuf>,
    },
    /// Teacher-forced next-day evaluation of a saved bundle
    Test {
        #[command(flatten)]
        config: ConfigArgs,
        /// Path to the `<symbol>.model` file
        #[arg(long)]
        model: PathBuf,
        /// The stock's historical price CSV
        csv: PathBuf,
    },
    /// Recursive multi-day forecast from saved bundles
    Forecast {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        horizon: HorizonArgs,
        csv: Vec<PathBuf>,
    },
    /// Train, test and forecast in one run
    Pipeline {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        horizon: HorizonArgs,
        csv: Vec<PathBuf>,
    },
}

fn run(cli: Cli) -> stockcast::Result<bool> {
    match cli.command {
        Command::Train { config, csv } => {
            let cfg = config.resolve()?;
            let report = cmd_train(&csv, &cfg, &config.out, config.strict)?;
            Ok(report.failures.is_empty())
        }
        Command::Test { config, model, csv } => {
            let cfg = config.resolve()?;
            cmd_test(&model, &csv, &cfg)?;
            Ok(true)
        }
        Command::Forecast {
            config,
            horizon,
            csv,
        } => {
            let cfg = config.resolve()?;
            cmd_forecast(&csv, &cfg, &config.out, &horizon.resolve()?)?;
            Ok(true)
        }
        Command::Pipeline {
            config,
            horizon,
            csv,
        } => {
            let cfg = config.resolve()?;
            let (report, _) =
                cmd_pipeline(&csv, &cfg, &config.out, &horizon.resolve()?, config.strict)?;
            Ok(report.failures.is_empty())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
