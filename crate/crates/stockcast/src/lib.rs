//! stockcast: sliding-window stock price forecasting with a small sigmoid
//! feedforward network.
//!
//! The pipeline trains a topology-parametric multilayer perceptron (default
//! 5:21:21:1) on the 5 preceding daily closing prices, retains the best of N
//! independently seeded training runs, and forecasts arbitrary future
//! horizons by recursively feeding predictions back as inputs. See the
//! `examples/` directory for one runnable example per capability, and the
//! `stockcast` binary for the train / test / forecast / pipeline commands.

pub mod calendar;
pub mod cli;
pub mod error;
pub mod forecast;
pub mod market;
pub mod mlp;
pub mod report;
pub mod training;

pub use error::{Error, Result};
pub use forecast::{detect_saturation, forecast_recursive, predict_next, ForecastRequest, ForecastResult};
pub use market::{build_windows, parse_price_csv, PriceSeries, Scaler, WindowDataset};
pub use mlp::{sigmoid, Network, Topology, TrainSample};
pub use training::{train_best_of_n, train_once, TrainConfig, TrainedModel};
