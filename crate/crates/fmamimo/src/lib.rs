//! Monte Carlo simulator for a fog massive MIMO access network.
//!
//! Edge processing units (EPUs) sit on a hexagonal lattice wrapped onto a
//! torus. Each EPU coordinates the access points inside a circular
//! coordination region (regions of adjacent EPUs overlap) and decodes the
//! user terminals inside its hexagonal service region. The simulator sweeps
//! the coordination radius and reports, per radius, the empirical
//! distributions of collected signal power, residual interference, SIR and
//! spectral efficiency, exposing the trade-off between collecting more
//! signal and paying a longer pilot overhead.

pub mod channel;
pub mod config;
pub mod coordination;
pub mod geometry;
pub mod metrics;
pub mod montecarlo;
pub mod output;

pub use config::{parse_cli, parse_config, ConfigError, FadingMode, InterferenceMode, RunArgs, SimulationConfig};
pub use coordination::{build_epu_view, EpuView, RegionMode};
pub use geometry::{build_layout, NetworkLayout, Point};
pub use metrics::MetricsRecord;
pub use montecarlo::{run_simulation, EmpiricalCdf, Metric, SweepResult};

/// Converts a dB quantity to linear scale.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Converts a positive linear quantity to dB.
pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}
