//! Seeded Monte Carlo orchestration and empirical-CDF aggregation.
//!
//! Trials are independent work units. Every random stream in trial `t`
//! derives from `(master_seed, t, purpose)` through a fixed 64-bit mixing
//! function, so results are bit-identical regardless of worker count or
//! scheduling; the parallel path (rayon, the default `parallel` feature)
//! and the sequential fallback produce the same bytes.
//!
//! Within a trial the layout, shadowing and fading are drawn once and shared
//! across the whole radius sweep. That makes the sweep a paired comparison:
//! per UT, collected signal power is exactly non-decreasing in the radius,
//! and the variance of cross-radius gains is far lower than with independent
//! draws per radius.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use thiserror::Error;

use crate::channel::{large_scale_gains, sample_fading, ChannelRealization};
use crate::config::{FadingMode, SimulationConfig};
use crate::coordination::{build_epu_view, RegionMode};
use crate::metrics::{
    data_fraction, interference_power, signal_power, sir_db, spectral_efficiency, MetricsRecord,
};
use crate::{geometry::build_layout, linear_to_db};

/// Independent random-stream purposes within one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamPurpose {
    Layout = 0,
    Shadowing = 1,
    Fading = 2,
    Pilots = 3,
}

impl StreamPurpose {
    pub fn tag(self) -> u64 {
        self as u64
    }

    pub fn from_tag(tag: u64) -> Option<Self> {
        match tag {
            0 => Some(StreamPurpose::Layout),
            1 => Some(StreamPurpose::Shadowing),
            2 => Some(StreamPurpose::Fading),
            3 => Some(StreamPurpose::Pilots),
            _ => None,
        }
    }
}

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer: an invertible avalanche over u64.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fold(h: u64, v: u64) -> u64 {
    mix64(h.wrapping_add(GOLDEN_GAMMA).wrapping_add(v))
}

/// Collision-resistant seed for one (trial, purpose) random stream.
///
/// Deterministic and independent of evaluation order; because the mixer is
/// a bijection, two seeds derived from the same master differing only in
/// the trial index (or only in the purpose) are always distinct. The
/// concrete constants are pinned by `tests/data/seed_vectors.csv`.
pub fn derive_trial_seed(master_seed: u64, trial: u64, purpose: StreamPurpose) -> u64 {
    fold(fold(mix64(master_seed), trial), purpose.tag())
}

/// Extends a derived seed with two more stream coordinates (region, EPU).
fn substream(seed: u64, a: u64, b: u64) -> u64 {
    fold(fold(seed, a), b)
}

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The region sweep a config asks for: every radius, then the baseline.
pub fn sweep_regions(config: &SimulationConfig) -> Vec<RegionMode> {
    let mut regions: Vec<RegionMode> =
        config.r_coord_list.iter().map(|&r| RegionMode::Radius(r)).collect();
    if config.baseline_service_area {
        regions.push(RegionMode::ServiceArea);
    }
    regions
}

/// Records produced by one trial, plus the count of skipped evaluations.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutput {
    pub records: Vec<MetricsRecord>,
    /// Served-UT evaluations that produced no record: the view was
    /// degenerate (no in-region UT) or coordinated no AP at all. Skipped,
    /// never recorded as zero-power samples.
    pub skipped: u64,
}

/// Runs one trial: one layout, one channel, metrics for every region.
///
/// Records are emitted for every (region, EPU, served UT in-region) triple,
/// in that loop order. The same layout and channel serve all regions.
pub fn run_trial(config: &SimulationConfig, trial: u64) -> TrialOutput {
    let master = config.master_seed;
    let layout = build_layout(
        config,
        &mut rng_for(derive_trial_seed(master, trial, StreamPurpose::Layout)),
    );
    let beta = large_scale_gains(
        &layout,
        config,
        &mut rng_for(derive_trial_seed(master, trial, StreamPurpose::Shadowing)),
    );
    let h = (config.fading_mode == FadingMode::Exact).then(|| {
        sample_fading(
            layout.ap_positions.len(),
            config.n_r as usize,
            layout.ut_positions.len(),
            &mut rng_for(derive_trial_seed(master, trial, StreamPurpose::Fading)),
        )
    });
    let chan = ChannelRealization { beta, n_r: config.n_r, h };
    let pilot_seed = derive_trial_seed(master, trial, StreamPurpose::Pilots);

    let mut records = Vec::new();
    let mut skipped = 0u64;
    for (region_idx, &region) in sweep_regions(config).iter().enumerate() {
        for epu in 0..layout.epu_centers.len() {
            let mut pilot_rng = rng_for(substream(pilot_seed, region_idx as u64, epu as u64));
            let view = build_epu_view(epu, region, &layout, &mut pilot_rng);
            if view.is_degenerate() {
                skipped += view.served_uts.len() as u64;
                continue;
            }
            if view.coordinated_aps.is_empty() {
                // No AP collects anything: signal and interference are both
                // zero for every UT here, which has no finite dB value.
                skipped += view.served_uts.iter().filter(|&&k| view.is_in_region(k)).count() as u64;
                continue;
            }
            for &k in &view.served_uts {
                if !view.is_in_region(k) {
                    continue;
                }
                let signal = signal_power(&view, &chan, k, config.fading_mode);
                let interference =
                    interference_power(&view, &chan, k, config.interference_mode);
                let sir = sir_db(signal, interference, config.max_sir_db);
                records.push(MetricsRecord {
                    ut_index: k,
                    epu_index: epu,
                    region,
                    signal,
                    interference,
                    sir_db: sir,
                    data_fraction: data_fraction(view.tau_p, config.tau_c),
                    se: spectral_efficiency(sir, view.tau_p, config.tau_c),
                });
            }
        }
    }
    TrialOutput { records, skipped }
}

/// Output metric distributions, one per (metric, region).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Metric {
    Signal,
    Interference,
    Sir,
    SpectralEfficiency,
}

impl Metric {
    pub const ALL: [Metric; 4] =
        [Metric::Signal, Metric::Interference, Metric::Sir, Metric::SpectralEfficiency];

    /// Short name used in output file names and the summary CSV.
    pub fn csv_name(self) -> &'static str {
        match self {
            Metric::Signal => "signal",
            Metric::Interference => "interference",
            Metric::Sir => "sir",
            Metric::SpectralEfficiency => "se",
        }
    }

    /// True when the distribution holds linear power samples that the CSV
    /// layer renders in dB (signal, interference). SIR is already in dB and
    /// spectral efficiency is not a power.
    pub fn stores_linear_power(self) -> bool {
        matches!(self, Metric::Signal | Metric::Interference)
    }
}

/// Empirical distribution: sorted samples with probabilities (i+1)/n.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    pub sorted_values: Vec<f64>,
    pub probabilities: Vec<f64>,
}

/// Builds the empirical CDF of a nonempty sample set. Ties keep duplicate
/// values, each with its own probability step.
pub fn empirical_cdf(samples: &[f64]) -> Result<EmpiricalCdf, SimError> {
    if samples.is_empty() {
        return Err(SimError::EmptySamples);
    }
    let mut sorted_values = samples.to_vec();
    sorted_values.sort_by(f64::total_cmp);
    let n = sorted_values.len();
    let probabilities = (1..=n).map(|i| i as f64 / n as f64).collect();
    Ok(EmpiricalCdf { sorted_values, probabilities })
}

impl EmpiricalCdf {
    pub fn len(&self) -> usize {
        self.sorted_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted_values.is_empty()
    }

    /// Smallest sample whose cumulative probability reaches `p`, p in (0, 1].
    pub fn quantile(&self, p: f64) -> f64 {
        assert!(p > 0.0 && p <= 1.0, "quantile level must be in (0, 1]");
        let n = self.len();
        let idx = ((p * n as f64).ceil() as usize).clamp(1, n) - 1;
        self.sorted_values[idx]
    }

    /// Fraction of samples at or below `v`.
    pub fn fraction_at_or_below(&self, v: f64) -> f64 {
        let count = self.sorted_values.partition_point(|&x| x <= v);
        count as f64 / self.len() as f64
    }
}

/// Aggregated sweep output: one CDF per (metric, region index).
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// Regions in sweep order; CDF keys index into this list.
    pub regions: Vec<RegionMode>,
    pub per_point: BTreeMap<(Metric, usize), EmpiricalCdf>,
    pub skipped_records: u64,
}

impl SweepResult {
    pub fn cdf(&self, metric: Metric, region_idx: usize) -> &EmpiricalCdf {
        &self.per_point[&(metric, region_idx)]
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("empirical CDF requires at least one sample")]
    EmptySamples,
    #[error("no usable records for metric `{metric}` at {region}")]
    EmptyGroup { metric: &'static str, region: String },
}

/// Runs all trials sequentially, in trial order.
pub fn run_trials_seq(config: &SimulationConfig) -> Vec<TrialOutput> {
    (0..u64::from(config.trials)).map(|t| run_trial(config, t)).collect()
}

/// Runs all trials on the rayon pool; the collect keeps trial order, so the
/// merge is identical to the sequential one.
#[cfg(feature = "parallel")]
pub fn run_trials_par(config: &SimulationConfig) -> Vec<TrialOutput> {
    (0..u64::from(config.trials)).into_par_iter().map(|t| run_trial(config, t)).collect()
}

/// Full simulation with the default execution backend.
pub fn run_simulation(config: &SimulationConfig) -> Result<SweepResult, SimError> {
    #[cfg(feature = "parallel")]
    let outputs = run_trials_par(config);
    #[cfg(not(feature = "parallel"))]
    let outputs = run_trials_seq(config);
    aggregate(config, &outputs)
}

/// Full simulation forced onto the sequential path.
pub fn run_simulation_seq(config: &SimulationConfig) -> Result<SweepResult, SimError> {
    aggregate(config, &run_trials_seq(config))
}

/// Pools records across trials into per-(metric, region) empirical CDFs.
///
/// Signal and interference distributions hold linear powers;
/// zero-interference records (an empty interferer set) have no dB value and
/// are excluded from the interference distribution only — they still carry
/// their capped SIR into the SIR and SE distributions.
pub fn aggregate(
    config: &SimulationConfig,
    outputs: &[TrialOutput],
) -> Result<SweepResult, SimError> {
    let regions = sweep_regions(config);
    let mut samples: BTreeMap<(Metric, usize), Vec<f64>> = BTreeMap::new();
    for metric in Metric::ALL {
        for region_idx in 0..regions.len() {
            samples.insert((metric, region_idx), Vec::new());
        }
    }

    let mut skipped_records = 0u64;
    for output in outputs {
        skipped_records += output.skipped;
        for record in &output.records {
            let region_idx = regions
                .iter()
                .position(|&r| r == record.region)
                .expect("record region is part of the sweep");
            samples.get_mut(&(Metric::Signal, region_idx)).unwrap().push(record.signal);
            if record.interference > 0.0 {
                samples
                    .get_mut(&(Metric::Interference, region_idx))
                    .unwrap()
                    .push(record.interference);
            }
            samples.get_mut(&(Metric::Sir, region_idx)).unwrap().push(record.sir_db);
            samples
                .get_mut(&(Metric::SpectralEfficiency, region_idx))
                .unwrap()
                .push(record.se);
        }
    }

    let mut per_point = BTreeMap::new();
    for ((metric, region_idx), values) in samples {
        let cdf = empirical_cdf(&values).map_err(|_| SimError::EmptyGroup {
            metric: metric.csv_name(),
            region: regions[region_idx].to_string(),
        })?;
        per_point.insert((metric, region_idx), cdf);
    }
    Ok(SweepResult { regions, per_point, skipped_records })
}

/// Median of a metric's output-domain distribution (dB for power metrics).
pub fn median_db(result: &SweepResult, metric: Metric, region_idx: usize) -> f64 {
    let q = result.cdf(metric, region_idx).quantile(0.5);
    if metric.stores_linear_power() {
        linear_to_db(q)
    } else {
        q
    }
}
