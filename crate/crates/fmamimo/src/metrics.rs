//! Per-UT link metrics under one EPU view.
//!
//! Collected signal power sums the received power over the EPU's
//! coordinated APs, either in the channel-hardened form `n_r * sum(beta)`
//! or with realized fading `sum(||h||^2 * beta)`. Interference sums the
//! power received at the same APs from out-of-region UTs; in-region UTs are
//! coordinated and therefore interference-free. The pilot-collision mode
//! restricts the interferers to UTs whose random pilot collides with the
//! victim's, bracketing the contamination-dominated regime from below while
//! the all-out-of-region mode brackets it from above. Interference uses the
//! hardened antenna factor in both modes.
//!
//! No noise enters anywhere: the figure of merit is SIR, capped so that
//! empty interferer sets keep distributions finite.

use crate::channel::ChannelRealization;
use crate::config::{FadingMode, InterferenceMode};
use crate::coordination::{EpuView, RegionMode};
use crate::db_to_linear;

/// Metrics for one served UT under one EPU view.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub ut_index: usize,
    pub epu_index: usize,
    pub region: RegionMode,
    /// Collected signal power, linear, relative to unit transmit power.
    pub signal: f64,
    /// Interference power, linear.
    pub interference: f64,
    /// SIR in dB, capped at the configured maximum.
    pub sir_db: f64,
    /// Fraction of the coherence interval left for data: (tau_c - tau_p) / tau_c.
    pub data_fraction: f64,
    /// Spectral efficiency, bits/s/Hz.
    pub se: f64,
}

/// Total signal power collected from UT `k` over the view's coordinated APs.
pub fn signal_power(
    view: &EpuView,
    chan: &ChannelRealization,
    k: usize,
    mode: FadingMode,
) -> f64 {
    assert!(
        view.is_in_region(k),
        "UT {k} is not in the coordination region of EPU {}",
        view.epu_index
    );
    match mode {
        FadingMode::Hardened => {
            f64::from(chan.n_r)
                * view.coordinated_aps.iter().map(|&m| chan.beta.get(m, k)).sum::<f64>()
        }
        FadingMode::Exact => {
            let h = chan.h.as_ref().expect("exact fading mode requires a fading tensor");
            view.coordinated_aps
                .iter()
                .map(|&m| h.norm_sq(m, k) * chan.beta.get(m, k))
                .sum()
        }
    }
}

/// Interference power received for UT `k` at the view's coordinated APs.
pub fn interference_power(
    view: &EpuView,
    chan: &ChannelRealization,
    k: usize,
    mode: InterferenceMode,
) -> f64 {
    assert!(
        view.is_in_region(k),
        "UT {k} is not in the coordination region of EPU {}",
        view.epu_index
    );
    let interferers: Vec<usize> = match mode {
        InterferenceMode::AllOutOfRegion => {
            (0..chan.beta.n_uts()).filter(|&j| !view.is_in_region(j)).collect()
        }
        InterferenceMode::PilotCollisionOnly => view.pilot_collision_set(k),
    };
    let mut sum = 0.0;
    for &m in &view.coordinated_aps {
        for &j in &interferers {
            sum += chan.beta.get(m, j);
        }
    }
    f64::from(chan.n_r) * sum
}

/// Signal-to-interference ratio in dB, capped at `cap_db`.
///
/// An empty interferer set (I = 0) maps to the cap exactly. Both powers
/// zero is a contract violation: the caller must have skipped such records.
pub fn sir_db(signal: f64, interference: f64, cap_db: f64) -> f64 {
    assert!(
        signal > 0.0 || interference > 0.0,
        "SIR is undefined when signal and interference are both zero"
    );
    if interference == 0.0 {
        cap_db
    } else {
        (10.0 * (signal / interference).log10()).min(cap_db)
    }
}

/// Fraction of the coherence interval left for data after pilots.
pub fn data_fraction(tau_p: usize, tau_c: u32) -> f64 {
    (f64::from(tau_c) - tau_p as f64).max(0.0) / f64::from(tau_c)
}

/// Spectral efficiency in bits/s/Hz: the data fraction times log2(1 + SIR).
pub fn spectral_efficiency(sir_db: f64, tau_p: usize, tau_c: u32) -> f64 {
    data_fraction(tau_p, tau_c) * (1.0 + db_to_linear(sir_db)).log2()
}
