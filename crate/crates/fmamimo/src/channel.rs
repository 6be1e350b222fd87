//! Channel model: three-slope path loss, lognormal shadowing and Rayleigh
//! fading.
//!
//! The gain between antenna `n` of AP `m` and UT `k` is `h_mnk * sqrt(beta_mk)`
//! with `h ~ CN(0, 1)` and `beta` combining the deterministic distance law
//! with an independent lognormal shadowing draw per (AP, UT) pair. Transmit
//! power is normalized to 1, so every power below is relative to it.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::config::SimulationConfig;
use crate::db_to_linear;
use crate::geometry::NetworkLayout;

/// Large-scale gain matrix, APs by UTs.
#[derive(Debug, Clone)]
pub struct GainMatrix {
    n_aps: usize,
    n_uts: usize,
    data: Vec<f64>,
}

impl GainMatrix {
    pub fn from_rows(n_aps: usize, n_uts: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n_aps * n_uts);
        GainMatrix { n_aps, n_uts, data }
    }

    pub fn get(&self, ap: usize, ut: usize) -> f64 {
        self.data[ap * self.n_uts + ut]
    }

    pub fn n_aps(&self) -> usize {
        self.n_aps
    }

    pub fn n_uts(&self) -> usize {
        self.n_uts
    }

    /// Returns a copy with every gain multiplied by `scale`.
    pub fn scaled(&self, scale: f64) -> Self {
        GainMatrix {
            n_aps: self.n_aps,
            n_uts: self.n_uts,
            data: self.data.iter().map(|b| b * scale).collect(),
        }
    }
}

/// Small-scale fading tensor, APs by antennas by UTs, entries CN(0, 1).
#[derive(Debug, Clone)]
pub struct FadingTensor {
    n_aps: usize,
    n_r: usize,
    n_uts: usize,
    data: Vec<Complex64>,
}

impl FadingTensor {
    pub fn entry(&self, ap: usize, antenna: usize, ut: usize) -> Complex64 {
        debug_assert!(ap < self.n_aps && antenna < self.n_r && ut < self.n_uts);
        self.data[(ap * self.n_r + antenna) * self.n_uts + ut]
    }

    /// Squared norm of the length-`n_r` fading vector for one (AP, UT) pair.
    pub fn norm_sq(&self, ap: usize, ut: usize) -> f64 {
        (0..self.n_r).map(|n| self.entry(ap, n, ut).norm_sqr()).sum()
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }
}

/// One trial's channel: large-scale gains plus optional realized fading.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub beta: GainMatrix,
    /// Antennas per AP the realization was drawn for.
    pub n_r: u32,
    /// Present iff the run uses exact (realized) fading.
    pub h: Option<FadingTensor>,
}

/// Deterministic three-slope distance factor, shadowing excluded.
///
/// Flat inside `d0`, exponent `gamma0` between the breakpoints, exponent
/// `gamma1` beyond `d1`; continuous at both breakpoints by construction.
pub fn path_loss(d: f64, config: &SimulationConfig) -> f64 {
    debug_assert!(d >= 0.0);
    if d < config.d0 {
        1.0
    } else if d < config.d1 {
        (d / config.d0).powf(-config.gamma0)
    } else {
        (config.d1 / config.d0).powf(-config.gamma0) * (d / config.d1).powf(-config.gamma1)
    }
}

/// One shadowing draw in dB, Normal(0, sigma_sh_db^2).
pub fn sample_shadowing_db<R: Rng + ?Sized>(rng: &mut R, config: &SimulationConfig) -> f64 {
    Normal::new(0.0, config.sigma_sh_db)
        .expect("non-negative shadowing deviation")
        .sample(rng)
}

/// Large-scale gain for one AP-UT pair given its distance and shadowing.
pub fn large_scale_gain(d: f64, shadowing_db: f64, config: &SimulationConfig) -> f64 {
    db_to_linear(shadowing_db) * path_loss(d, config)
}

/// Samples the full large-scale gain matrix for a layout.
///
/// One independent shadowing draw per (AP, UT) pair; the draw order is
/// row-major over (AP, UT) and therefore reproducible for a given stream.
pub fn large_scale_gains<R: Rng + ?Sized>(
    layout: &NetworkLayout,
    config: &SimulationConfig,
    rng: &mut R,
) -> GainMatrix {
    let normal = Normal::new(0.0, config.sigma_sh_db).expect("non-negative shadowing deviation");
    let n_aps = layout.ap_positions.len();
    let n_uts = layout.ut_positions.len();
    let mut data = Vec::with_capacity(n_aps * n_uts);
    for &ap in &layout.ap_positions {
        for &ut in &layout.ut_positions {
            let d = layout.toroidal_distance(ap, ut);
            data.push(large_scale_gain(d, normal.sample(rng), config));
        }
    }
    GainMatrix::from_rows(n_aps, n_uts, data)
}

/// Samples i.i.d. CN(0, 1) fading: real and imaginary parts Normal(0, 1/2).
pub fn sample_fading<R: Rng + ?Sized>(
    n_aps: usize,
    n_r: usize,
    n_uts: usize,
    rng: &mut R,
) -> FadingTensor {
    let component = Normal::new(0.0, (0.5f64).sqrt()).unwrap();
    let data = (0..n_aps * n_r * n_uts)
        .map(|_| Complex64::new(component.sample(rng), component.sample(rng)))
        .collect();
    FadingTensor { n_aps, n_r, n_uts, data }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use statrs::distribution::{ContinuousCDF, Normal as StatNormal};

    fn defaults() -> SimulationConfig {
        SimulationConfig::default()
    }

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn path_loss_spot_values() {
        let cfg = defaults();
        assert_eq!(path_loss(0.0, &cfg), 1.0);
        assert_eq!(path_loss(5.0, &cfg), 1.0);
        let at_100 = path_loss(100.0, &cfg);
        assert!((at_100 - 1.0e-2).abs() / 1.0e-2 < 1e-12);
        let at_1000 = path_loss(1000.0, &cfg);
        let expected = 1.0e-2 * 10f64.powf(-3.5);
        assert!((at_1000 - expected).abs() / expected < 1e-12);
    }

    #[test]
    fn path_loss_continuous_at_breakpoints() {
        let mut cfgs = vec![defaults()];
        let mut r = rng(20);
        for _ in 0..100 {
            let d0 = r.random_range(1.0..200.0);
            cfgs.push(SimulationConfig {
                gamma0: r.random_range(0.5..5.0),
                gamma1: r.random_range(0.5..5.0),
                d0,
                d1: d0 + r.random_range(1.0..500.0),
                ..defaults()
            });
        }
        for cfg in &cfgs {
            for edge in [cfg.d0, cfg.d1] {
                let below = path_loss(edge * (1.0 - 1e-13), cfg);
                let above = path_loss(edge * (1.0 + 1e-13), cfg);
                let rel = (below - above).abs() / above;
                assert!(rel < 1e-12, "jump {rel} at d = {edge}");
            }
        }
    }

    #[test]
    fn path_loss_is_non_increasing() {
        let cfg = defaults();
        let mut r = rng(21);
        for _ in 0..10_000 {
            let a = r.random_range(0.0..3000.0);
            let b = a + r.random_range(0.0..3000.0);
            assert!(path_loss(a, &cfg) >= path_loss(b, &cfg));
        }
    }

    #[test]
    fn zero_sigma_shadowing_is_degenerate() {
        let cfg = SimulationConfig { sigma_sh_db: 0.0, ..defaults() };
        let mut r = rng(22);
        for _ in 0..100 {
            assert_eq!(sample_shadowing_db(&mut r, &cfg), 0.0);
        }
    }

    #[test]
    fn shadowing_moments() {
        let cfg = defaults();
        let mut r = rng(23);
        let n = 100_000;
        let draws: Vec<f64> = (0..n).map(|_| sample_shadowing_db(&mut r, &cfg)).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 0.08, "shadowing mean {mean}");
        assert!((var.sqrt() - 8.0).abs() < 0.1, "shadowing std {}", var.sqrt());
    }

    #[test]
    fn shadowing_is_normal_by_kolmogorov_smirnov() {
        // Two-sided KS against Normal(0, 64); critical value at alpha = 0.01
        // is 1.6276 / sqrt(n) for large n.
        let cfg = defaults();
        let mut r = rng(24);
        let n = 100_000usize;
        let mut draws: Vec<f64> = (0..n).map(|_| sample_shadowing_db(&mut r, &cfg)).collect();
        draws.sort_by(f64::total_cmp);
        let reference = StatNormal::new(0.0, 8.0).unwrap();
        let mut d_stat: f64 = 0.0;
        for (i, &x) in draws.iter().enumerate() {
            let f = reference.cdf(x);
            let upper = (i + 1) as f64 / n as f64 - f;
            let lower = f - i as f64 / n as f64;
            d_stat = d_stat.max(upper.max(lower));
        }
        let critical = 1.6276 / (n as f64).sqrt();
        assert!(d_stat < critical, "KS statistic {d_stat} >= {critical}");
    }

    #[test]
    fn gain_composes_shadowing_and_path_loss() {
        let cfg = defaults();
        assert_eq!(large_scale_gain(100.0, 0.0, &cfg), 0.01);
        let boosted = large_scale_gain(100.0, 10.0, &cfg);
        assert!((boosted - 0.1).abs() < 1e-15);
    }

    #[test]
    fn gain_matrix_shape_and_zero_sigma_values() {
        let cfg = SimulationConfig { sigma_sh_db: 0.0, ..defaults() };
        let layout = NetworkLayout::new(
            6000.0,
            5196.15,
            vec![Point::new(0.0, 0.0)],
            vec![Point::new(0.0, 0.0), Point::new(0.0, 100.0)],
            vec![Point::new(100.0, 0.0), Point::new(0.0, 100.0), Point::new(50.0, 0.0)],
        );
        let beta = large_scale_gains(&layout, &cfg, &mut rng(25));
        assert_eq!(beta.n_aps(), 2);
        assert_eq!(beta.n_uts(), 3);
        assert!((beta.get(0, 0) - 0.01).abs() < 1e-15);
        assert!((beta.get(1, 1) - 1.0).abs() < 1e-15);
        for ap in 0..2 {
            for ut in 0..3 {
                assert!(beta.get(ap, ut) > 0.0 && beta.get(ap, ut).is_finite());
            }
        }
    }

    #[test]
    fn fading_is_unit_variance_circular() {
        let mut r = rng(26);
        let n = 1_000_000;
        let h = sample_fading(n, 1, 1, &mut r);
        let mut sum = Complex64::new(0.0, 0.0);
        let mut power = 0.0;
        let mut below_one = 0usize;
        for ap in 0..n {
            let z = h.entry(ap, 0, 0);
            sum += z;
            let p = z.norm_sqr();
            power += p;
            if p <= 1.0 {
                below_one += 1;
            }
        }
        let mean = sum / n as f64;
        assert!(mean.re.abs() < 0.01 && mean.im.abs() < 0.01, "fading mean {mean}");
        let mean_power = power / n as f64;
        assert!((mean_power - 1.0).abs() < 0.01, "fading power {mean_power}");
        // |h|^2 is Exp(1): P(|h|^2 <= 1) = 1 - e^-1.
        let frac = below_one as f64 / n as f64;
        assert!((frac - 0.6321205588285577).abs() < 0.01, "exp check {frac}");
    }

    #[test]
    fn fading_norm_hardens_to_antenna_count() {
        let draws = 20_000;
        for n_r in [1usize, 4, 16] {
            let mut r = rng(27 + n_r as u64);
            let h = sample_fading(draws, n_r, 1, &mut r);
            let mean: f64 =
                (0..draws).map(|ap| h.norm_sq(ap, 0)).sum::<f64>() / draws as f64;
            // Var(||h||^2) = n_r, so the mean has sigma = sqrt(n_r / draws).
            let tol = 3.0 * (n_r as f64 / draws as f64).sqrt();
            assert!((mean - n_r as f64).abs() < tol, "n_r = {n_r}: mean {mean}");
        }
    }
}
