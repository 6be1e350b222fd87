//! Per-EPU coordination views and pilot assignment.
//!
//! Every UT inside an EPU's coordination region gets a dedicated pilot
//! (indices 0..tau_p, numbered in UT-index order); UTs outside the region
//! are assigned independent uniform pilots, so they may collide with
//! in-region pilots. Pilot sequences of equal index are identical and
//! sequences of distinct index are orthogonal, so integer indices carry all
//! the structure the power computations need.
//!
//! Views of different EPUs are independent: the pilot plan is not shared
//! across overlapping regions, and each UT's metrics are computed under its
//! serving EPU's view only.

use std::fmt;

use rand::Rng;

use crate::geometry::NetworkLayout;

/// Which APs an EPU coordinates: a disc of the given radius (meters), or
/// the service hexagon itself (the baseline mode).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RegionMode {
    Radius(f64),
    ServiceArea,
}

impl RegionMode {
    /// Label used in output file names: `r{km:.2}` or `baseline`.
    pub fn file_label(&self) -> String {
        match self {
            RegionMode::Radius(r) => format!("r{:.2}", r / 1000.0),
            RegionMode::ServiceArea => "baseline".to_string(),
        }
    }

    /// Label used in the summary CSV's `r_coord_km` column.
    pub fn csv_label(&self) -> String {
        match self {
            RegionMode::Radius(r) => format!("{:.2}", r / 1000.0),
            RegionMode::ServiceArea => "baseline".to_string(),
        }
    }
}

impl fmt::Display for RegionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegionMode::Radius(r) => write!(f, "r_coord = {r} m"),
            RegionMode::ServiceArea => f.write_str("service-area baseline"),
        }
    }
}

/// One EPU's view of the network for a given region mode.
#[derive(Debug, Clone)]
pub struct EpuView {
    pub epu_index: usize,
    pub region: RegionMode,
    /// APs this EPU coordinates, ascending by index.
    pub coordinated_aps: Vec<usize>,
    /// UTs inside the region, ascending by index; position defines the pilot.
    pub in_region_uts: Vec<usize>,
    /// UTs in this EPU's service hexagon, ascending by index.
    pub served_uts: Vec<usize>,
    /// Pilot length in channel uses; equals the realized in-region UT count.
    pub tau_p: usize,
    /// Pilot index in [0, tau_p) for every UT in the layout.
    /// Meaningless (all zeros) when the view is degenerate (tau_p = 0).
    pub pilot_of: Vec<usize>,
}

/// Builds the view of one EPU: region membership plus pilot assignment.
///
/// The pilot length is the realized in-region UT count rather than its
/// expectation, which guarantees in-region orthogonality on every trial.
/// If the region holds no UTs the view is degenerate (`tau_p == 0`) and the
/// caller must skip its served UTs instead of recording zero-signal samples.
pub fn build_epu_view<R: Rng + ?Sized>(
    epu_index: usize,
    region: RegionMode,
    layout: &NetworkLayout,
    rng: &mut R,
) -> EpuView {
    let (coordinated_aps, in_region_uts) = match region {
        RegionMode::Radius(r) => {
            (layout.coordination_set(epu_index, r), layout.in_region_uts(epu_index, r))
        }
        RegionMode::ServiceArea => {
            (layout.service_hexagon_aps(epu_index), layout.service_hexagon_uts(epu_index))
        }
    };
    let served_uts = layout.service_hexagon_uts(epu_index);

    let n_uts = layout.ut_positions.len();
    let tau_p = in_region_uts.len();
    let mut pilot_of = vec![0usize; n_uts];
    if tau_p > 0 {
        let mut in_region = vec![false; n_uts];
        for (pilot, &ut) in in_region_uts.iter().enumerate() {
            pilot_of[ut] = pilot;
            in_region[ut] = true;
        }
        for ut in 0..n_uts {
            if !in_region[ut] {
                pilot_of[ut] = rng.random_range(0..tau_p);
            }
        }
    }

    EpuView { epu_index, region, coordinated_aps, in_region_uts, served_uts, tau_p, pilot_of }
}

impl EpuView {
    /// True when the region holds no UTs; such views yield no metrics.
    pub fn is_degenerate(&self) -> bool {
        self.tau_p == 0
    }

    pub fn is_in_region(&self, ut: usize) -> bool {
        self.in_region_uts.binary_search(&ut).is_ok()
    }

    /// Out-of-region UTs whose random pilot collides with UT `k`'s pilot.
    pub fn pilot_collision_set(&self, k: usize) -> Vec<usize> {
        assert!(
            self.is_in_region(k),
            "UT {k} is not in the coordination region of EPU {}",
            self.epu_index
        );
        let pilot = self.pilot_of[k];
        (0..self.pilot_of.len())
            .filter(|&j| self.pilot_of[j] == pilot && !self.is_in_region(j))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SimulationConfig;
    use crate::geometry::{build_layout, Point};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    /// One EPU at the window center, three close UTs, five distant ones.
    fn small_layout() -> NetworkLayout {
        let center = Point::new(2000.0, 2000.0);
        let mut uts = vec![
            Point::new(2100.0, 2000.0),
            Point::new(1900.0, 2000.0),
            Point::new(2000.0, 2200.0),
        ];
        for i in 0..5 {
            uts.push(Point::new(200.0 + 100.0 * i as f64, 300.0));
        }
        NetworkLayout::new(
            4000.0,
            4000.0,
            vec![center],
            vec![Point::new(2050.0, 2000.0)],
            uts,
        )
    }

    #[test]
    fn in_region_pilots_are_orthogonal() {
        let layout = small_layout();
        let view = build_epu_view(0, RegionMode::Radius(500.0), &layout, &mut rng(1));
        assert_eq!(view.tau_p, 3);
        assert_eq!(view.in_region_uts, vec![0, 1, 2]);
        let mut pilots: Vec<usize> =
            view.in_region_uts.iter().map(|&k| view.pilot_of[k]).collect();
        pilots.sort_unstable();
        assert_eq!(pilots, vec![0, 1, 2]);
    }

    #[test]
    fn out_of_region_pilots_are_uniform() {
        let layout = small_layout();
        let trials = 10_000;
        let mut counts = [0usize; 3];
        let mut r = rng(2);
        for _ in 0..trials {
            let view = build_epu_view(0, RegionMode::Radius(500.0), &layout, &mut r);
            counts[view.pilot_of[3]] += 1;
        }
        let sigma = (1.0 / 3.0 * 2.0 / 3.0 / trials as f64).sqrt();
        for (p, &c) in counts.iter().enumerate() {
            let frac = c as f64 / trials as f64;
            assert!(
                (frac - 1.0 / 3.0).abs() < 3.0 * sigma,
                "pilot {p} drawn with frequency {frac}"
            );
        }
    }

    #[test]
    fn region_covering_everything_leaves_no_interferers() {
        let layout = small_layout();
        // Radius covering the full torus: 2000 on each axis reaches
        // every point of the 4000 x 4000 wrap-around window.
        let view = build_epu_view(0, RegionMode::Radius(2000.0 * 2f64.sqrt()), &layout, &mut rng(3));
        assert_eq!(view.in_region_uts.len(), layout.ut_positions.len());
        for &k in &view.in_region_uts {
            assert!(view.pilot_collision_set(k).is_empty());
        }
    }

    #[test]
    fn collision_set_matches_pilot_values() {
        let layout = small_layout();
        let view = build_epu_view(0, RegionMode::Radius(500.0), &layout, &mut rng(4));
        for &k in &view.in_region_uts {
            let set = view.pilot_collision_set(k);
            for &j in &set {
                assert!(!view.is_in_region(j));
                assert_eq!(view.pilot_of[j], view.pilot_of[k]);
            }
            for j in 0..layout.ut_positions.len() {
                if !view.is_in_region(j) && view.pilot_of[j] == view.pilot_of[k] {
                    assert!(set.contains(&j));
                }
            }
        }
    }

    #[test]
    #[should_panic(expected = "not in the coordination region")]
    fn collision_set_rejects_out_of_region_ut() {
        let layout = small_layout();
        let view = build_epu_view(0, RegionMode::Radius(500.0), &layout, &mut rng(5));
        view.pilot_collision_set(3);
    }

    #[test]
    fn collision_count_matches_uniform_expectation() {
        // E|collisions| = (K_total - K_in) / tau_p for a uniform draw.
        let layout = small_layout();
        let trials = 10_000;
        let mut total = 0usize;
        let mut r = rng(6);
        for _ in 0..trials {
            let view = build_epu_view(0, RegionMode::Radius(500.0), &layout, &mut r);
            total += view.pilot_collision_set(0).len();
        }
        let mean = total as f64 / trials as f64;
        let expected = 5.0 / 3.0;
        // Binomial(5, 1/3) per trial: sigma of the mean over 10^4 trials.
        let sigma = (5.0 * (1.0 / 3.0) * (2.0 / 3.0) / trials as f64).sqrt();
        assert!((mean - expected).abs() < 3.0 * sigma, "collision mean {mean} vs {expected}");
    }

    #[test]
    fn degenerate_view_has_zero_tau_p() {
        let layout = NetworkLayout::new(
            4000.0,
            4000.0,
            vec![Point::new(2000.0, 2000.0)],
            vec![Point::new(2010.0, 2000.0)],
            vec![Point::new(100.0, 100.0)],
        );
        let view = build_epu_view(0, RegionMode::Radius(300.0), &layout, &mut rng(7));
        assert!(view.is_degenerate());
        assert_eq!(view.tau_p, 0);
        assert!(view.in_region_uts.is_empty());
    }

    #[test]
    fn baseline_mode_uses_the_service_hexagon() {
        let cfg = SimulationConfig::default();
        let layout = build_layout(&cfg, &mut rng(8));
        let view = build_epu_view(4, RegionMode::ServiceArea, &layout, &mut rng(9));
        assert_eq!(view.coordinated_aps, layout.service_hexagon_aps(4));
        assert_eq!(view.in_region_uts, layout.service_hexagon_uts(4));
        assert_eq!(view.served_uts, view.in_region_uts);
        assert_eq!(view.tau_p, view.in_region_uts.len());
    }

    #[test]
    fn hexagon_is_contained_for_radius_beyond_circumradius() {
        // served_uts is a subset of in_region_uts once r >= d_epu / sqrt(3).
        let cfg = SimulationConfig::default();
        let layout = build_layout(&cfg, &mut rng(10));
        let r = cfg.d_epu / 3f64.sqrt() + 1.0;
        for e in 0..layout.epu_centers.len() {
            let view = build_epu_view(e, RegionMode::Radius(r), &layout, &mut rng(11));
            for &k in &view.served_uts {
                assert!(view.is_in_region(k), "served UT {k} outside region of EPU {e}");
            }
        }
    }

    #[test]
    fn overlapping_regions_share_aps() {
        // At r = 700 m on the default lattice, adjacent discs overlap
        // heavily, so almost every layout has multiply-coordinated APs.
        let cfg = SimulationConfig::default();
        let layouts = 100;
        let mut with_overlap = 0;
        let mut r = rng(12);
        for _ in 0..layouts {
            let layout = build_layout(&cfg, &mut r);
            let mut coordination_count = vec![0u32; layout.ap_positions.len()];
            for e in 0..layout.epu_centers.len() {
                for m in layout.coordination_set(e, 700.0) {
                    coordination_count[m] += 1;
                }
            }
            if coordination_count.iter().any(|&c| c >= 2) {
                with_overlap += 1;
            }
        }
        assert!(with_overlap * 100 >= layouts * 95, "overlap in {with_overlap}/{layouts} layouts");
    }

    #[test]
    fn mean_tau_p_tracks_expected_in_region_count() {
        let cfg = SimulationConfig::default();
        let r_coord = 500.0f64;
        let expected = cfg.rho_u * std::f64::consts::PI * (r_coord / 1000.0).powi(2);
        let layouts = 200;
        let mut sum = 0.0;
        let mut r = rng(13);
        for _ in 0..layouts {
            let layout = build_layout(&cfg, &mut r);
            let view = build_epu_view(0, RegionMode::Radius(r_coord), &layout, &mut rng(14));
            sum += view.tau_p as f64;
        }
        let mean = sum / layouts as f64;
        let tol = 3.0 * (expected / layouts as f64).sqrt();
        assert!((mean - expected).abs() < tol, "tau_p mean {mean} vs {expected}");
    }
}
