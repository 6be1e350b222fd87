//! Network geometry on a wrap-around window.
//!
//! EPU centers form a triangular lattice (hexagonal service cells) on a
//! torus of `window_nx * d_epu` by `window_ny * (sqrt(3)/2) * d_epu` meters;
//! the even row count makes the lattice seamless across the wrap. APs and
//! UTs are scattered as a homogeneous Poisson process. Using a torus instead
//! of a bounded window removes simulation-boundary artifacts, so the only
//! edge effects left are the ones the coordination regions themselves
//! mitigate.

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::config::SimulationConfig;

/// A position in the simulation window, meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }
}

/// EPU lattice plus AP/UT scatter for one trial.
///
/// Construct through [`build_layout`] or [`NetworkLayout::new`]; both cache
/// the nearest-EPU assignment of every AP and UT so that service-region
/// queries are lookups.
#[derive(Debug, Clone)]
pub struct NetworkLayout {
    pub width: f64,
    pub height: f64,
    pub epu_centers: Vec<Point>,
    pub ap_positions: Vec<Point>,
    pub ut_positions: Vec<Point>,
    ap_serving: Vec<usize>,
    ut_serving: Vec<usize>,
}

/// Builds the lattice and scatters Poisson-distributed APs and UTs.
///
/// Counts are drawn as Poisson(density * area) and positions i.i.d. uniform
/// on the torus, the standard reading of "uniformly distributed with
/// density". Consumes a dedicated random stream.
pub fn build_layout<R: Rng + ?Sized>(config: &SimulationConfig, rng: &mut R) -> NetworkLayout {
    let width = config.torus_width();
    let height = config.torus_height();
    let row_step = 3f64.sqrt() / 2.0 * config.d_epu;

    let nx = config.window_nx as usize;
    let ny = config.window_ny as usize;
    let mut epu_centers = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        let offset = if j % 2 == 1 { config.d_epu / 2.0 } else { 0.0 };
        for i in 0..nx {
            let x = (i as f64 * config.d_epu + offset) % width;
            epu_centers.push(Point::new(x, j as f64 * row_step));
        }
    }

    let area_km2 = width * height / 1.0e6;
    let n_aps = draw_count(rng, config.rho_a * area_km2);
    let n_uts = draw_count(rng, config.rho_u * area_km2);
    let scatter = |rng: &mut R, n: usize| {
        (0..n)
            .map(|_| Point::new(rng.random_range(0.0..width), rng.random_range(0.0..height)))
            .collect::<Vec<_>>()
    };
    let ap_positions = scatter(rng, n_aps);
    let ut_positions = scatter(rng, n_uts);

    NetworkLayout::new(width, height, epu_centers, ap_positions, ut_positions)
}

fn draw_count<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> usize {
    Poisson::new(mean).expect("positive Poisson mean").sample(rng) as usize
}

impl NetworkLayout {
    /// Assembles a layout from explicit positions (used directly by tests).
    pub fn new(
        width: f64,
        height: f64,
        epu_centers: Vec<Point>,
        ap_positions: Vec<Point>,
        ut_positions: Vec<Point>,
    ) -> Self {
        let mut layout = NetworkLayout {
            width,
            height,
            epu_centers,
            ap_positions,
            ut_positions,
            ap_serving: Vec::new(),
            ut_serving: Vec::new(),
        };
        layout.ap_serving =
            layout.ap_positions.iter().map(|&p| layout.nearest_epu(p)).collect();
        layout.ut_serving =
            layout.ut_positions.iter().map(|&p| layout.nearest_epu(p)).collect();
        layout
    }

    /// Euclidean distance with per-axis wrap-around.
    pub fn toroidal_distance(&self, p: Point, q: Point) -> f64 {
        let mut dx = (p.x - q.x).abs();
        if dx > self.width - dx {
            dx = self.width - dx;
        }
        let mut dy = (p.y - q.y).abs();
        if dy > self.height - dy {
            dy = self.height - dy;
        }
        (dx * dx + dy * dy).sqrt()
    }

    /// Index of the EPU center nearest to `p`; ties go to the lowest index.
    pub fn nearest_epu(&self, p: Point) -> usize {
        let mut best = 0;
        let mut best_dist = f64::INFINITY;
        for (idx, &center) in self.epu_centers.iter().enumerate() {
            let d = self.toroidal_distance(p, center);
            if d < best_dist {
                best_dist = d;
                best = idx;
            }
        }
        best
    }

    /// The EPU whose service region contains UT `ut_index`.
    pub fn serving_epu(&self, ut_index: usize) -> usize {
        self.ut_serving[ut_index]
    }

    /// APs within `r_coord` of the EPU center, ascending by index.
    pub fn coordination_set(&self, epu_index: usize, r_coord: f64) -> Vec<usize> {
        self.within_radius(&self.ap_positions, epu_index, r_coord)
    }

    /// UTs within `r_coord` of the EPU center, ascending by index.
    pub fn in_region_uts(&self, epu_index: usize, r_coord: f64) -> Vec<usize> {
        self.within_radius(&self.ut_positions, epu_index, r_coord)
    }

    /// APs whose nearest EPU center is `epu_index` (its service hexagon).
    pub fn service_hexagon_aps(&self, epu_index: usize) -> Vec<usize> {
        indices_matching(&self.ap_serving, epu_index)
    }

    /// UTs whose nearest EPU center is `epu_index`.
    pub fn service_hexagon_uts(&self, epu_index: usize) -> Vec<usize> {
        indices_matching(&self.ut_serving, epu_index)
    }

    fn within_radius(&self, points: &[Point], epu_index: usize, r_coord: f64) -> Vec<usize> {
        let center = self.epu_centers[epu_index];
        points
            .iter()
            .enumerate()
            .filter(|(_, &p)| self.toroidal_distance(p, center) <= r_coord)
            .map(|(i, _)| i)
            .collect()
    }
}

fn indices_matching(assignment: &[usize], target: usize) -> Vec<usize> {
    assignment
        .iter()
        .enumerate()
        .filter(|(_, &epu)| epu == target)
        .map(|(i, _)| i)
        .collect()
}
