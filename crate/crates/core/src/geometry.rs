//! Regions, candidate grids, and the regulatory constraints that gate where
//! an aerial base station may hover.
//!
//! The service area is tiled by rectangular regions, one UAV per region.
//! Each region carries a finite grid of candidate hover positions; before any
//! radio computation the grid is filtered against two regulations:
//!
//! - a restricted zone in the horizontal plane (an ellipse, or its
//!   rectangular band approximation used by the convex formulation), and
//! - an altitude band `[h_min, h_max]`.
//!
//! All boundary inequalities are non-strict: a point exactly on the ellipse
//! or exactly at `h_min`/`h_max` is feasible.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A point in 3D space, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

/// Euclidean distance between two points, meters.
pub fn distance(p: Point3, q: Point3) -> f64 {
    let dx = p.x - q.x;
    let dy = p.y - q.y;
    let dz = p.z - q.z;
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// An axis-aligned rectangular region on the ground plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Region {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Self {
        debug_assert!(x_min < x_max && y_min < y_max);
        Self {
            x_min,
            x_max,
            y_min,
            y_max,
        }
    }

    /// True if the point's horizontal projection lies inside the rectangle
    /// (boundaries included).
    pub fn contains_xy(&self, p: Point3) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }
}

/// How the restricted zone is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ZoneMode {
    /// Elliptical exclusion region: semi-minor axis `b` along x, semi-major
    /// axis `a` along y.
    Ellipse,
    /// Rectangular approximation: a vertical band of half-width `b` around
    /// the center line `x = center_x`. Only `b` and `center_x` are consulted.
    Band,
}

/// A no-hover zone centered in the service area.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RestrictedZone {
    pub center_x: f64,
    pub center_y: f64,
    /// Semi-major axis along y, meters.
    pub semi_major_a: f64,
    /// Semi-minor axis along x, meters; also the band half-width.
    pub semi_minor_b: f64,
    pub mode: ZoneMode,
}

impl RestrictedZone {
    pub fn new(
        center_x: f64,
        center_y: f64,
        semi_major_a: f64,
        semi_minor_b: f64,
        mode: ZoneMode,
    ) -> Self {
        debug_assert!(semi_major_a > 0.0 && semi_minor_b > 0.0);
        Self {
            center_x,
            center_y,
            semi_major_a,
            semi_minor_b,
            mode,
        }
    }

    /// True iff the point lies on or outside the ellipse
    /// `(x - cx)^2 / b^2 + (y - cy)^2 / a^2 >= 1`.
    pub fn outside_ellipse(&self, p: Point3) -> bool {
        let nx = (p.x - self.center_x) / self.semi_minor_b;
        let ny = (p.y - self.center_y) / self.semi_major_a;
        nx * nx + ny * ny >= 1.0
    }

    /// True iff the point lies on or outside the vertical band
    /// `|x - cx| >= b` (the rectangular approximation of the ellipse).
    pub fn outside_band(&self, p: Point3) -> bool {
        (p.x - self.center_x).abs() >= self.semi_minor_b
    }

    /// Zone feasibility under the configured mode.
    pub fn allows(&self, p: Point3) -> bool {
        match self.mode {
            ZoneMode::Ellipse => self.outside_ellipse(p),
            ZoneMode::Band => self.outside_band(p),
        }
    }
}

/// Allowed hover altitudes, inclusive on both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AltitudeBand {
    pub h_min: f64,
    pub h_max: f64,
}

impl AltitudeBand {
    pub fn new(h_min: f64, h_max: f64) -> Self {
        debug_assert!(0.0 < h_min && h_min <= h_max);
        Self { h_min, h_max }
    }

    /// True iff `h_min <= z <= h_max`.
    pub fn allows(&self, p: Point3) -> bool {
        p.z >= self.h_min && p.z <= self.h_max
    }
}

/// The ordered set of candidate hover positions for one region's UAV.
///
/// Ordering is stable: the candidate's index is the digit used by the
/// combination indexing, so two builds of the same scenario agree on which
/// combination index means which set of positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateGrid {
    /// Index of the region this grid belongs to.
    pub region: usize,
    pub points: Vec<Point3>,
    /// For a filtered grid, the index each survivor had in the unfiltered
    /// grid. Identity for freshly built grids.
    pub original_indices: Vec<usize>,
}

impl CandidateGrid {
    pub fn new(region: usize, points: Vec<Point3>) -> Self {
        let original_indices = (0..points.len()).collect();
        Self {
            region,
            points,
            original_indices,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Build the default lattice for a region: an `n_x` x `n_y` horizontal
    /// grid at `n_z` altitudes.
    ///
    /// Horizontal positions sit at interior fractions `i/(n+1)` of the region
    /// side so that candidates never touch the region border. Altitudes are
    /// equally spaced and span `[h_min, h_max]` inclusive; a single level
    /// sits at the band midpoint. Candidate order is altitude-major, then y,
    /// then x.
    pub fn lattice(
        region_idx: usize,
        region: &Region,
        n_x: usize,
        n_y: usize,
        n_z: usize,
        band: &AltitudeBand,
    ) -> Self {
        let width = region.x_max - region.x_min;
        let depth = region.y_max - region.y_min;
        let mut points = Vec::with_capacity(n_x * n_y * n_z);
        for iz in 0..n_z {
            let z = if n_z == 1 {
                0.5 * (band.h_min + band.h_max)
            } else {
                band.h_min + (band.h_max - band.h_min) * iz as f64 / (n_z - 1) as f64
            };
            for iy in 0..n_y {
                let y = region.y_min + depth * (iy + 1) as f64 / (n_y + 1) as f64;
                for ix in 0..n_x {
                    let x = region.x_min + width * (ix + 1) as f64 / (n_x + 1) as f64;
                    points.push(Point3::new(x, y, z));
                }
            }
        }
        Self::new(region_idx, points)
    }
}

/// Errors from geometry operations.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum GeometryError {
    /// Every candidate of a region was removed by the regulatory filters.
    #[error("no candidate location of region {region} satisfies the zone and altitude constraints")]
    EmptyGrid { region: usize },
}

/// Remove candidates that violate the restricted zone or the altitude band.
///
/// Survivors keep their relative order and remember their index in the input
/// grid. Filtering up front is equivalent to forbidding every combination
/// that would use a violating position, and shrinks the combination space.
pub fn filter_candidates(
    grid: &CandidateGrid,
    zone: &RestrictedZone,
    band: &AltitudeBand,
) -> Result<CandidateGrid, GeometryError> {
    let mut points = Vec::new();
    let mut original_indices = Vec::new();
    for (i, &p) in grid.points.iter().enumerate() {
        if zone.allows(p) && band.allows(p) {
            points.push(p);
            original_indices.push(grid.original_indices[i]);
        }
    }
    if points.is_empty() {
        return Err(GeometryError::EmptyGrid {
            region: grid.region,
        });
    }
    Ok(CandidateGrid {
        region: grid.region,
        points,
        original_indices,
    })
}

/// Draw `count` users uniformly inside the region rectangle at ground level.
///
/// The generator is ChaCha8 seeded from `seed`; for each user an x fraction
/// is drawn before the y fraction, so the output is bitwise reproducible for
/// a fixed seed.
pub fn place_users(region: &Region, count: usize, seed: u64) -> Vec<Point3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let width = region.x_max - region.x_min;
    let depth = region.y_max - region.y_min;
    (0..count)
        .map(|_| {
            let ux: f64 = rand::Rng::random(&mut rng);
            let uy: f64 = rand::Rng::random(&mut rng);
            Point3::new(region.x_min + ux * width, region.y_min + uy * depth, 0.0)
        })
        .collect()
}

/// Stateless seed mixer (splitmix64) used to derive independent sub-seeds
/// for user placement and channel gains from one master seed.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a sub-seed for `(domain, index)` from the master seed.
pub fn derive_seed(master: u64, domain: u64, index: u64) -> u64 {
    splitmix64(master.wrapping_add(splitmix64(domain.wrapping_add(splitmix64(index)))))
}
