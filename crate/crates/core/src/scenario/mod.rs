//! Scenario construction and the experiment workflow.
//!
//! [`config::ScenarioConfig`] describes an experiment; [`Scenario::build`]
//! turns it into concrete geometry (regions, seeded users, filtered
//! candidate grids), link gains, and powers. [`runner`] drives the solve and
//! sweep workflows and persists self-describing artifacts.

pub mod config;
pub mod runner;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{ArrayConfig, LinkParams};
use crate::geometry::{
    derive_seed, filter_candidates, place_users, AltitudeBand, CandidateGrid, GeometryError,
    Point3, Region, RestrictedZone,
};
use crate::radio::{db_to_linear, LinkEnv, LinkGains, NoiseFloor, RadioError, UserAssignment};
use crate::selection::{CombinationSpace, SelectionError};

pub use config::{ConfigError, GainMode, PowerMode, ScenarioConfig};
pub use runner::{
    run_solve, run_sweep, PlacementRecord, RunArtifacts, SolveRun, StageTimings, SweepArtifacts,
    SweepRow, SweepRun, UserRecord,
};

/// Seed domain tag for user placement (see [`derive_seed`]).
pub const USER_SEED_DOMAIN: u64 = 0x5553_4552; // "USER"

/// Name of the PRNG recorded in every artifact; user positions and channel
/// gains are reproducible given this algorithm, the seed, and the derivation
/// scheme in [`derive_seed`].
pub const RNG_ALGORITHM: &str = "chacha8";

/// Any failure while building or running a scenario.
#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Radio(#[from] RadioError),
    #[error(transparent)]
    Selection(#[from] SelectionError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("artifact error: {0}")]
    Artifact(String),
}

/// A fully materialized experiment: geometry, users, grids, gains, powers.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub config_hash: String,
    pub regions: Vec<Region>,
    pub zone: RestrictedZone,
    pub band: AltitudeBand,
    /// Global user list, region-major: region 0's users come first.
    pub users: Vec<Point3>,
    pub assignment: UserAssignment,
    /// Candidate grids before regulatory filtering.
    pub full_grids: Vec<CandidateGrid>,
    /// Grids the pipeline actually uses.
    pub grids: Vec<CandidateGrid>,
    pub space: CombinationSpace,
    pub gains: LinkGains,
    /// Per-region per-user transmit power, milliwatts.
    pub powers: Vec<f64>,
    pub noise: NoiseFloor,
    pub array: ArrayConfig,
    pub link: LinkParams,
}

impl Scenario {
    /// Materialize a validated config into a runnable scenario.
    pub fn build(config: &ScenarioConfig) -> Result<Self, ScenarioError> {
        config.validate()?;
        let cfg = config.clone();
        let d = cfg.num_uavs;

        let regions: Vec<Region> = (0..d).map(|j| cfg.region_rect(j)).collect();
        let center = cfg.area_side_m / 2.0;
        let zone = RestrictedZone::new(center, center, cfg.zone_a_m, cfg.zone_b_m, cfg.zone_mode);
        let band = AltitudeBand::new(cfg.h_min_m, cfg.h_max_m);

        let mut full_grids = Vec::with_capacity(d);
        for (j, region) in regions.iter().enumerate() {
            let grid = match cfg.explicit_candidates.get(&j) {
                Some(points) => CandidateGrid::new(j, points.clone()),
                None => CandidateGrid::lattice(j, region, cfg.grid_nx, cfg.grid_ny, cfg.grid_nz, &band),
            };
            full_grids.push(grid);
        }
        let grids = full_grids
            .iter()
            .map(|g| filter_candidates(g, &zone, &band))
            .collect::<Result<Vec<_>, _>>()?;

        let mut users = Vec::with_capacity(d * cfg.users_per_region);
        let mut region_users = Vec::with_capacity(d);
        for (j, region) in regions.iter().enumerate() {
            let seed = derive_seed(cfg.seed, USER_SEED_DOMAIN, j as u64);
            let placed = place_users(region, cfg.users_per_region, seed);
            let start = users.len();
            users.extend(placed);
            region_users.push((start..users.len()).collect());
        }
        let assignment = UserAssignment::new(region_users);

        let counts: Vec<usize> = grids.iter().map(CandidateGrid::len).collect();
        let space = CombinationSpace::new(&counts)?;
        let gains = match cfg.gain_mode {
            GainMode::Deterministic => LinkGains::deterministic(&counts, users.len()),
            GainMode::Gaussian => LinkGains::gaussian(&counts, users.len(), cfg.seed),
        };

        let per_user_mw = match cfg.power_mode {
            PowerMode::PerUav => {
                crate::radio::equal_power(cfg.uav_power_mw, cfg.users_per_region).per_user_mw
            }
            PowerMode::PerUser => cfg.uav_power_mw,
        };
        let powers = vec![per_user_mw; d];

        Ok(Self {
            config_hash: cfg.hash(),
            regions,
            zone,
            band,
            users,
            assignment,
            full_grids,
            grids,
            space,
            gains,
            powers,
            noise: NoiseFloor::from_dbm(cfg.n0_dbm),
            array: ArrayConfig::new(cfg.num_antennas, cfg.spacing_ratio),
            link: LinkParams::new(cfg.path_loss_exponent),
            config: cfg,
        })
    }

    /// Borrow the pieces needed to evaluate channels.
    pub fn link_env(&self) -> LinkEnv<'_> {
        LinkEnv {
            grids: &self.grids,
            users: &self.users,
            assignment: &self.assignment,
            gains: &self.gains,
            link: self.link,
            array: self.array,
        }
    }

    /// The configured SINR threshold in linear scale.
    pub fn gamma_th_linear(&self) -> f64 {
        db_to_linear(self.config.gamma_th_db)
    }
}

/// Serializable snapshot of a built scenario (the `gen` artifact).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioSnapshot {
    pub seed: u64,
    pub rng_algorithm: String,
    pub config_hash: String,
    pub combination_count: usize,
    pub regions: Vec<Region>,
    pub zone: RestrictedZone,
    pub altitude_band: AltitudeBand,
    pub users: Vec<UserRecord>,
    pub filtered_grids: Vec<CandidateGrid>,
    pub config: ScenarioConfig,
}

impl From<&Scenario> for ScenarioSnapshot {
    fn from(s: &Scenario) -> Self {
        Self {
            seed: s.config.seed,
            rng_algorithm: RNG_ALGORITHM.to_string(),
            config_hash: s.config_hash.clone(),
            combination_count: s.space.len(),
            regions: s.regions.clone(),
            zone: s.zone,
            altitude_band: s.band,
            users: runner::user_records(s),
            filtered_grids: s.grids.clone(),
            config: s.config.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_scenario_builds_reference_shape() {
        let scenario = Scenario::build(&ScenarioConfig::default()).unwrap();
        assert_eq!(scenario.regions.len(), 4);
        assert_eq!(scenario.users.len(), 20);
        assert_eq!(scenario.space.len(), 160_000);
        // The default lattice survives the band filter untouched.
        for (full, filtered) in scenario.full_grids.iter().zip(&scenario.grids) {
            assert_eq!(full, filtered);
            assert_eq!(filtered.len(), 20);
        }
        assert_eq!(scenario.powers, vec![0.2; 4]);
        assert!((scenario.noise.mw - 10f64.powf(-3.5)).abs() < 1e-18);
    }

    #[test]
    fn users_are_seeded_per_region_and_region_major() {
        let a = Scenario::build(&ScenarioConfig::default()).unwrap();
        let b = Scenario::build(&ScenarioConfig::default()).unwrap();
        assert_eq!(a.users, b.users);
        for (j, region) in a.regions.iter().enumerate() {
            for &u in a.assignment.users_of(j) {
                assert!(region.contains_xy(a.users[u]));
                assert_eq!(a.users[u].z, 0.0);
            }
        }
        let mut other = ScenarioConfig::default();
        other.seed = 2;
        let c = Scenario::build(&other).unwrap();
        assert_ne!(a.users, c.users);
    }

    #[test]
    fn per_user_power_mode_skips_the_split() {
        let mut cfg = ScenarioConfig::default();
        cfg.power_mode = PowerMode::PerUser;
        let scenario = Scenario::build(&cfg).unwrap();
        assert_eq!(scenario.powers, vec![1.0; 4]);
    }

    #[test]
    fn over_constrained_grid_reports_empty_region() {
        let mut cfg = ScenarioConfig::default();
        // Altitude band the lattice cannot reach is applied after the grid
        // override: every explicit candidate sits below h_min.
        cfg.explicit_candidates
            .insert(0, vec![Point3::new(19.0, 19.0, 10.0)]);
        let err = Scenario::build(&cfg).unwrap_err();
        assert!(matches!(
            err,
            ScenarioError::Geometry(GeometryError::EmptyGrid { region: 0 })
        ));
    }

    #[test]
    fn zone_filtering_shrinks_offending_grids() {
        let mut cfg = ScenarioConfig::default();
        // A candidate pinned inside the central band is filtered out.
        cfg.explicit_candidates.insert(
            1,
            vec![
                Point3::new(60.0, 19.0, 25.0),
                Point3::new(95.0, 19.0, 25.0),
            ],
        );
        let scenario = Scenario::build(&cfg).unwrap();
        assert_eq!(scenario.full_grids[1].len(), 2);
        assert_eq!(scenario.grids[1].len(), 1);
        assert_eq!(scenario.grids[1].original_indices, vec![1]);
        assert_eq!(scenario.space.len(), 20 * 1 * 20 * 20);
    }
}
