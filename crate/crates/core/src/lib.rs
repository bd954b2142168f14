//! Simultaneous placement of multiple UAV base stations over a gridded
//! service area, under per-user SINR guarantees and hover regulations.
//!
//! The engine models a mmWave MISO downlink: every region of the service
//! area gets one multi-antenna aerial station chosen from a predefined
//! candidate grid, serving that region's ground users with matched-filter
//! beams and an equal power split. Candidate grids are pre-filtered against
//! a restricted operating zone and an altitude band; per-link gains are
//! precomputed into tables; the combination-by-user SINR matrix is assembled
//! from the tables; and the placement is selected either by exhaustive
//! enumeration or by a relaxed selection program whose rounded answer is
//! re-checked against the exhaustive oracle.
//!
//! Modules follow that pipeline:
//!
//! - [`geometry`]: regions, candidate grids, regulatory predicates, user
//!   placement.
//! - [`channel`]: steering vectors and line-of-sight channel vectors.
//! - [`radio`]: beamforming, powers, gain tables, SINR matrix assembly.
//! - [`selection`]: combination indexing, exhaustive oracle, relaxed
//!   selection program, rounding and post-check.
//! - [`scenario`]: configuration, seeded scenario construction, solve/sweep
//!   runners, and artifact export; the `skyplace` binary drives it.

pub mod channel;
pub mod geometry;
pub mod radio;
pub mod scenario;
pub mod selection;

pub use channel::{ArrayConfig, LinkParams};
pub use geometry::{AltitudeBand, CandidateGrid, Point3, Region, RestrictedZone, ZoneMode};
pub use radio::{GainTables, LinkGains, NoiseFloor, SinrAssembler, SinrMatrix, UserAssignment};
pub use scenario::{RunArtifacts, Scenario, ScenarioConfig, SweepArtifacts};
pub use selection::{CombinationSpace, PlacementResult, SelectionVector, SolveMethod};
