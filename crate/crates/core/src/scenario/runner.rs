//! Solve and sweep workflows plus artifact persistence.
//!
//! A solve runs the whole pipeline on one scenario: precompute link-gain
//! tables, assemble the SINR matrix, scan the exhaustive oracle, solve by
//! the requested method, post-check, and collect records. A sweep reuses
//! one scenario's channels across a list of thresholds.
//!
//! Artifacts are plain files in one output directory. Each file carries the
//! seed and the config hash. Every artifact except `timing.json` is
//! byte-deterministic for a fixed (config, seed); wall-clock timings are
//! kept in their own file so the deterministic set stays comparable.
//!
//! | file              | content                                         |
//! |-------------------|-------------------------------------------------|
//! | `scenario.json`   | snapshot of the built scenario (`gen`)          |
//! | `users.csv`       | user_index,region,x,y,z (`gen`)                 |
//! | `candidates.csv`  | filtered grids (`gen`)                          |
//! | `run.json`        | full solve record                               |
//! | `placement.csv`   | uav_index,x,y,z (+ json mirror)                 |
//! | `sinr.csv`        | user_index,sinr_db (+ json mirror)              |
//! | `sweep_run.json`  | full sweep record                               |
//! | `sweep.csv`       | threshold_db,uav_index,x,y,z,feasible_count     |
//! | `timing.json`     | stage wall-clock times (non-deterministic)      |

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::geometry::Point3;
use crate::radio::{linear_to_db, precompute_gain_tables, SinrAssembler, SinrMatrix};
use crate::selection::{
    brute_force_feasible, max_min_combination, solve_with_lp, solve_with_oracle, PlacementResult,
    SolveMethod,
};

use super::{Scenario, ScenarioConfig, ScenarioError, ScenarioSnapshot, RNG_ALGORITHM};

/// One user's position and serving region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserRecord {
    pub user_index: usize,
    pub region: usize,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

pub(super) fn user_records(scenario: &Scenario) -> Vec<UserRecord> {
    scenario
        .users
        .iter()
        .enumerate()
        .map(|(i, p)| UserRecord {
            user_index: i,
            region: scenario.assignment.region_of(i),
            x: p.x,
            y: p.y,
            z: p.z,
        })
        .collect()
}

/// Nonzero selection weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportEntry {
    pub index: usize,
    pub weight: f64,
}

/// Serializable form of a [`PlacementResult`]. Selection weights are stored
/// as their nonzero support; entries not listed are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementRecord {
    pub method: SolveMethod,
    pub combination: usize,
    pub feasible: bool,
    pub relaxation_gap: bool,
    pub min_sinr_db: f64,
    pub positions: Vec<Point3>,
    pub sinrs_db: Vec<f64>,
    pub selection_support: Option<Vec<SupportEntry>>,
}

impl From<&PlacementResult> for PlacementRecord {
    fn from(r: &PlacementResult) -> Self {
        Self {
            method: r.method,
            combination: r.combination,
            feasible: r.feasible,
            relaxation_gap: r.relaxation_gap,
            min_sinr_db: r.min_sinr_db,
            positions: r.positions.clone(),
            sinrs_db: r.sinrs_db.clone(),
            selection_support: r.selection.as_ref().map(|e| {
                e.support()
                    .into_iter()
                    .map(|(index, weight)| SupportEntry { index, weight })
                    .collect()
            }),
        }
    }
}

/// Full record of one solve, minus wall-clock timing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunArtifacts {
    pub seed: u64,
    pub rng_algorithm: String,
    pub config_hash: String,
    pub gamma_th_db: f64,
    pub combination_count: usize,
    pub feasible_count: usize,
    /// Best worst-user SINR over all combinations, dB.
    pub oracle_best_min_sinr_db: f64,
    pub placement: PlacementRecord,
    pub users: Vec<UserRecord>,
    pub config: ScenarioConfig,
}

/// Wall-clock stage times for one run, milliseconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub precompute_ms: f64,
    pub sinr_build_ms: f64,
    pub oracle_ms: f64,
    pub solve_ms: f64,
    pub total_ms: f64,
}

/// A solve outcome: deterministic artifacts plus timing.
#[derive(Debug, Clone)]
pub struct SolveRun {
    pub artifacts: RunArtifacts,
    pub timing: StageTimings,
}

/// One threshold's outcome inside a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub threshold_db: f64,
    pub feasible: bool,
    pub relaxation_gap: bool,
    pub feasible_count: usize,
    pub min_sinr_db: f64,
    pub positions: Vec<Point3>,
}

/// Full record of one sweep, minus wall-clock timing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepArtifacts {
    pub seed: u64,
    pub rng_algorithm: String,
    pub config_hash: String,
    pub combination_count: usize,
    pub rows: Vec<SweepRow>,
    pub config: ScenarioConfig,
}

/// A sweep outcome: deterministic artifacts plus timing.
#[derive(Debug, Clone)]
pub struct SweepRun {
    pub artifacts: SweepArtifacts,
    pub timing: StageTimings,
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Run the full pipeline on one scenario with the configured threshold.
pub fn run_solve(config: &ScenarioConfig, method: SolveMethod) -> Result<SolveRun, ScenarioError> {
    let total = Instant::now();
    let scenario = Scenario::build(config)?;
    let gamma = scenario.gamma_th_linear();

    let t = Instant::now();
    let tables = precompute_gain_tables(&scenario.link_env())?;
    let precompute_ms = ms(t);

    let assembler = SinrAssembler::new(
        &tables,
        &scenario.assignment,
        &scenario.powers,
        scenario.noise.mw,
    );
    let t = Instant::now();
    let s = assembler.build_matrix(&scenario.space);
    let sinr_build_ms = ms(t);

    let t = Instant::now();
    let feasible_set = brute_force_feasible(&s, gamma);
    let (_, best_min) = max_min_combination(&s);
    let oracle_ms = ms(t);

    let t = Instant::now();
    let placement = solve_scenario(&scenario, &s, gamma, method)?;
    let solve_ms = ms(t);

    Ok(SolveRun {
        artifacts: RunArtifacts {
            seed: scenario.config.seed,
            rng_algorithm: RNG_ALGORITHM.to_string(),
            config_hash: scenario.config_hash.clone(),
            gamma_th_db: scenario.config.gamma_th_db,
            combination_count: scenario.space.len(),
            feasible_count: feasible_set.len(),
            oracle_best_min_sinr_db: linear_to_db(best_min),
            placement: PlacementRecord::from(&placement),
            users: user_records(&scenario),
            config: scenario.config.clone(),
        },
        timing: StageTimings {
            precompute_ms,
            sinr_build_ms,
            oracle_ms,
            solve_ms,
            total_ms: ms(total),
        },
    })
}

/// Solve an already-assembled matrix by the requested method.
pub fn solve_scenario(
    scenario: &Scenario,
    s: &SinrMatrix,
    gamma_linear: f64,
    method: SolveMethod,
) -> Result<PlacementResult, ScenarioError> {
    let result = match method {
        SolveMethod::Lp => solve_with_lp(
            s,
            gamma_linear,
            &scenario.space,
            &scenario.grids,
            &scenario.zone,
            &scenario.band,
        )?,
        SolveMethod::Brute => solve_with_oracle(
            s,
            gamma_linear,
            &scenario.space,
            &scenario.grids,
            &scenario.zone,
            &scenario.band,
        )?,
    };
    Ok(result)
}

/// Run one solve per threshold over a single scenario; channels and the
/// SINR matrix are computed once.
pub fn run_sweep(config: &ScenarioConfig, thresholds_db: &[f64]) -> Result<SweepRun, ScenarioError> {
    if thresholds_db.is_empty() {
        return Err(ScenarioError::Artifact(
            "sweep requires at least one threshold".to_string(),
        ));
    }
    let total = Instant::now();
    let scenario = Scenario::build(config)?;

    let t = Instant::now();
    let tables = precompute_gain_tables(&scenario.link_env())?;
    let precompute_ms = ms(t);

    let assembler = SinrAssembler::new(
        &tables,
        &scenario.assignment,
        &scenario.powers,
        scenario.noise.mw,
    );
    let t = Instant::now();
    let s = assembler.build_matrix(&scenario.space);
    let sinr_build_ms = ms(t);

    let mut oracle_ms = 0.0;
    let mut solve_ms = 0.0;
    let mut rows = Vec::with_capacity(thresholds_db.len());
    for &threshold_db in thresholds_db {
        let gamma = crate::radio::db_to_linear(threshold_db);
        let t = Instant::now();
        let feasible_count = brute_force_feasible(&s, gamma).len();
        oracle_ms += ms(t);
        let t = Instant::now();
        let placement = solve_scenario(&scenario, &s, gamma, SolveMethod::Lp)?;
        solve_ms += ms(t);
        rows.push(SweepRow {
            threshold_db,
            feasible: placement.feasible,
            relaxation_gap: placement.relaxation_gap,
            feasible_count,
            min_sinr_db: placement.min_sinr_db,
            positions: placement.positions,
        });
    }

    Ok(SweepRun {
        artifacts: SweepArtifacts {
            seed: scenario.config.seed,
            rng_algorithm: RNG_ALGORITHM.to_string(),
            config_hash: scenario.config_hash.clone(),
            combination_count: scenario.space.len(),
            rows,
            config: scenario.config.clone(),
        },
        timing: StageTimings {
            precompute_ms,
            sinr_build_ms,
            oracle_ms,
            solve_ms,
            total_ms: ms(total),
        },
    })
}

/// Evenly spaced threshold list from `from_db` to `to_db` inclusive.
pub fn threshold_ladder(from_db: f64, to_db: f64, steps: usize) -> Vec<f64> {
    if steps <= 1 {
        return vec![from_db];
    }
    (0..steps)
        .map(|i| from_db + (to_db - from_db) * i as f64 / (steps - 1) as f64)
        .collect()
}

// ── Persistence ─────────────────────────────────────────────────────────

/// Export format for tabular views.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Json,
}

/// What to export from a persisted run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportKind {
    Placement,
    Sinr,
    Sweep,
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), ScenarioError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut f = fs::File::create(path)?;
    f.write_all(contents)?;
    Ok(())
}

fn to_json_pretty<T: Serialize>(value: &T) -> Result<String, ScenarioError> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| ScenarioError::Artifact(format!("json encoding failed: {e}")))
}

/// Persist the `gen` artifacts; returns the files written.
pub fn persist_scenario(dir: &Path, scenario: &Scenario) -> Result<Vec<PathBuf>, ScenarioError> {
    let snapshot = ScenarioSnapshot::from(scenario);
    let mut written = Vec::new();

    let path = dir.join("scenario.json");
    write_file(&path, to_json_pretty(&snapshot)?.as_bytes())?;
    written.push(path);

    let mut csv = String::new();
    csv.push_str("# users, one row per ground user\n");
    csv.push_str(&format!("# seed = {}\n", scenario.config.seed));
    csv.push_str(&format!("# config_hash = {}\n", scenario.config_hash));
    csv.push_str("user_index,region,x,y,z\n");
    for u in user_records(scenario) {
        csv.push_str(&format!("{},{},{},{},{}\n", u.user_index, u.region, u.x, u.y, u.z));
    }
    let path = dir.join("users.csv");
    write_file(&path, csv.as_bytes())?;
    written.push(path);

    let mut csv = String::new();
    csv.push_str("# candidate grids after zone and altitude filtering\n");
    csv.push_str(&format!("# seed = {}\n", scenario.config.seed));
    csv.push_str(&format!("# config_hash = {}\n", scenario.config_hash));
    csv.push_str("region,candidate_index,original_index,x,y,z\n");
    for grid in &scenario.grids {
        for (i, p) in grid.points.iter().enumerate() {
            csv.push_str(&format!(
                "{},{},{},{},{},{}\n",
                grid.region, i, grid.original_indices[i], p.x, p.y, p.z
            ));
        }
    }
    let path = dir.join("candidates.csv");
    write_file(&path, csv.as_bytes())?;
    written.push(path);

    Ok(written)
}

/// Persist a solve: full record, timing, and both export views.
pub fn persist_solve(dir: &Path, run: &SolveRun) -> Result<Vec<PathBuf>, ScenarioError> {
    let mut written = Vec::new();
    let path = dir.join("run.json");
    write_file(&path, to_json_pretty(&run.artifacts)?.as_bytes())?;
    written.push(path);
    written.push(write_timing(dir, &run.timing, &run.artifacts.config_hash, run.artifacts.seed)?);
    for format in [ExportFormat::Csv, ExportFormat::Json] {
        written.push(export_placement(dir, &run.artifacts, format)?);
        written.push(export_sinr(dir, &run.artifacts, format)?);
    }
    Ok(written)
}

/// Persist a sweep: full record, timing, and the export views.
pub fn persist_sweep(dir: &Path, run: &SweepRun) -> Result<Vec<PathBuf>, ScenarioError> {
    let mut written = Vec::new();
    let path = dir.join("sweep_run.json");
    write_file(&path, to_json_pretty(&run.artifacts)?.as_bytes())?;
    written.push(path);
    written.push(write_timing(dir, &run.timing, &run.artifacts.config_hash, run.artifacts.seed)?);
    for format in [ExportFormat::Csv, ExportFormat::Json] {
        written.push(export_sweep(dir, &run.artifacts, format)?);
    }
    Ok(written)
}

fn write_timing(
    dir: &Path,
    timing: &StageTimings,
    config_hash: &str,
    seed: u64,
) -> Result<PathBuf, ScenarioError> {
    #[derive(Serialize)]
    struct TimingFile<'a> {
        seed: u64,
        config_hash: &'a str,
        #[serde(flatten)]
        timing: &'a StageTimings,
    }
    let path = dir.join("timing.json");
    write_file(
        &path,
        to_json_pretty(&TimingFile {
            seed,
            config_hash,
            timing,
        })?
        .as_bytes(),
    )?;
    Ok(path)
}

#[derive(Serialize)]
struct PlacementRow {
    uav_index: usize,
    x: f64,
    y: f64,
    z: f64,
}

#[derive(Serialize)]
struct PlacementExport<'a> {
    seed: u64,
    config_hash: &'a str,
    gamma_th_db: f64,
    method: SolveMethod,
    feasible: bool,
    relaxation_gap: bool,
    rows: Vec<PlacementRow>,
}

/// Write the placement view: one row per UAV.
pub fn export_placement(
    dir: &Path,
    run: &RunArtifacts,
    format: ExportFormat,
) -> Result<PathBuf, ScenarioError> {
    let rows: Vec<PlacementRow> = run
        .placement
        .positions
        .iter()
        .enumerate()
        .map(|(i, p)| PlacementRow {
            uav_index: i,
            x: p.x,
            y: p.y,
            z: p.z,
        })
        .collect();
    match format {
        ExportFormat::Csv => {
            let mut csv = String::new();
            csv.push_str("# placement, one row per uav\n");
            csv.push_str(&format!("# seed = {}\n", run.seed));
            csv.push_str(&format!("# config_hash = {}\n", run.config_hash));
            csv.push_str(&format!("# gamma_th_db = {}\n", run.gamma_th_db));
            csv.push_str(&format!("# method = {}\n", run.placement.method));
            csv.push_str(&format!("# feasible = {}\n", run.placement.feasible));
            csv.push_str(&format!("# relaxation_gap = {}\n", run.placement.relaxation_gap));
            csv.push_str("uav_index,x,y,z\n");
            for r in &rows {
                csv.push_str(&format!("{},{},{},{}\n", r.uav_index, r.x, r.y, r.z));
            }
            let path = dir.join("placement.csv");
            write_file(&path, csv.as_bytes())?;
            Ok(path)
        }
        ExportFormat::Json => {
            let path = dir.join("placement.json");
            write_file(
                &path,
                to_json_pretty(&PlacementExport {
                    seed: run.seed,
                    config_hash: &run.config_hash,
                    gamma_th_db: run.gamma_th_db,
                    method: run.placement.method,
                    feasible: run.placement.feasible,
                    relaxation_gap: run.placement.relaxation_gap,
                    rows,
                })?
                .as_bytes(),
            )?;
            Ok(path)
        }
    }
}

#[derive(Serialize)]
struct SinrRow {
    user_index: usize,
    sinr_db: f64,
}

#[derive(Serialize)]
struct SinrExport<'a> {
    seed: u64,
    config_hash: &'a str,
    gamma_th_db: f64,
    rows: Vec<SinrRow>,
}

/// Write the per-user SINR view of the chosen placement.
pub fn export_sinr(
    dir: &Path,
    run: &RunArtifacts,
    format: ExportFormat,
) -> Result<PathBuf, ScenarioError> {
    let rows: Vec<SinrRow> = run
        .placement
        .sinrs_db
        .iter()
        .enumerate()
        .map(|(user_index, &sinr_db)| SinrRow { user_index, sinr_db })
        .collect();
    match format {
        ExportFormat::Csv => {
            let mut csv = String::new();
            csv.push_str("# per-user sinr at the chosen placement\n");
            csv.push_str(&format!("# seed = {}\n", run.seed));
            csv.push_str(&format!("# config_hash = {}\n", run.config_hash));
            csv.push_str(&format!("# gamma_th_db = {}\n", run.gamma_th_db));
            csv.push_str("user_index,sinr_db\n");
            for r in &rows {
                csv.push_str(&format!("{},{}\n", r.user_index, r.sinr_db));
            }
            let path = dir.join("sinr.csv");
            write_file(&path, csv.as_bytes())?;
            Ok(path)
        }
        ExportFormat::Json => {
            let path = dir.join("sinr.json");
            write_file(
                &path,
                to_json_pretty(&SinrExport {
                    seed: run.seed,
                    config_hash: &run.config_hash,
                    gamma_th_db: run.gamma_th_db,
                    rows,
                })?
                .as_bytes(),
            )?;
            Ok(path)
        }
    }
}

#[derive(Serialize)]
struct SweepExportRow {
    threshold_db: f64,
    uav_index: usize,
    x: f64,
    y: f64,
    z: f64,
    feasible_count: usize,
}

#[derive(Serialize)]
struct SweepExport<'a> {
    seed: u64,
    config_hash: &'a str,
    rows: Vec<SweepExportRow>,
}

/// Write the sweep view: one row per (threshold, UAV).
pub fn export_sweep(
    dir: &Path,
    sweep: &SweepArtifacts,
    format: ExportFormat,
) -> Result<PathBuf, ScenarioError> {
    let rows: Vec<SweepExportRow> = sweep
        .rows
        .iter()
        .flat_map(|row| {
            row.positions.iter().enumerate().map(|(i, p)| SweepExportRow {
                threshold_db: row.threshold_db,
                uav_index: i,
                x: p.x,
                y: p.y,
                z: p.z,
                feasible_count: row.feasible_count,
            })
        })
        .collect();
    match format {
        ExportFormat::Csv => {
            let mut csv = String::new();
            csv.push_str("# threshold sweep, one row per (threshold, uav)\n");
            csv.push_str(&format!("# seed = {}\n", sweep.seed));
            csv.push_str(&format!("# config_hash = {}\n", sweep.config_hash));
            csv.push_str("threshold_db,uav_index,x,y,z,feasible_count\n");
            for r in &rows {
                csv.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    r.threshold_db, r.uav_index, r.x, r.y, r.z, r.feasible_count
                ));
            }
            let path = dir.join("sweep.csv");
            write_file(&path, csv.as_bytes())?;
            Ok(path)
        }
        ExportFormat::Json => {
            let path = dir.join("sweep.json");
            write_file(
                &path,
                to_json_pretty(&SweepExport {
                    seed: sweep.seed,
                    config_hash: &sweep.config_hash,
                    rows,
                })?
                .as_bytes(),
            )?;
            Ok(path)
        }
    }
}

/// Load a persisted solve record.
pub fn load_run(dir: &Path) -> Result<RunArtifacts, ScenarioError> {
    let path = dir.join("run.json");
    let text = fs::read_to_string(&path)?;
    serde_json::from_str(&text)
        .map_err(|e| ScenarioError::Artifact(format!("{}: {e}", path.display())))
}

/// Load a persisted sweep record.
pub fn load_sweep(dir: &Path) -> Result<SweepArtifacts, ScenarioError> {
    let path = dir.join("sweep_run.json");
    let text = fs::read_to_string(&path)?;
    serde_json::from_str(&text)
        .map_err(|e| ScenarioError::Artifact(format!("{}: {e}", path.display())))
}
