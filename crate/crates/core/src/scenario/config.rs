//! Flat key-value scenario configuration.
//!
//! The on-disk format is one `key = value` pair per line with `#` comments;
//! keys carry units (`h_min_m`, `n0_dbm`, `gamma_th_db`). Every key is
//! optional and defaults to the reference scenario: a 114 m square split
//! into 2 x 2 regions of 57 m, 5 users and 20 candidate positions (2 x 2 x 5
//! lattice) per region, 6 antennas, path-loss exponent 2, band-mode
//! restricted zone of half-width 11 m, altitudes 22-36 m, 1 mW per station,
//! -35 dBm noise. Unknown keys are errors, not warnings.
//!
//! Candidate grids may be overridden per region with
//! `candidates_region_<j> = x,y,z; x,y,z; ...`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::geometry::{Point3, Region, ZoneMode};

/// How the per-station transmit budget is interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerMode {
    /// `uav_power_mw` is the station budget, split equally over its users.
    PerUav,
    /// `uav_power_mw` is spent per user.
    PerUser,
}

/// Channel gain model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainMode {
    /// Every link gain is 1; fully reproducible without a gain seed.
    Deterministic,
    /// Unit-variance circularly symmetric Gaussian gains, seeded.
    Gaussian,
}

/// Complete description of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub area_side_m: f64,
    pub region_rows: usize,
    pub region_cols: usize,
    pub users_per_region: usize,
    pub num_uavs: usize,
    pub num_antennas: usize,
    pub path_loss_exponent: f64,
    pub spacing_ratio: f64,
    pub grid_nx: usize,
    pub grid_ny: usize,
    pub grid_nz: usize,
    /// Explicit per-region candidate lists; regions not listed use the
    /// `grid_nx` x `grid_ny` x `grid_nz` lattice.
    pub explicit_candidates: BTreeMap<usize, Vec<Point3>>,
    pub h_min_m: f64,
    pub h_max_m: f64,
    pub zone_mode: ZoneMode,
    pub zone_a_m: f64,
    pub zone_b_m: f64,
    pub uav_power_mw: f64,
    pub power_mode: PowerMode,
    pub n0_dbm: f64,
    pub gamma_th_db: f64,
    pub gain_mode: GainMode,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            area_side_m: 114.0,
            region_rows: 2,
            region_cols: 2,
            users_per_region: 5,
            num_uavs: 4,
            num_antennas: 6,
            path_loss_exponent: 2.0,
            spacing_ratio: 0.5,
            grid_nx: 2,
            grid_ny: 2,
            grid_nz: 5,
            explicit_candidates: BTreeMap::new(),
            h_min_m: 22.0,
            h_max_m: 36.0,
            zone_mode: ZoneMode::Band,
            zone_a_m: 40.0,
            zone_b_m: 11.0,
            uav_power_mw: 1.0,
            power_mode: PowerMode::PerUav,
            n0_dbm: -35.0,
            gamma_th_db: -6.0,
            gain_mode: GainMode::Deterministic,
            seed: 1,
        }
    }
}

/// Configuration loading and validation errors.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("config line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("config field `{field}`: {message}")]
    Validation { field: String, message: String },
}

fn invalid(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Validation {
        field: field.to_string(),
        message: message.into(),
    }
}

impl ScenarioConfig {
    /// Load and validate a config file; omitted keys keep their defaults.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Parse config text; omitted keys keep their defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let mut seen = Vec::new();
        let mut seed_explicit = false;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Parse {
                line: line_no,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            let key = key.trim();
            let value = value.trim();
            if seen.contains(&key.to_string()) {
                return Err(ConfigError::Parse {
                    line: line_no,
                    message: format!("duplicate key `{key}`"),
                });
            }
            seen.push(key.to_string());
            cfg.apply(key, value).map_err(|message| ConfigError::Parse {
                line: line_no,
                message,
            })?;
            if key == "seed" {
                seed_explicit = true;
            }
        }
        if cfg.gain_mode == GainMode::Gaussian && !seed_explicit {
            return Err(invalid("seed", "an explicit seed is required in gaussian gain mode"));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Set one field by its config-file key, e.g. `("gamma_th_db", "-6.5")`.
    /// Cross-field consistency is checked by [`validate`](Self::validate),
    /// not here.
    pub fn set_key(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        self.apply(key, value).map_err(|message| ConfigError::Validation {
            field: key.to_string(),
            message,
        })
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<(), String> {
        let parse_err = |what: &str| format!("key `{key}`: cannot parse `{value}` as {what}");
        let f = |v: &str| v.parse::<f64>().map_err(|_| parse_err("a number"));
        let n = |v: &str| v.parse::<usize>().map_err(|_| parse_err("a non-negative integer"));
        match key {
            "area_side_m" => self.area_side_m = f(value)?,
            "region_rows" => self.region_rows = n(value)?,
            "region_cols" => self.region_cols = n(value)?,
            "users_per_region" => self.users_per_region = n(value)?,
            "num_uavs" => self.num_uavs = n(value)?,
            "num_antennas" => self.num_antennas = n(value)?,
            "path_loss_exponent" => self.path_loss_exponent = f(value)?,
            "spacing_ratio" => self.spacing_ratio = f(value)?,
            "grid_nx" => self.grid_nx = n(value)?,
            "grid_ny" => self.grid_ny = n(value)?,
            "grid_nz" => self.grid_nz = n(value)?,
            "h_min_m" => self.h_min_m = f(value)?,
            "h_max_m" => self.h_max_m = f(value)?,
            "zone_mode" => {
                self.zone_mode = match value {
                    "band" => ZoneMode::Band,
                    "ellipse" => ZoneMode::Ellipse,
                    _ => return Err(parse_err("`band` or `ellipse`")),
                }
            }
            "zone_a_m" => self.zone_a_m = f(value)?,
            "zone_b_m" => self.zone_b_m = f(value)?,
            "uav_power_mw" => self.uav_power_mw = f(value)?,
            "power_mode" => {
                self.power_mode = match value {
                    "per_uav" => PowerMode::PerUav,
                    "per_user" => PowerMode::PerUser,
                    _ => return Err(parse_err("`per_uav` or `per_user`")),
                }
            }
            "n0_dbm" => self.n0_dbm = f(value)?,
            "gamma_th_db" => self.gamma_th_db = f(value)?,
            "gain_mode" => {
                self.gain_mode = match value {
                    "deterministic" => GainMode::Deterministic,
                    "gaussian" => GainMode::Gaussian,
                    _ => return Err(parse_err("`deterministic` or `gaussian`")),
                }
            }
            "seed" => self.seed = value.parse::<u64>().map_err(|_| parse_err("a u64 seed"))?,
            _ => {
                if let Some(region) = key.strip_prefix("candidates_region_") {
                    let region: usize = region
                        .parse()
                        .map_err(|_| format!("key `{key}`: bad region index"))?;
                    let mut points = Vec::new();
                    for triple in value.split(';') {
                        let coords: Vec<&str> = triple.split(',').map(str::trim).collect();
                        if coords.len() != 3 {
                            return Err(parse_err("`x,y,z; x,y,z; ...` triples"));
                        }
                        points.push(Point3::new(f(coords[0])?, f(coords[1])?, f(coords[2])?));
                    }
                    self.explicit_candidates.insert(region, points);
                } else {
                    return Err(format!("unknown key `{key}`"));
                }
            }
        }
        Ok(())
    }

    /// Check internal consistency; every error names the offending field.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.area_side_m.is_finite() && self.area_side_m > 0.0) {
            return Err(invalid("area_side_m", "must be a positive length"));
        }
        if self.region_rows == 0 || self.region_cols == 0 {
            return Err(invalid("region_rows", "region grid must be at least 1 x 1"));
        }
        if self.num_uavs != self.region_rows * self.region_cols {
            return Err(invalid(
                "num_uavs",
                format!(
                    "must equal region_rows * region_cols = {}",
                    self.region_rows * self.region_cols
                ),
            ));
        }
        if self.users_per_region == 0 {
            return Err(invalid("users_per_region", "each region needs at least one user"));
        }
        if self.num_antennas == 0 {
            return Err(invalid("num_antennas", "need at least one antenna element"));
        }
        if !(self.path_loss_exponent.is_finite() && self.path_loss_exponent >= 0.0) {
            return Err(invalid("path_loss_exponent", "must be finite and non-negative"));
        }
        if !(self.spacing_ratio.is_finite() && self.spacing_ratio > 0.0) {
            return Err(invalid("spacing_ratio", "must be a positive ratio"));
        }
        if self.grid_nx == 0 || self.grid_ny == 0 || self.grid_nz == 0 {
            return Err(invalid("grid_nx", "lattice dimensions must be at least 1"));
        }
        if !(self.h_min_m.is_finite() && self.h_min_m > 0.0) {
            return Err(invalid("h_min_m", "must be a positive altitude"));
        }
        if !(self.h_max_m.is_finite() && self.h_max_m >= self.h_min_m) {
            return Err(invalid("h_max_m", "must be at least h_min_m"));
        }
        if !(self.zone_a_m.is_finite() && self.zone_a_m > 0.0) {
            return Err(invalid("zone_a_m", "must be a positive semi-axis"));
        }
        if !(self.zone_b_m.is_finite() && self.zone_b_m > 0.0) {
            return Err(invalid("zone_b_m", "must be a positive semi-axis"));
        }
        if !(self.uav_power_mw.is_finite() && self.uav_power_mw >= 0.0) {
            return Err(invalid("uav_power_mw", "must be finite and non-negative"));
        }
        if !self.n0_dbm.is_finite() {
            return Err(invalid("n0_dbm", "must be finite"));
        }
        if !self.gamma_th_db.is_finite() {
            return Err(invalid("gamma_th_db", "must be finite"));
        }
        for (&region, points) in &self.explicit_candidates {
            if region >= self.num_uavs {
                return Err(invalid(
                    "candidates_region",
                    format!("region {region} out of range (num_uavs = {})", self.num_uavs),
                ));
            }
            if points.is_empty() {
                return Err(invalid(
                    "candidates_region",
                    format!("region {region}: empty candidate list"),
                ));
            }
            let rect = self.region_rect(region);
            for p in points {
                if !p.is_finite() {
                    return Err(invalid(
                        "candidates_region",
                        format!("region {region}: non-finite candidate"),
                    ));
                }
                if !rect.contains_xy(*p) {
                    return Err(invalid(
                        "candidates_region",
                        format!(
                            "region {region}: candidate ({}, {}) lies outside its region",
                            p.x, p.y
                        ),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Rectangle of region `j` in the row-major region grid.
    pub fn region_rect(&self, j: usize) -> Region {
        let width = self.area_side_m / self.region_cols as f64;
        let depth = self.area_side_m / self.region_rows as f64;
        let row = j / self.region_cols;
        let col = j % self.region_cols;
        Region::new(
            col as f64 * width,
            (col + 1) as f64 * width,
            row as f64 * depth,
            (row + 1) as f64 * depth,
        )
    }

    /// Canonical flat key-value rendering; logically equal configs render
    /// identically, so the hash below is stable across key order and
    /// comments in the source file.
    pub fn canonical_string(&self) -> String {
        let mut s = String::new();
        let zone_mode = match self.zone_mode {
            ZoneMode::Band => "band",
            ZoneMode::Ellipse => "ellipse",
        };
        let power_mode = match self.power_mode {
            PowerMode::PerUav => "per_uav",
            PowerMode::PerUser => "per_user",
        };
        let gain_mode = match self.gain_mode {
            GainMode::Deterministic => "deterministic",
            GainMode::Gaussian => "gaussian",
        };
        let _ = writeln!(s, "area_side_m = {}", self.area_side_m);
        let _ = writeln!(s, "region_rows = {}", self.region_rows);
        let _ = writeln!(s, "region_cols = {}", self.region_cols);
        let _ = writeln!(s, "users_per_region = {}", self.users_per_region);
        let _ = writeln!(s, "num_uavs = {}", self.num_uavs);
        let _ = writeln!(s, "num_antennas = {}", self.num_antennas);
        let _ = writeln!(s, "path_loss_exponent = {}", self.path_loss_exponent);
        let _ = writeln!(s, "spacing_ratio = {}", self.spacing_ratio);
        let _ = writeln!(s, "grid_nx = {}", self.grid_nx);
        let _ = writeln!(s, "grid_ny = {}", self.grid_ny);
        let _ = writeln!(s, "grid_nz = {}", self.grid_nz);
        for (region, points) in &self.explicit_candidates {
            let triples: Vec<String> = points
                .iter()
                .map(|p| format!("{},{},{}", p.x, p.y, p.z))
                .collect();
            let _ = writeln!(s, "candidates_region_{region} = {}", triples.join("; "));
        }
        let _ = writeln!(s, "h_min_m = {}", self.h_min_m);
        let _ = writeln!(s, "h_max_m = {}", self.h_max_m);
        let _ = writeln!(s, "zone_mode = {zone_mode}");
        let _ = writeln!(s, "zone_a_m = {}", self.zone_a_m);
        let _ = writeln!(s, "zone_b_m = {}", self.zone_b_m);
        let _ = writeln!(s, "uav_power_mw = {}", self.uav_power_mw);
        let _ = writeln!(s, "power_mode = {power_mode}");
        let _ = writeln!(s, "n0_dbm = {}", self.n0_dbm);
        let _ = writeln!(s, "gamma_th_db = {}", self.gamma_th_db);
        let _ = writeln!(s, "gain_mode = {gain_mode}");
        let _ = writeln!(s, "seed = {}", self.seed);
        s
    }

    /// First 64 bits of the SHA-256 of the canonical rendering, hex.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical_string().as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}
