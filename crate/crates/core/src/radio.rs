//! Beamforming, power allocation, link-gain tables, and the SINR matrix.
//!
//! Every station serves only its own region's users, with a matched-filter
//! (maximum ratio) beam per served user and the station budget split equally
//! among them. A user's downlink SINR under one choice of station positions
//! is
//!
//! ```text
//!           p_jk |h_jk^H w_jk|^2
//! ------------------------------------------------
//! N0 + sum_{i!=k} p_ji |h_jk^H w_ji|^2            (same station)
//!    + sum_{l!=j} sum_i p_li |h_lk^H w_li|^2      (other stations)
//! ```
//!
//! Evaluating that ratio for every user under every combination of candidate
//! positions would re-derive the same channels millions of times. Because a
//! station's beams depend only on its own position, the three sums factor
//! into per-(region, candidate, user) tables that are precomputed once; a
//! combination's SINR row is then assembled from table lookups. The direct
//! evaluator [`sinr_direct`] stays available as the reference the table
//! assembly is checked against.
//!
//! All SINR arithmetic is linear-scale milliwatts; dB only at boundaries.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{
    inner, los_channel, norm_sq, sample_complex_gain, ArrayConfig, ComplexVector, LinkParams,
};
use crate::geometry::{derive_seed, CandidateGrid, Point3};

/// Seed domain tag for channel-gain draws (see [`derive_seed`]).
pub const GAIN_SEED_DOMAIN: u64 = 0x4741_494E; // "GAIN"

/// Errors from beamforming and table construction.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum RadioError {
    /// Matched-filter beam requested for an all-zero channel.
    #[error("cannot form a beam on a zero channel")]
    ZeroChannel,
    #[error(transparent)]
    Channel(#[from] crate::channel::ChannelError),
}

/// A unit-norm transmit beamforming vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Beamformer {
    weights: ComplexVector,
}

impl Beamformer {
    pub fn weights(&self) -> &[Complex64] {
        &self.weights
    }

    /// Link gain `|h^H w|^2` toward this beam.
    pub fn gain_from(&self, h: &[Complex64]) -> f64 {
        inner(h, &self.weights).norm_sqr()
    }
}

/// Maximum ratio transmission: `w = h / |h|`, the unit-norm beam maximizing
/// `|h^H w|^2`.
pub fn mrt_beamformer(h: &[Complex64]) -> Result<Beamformer, RadioError> {
    let norm = norm_sq(h).sqrt();
    if norm == 0.0 {
        return Err(RadioError::ZeroChannel);
    }
    Ok(Beamformer {
        weights: h.iter().map(|v| v / norm).collect(),
    })
}

/// Per-user transmit power under a per-station budget, milliwatts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerAllocation {
    pub per_user_mw: f64,
    pub budget_mw: f64,
    pub n_users: usize,
}

/// Split a station budget equally among its users.
pub fn equal_power(total_mw: f64, n_users: usize) -> PowerAllocation {
    debug_assert!(n_users >= 1);
    PowerAllocation {
        per_user_mw: total_mw / n_users as f64,
        budget_mw: total_mw,
        n_users,
    }
}

/// Linear noise power, milliwatts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseFloor {
    pub mw: f64,
}

impl NoiseFloor {
    pub fn from_dbm(dbm: f64) -> Self {
        Self { mw: dbm_to_mw(dbm) }
    }
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10.0f64.powf(dbm / 10.0)
}

pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

pub fn db_to_linear(db: f64) -> f64 {
    10.0f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// Which users each region's station serves (global user indices), plus the
/// inverse map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserAssignment {
    region_users: Vec<Vec<usize>>,
    region_of: Vec<usize>,
}

impl UserAssignment {
    /// Build from per-region global user index lists. Indices must form a
    /// partition of `0..n_users`.
    pub fn new(region_users: Vec<Vec<usize>>) -> Self {
        let n_users: usize = region_users.iter().map(Vec::len).sum();
        let mut region_of = vec![usize::MAX; n_users];
        for (r, users) in region_users.iter().enumerate() {
            for &u in users {
                debug_assert!(region_of[u] == usize::MAX, "user {u} assigned twice");
                region_of[u] = r;
            }
        }
        debug_assert!(region_of.iter().all(|&r| r != usize::MAX));
        Self {
            region_users,
            region_of,
        }
    }

    pub fn n_regions(&self) -> usize {
        self.region_users.len()
    }

    pub fn n_users(&self) -> usize {
        self.region_of.len()
    }

    pub fn users_of(&self, region: usize) -> &[usize] {
        &self.region_users[region]
    }

    pub fn region_of(&self, user: usize) -> usize {
        self.region_of[user]
    }
}

/// Complex channel gain per (region, candidate, user) link.
///
/// Deterministic mode pins every gain to 1 for reproducible tests; Gaussian
/// mode draws unit-variance circularly symmetric gains from a seeded ChaCha8
/// stream per region (candidate-major, then user order), so a scenario's
/// gains do not depend on any other region's grid size.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkGains {
    per_region: Vec<Vec<Complex64>>,
    n_users: usize,
}

impl LinkGains {
    pub fn deterministic(candidate_counts: &[usize], n_users: usize) -> Self {
        let per_region = candidate_counts
            .iter()
            .map(|&c| vec![Complex64::new(1.0, 0.0); c * n_users])
            .collect();
        Self {
            per_region,
            n_users,
        }
    }

    pub fn gaussian(candidate_counts: &[usize], n_users: usize, master_seed: u64) -> Self {
        let per_region = candidate_counts
            .iter()
            .enumerate()
            .map(|(r, &c)| {
                let seed = derive_seed(master_seed, GAIN_SEED_DOMAIN, r as u64);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..c * n_users)
                    .map(|_| sample_complex_gain(&mut rng))
                    .collect()
            })
            .collect();
        Self {
            per_region,
            n_users,
        }
    }

    /// Build from an explicit gain function (test hook).
    pub fn from_fn(
        candidate_counts: &[usize],
        n_users: usize,
        mut f: impl FnMut(usize, usize, usize) -> Complex64,
    ) -> Self {
        let per_region = candidate_counts
            .iter()
            .enumerate()
            .map(|(r, &c)| {
                let mut v = Vec::with_capacity(c * n_users);
                for cand in 0..c {
                    for user in 0..n_users {
                        v.push(f(r, cand, user));
                    }
                }
                v
            })
            .collect();
        Self {
            per_region,
            n_users,
        }
    }

    pub fn alpha(&self, region: usize, candidate: usize, user: usize) -> Complex64 {
        self.per_region[region][candidate * self.n_users + user]
    }

    /// Multiply every link gain of one user by a unit-modulus phase.
    pub fn rotate_user(&mut self, user: usize, phase_rad: f64) {
        let rot = Complex64::from_polar(1.0, phase_rad);
        for region in &mut self.per_region {
            let n = self.n_users;
            for cand_block in region.chunks_mut(n) {
                cand_block[user] *= rot;
            }
        }
    }
}

/// Everything needed to build a channel between any candidate position and
/// any user.
#[derive(Debug, Clone)]
pub struct LinkEnv<'a> {
    pub grids: &'a [CandidateGrid],
    pub users: &'a [Point3],
    pub assignment: &'a UserAssignment,
    pub gains: &'a LinkGains,
    pub link: LinkParams,
    pub array: ArrayConfig,
}

impl LinkEnv<'_> {
    /// Channel from region `r`'s candidate `cand` to global user `user`.
    pub fn channel(&self, r: usize, cand: usize, user: usize) -> Result<ComplexVector, RadioError> {
        Ok(los_channel(
            self.grids[r].points[cand],
            self.users[user],
            self.gains.alpha(r, cand, user),
            &self.link,
            &self.array,
        )?)
    }
}

/// Direct evaluation of one user's SINR under one combination of candidate
/// positions (one candidate index per region), rebuilding every channel and
/// beam from scratch. This is the reference the precomputed tables are
/// checked against.
pub fn sinr_direct(
    combo: &[usize],
    user: usize,
    env: &LinkEnv,
    powers: &[f64],
    n0_mw: f64,
) -> Result<f64, RadioError> {
    let n_regions = env.grids.len();
    debug_assert_eq!(combo.len(), n_regions);
    let mut channels: Vec<Vec<ComplexVector>> = Vec::with_capacity(n_regions);
    let mut beams: Vec<Vec<Beamformer>> = Vec::with_capacity(n_regions);
    for (r, &cand) in combo.iter().enumerate() {
        let per_user: Vec<ComplexVector> = (0..env.users.len())
            .map(|k| env.channel(r, cand, k))
            .collect::<Result<_, _>>()?;
        let region_beams = env
            .assignment
            .users_of(r)
            .iter()
            .map(|&i| mrt_beamformer(&per_user[i]))
            .collect::<Result<_, _>>()?;
        channels.push(per_user);
        beams.push(region_beams);
    }
    Ok(sinr_from_links(
        user,
        &channels,
        &beams,
        env.assignment,
        powers,
        n0_mw,
    ))
}

/// SINR from explicit channels and beams.
///
/// `channels[l][k]` is the channel from region `l`'s station to global user
/// `k`; `beams[l][i]` is the beam for the `i`th entry of `users_of(l)`;
/// `powers[l]` is region `l`'s per-user transmit power in milliwatts.
pub fn sinr_from_links(
    user: usize,
    channels: &[Vec<ComplexVector>],
    beams: &[Vec<Beamformer>],
    assignment: &UserAssignment,
    powers: &[f64],
    n0_mw: f64,
) -> f64 {
    let j = assignment.region_of(user);
    let h_own = &channels[j][user];
    let own_users = assignment.users_of(j);
    let k_local = own_users.iter().position(|&u| u == user).expect("user served");

    let signal = powers[j] * beams[j][k_local].gain_from(h_own);
    let mut denom = n0_mw;
    for (i_local, _) in own_users.iter().enumerate() {
        if i_local != k_local {
            denom += powers[j] * beams[j][i_local].gain_from(h_own);
        }
    }
    for l in 0..channels.len() {
        if l == j {
            continue;
        }
        let h_cross = &channels[l][user];
        for beam in &beams[l] {
            denom += powers[l] * beam.gain_from(h_cross);
        }
    }
    signal / denom
}

/// Precomputed link-gain tables indexed by (region, candidate, user).
///
/// Entries are power-free sums of `|h^H w|^2`; transmit powers are applied
/// at assembly time, which is exact because power is uniform within a
/// region. For a user served by region `j`, `inter[j][.][user]` is stored as
/// zero: the cross-station table only ever contributes for out-of-region
/// users.
#[derive(Debug, Clone, PartialEq)]
pub struct GainTables {
    candidate_counts: Vec<usize>,
    offsets: Vec<usize>,
    n_users: usize,
    signal: Vec<f64>,
    intra: Vec<f64>,
    inter: Vec<f64>,
}

impl GainTables {
    fn idx(&self, region: usize, candidate: usize, user: usize) -> usize {
        debug_assert!(candidate < self.candidate_counts[region]);
        (self.offsets[region] + candidate) * self.n_users + user
    }

    pub fn candidate_counts(&self) -> &[usize] {
        &self.candidate_counts
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn signal(&self, region: usize, candidate: usize, user: usize) -> f64 {
        self.signal[self.idx(region, candidate, user)]
    }

    pub fn intra(&self, region: usize, candidate: usize, user: usize) -> f64 {
        self.intra[self.idx(region, candidate, user)]
    }

    pub fn inter(&self, region: usize, candidate: usize, user: usize) -> f64 {
        self.inter[self.idx(region, candidate, user)]
    }
}

/// Build the signal/intra/inter tables for every (region, candidate, user).
pub fn precompute_gain_tables(env: &LinkEnv) -> Result<GainTables, RadioError> {
    let n_regions = env.grids.len();
    let n_users = env.users.len();
    let candidate_counts: Vec<usize> = env.grids.iter().map(CandidateGrid::len).collect();
    let mut offsets = vec![0usize; n_regions];
    for r in 1..n_regions {
        offsets[r] = offsets[r - 1] + candidate_counts[r - 1];
    }
    let total = (offsets[n_regions - 1] + candidate_counts[n_regions - 1]) * n_users;
    let mut tables = GainTables {
        candidate_counts,
        offsets,
        n_users,
        signal: vec![0.0; total],
        intra: vec![0.0; total],
        inter: vec![0.0; total],
    };

    for r in 0..n_regions {
        let served = env.assignment.users_of(r);
        for cand in 0..tables.candidate_counts[r] {
            let channels: Vec<ComplexVector> = (0..n_users)
                .map(|k| env.channel(r, cand, k))
                .collect::<Result<_, _>>()?;
            let beams: Vec<Beamformer> = served
                .iter()
                .map(|&i| mrt_beamformer(&channels[i]))
                .collect::<Result<_, _>>()?;
            for k in 0..n_users {
                let idx = tables.idx(r, cand, k);
                let own = env.assignment.region_of(k) == r;
                let mut total_gain = 0.0;
                for (i_local, &i) in served.iter().enumerate() {
                    let g = beams[i_local].gain_from(&channels[k]);
                    total_gain += g;
                    if own && i == k {
                        tables.signal[idx] = g;
                    }
                }
                if own {
                    tables.intra[idx] = total_gain - tables.signal[idx];
                } else {
                    tables.inter[idx] = total_gain;
                }
            }
        }
    }
    Ok(tables)
}

/// Dense combination-by-user matrix of linear SINR values.
#[derive(Debug, Clone, PartialEq)]
pub struct SinrMatrix {
    n_combinations: usize,
    n_users: usize,
    data: Vec<f64>,
}

impl SinrMatrix {
    pub fn n_combinations(&self) -> usize {
        self.n_combinations
    }

    pub fn n_users(&self) -> usize {
        self.n_users
    }

    pub fn row(&self, a: usize) -> &[f64] {
        &self.data[a * self.n_users..(a + 1) * self.n_users]
    }

    pub fn get(&self, a: usize, user: usize) -> f64 {
        self.data[a * self.n_users + user]
    }

    /// Smallest SINR in row `a`.
    pub fn row_min(&self, a: usize) -> f64 {
        self.row(a).iter().cloned().fold(f64::INFINITY, f64::min)
    }

    #[cfg(test)]
    pub(crate) fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let n_users = rows[0].len();
        let n_combinations = rows.len();
        let data = rows.into_iter().flatten().collect();
        Self {
            n_combinations,
            n_users,
            data,
        }
    }
}

/// Streaming SINR-row assembler over the precomputed tables.
///
/// Materializing the full matrix costs `c * n_users` doubles; for larger
/// combination spaces the assembler can be driven row by row instead.
#[derive(Debug, Clone)]
pub struct SinrAssembler<'a> {
    tables: &'a GainTables,
    assignment: &'a UserAssignment,
    powers: &'a [f64],
    n0_mw: f64,
}

impl<'a> SinrAssembler<'a> {
    pub fn new(
        tables: &'a GainTables,
        assignment: &'a UserAssignment,
        powers: &'a [f64],
        n0_mw: f64,
    ) -> Self {
        debug_assert_eq!(powers.len(), tables.candidate_counts.len());
        debug_assert!(n0_mw > 0.0);
        Self {
            tables,
            assignment,
            powers,
            n0_mw,
        }
    }

    pub fn n_users(&self) -> usize {
        self.tables.n_users
    }

    /// Assemble the SINR of every user under the combination given by one
    /// candidate index per region.
    pub fn assemble_into(&self, combo: &[usize], out: &mut [f64]) {
        let t = self.tables;
        let n_users = t.n_users;
        debug_assert_eq!(out.len(), n_users);
        // Cross-station interference first: inter entries are zero for a
        // region's own users, so the sum needs no same-region exclusion.
        out.fill(self.n0_mw);
        for (l, &cand) in combo.iter().enumerate() {
            let base = (t.offsets[l] + cand) * n_users;
            let p = self.powers[l];
            for (k, o) in out.iter_mut().enumerate() {
                *o += p * t.inter[base + k];
            }
        }
        for (k, o) in out.iter_mut().enumerate() {
            let j = self.assignment.region_of(k);
            let idx = (t.offsets[j] + combo[j]) * n_users + k;
            let p = self.powers[j];
            let denom = *o + p * t.intra[idx];
            *o = p * t.signal[idx] / denom;
        }
    }

    pub fn assemble(&self, combo: &[usize]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_users()];
        self.assemble_into(combo, &mut out);
        out
    }

    /// Assemble the full matrix, one row per combination in increasing
    /// mixed-radix order (region 0 is the least significant digit).
    pub fn build_matrix(&self, space: &crate::selection::CombinationSpace) -> SinrMatrix {
        let n_users = self.n_users();
        let c = space.len();
        let mut data = vec![0.0; c * n_users];
        let mut rows = data.chunks_mut(n_users);
        space.for_each(|_, combo| {
            let row = rows.next().expect("row count matches combination count");
            self.assemble_into(combo, row);
        });
        SinrMatrix {
            n_combinations: c,
            n_users,
            data,
        }
    }
}

/// Debug dump of a SINR matrix as CSV with a self-describing header.
pub fn write_sinr_csv<W: std::io::Write>(
    w: &mut W,
    s: &SinrMatrix,
    seed: u64,
    config_hash: &str,
) -> std::io::Result<()> {
    writeln!(w, "# sinr matrix, linear scale, row = combination index")?;
    writeln!(w, "# rows = {}, cols = {}", s.n_combinations, s.n_users)?;
    writeln!(w, "# seed = {seed}")?;
    writeln!(w, "# config_hash = {config_hash}")?;
    for a in 0..s.n_combinations {
        let row: Vec<String> = s.row(a).iter().map(f64::to_string).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// Debug dump of the gain tables as CSV with a self-describing header.
pub fn write_gain_tables_csv<W: std::io::Write>(
    w: &mut W,
    t: &GainTables,
    seed: u64,
    config_hash: &str,
) -> std::io::Result<()> {
    writeln!(w, "# link-gain tables, power-free |h^H w|^2 sums")?;
    writeln!(
        w,
        "# regions = {}, candidates = {:?}, users = {}",
        t.candidate_counts.len(),
        t.candidate_counts,
        t.n_users
    )?;
    writeln!(w, "# seed = {seed}")?;
    writeln!(w, "# config_hash = {config_hash}")?;
    writeln!(w, "region,candidate,user,signal,intra,inter")?;
    for r in 0..t.candidate_counts.len() {
        for cand in 0..t.candidate_counts[r] {
            for k in 0..t.n_users {
                writeln!(
                    w,
                    "{r},{cand},{k},{},{},{}",
                    t.signal(r, cand, k),
                    t.intra(r, cand, k),
                    t.inter(r, cand, k)
                )?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Region;
    use crate::selection::CombinationSpace;

    fn approx_rel(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(a.abs()).max(1e-300)
    }

    #[test]
    fn mrt_on_basis_vector_is_identity() {
        let h = vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        ];
        let w = mrt_beamformer(&h).unwrap();
        assert_eq!(w.weights()[0], Complex64::new(1.0, 0.0));
        assert_eq!(w.weights()[1], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn mrt_achieves_channel_norm() {
        let h = vec![Complex64::new(0.3, -1.2), Complex64::new(2.0, 0.7)];
        let w = mrt_beamformer(&h).unwrap();
        assert!(approx_rel(w.gain_from(&h), norm_sq(&h), 1e-12));
        assert!((norm_sq(w.weights()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mrt_is_scale_invariant() {
        let h = vec![Complex64::new(0.5, 0.1), Complex64::new(-0.2, 0.9)];
        let h2: Vec<_> = h.iter().map(|v| v * 2.0).collect();
        let (w1, w2) = (mrt_beamformer(&h).unwrap(), mrt_beamformer(&h2).unwrap());
        for (a, b) in w1.weights().iter().zip(w2.weights()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn mrt_zero_channel_is_an_error() {
        let h = vec![Complex64::new(0.0, 0.0); 4];
        assert_eq!(mrt_beamformer(&h), Err(RadioError::ZeroChannel));
    }

    #[test]
    fn equal_power_splits_budget() {
        assert_eq!(equal_power(1.0, 5).per_user_mw, 0.2);
        assert_eq!(equal_power(1.0, 1).per_user_mw, 1.0);
        assert_eq!(equal_power(0.0, 5).per_user_mw, 0.0);
    }

    #[test]
    fn dbm_conversions() {
        assert_eq!(dbm_to_mw(0.0), 1.0);
        assert!(approx_rel(dbm_to_mw(-35.0), 10f64.powf(-3.5), 1e-15));
        for x in [-37.2, -5.0, 0.0, 13.4] {
            assert!((linear_to_db(db_to_linear(x)) - x).abs() < 1e-12);
        }
    }

    /// One region, one candidate, one user at distance 3; no interference.
    fn single_link_env() -> (Vec<CandidateGrid>, Vec<Point3>, UserAssignment, LinkGains) {
        let grids = vec![CandidateGrid::new(0, vec![Point3::new(0.0, 0.0, 3.0)])];
        let users = vec![Point3::new(0.0, 0.0, 0.0)];
        let assignment = UserAssignment::new(vec![vec![0]]);
        let gains = LinkGains::deterministic(&[1], 1);
        (grids, users, assignment, gains)
    }

    #[test]
    fn sinr_direct_single_link_closed_form() {
        let (grids, users, assignment, gains) = single_link_env();
        let env = LinkEnv {
            grids: &grids,
            users: &users,
            assignment: &assignment,
            gains: &gains,
            link: LinkParams::new(2.0),
            array: ArrayConfig::half_wavelength(6),
        };
        let n0 = dbm_to_mw(-35.0);
        let sinr = sinr_direct(&[0], 0, &env, &[1.0], n0).unwrap();
        let expect = 0.6 / n0; // p * N|alpha|^2/(1+d^2) / N0
        assert!(approx_rel(sinr, expect, 1e-12));
        assert!((linear_to_db(sinr) - 32.78).abs() < 0.01);
    }

    #[test]
    fn sinr_zero_power_is_zero() {
        let (grids, users, assignment, gains) = single_link_env();
        let env = LinkEnv {
            grids: &grids,
            users: &users,
            assignment: &assignment,
            gains: &gains,
            link: LinkParams::new(2.0),
            array: ArrayConfig::half_wavelength(6),
        };
        let sinr = sinr_direct(&[0], 0, &env, &[0.0], dbm_to_mw(-35.0)).unwrap();
        assert_eq!(sinr, 0.0);
    }

    #[test]
    fn sinr_orthogonal_co_users_see_no_interference() {
        // Hand-built orthonormal channels: the matched beams cannot leak.
        let assignment = UserAssignment::new(vec![vec![0, 1]]);
        let e1 = vec![Complex64::new(2.0, 0.0), Complex64::new(0.0, 0.0)];
        let e2 = vec![Complex64::new(0.0, 0.0), Complex64::new(1.5, 0.0)];
        let channels = vec![vec![e1.clone(), e2.clone()]];
        let beams = vec![vec![mrt_beamformer(&e1).unwrap(), mrt_beamformer(&e2).unwrap()]];
        let n0 = 1e-3;
        let p = 0.5;
        let sinr = sinr_from_links(0, &channels, &beams, &assignment, &[p], n0);
        assert!(approx_rel(sinr, p * 4.0 / n0, 1e-12));
    }

    /// Two regions side by side, two candidates each, two users per region.
    fn two_region_setup() -> (Vec<CandidateGrid>, Vec<Point3>, UserAssignment) {
        let r0 = Region::new(0.0, 57.0, 0.0, 114.0);
        let r1 = Region::new(57.0, 114.0, 0.0, 114.0);
        let grids = vec![
            CandidateGrid::lattice(0, &r0, 2, 1, 1, &crate::geometry::AltitudeBand::new(22.0, 36.0)),
            CandidateGrid::lattice(1, &r1, 1, 2, 1, &crate::geometry::AltitudeBand::new(22.0, 36.0)),
        ];
        let users = vec![
            Point3::new(10.0, 20.0, 0.0),
            Point3::new(40.0, 80.0, 0.0),
            Point3::new(70.0, 30.0, 0.0),
            Point3::new(100.0, 90.0, 0.0),
        ];
        let assignment = UserAssignment::new(vec![vec![0, 1], vec![2, 3]]);
        (grids, users, assignment)
    }

    #[test]
    fn degenerate_tables_match_channel_norm() {
        let (grids, users, assignment, gains) = single_link_env();
        let env = LinkEnv {
            grids: &grids,
            users: &users,
            assignment: &assignment,
            gains: &gains,
            link: LinkParams::new(2.0),
            array: ArrayConfig::half_wavelength(6),
        };
        let t = precompute_gain_tables(&env).unwrap();
        assert!(approx_rel(t.signal(0, 0, 0), 0.6, 1e-12));
        assert_eq!(t.intra(0, 0, 0), 0.0);
        assert_eq!(t.inter(0, 0, 0), 0.0);
    }

    #[test]
    fn assembled_rows_match_direct_evaluation() {
        let (grids, users, assignment) = two_region_setup();
        let counts: Vec<usize> = grids.iter().map(|g| g.len()).collect();
        let gains = LinkGains::gaussian(&counts, users.len(), 99);
        let env = LinkEnv {
            grids: &grids,
            users: &users,
            assignment: &assignment,
            gains: &gains,
            link: LinkParams::new(2.0),
            array: ArrayConfig::half_wavelength(6),
        };
        let tables = precompute_gain_tables(&env).unwrap();
        let powers = [0.5, 0.5];
        let n0 = dbm_to_mw(-35.0);
        let asm = SinrAssembler::new(&tables, &assignment, &powers, n0);
        let space = CombinationSpace::new(&counts).unwrap();
        space.for_each(|_, combo| {
            let row = asm.assemble(combo);
            for user in 0..users.len() {
                let direct = sinr_direct(combo, user, &env, &powers, n0).unwrap();
                assert!(
                    approx_rel(row[user], direct, 1e-12),
                    "combo {combo:?} user {user}: {} vs {direct}",
                    row[user]
                );
            }
        });
    }

    #[test]
    fn tables_are_deterministic_for_a_seed() {
        let (grids, users, assignment) = two_region_setup();
        let counts: Vec<usize> = grids.iter().map(|g| g.len()).collect();
        let build = || {
            let gains = LinkGains::gaussian(&counts, users.len(), 7);
            let env = LinkEnv {
                grids: &grids,
                users: &users,
                assignment: &assignment,
                gains: &gains,
                link: LinkParams::new(2.0),
                array: ArrayConfig::half_wavelength(6),
            };
            precompute_gain_tables(&env).unwrap()
        };
        assert_eq!(build(), build());
    }

    #[test]
    fn matrix_build_matches_assembler_and_is_nonnegative() {
        let (grids, users, assignment) = two_region_setup();
        let counts: Vec<usize> = grids.iter().map(|g| g.len()).collect();
        let gains = LinkGains::deterministic(&counts, users.len());
        let env = LinkEnv {
            grids: &grids,
            users: &users,
            assignment: &assignment,
            gains: &gains,
            link: LinkParams::new(2.0),
            array: ArrayConfig::half_wavelength(6),
        };
        let tables = precompute_gain_tables(&env).unwrap();
        let powers = [0.5, 0.5];
        let asm = SinrAssembler::new(&tables, &assignment, &powers, dbm_to_mw(-35.0));
        let space = CombinationSpace::new(&counts).unwrap();
        let s = asm.build_matrix(&space);
        assert_eq!(s.n_combinations(), 4);
        assert_eq!(s.n_users(), 4);
        space.for_each(|a, combo| {
            assert_eq!(s.row(a), asm.assemble(combo).as_slice());
        });
        assert!(s.data.iter().all(|&v| v >= 0.0 && v.is_finite()));
    }

    #[test]
    fn removing_an_interferer_never_hurts() {
        let (grids, users, assignment) = two_region_setup();
        let counts: Vec<usize> = grids.iter().map(|g| g.len()).collect();
        let gains = LinkGains::gaussian(&counts, users.len(), 3);
        let env = LinkEnv {
            grids: &grids,
            users: &users,
            assignment: &assignment,
            gains: &gains,
            link: LinkParams::new(2.0),
            array: ArrayConfig::half_wavelength(6),
        };
        let powers = [0.5, 0.5];
        let n0 = dbm_to_mw(-35.0);
        // Evaluate user 0 with region 1 present, then with region 1's power
        // switched off (equivalent to removing the station).
        let with = sinr_direct(&[0, 1], 0, &env, &powers, n0).unwrap();
        let without = sinr_direct(&[0, 1], 0, &env, &[0.5, 0.0], n0).unwrap();
        assert!(without >= with);
    }

    #[test]
    fn raising_noise_strictly_lowers_sinr() {
        let (grids, users, assignment) = two_region_setup();
        let counts: Vec<usize> = grids.iter().map(|g| g.len()).collect();
        let gains = LinkGains::deterministic(&counts, users.len());
        let env = LinkEnv {
            grids: &grids,
            users: &users,
            assignment: &assignment,
            gains: &gains,
            link: LinkParams::new(2.0),
            array: ArrayConfig::half_wavelength(6),
        };
        let tables = precompute_gain_tables(&env).unwrap();
        let powers = [0.5, 0.5];
        let low = SinrAssembler::new(&tables, &assignment, &powers, 1e-4).assemble(&[0, 0]);
        let high = SinrAssembler::new(&tables, &assignment, &powers, 1e-3).assemble(&[0, 0]);
        for (l, h) in low.iter().zip(&high) {
            assert!(h < l);
        }
    }

    #[test]
    fn per_user_phase_rotation_leaves_sinr_unchanged() {
        let (grids, users, assignment) = two_region_setup();
        let counts: Vec<usize> = grids.iter().map(|g| g.len()).collect();
        let gains = LinkGains::gaussian(&counts, users.len(), 11);
        let mut rotated = gains.clone();
        rotated.rotate_user(2, 1.9);
        let powers = [0.5, 0.5];
        let n0 = dbm_to_mw(-35.0);
        let build = |g: &LinkGains| {
            let env = LinkEnv {
                grids: &grids,
                users: &users,
                assignment: &assignment,
                gains: g,
                link: LinkParams::new(2.0),
                array: ArrayConfig::half_wavelength(6),
            };
            let tables = precompute_gain_tables(&env).unwrap();
            SinrAssembler::new(&tables, &assignment, &powers, n0)
                .build_matrix(&CombinationSpace::new(&counts).unwrap())
        };
        let (s1, s2) = (build(&gains), build(&rotated));
        for a in 0..s1.n_combinations() {
            for k in 0..s1.n_users() {
                assert!(approx_rel(s1.get(a, k), s2.get(a, k), 1e-9));
            }
        }
    }

    #[test]
    fn csv_dumps_carry_headers() {
        let (grids, users, assignment, gains) = single_link_env();
        let env = LinkEnv {
            grids: &grids,
            users: &users,
            assignment: &assignment,
            gains: &gains,
            link: LinkParams::new(2.0),
            array: ArrayConfig::half_wavelength(6),
        };
        let tables = precompute_gain_tables(&env).unwrap();
        let asm = SinrAssembler::new(&tables, &assignment, &[1.0], 1e-3);
        let s = asm.build_matrix(&CombinationSpace::new(&[1]).unwrap());
        let mut buf = Vec::new();
        write_sinr_csv(&mut buf, &s, 42, "cafebabe").unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("# seed = 42"));
        assert!(text.contains("# config_hash = cafebabe"));
        let mut buf = Vec::new();
        write_gain_tables_csv(&mut buf, &tables, 42, "cafebabe").unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("region,candidate,user,signal,intra,inter"));
    }
}
