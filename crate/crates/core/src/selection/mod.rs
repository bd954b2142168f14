//! Choosing one candidate position per region: exhaustive feasibility
//! enumeration, its convex relaxation, and the rounding + post-check that
//! turns a relaxed solution into a sound placement.
//!
//! A *combination* assigns one candidate index to every region; the space of
//! combinations is indexed in mixed radix with region 0 as the least
//! significant digit. Over the SINR matrix `S` (rows = combinations,
//! columns = users) two solvers are offered:
//!
//! - the exact oracle: scan every row and keep those whose worst user meets
//!   the threshold;
//! - the relaxed selection program: find weights `e` with `0 <= e <= 1`,
//!   `sum e <= 1`, and `e^T S >= threshold` elementwise. Among feasible
//!   weights the solver canonically maximizes the minimum margin
//!   `min_k (e^T S)_k`, which pins a deterministic solution (the simplex
//!   lives in the private `lp` submodule).
//!
//! A fractional `e` can certify a convex mixture even when no single
//! combination is feasible, so the rounded index is always re-checked
//! against the oracle; on failure the best max-min combination is
//! substituted and the result flagged.

mod lp;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{AltitudeBand, CandidateGrid, Point3, RestrictedZone};
use crate::radio::{linear_to_db, SinrMatrix};

/// Absolute feasibility slack, linear SINR units, for the exhaustive oracle.
pub const ORACLE_TOL: f64 = 1e-9;
/// Absolute feasibility slack, linear SINR units, for the relaxed program.
pub const LP_TOL: f64 = 1e-7;

/// Errors from combination indexing and the selection solvers.
#[derive(Debug, Error, PartialEq)]
pub enum SelectionError {
    /// A region has no surviving candidate, so no combination exists.
    #[error("region {region} has no candidate locations")]
    EmptyGrid { region: usize },
    /// The combination count overflows the index type.
    #[error("combination space too large to index")]
    TooManyCombinations,
    #[error("combination index {index} out of range (combination count {count})")]
    IndexOutOfRange { index: usize, count: usize },
    /// No selection weights satisfy the threshold constraints.
    #[error("no convex combination of candidate placements reaches the SINR threshold (best margin {best_margin:.6e})")]
    Infeasible { best_margin: f64 },
    #[error("selection LP did not converge: {0}")]
    NumericalFailure(String),
}

/// Mixed-radix index over one candidate choice per region.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CombinationSpace {
    counts: Vec<usize>,
    strides: Vec<usize>,
    len: usize,
}

impl CombinationSpace {
    /// Build from per-region candidate counts. Every region must keep at
    /// least one candidate.
    pub fn new(counts: &[usize]) -> Result<Self, SelectionError> {
        let mut strides = Vec::with_capacity(counts.len());
        let mut len = 1usize;
        for (region, &n) in counts.iter().enumerate() {
            if n == 0 {
                return Err(SelectionError::EmptyGrid { region });
            }
            strides.push(len);
            len = len
                .checked_mul(n)
                .ok_or(SelectionError::TooManyCombinations)?;
        }
        Ok(Self {
            counts: counts.to_vec(),
            strides,
            len,
        })
    }

    /// Total combination count `c` (the product of the per-region counts).
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn n_regions(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// All combination indices in increasing order.
    pub fn indices(&self) -> std::ops::Range<usize> {
        0..self.len
    }

    /// Decompose an index into one candidate digit per region.
    pub fn digits(&self, a: usize) -> Result<Vec<usize>, SelectionError> {
        if a >= self.len {
            return Err(SelectionError::IndexOutOfRange {
                index: a,
                count: self.len,
            });
        }
        Ok(self
            .counts
            .iter()
            .zip(&self.strides)
            .map(|(&n, &stride)| (a / stride) % n)
            .collect())
    }

    /// Recompose an index from digits (inverse of [`digits`](Self::digits)).
    pub fn index_of(&self, digits: &[usize]) -> usize {
        debug_assert_eq!(digits.len(), self.counts.len());
        digits
            .iter()
            .zip(&self.strides)
            .map(|(&d, &stride)| d * stride)
            .sum()
    }

    /// Visit every combination in increasing index order with its digits,
    /// without re-dividing per row.
    pub fn for_each(&self, mut f: impl FnMut(usize, &[usize])) {
        let mut digits = vec![0usize; self.counts.len()];
        for a in 0..self.len {
            f(a, &digits);
            for (d, &n) in digits.iter_mut().zip(&self.counts) {
                *d += 1;
                if *d < n {
                    break;
                }
                *d = 0;
            }
        }
    }
}

/// Map a combination index to the chosen position of every region's UAV.
pub fn combination_to_positions(
    a: usize,
    space: &CombinationSpace,
    grids: &[CandidateGrid],
) -> Result<Vec<Point3>, SelectionError> {
    let digits = space.digits(a)?;
    Ok(digits
        .iter()
        .zip(grids)
        .map(|(&d, grid)| grid.points[d])
        .collect())
}

/// Lazy view of the combination-by-position matrix whose row `a` is the
/// concatenated UAV positions of combination `a`.
#[derive(Debug, Clone, Copy)]
pub struct LocationMatrix<'a> {
    pub space: &'a CombinationSpace,
    pub grids: &'a [CandidateGrid],
}

impl LocationMatrix<'_> {
    pub fn row(&self, a: usize) -> Result<Vec<Point3>, SelectionError> {
        combination_to_positions(a, self.space, self.grids)
    }

    /// Selection-weighted positions `tau = e^T L`; for an indicator vector
    /// this is exactly the selected row.
    pub fn tau(&self, e: &SelectionVector) -> Result<Vec<Point3>, SelectionError> {
        let mut acc = vec![Point3::new(0.0, 0.0, 0.0); self.space.n_regions()];
        for (a, w) in e.support() {
            for (out, p) in acc.iter_mut().zip(self.row(a)?) {
                out.x += w * p.x;
                out.y += w * p.y;
                out.z += w * p.z;
            }
        }
        Ok(acc)
    }
}

/// Relaxed selection weights over the combination space.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionVector {
    weights: Vec<f64>,
}

impl SelectionVector {
    pub fn from_weights(weights: Vec<f64>) -> Self {
        Self { weights }
    }

    /// Indicator of a single combination.
    pub fn indicator(len: usize, a: usize) -> Self {
        let mut weights = vec![0.0; len];
        weights[a] = 1.0;
        Self { weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Nonzero entries, ascending by index.
    pub fn support(&self) -> Vec<(usize, f64)> {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w != 0.0)
            .map(|(a, &w)| (a, w))
            .collect()
    }

    /// Per-user margins `e^T S`.
    pub fn margins(&self, s: &SinrMatrix) -> Vec<f64> {
        let mut out = vec![0.0; s.n_users()];
        for (a, w) in self.support() {
            for (o, &v) in out.iter_mut().zip(s.row(a)) {
                *o += w * v;
            }
        }
        out
    }
}

/// Exhaustive oracle: all combinations whose worst user meets the threshold
/// (within [`ORACLE_TOL`]). Geometry is already guaranteed by candidate
/// pre-filtering.
pub fn brute_force_feasible(s: &SinrMatrix, gamma_th_linear: f64) -> Vec<usize> {
    (0..s.n_combinations())
        .filter(|&a| s.row_min(a) >= gamma_th_linear - ORACLE_TOL)
        .collect()
}

/// The combination maximizing the worst user's SINR, with its row minimum.
/// Ties break toward the lowest index.
pub fn max_min_combination(s: &SinrMatrix) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for a in 0..s.n_combinations() {
        let min = s.row_min(a);
        if min > best.1 {
            best = (a, min);
        }
    }
    best
}

/// Solve the relaxed selection program at the given linear threshold.
///
/// Returns the canonical (max-min margin) feasible weights, or
/// [`SelectionError::Infeasible`] when even the best convex mixture leaves
/// some user short of the threshold.
pub fn solve_l1_relaxation(
    s: &SinrMatrix,
    gamma_th_linear: f64,
) -> Result<SelectionVector, SelectionError> {
    let sol = lp::solve_max_min(s)
        .map_err(|e| SelectionError::NumericalFailure(e.to_string()))?;
    if sol.value < gamma_th_linear - LP_TOL {
        return Err(SelectionError::Infeasible {
            best_margin: sol.value,
        });
    }
    let mut weights = vec![0.0; s.n_combinations()];
    for (a, w) in sol.support {
        weights[a] = w;
    }
    Ok(SelectionVector { weights })
}

/// Index of the largest selection weight; ties break toward the lowest
/// index.
pub fn round_selection(e: &SelectionVector) -> usize {
    let mut best = 0;
    for (a, &w) in e.weights.iter().enumerate() {
        if w > e.weights[best] {
            best = a;
        }
    }
    best
}

/// How a placement was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveMethod {
    Lp,
    Brute,
}

impl std::fmt::Display for SolveMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SolveMethod::Lp => write!(f, "lp"),
            SolveMethod::Brute => write!(f, "brute"),
        }
    }
}

/// Final placement: chosen combination, its positions and per-user SINRs,
/// and the oracle's verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacementResult {
    pub method: SolveMethod,
    /// Relaxed selection weights (LP method only).
    pub selection: Option<SelectionVector>,
    pub combination: usize,
    pub positions: Vec<Point3>,
    pub sinrs_db: Vec<f64>,
    pub min_sinr_db: f64,
    /// True iff every user of the chosen combination meets the threshold and
    /// every position passes the regulatory predicates.
    pub feasible: bool,
    /// True iff the relaxed solution rounded to a combination the oracle
    /// rejected, and the max-min fallback was substituted.
    pub relaxation_gap: bool,
}

impl std::fmt::Display for PlacementResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "method={} combination={} feasible={} relaxation_gap={} min_sinr_db={:.4}",
            self.method, self.combination, self.feasible, self.relaxation_gap, self.min_sinr_db
        )?;
        for (i, p) in self.positions.iter().enumerate() {
            writeln!(f, "uav {i}: x={} y={} z={}", p.x, p.y, p.z)?;
        }
        Ok(())
    }
}

/// Outcome of checking one combination against threshold and geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinationCheck {
    pub combination: usize,
    pub positions: Vec<Point3>,
    pub sinrs_db: Vec<f64>,
    pub min_sinr_linear: f64,
    pub sinr_ok: bool,
    pub geometry_ok: bool,
}

impl CombinationCheck {
    pub fn ok(&self) -> bool {
        self.sinr_ok && self.geometry_ok
    }
}

/// Check a single combination: worst-user SINR against the threshold and
/// every position against the zone and altitude predicates.
pub fn check_combination(
    a: usize,
    s: &SinrMatrix,
    gamma_th_linear: f64,
    space: &CombinationSpace,
    grids: &[CandidateGrid],
    zone: &RestrictedZone,
    band: &AltitudeBand,
) -> Result<CombinationCheck, SelectionError> {
    let positions = combination_to_positions(a, space, grids)?;
    let row = s.row(a);
    let min_sinr_linear = s.row_min(a);
    let sinr_ok = min_sinr_linear >= gamma_th_linear - ORACLE_TOL;
    let geometry_ok = positions.iter().all(|&p| zone.allows(p) && band.allows(p));
    Ok(CombinationCheck {
        combination: a,
        positions,
        sinrs_db: row.iter().map(|&v| linear_to_db(v)).collect(),
        min_sinr_linear,
        sinr_ok,
        geometry_ok,
    })
}

/// Oracle post-check of a rounded combination.
///
/// If the candidate fails, the max-min combination is substituted and the
/// result is flagged with `relaxation_gap = true`; its verdict then reports
/// whether even that best-effort placement is feasible. The final output is
/// therefore always a member of the oracle-feasible set whenever that set is
/// non-empty.
pub fn verify_placement(
    a: usize,
    s: &SinrMatrix,
    gamma_th_linear: f64,
    space: &CombinationSpace,
    grids: &[CandidateGrid],
    zone: &RestrictedZone,
    band: &AltitudeBand,
) -> Result<PlacementResult, SelectionError> {
    let check = check_combination(a, s, gamma_th_linear, space, grids, zone, band)?;
    let (chosen, relaxation_gap) = if check.ok() {
        (check, false)
    } else {
        let (best, _) = max_min_combination(s);
        let fallback = check_combination(best, s, gamma_th_linear, space, grids, zone, band)?;
        (fallback, true)
    };
    let feasible = chosen.ok();
    Ok(PlacementResult {
        method: SolveMethod::Lp,
        selection: None,
        combination: chosen.combination,
        positions: chosen.positions,
        min_sinr_db: linear_to_db(chosen.min_sinr_linear),
        sinrs_db: chosen.sinrs_db,
        feasible,
        relaxation_gap,
    })
}

/// Full relaxation pipeline: solve, round, post-check.
///
/// An infeasible relaxation is not an error: the max-min combination is
/// reported as a best-effort placement with `feasible = false`.
pub fn solve_with_lp(
    s: &SinrMatrix,
    gamma_th_linear: f64,
    space: &CombinationSpace,
    grids: &[CandidateGrid],
    zone: &RestrictedZone,
    band: &AltitudeBand,
) -> Result<PlacementResult, SelectionError> {
    match solve_l1_relaxation(s, gamma_th_linear) {
        Ok(e) => {
            let rounded = round_selection(&e);
            let mut result =
                verify_placement(rounded, s, gamma_th_linear, space, grids, zone, band)?;
            result.selection = Some(e);
            Ok(result)
        }
        Err(SelectionError::Infeasible { .. }) => {
            let (best, _) = max_min_combination(s);
            let check = check_combination(best, s, gamma_th_linear, space, grids, zone, band)?;
            Ok(PlacementResult {
                method: SolveMethod::Lp,
                selection: None,
                combination: best,
                positions: check.positions.clone(),
                min_sinr_db: linear_to_db(check.min_sinr_linear),
                sinrs_db: check.sinrs_db,
                feasible: false,
                relaxation_gap: false,
            })
        }
        Err(e) => Err(e),
    }
}

/// Exhaustive pipeline: scan all combinations and report the max-min one.
pub fn solve_with_oracle(
    s: &SinrMatrix,
    gamma_th_linear: f64,
    space: &CombinationSpace,
    grids: &[CandidateGrid],
    zone: &RestrictedZone,
    band: &AltitudeBand,
) -> Result<PlacementResult, SelectionError> {
    let (best, _) = max_min_combination(s);
    let check = check_combination(best, s, gamma_th_linear, space, grids, zone, band)?;
    let feasible = check.ok();
    Ok(PlacementResult {
        method: SolveMethod::Brute,
        selection: None,
        combination: best,
        positions: check.positions,
        min_sinr_db: linear_to_db(check.min_sinr_linear),
        sinrs_db: check.sinrs_db,
        feasible,
        relaxation_gap: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ZoneMode;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn combination_count_at_reference_scale() {
        let space = CombinationSpace::new(&[20, 20, 20, 20]).unwrap();
        assert_eq!(space.len(), 160_000);
    }

    #[test]
    fn single_candidate_regions_yield_one_combination() {
        let space = CombinationSpace::new(&[1, 1, 1, 1]).unwrap();
        assert_eq!(space.len(), 1);
        assert_eq!(space.indices().count(), 1);
    }

    #[test]
    fn mixed_radix_product() {
        let space = CombinationSpace::new(&[2, 3]).unwrap();
        assert_eq!(space.len(), 6);
        assert_eq!(space.indices().collect::<Vec<_>>(), vec![0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn empty_region_is_an_error() {
        assert_eq!(
            CombinationSpace::new(&[2, 0, 3]),
            Err(SelectionError::EmptyGrid { region: 1 })
        );
    }

    #[test]
    fn digit_extremes() {
        let space = CombinationSpace::new(&[2, 3, 4]).unwrap();
        assert_eq!(space.digits(0).unwrap(), vec![0, 0, 0]);
        assert_eq!(space.digits(space.len() - 1).unwrap(), vec![1, 2, 3]);
    }

    #[test]
    fn digits_round_trip() {
        let space = CombinationSpace::new(&[3, 5, 2, 7]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let a = rng.random_range(0..space.len());
            assert_eq!(space.index_of(&space.digits(a).unwrap()), a);
        }
    }

    #[test]
    fn for_each_matches_digits() {
        let space = CombinationSpace::new(&[3, 2, 4]).unwrap();
        let mut seen = 0;
        space.for_each(|a, digits| {
            assert_eq!(digits, space.digits(a).unwrap().as_slice());
            assert_eq!(a, seen);
            seen += 1;
        });
        assert_eq!(seen, space.len());
    }

    #[test]
    fn out_of_range_index_is_an_error() {
        let space = CombinationSpace::new(&[2, 2]).unwrap();
        assert!(matches!(
            space.digits(4),
            Err(SelectionError::IndexOutOfRange { index: 4, count: 4 })
        ));
    }

    fn toy_matrix() -> SinrMatrix {
        SinrMatrix::from_rows(vec![
            vec![4.0, 1.0],
            vec![3.0, 3.0],
            vec![0.5, 6.0],
        ])
    }

    #[test]
    fn oracle_with_zero_threshold_accepts_everything() {
        let s = toy_matrix();
        assert_eq!(brute_force_feasible(&s, 0.0), vec![0, 1, 2]);
    }

    #[test]
    fn oracle_with_unattainable_threshold_is_empty() {
        let s = toy_matrix();
        assert!(brute_force_feasible(&s, 7.0).is_empty());
    }

    #[test]
    fn oracle_row_min_filtering() {
        let s = toy_matrix();
        assert_eq!(brute_force_feasible(&s, 2.0), vec![1]);
        assert_eq!(brute_force_feasible(&s, 1.0), vec![0, 1]);
    }

    #[test]
    fn oracle_sets_nest_as_threshold_drops() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rows: Vec<Vec<f64>> = (0..64)
            .map(|_| (0..6).map(|_| rng.random::<f64>() * 4.0).collect())
            .collect();
        let s = SinrMatrix::from_rows(rows);
        let thresholds = [3.0, 2.5, 2.0, 1.5, 1.0, 0.5];
        for pair in thresholds.windows(2) {
            let high = brute_force_feasible(&s, pair[0]);
            let low = brute_force_feasible(&s, pair[1]);
            assert!(high.iter().all(|a| low.contains(a)));
        }
    }

    #[test]
    fn lp_dominant_row_becomes_indicator() {
        let s = SinrMatrix::from_rows(vec![
            vec![0.1, 0.2],
            vec![10.0, 10.0],
            vec![0.3, 0.1],
        ]);
        let e = solve_l1_relaxation(&s, 5.0).unwrap();
        assert!((e.weights()[1] - 1.0).abs() < 1e-9);
        assert!(e.weights()[0].abs() < 1e-9 && e.weights()[2].abs() < 1e-9);
        assert_eq!(round_selection(&e), 1);
    }

    #[test]
    fn lp_reports_infeasible_beyond_column_max() {
        // gamma above max_a S[a,1] = 1.0 bounds any convex mixture.
        let s = SinrMatrix::from_rows(vec![vec![5.0, 0.5], vec![4.0, 1.0]]);
        match solve_l1_relaxation(&s, 1.5) {
            Err(SelectionError::Infeasible { best_margin }) => {
                assert!(best_margin <= 1.0 + 1e-9)
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn lp_identical_rows_round_to_lowest_index() {
        let s = SinrMatrix::from_rows(vec![vec![2.0, 2.0], vec![2.0, 2.0]]);
        let e1 = solve_l1_relaxation(&s, 1.0).unwrap();
        let e2 = solve_l1_relaxation(&s, 1.0).unwrap();
        assert_eq!(e1, e2);
        let a = round_selection(&e1);
        let support = e1.support();
        assert_eq!(a, support[0].0);
    }

    #[test]
    fn lp_feasible_weights_meet_threshold() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|_| (0..4).map(|_| 0.2 + rng.random::<f64>() * 3.0).collect())
            .collect();
        let s = SinrMatrix::from_rows(rows);
        let gamma = 0.5;
        let e = solve_l1_relaxation(&s, gamma).unwrap();
        assert!(e.sum() <= 1.0 + 1e-9);
        assert!(e.weights().iter().all(|&w| (-1e-12..=1.0 + 1e-12).contains(&w)));
        for m in e.margins(&s) {
            assert!(m >= gamma - LP_TOL);
        }
    }

    #[test]
    fn integral_selection_margins_equal_matrix_row() {
        let s = toy_matrix();
        let e = SelectionVector::indicator(3, 1);
        assert_eq!(e.margins(&s), s.row(1).to_vec());
    }

    #[test]
    fn round_selection_examples() {
        assert_eq!(round_selection(&SelectionVector::indicator(9, 7)), 7);
        assert_eq!(
            round_selection(&SelectionVector::from_weights(vec![0.5, 0.5, 0.0])),
            0
        );
        assert_eq!(
            round_selection(&SelectionVector::from_weights(vec![0.2, 0.7, 0.1])),
            1
        );
    }

    /// One region, three candidates on a line outside the band; 2 users.
    fn tiny_geometry() -> (CombinationSpace, Vec<CandidateGrid>, RestrictedZone, AltitudeBand) {
        let grids = vec![CandidateGrid::new(
            0,
            vec![
                Point3::new(10.0, 10.0, 25.0),
                Point3::new(20.0, 10.0, 25.0),
                Point3::new(30.0, 10.0, 25.0),
            ],
        )];
        let space = CombinationSpace::new(&[3]).unwrap();
        let zone = RestrictedZone::new(57.0, 57.0, 40.0, 11.0, ZoneMode::Band);
        let band = AltitudeBand::new(22.0, 36.0);
        (space, grids, zone, band)
    }

    #[test]
    fn verify_accepts_oracle_feasible_combination() {
        let (space, grids, zone, band) = tiny_geometry();
        let s = toy_matrix();
        let r = verify_placement(1, &s, 2.0, &space, &grids, &zone, &band).unwrap();
        assert!(r.feasible && !r.relaxation_gap);
        assert_eq!(r.combination, 1);
        assert_eq!(r.positions, vec![Point3::new(20.0, 10.0, 25.0)]);
    }

    #[test]
    fn verify_rejects_just_below_threshold() {
        let (space, grids, zone, band) = tiny_geometry();
        let s = toy_matrix();
        // Row 1 has min 3.0; a threshold 0.1 dB above rejects it and the
        // fallback (row 1 again, the global max-min) stays infeasible.
        let gamma = 3.0 * crate::radio::db_to_linear(0.1);
        let r = verify_placement(1, &s, gamma, &space, &grids, &zone, &band).unwrap();
        assert!(!r.feasible);
        assert!(r.relaxation_gap);
        assert_eq!(r.combination, 1);
    }

    #[test]
    fn verify_substitutes_max_min_on_gap() {
        let (space, grids, zone, band) = tiny_geometry();
        let s = toy_matrix();
        // Index 0 (min 1.0) fails at gamma 2; the max-min row 1 passes.
        let r = verify_placement(0, &s, 2.0, &space, &grids, &zone, &band).unwrap();
        assert!(r.relaxation_gap);
        assert!(r.feasible);
        assert_eq!(r.combination, 1);
    }

    #[test]
    fn pipeline_lands_in_oracle_set_or_flags() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for trial in 0..20 {
            let rows: Vec<Vec<f64>> = (0..27)
                .map(|_| (0..3).map(|_| 0.1 + rng.random::<f64>() * 2.0).collect())
                .collect();
            let s = SinrMatrix::from_rows(rows);
            let grids = vec![CandidateGrid::new(
                0,
                (0..27).map(|i| Point3::new(i as f64, 0.0, 25.0)).collect(),
            )];
            let space = CombinationSpace::new(&[27]).unwrap();
            let zone = RestrictedZone::new(200.0, 200.0, 40.0, 11.0, ZoneMode::Band);
            let band = AltitudeBand::new(22.0, 36.0);
            let (_, maxmin) = max_min_combination(&s);
            let gamma = maxmin * 0.95;
            let feasible = brute_force_feasible(&s, gamma);
            let r = solve_with_lp(&s, gamma, &space, &grids, &zone, &band).unwrap();
            assert!(
                feasible.contains(&r.combination),
                "trial {trial}: pipeline output outside the oracle set"
            );
            assert!(r.feasible);
            let b = solve_with_oracle(&s, gamma, &space, &grids, &zone, &band).unwrap();
            assert_eq!(b.feasible, r.feasible);
        }
    }

    #[test]
    fn pipeline_reports_best_effort_when_nothing_is_feasible() {
        let (space, grids, zone, band) = tiny_geometry();
        let s = toy_matrix();
        let r = solve_with_lp(&s, 100.0, &space, &grids, &zone, &band).unwrap();
        assert!(!r.feasible && !r.relaxation_gap);
        assert_eq!(r.combination, 1, "max-min row expected as best effort");
        let b = solve_with_oracle(&s, 100.0, &space, &grids, &zone, &band).unwrap();
        assert_eq!(b.combination, 1);
        assert!(!b.feasible);
    }

    #[test]
    fn location_matrix_tau_of_indicator_is_row() {
        let (space, grids, ..) = tiny_geometry();
        let l = LocationMatrix {
            space: &space,
            grids: &grids,
        };
        let e = SelectionVector::indicator(3, 2);
        assert_eq!(l.tau(&e).unwrap(), l.row(2).unwrap());
    }
}
