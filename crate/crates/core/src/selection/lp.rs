//! Dense revised simplex for the max-min selection program
//!
//! ```text
//! maximize   t
//! subject to sum_a e_a * S[a,k] >= t   for every user k
//!            sum_a e_a <= 1
//!            e >= 0, t >= 0
//! ```
//!
//! The program has `U + 1` rows but `c + U + 2` columns, with the
//! combination count `c` running into the hundreds of thousands. Columns are
//! therefore never materialized: pricing reads the SINR matrix rows in
//! place. The basis is tiny (`U + 1` square), so the basis inverse is
//! refactorized from scratch on every pivot, trading a negligible O(m^3)
//! for numerical robustness.
//!
//! Pivoting is Dantzig's rule with deterministic lowest-index tie-breaks,
//! falling back to Bland's rule if the objective stalls, which guarantees
//! termination on degenerate instances.

use crate::radio::SinrMatrix;

const REDUCED_COST_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-11;
const RATIO_TOL: f64 = 1e-9;
const STALL_LIMIT: usize = 60;
const MAX_ITERATIONS: usize = 50_000;

/// Optimal basic solution of the max-min program.
#[derive(Debug, Clone)]
pub(crate) struct MaxMinSolution {
    /// Optimal margin `t*` = best achievable minimum of `e^T S`.
    pub value: f64,
    /// Nonzero selection weights, ascending by combination index.
    pub support: Vec<(usize, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum LpFailure {
    IterationLimit,
    SingularBasis,
    Unbounded,
}

impl std::fmt::Display for LpFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LpFailure::IterationLimit => write!(f, "simplex iteration limit reached"),
            LpFailure::SingularBasis => write!(f, "singular basis matrix"),
            LpFailure::Unbounded => write!(f, "unbounded ascent direction"),
        }
    }
}

/// Variable layout: `0..c` selection weights, `c` the margin t, then one
/// slack per row.
struct Layout {
    c: usize,
    m: usize,
}

impl Layout {
    fn t_col(&self) -> usize {
        self.c
    }

    fn slack(&self, row: usize) -> usize {
        self.c + 1 + row
    }

    fn n_vars(&self) -> usize {
        self.c + 1 + self.m
    }
}

pub(crate) fn solve_max_min(s: &SinrMatrix) -> Result<MaxMinSolution, LpFailure> {
    let c = s.n_combinations();
    let u = s.n_users();
    let m = u + 1;
    let layout = Layout { c, m };

    let mut basis: Vec<usize> = (0..m).map(|i| layout.slack(i)).collect();
    let mut in_basis = vec![false; layout.n_vars()];
    for &v in &basis {
        in_basis[v] = true;
    }

    let mut b_inv = vec![0.0; m * m];
    let mut x = vec![0.0; m];
    let mut y = vec![0.0; m];
    let mut col = vec![0.0; m];
    let mut dir = vec![0.0; m];

    let mut bland = false;
    let mut stall = 0usize;
    let mut last_obj = f64::NEG_INFINITY;

    for _ in 0..MAX_ITERATIONS {
        factorize(s, &layout, &basis, &mut b_inv).ok_or(LpFailure::SingularBasis)?;

        // x_B = B^-1 b with b = (0, ..., 0, 1).
        for i in 0..m {
            x[i] = b_inv[i * m + (m - 1)];
        }
        // Multipliers y = B^-T c_B; only the t column carries cost 1.
        let t_row = basis.iter().position(|&v| v == layout.t_col());
        for r in 0..m {
            y[r] = match t_row {
                Some(i) => b_inv[i * m + r],
                None => 0.0,
            };
        }

        let obj = match t_row {
            Some(i) => x[i],
            None => 0.0,
        };
        if obj <= last_obj + 1e-12 {
            stall += 1;
            if stall > STALL_LIMIT {
                bland = true;
            }
        } else {
            stall = 0;
            last_obj = obj;
        }

        let entering = match price(s, &layout, &y, &in_basis, bland) {
            Some(j) => j,
            None => {
                // Optimal: collect the selection weights from the basis.
                let mut support: Vec<(usize, f64)> = basis
                    .iter()
                    .zip(&x)
                    .filter(|(&v, &xv)| v < c && xv > 0.0)
                    .map(|(&v, &xv)| (v, xv.min(1.0)))
                    .collect();
                support.sort_unstable_by_key(|&(a, _)| a);
                return Ok(MaxMinSolution {
                    value: obj.max(0.0),
                    support,
                });
            }
        };

        column(s, &layout, entering, &mut col);
        for i in 0..m {
            dir[i] = (0..m).map(|r| b_inv[i * m + r] * col[r]).sum();
        }

        // Ratio test; ties break toward the smallest leaving variable index.
        let mut leave: Option<usize> = None;
        let mut best_ratio = f64::INFINITY;
        for i in 0..m {
            if dir[i] > RATIO_TOL {
                let ratio = x[i].max(0.0) / dir[i];
                let better = match leave {
                    None => true,
                    Some(cur) => {
                        ratio < best_ratio - 1e-15
                            || (ratio <= best_ratio + 1e-15 && basis[i] < basis[cur])
                    }
                };
                if better {
                    best_ratio = ratio;
                    leave = Some(i);
                }
            }
        }
        let leave = leave.ok_or(LpFailure::Unbounded)?;

        in_basis[basis[leave]] = false;
        in_basis[entering] = true;
        basis[leave] = entering;
    }
    Err(LpFailure::IterationLimit)
}

/// Write the constraint column of variable `j` into `out`.
fn column(s: &SinrMatrix, layout: &Layout, j: usize, out: &mut [f64]) {
    let m = layout.m;
    out.fill(0.0);
    if j < layout.c {
        let row = s.row(j);
        for k in 0..m - 1 {
            out[k] = -row[k];
        }
        out[m - 1] = 1.0;
    } else if j == layout.t_col() {
        for v in out.iter_mut().take(m - 1) {
            *v = 1.0;
        }
    } else {
        out[j - layout.c - 1] = 1.0;
    }
}

/// Pick the entering variable, or `None` at optimality.
///
/// Dantzig mode returns the most positive reduced cost (lowest index on
/// ties); Bland mode returns the lowest-index positive one.
fn price(
    s: &SinrMatrix,
    layout: &Layout,
    y: &[f64],
    in_basis: &[bool],
    bland: bool,
) -> Option<usize> {
    let u = layout.m - 1;
    let y_budget = y[u];
    let mut best: Option<(usize, f64)> = None;
    let mut consider = |j: usize, d: f64| -> bool {
        if d > REDUCED_COST_TOL {
            if bland {
                return true;
            }
            if best.map_or(true, |(_, bd)| d > bd) {
                best = Some((j, d));
            }
        }
        false
    };

    // Selection-weight columns: d = y[0..u] . S[a,:] - y[u].
    for a in 0..layout.c {
        if in_basis[a] {
            continue;
        }
        let row = s.row(a);
        let dot: f64 = row.iter().zip(y).map(|(sv, yv)| sv * yv).sum();
        if consider(a, dot - y_budget) {
            return Some(a);
        }
    }
    // Margin column: d = 1 - sum_k y[k].
    if !in_basis[layout.t_col()] {
        let d = 1.0 - y[..u].iter().sum::<f64>();
        if consider(layout.t_col(), d) {
            return Some(layout.t_col());
        }
    }
    // Slack columns: d = -y[i].
    for i in 0..layout.m {
        let j = layout.slack(i);
        if !in_basis[j] && consider(j, -y[i]) {
            return Some(j);
        }
    }
    best.map(|(j, _)| j)
}

/// Rebuild the inverse of the basis matrix by Gauss-Jordan elimination with
/// partial pivoting. Returns `None` on a numerically singular basis.
fn factorize(s: &SinrMatrix, layout: &Layout, basis: &[usize], b_inv: &mut [f64]) -> Option<()> {
    let m = layout.m;
    let mut mat = vec![0.0; m * m];
    let mut col = vec![0.0; m];
    for (i, &v) in basis.iter().enumerate() {
        column(s, layout, v, &mut col);
        for r in 0..m {
            mat[r * m + i] = col[r];
        }
    }
    b_inv.fill(0.0);
    for i in 0..m {
        b_inv[i * m + i] = 1.0;
    }
    for pivot in 0..m {
        let (row_max, val) = (pivot..m)
            .map(|r| (r, mat[r * m + pivot].abs()))
            .max_by(|a, b| a.1.partial_cmp(&b.1).expect("finite"))?;
        if val < PIVOT_TOL {
            return None;
        }
        if row_max != pivot {
            for j in 0..m {
                mat.swap(pivot * m + j, row_max * m + j);
                b_inv.swap(pivot * m + j, row_max * m + j);
            }
        }
        let diag = mat[pivot * m + pivot];
        for j in 0..m {
            mat[pivot * m + j] /= diag;
            b_inv[pivot * m + j] /= diag;
        }
        for r in 0..m {
            if r != pivot {
                let factor = mat[r * m + pivot];
                if factor != 0.0 {
                    for j in 0..m {
                        mat[r * m + j] -= factor * mat[pivot * m + j];
                        b_inv[r * m + j] -= factor * b_inv[pivot * m + j];
                    }
                }
            }
        }
    }
    Some(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: Vec<Vec<f64>>) -> SinrMatrix {
        SinrMatrix::from_rows(rows)
    }

    fn dense(c: usize, support: &[(usize, f64)]) -> Vec<f64> {
        let mut e = vec![0.0; c];
        for &(a, w) in support {
            e[a] = w;
        }
        e
    }

    fn margins(s: &SinrMatrix, e: &[f64]) -> Vec<f64> {
        (0..s.n_users())
            .map(|k| (0..s.n_combinations()).map(|a| e[a] * s.get(a, k)).sum())
            .collect()
    }

    #[test]
    fn matching_pennies_value_is_half() {
        let s = matrix(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        let sol = solve_max_min(&s).unwrap();
        assert!((sol.value - 0.5).abs() < 1e-12);
        let e = dense(2, &sol.support);
        assert!((e[0] - 0.5).abs() < 1e-12 && (e[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn pure_row_optimum() {
        // Row 0 already maximizes the minimum; mixing cannot beat 2.
        let s = matrix(vec![vec![2.0, 2.0], vec![1.0, 3.0], vec![3.0, 1.0]]);
        let sol = solve_max_min(&s).unwrap();
        assert!((sol.value - 2.0).abs() < 1e-12);
        let e = dense(3, &sol.support);
        let m = margins(&s, &e);
        assert!(m.iter().all(|&v| v >= 2.0 - 1e-9));
        assert!(e.iter().sum::<f64>() <= 1.0 + 1e-9);
    }

    #[test]
    fn dominant_row_gets_all_weight() {
        let s = matrix(vec![vec![10.0, 10.0], vec![0.1, 0.2], vec![0.3, 0.1]]);
        let sol = solve_max_min(&s).unwrap();
        assert!((sol.value - 10.0).abs() < 1e-12);
        assert_eq!(sol.support.len(), 1);
        assert_eq!(sol.support[0].0, 0);
        assert!((sol.support[0].1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_row_value_is_row_min() {
        let s = matrix(vec![vec![4.0, 2.5, 7.0]]);
        let sol = solve_max_min(&s).unwrap();
        assert!((sol.value - 2.5).abs() < 1e-12);
    }

    #[test]
    fn all_zero_matrix_gives_zero_value() {
        let s = matrix(vec![vec![0.0, 0.0], vec![0.0, 0.0]]);
        let sol = solve_max_min(&s).unwrap();
        assert_eq!(sol.value, 0.0);
    }

    #[test]
    fn value_sits_between_game_bounds_and_is_deterministic() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for trial in 0..25 {
            let c = 2 + (trial % 9);
            let u = 1 + (trial % 5);
            let rows: Vec<Vec<f64>> = (0..c)
                .map(|_| (0..u).map(|_| rng.random::<f64>() * 5.0).collect())
                .collect();
            let s = matrix(rows.clone());
            let sol = solve_max_min(&s).unwrap();

            let pure_best = (0..c)
                .map(|a| rows[a].iter().cloned().fold(f64::INFINITY, f64::min))
                .fold(f64::NEG_INFINITY, f64::max);
            let minimax = (0..u)
                .map(|k| (0..c).map(|a| rows[a][k]).fold(f64::NEG_INFINITY, f64::max))
                .fold(f64::INFINITY, f64::min);
            assert!(sol.value >= pure_best - 1e-9, "trial {trial}");
            assert!(sol.value <= minimax + 1e-9, "trial {trial}");

            let e = dense(c, &sol.support);
            assert!(e.iter().all(|&v| (-1e-12..=1.0 + 1e-12).contains(&v)));
            assert!(e.iter().sum::<f64>() <= 1.0 + 1e-9);
            for (k, &mv) in margins(&s, &e).iter().enumerate() {
                assert!(mv >= sol.value - 1e-9, "trial {trial} user {k}");
            }

            let again = solve_max_min(&s).unwrap();
            assert_eq!(sol.value.to_bits(), again.value.to_bits());
            assert_eq!(sol.support, again.support);
        }
    }
}
