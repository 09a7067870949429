//! Small dense two-phase revised simplex for standard-form linear programs
//!
//! ```text
//! minimize c·x  subject to  A x = b,  x ≥ 0
//! ```
//!
//! Used for convex-hull membership (phase one only) and for the mesh
//! polynomial bound of the extremal function. Problems have at most a few
//! dozen rows, so the basis matrix is cheap to refactor.

use crate::error::{PptError, Result};
use crate::linalg::Lu;

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-10;
const MAX_ITERATIONS: usize = 100_000;
/// Consecutive degenerate pivots before switching to Bland's rule.
const DEGENERATE_STREAK: usize = 50;

#[derive(Clone, Debug)]
pub struct StandardLp {
    pub rows: usize,
    pub cols: usize,
    /// Row-major `rows x cols`.
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub value: f64,
    pub x: Vec<f64>,
    /// Simplex multipliers `y` with `A^T y ≤ c` (the dual solution).
    pub duals: Vec<f64>,
}

#[derive(Clone, Debug)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
    Unbounded,
}

/// Revised simplex state over the sign-adjusted system `[A | I] x = b`,
/// `b ≥ 0`. The basis matrix is refactored from the original columns at
/// every iteration, so round-off does not accumulate across pivots.
struct Revised<'a> {
    m: usize,
    n: usize,
    a: &'a [f64],
    sign: Vec<f64>,
    b: Vec<f64>,
    basis: Vec<usize>,
}

enum Step {
    Optimal,
    Unbounded,
}

impl Revised<'_> {
    /// Entry `i` of column `j` of `[A | I]` after the row sign flip.
    fn entry(&self, i: usize, j: usize) -> f64 {
        if j < self.n {
            self.sign[i] * self.a[i * self.n + j]
        } else if j - self.n == i {
            1.0
        } else {
            0.0
        }
    }

    fn column(&self, j: usize) -> Vec<f64> {
        (0..self.m).map(|i| self.entry(i, j)).collect()
    }

    fn factor(&self) -> Result<Lu> {
        let m = self.m;
        let mut bm = vec![0.0; m * m];
        for (k, &j) in self.basis.iter().enumerate() {
            for i in 0..m {
                bm[i * m + k] = self.entry(i, j);
            }
        }
        let lu = Lu::factor(m, bm);
        if lu.is_singular() {
            return Err(PptError::LinearProgram("basis matrix became singular".into()));
        }
        Ok(lu)
    }

    fn primal(&self, lu: &Lu) -> Vec<f64> {
        let mut x = self.b.clone();
        lu.solve(&mut x);
        x
    }

    fn duals(&self, lu: &Lu, cost: &dyn Fn(usize) -> f64) -> Vec<f64> {
        let mut y: Vec<f64> = self.basis.iter().map(|&j| cost(j)).collect();
        lu.solve_transpose(&mut y);
        y
    }

    fn reduced_cost(&self, y: &[f64], j: usize, cost: &dyn Fn(usize) -> f64) -> f64 {
        if j < self.n {
            let dot: f64 = (0..self.m).map(|i| y[i] * self.sign[i] * self.a[i * self.n + j]).sum();
            cost(j) - dot
        } else {
            cost(j) - y[j - self.n]
        }
    }

    /// Iterates until optimal over entering columns `< allowed`. Basic
    /// artificial variables are pinned at zero when `pin_artificials`.
    fn run(&mut self, cost: &dyn Fn(usize) -> f64, allowed: usize, pin_artificials: bool) -> Result<Step> {
        let mut degenerate = 0usize;
        let mut in_basis = vec![false; self.n + self.m];
        for &j in &self.basis {
            in_basis[j] = true;
        }
        for _ in 0..MAX_ITERATIONS {
            let lu = self.factor()?;
            let x = self.primal(&lu);
            let y = self.duals(&lu, cost);
            let bland = degenerate >= DEGENERATE_STREAK;
            let mut enter = None;
            let mut best = 0.0;
            for j in 0..allowed {
                if in_basis[j] {
                    continue;
                }
                let r = self.reduced_cost(&y, j, cost);
                if r < -COST_TOL * (1.0 + cost(j).abs()) && (enter.is_none() || r < best) {
                    enter = Some(j);
                    best = r;
                    if bland {
                        break;
                    }
                }
            }
            let Some(q) = enter else {
                return Ok(Step::Optimal);
            };
            let mut d = self.column(q);
            lu.solve(&mut d);
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let pinned = pin_artificials && self.basis[i] >= self.n;
                let ratio = if pinned && d[i].abs() > PIVOT_TOL {
                    0.0
                } else if d[i] > PIVOT_TOL {
                    x[i].max(0.0) / d[i]
                } else {
                    continue;
                };
                let better = match leave {
                    None => true,
                    Some((l, r)) => {
                        if ratio < r - 1e-12 {
                            true
                        } else if ratio <= r + 1e-12 {
                            if bland {
                                self.basis[i] < self.basis[l]
                            } else {
                                d[i].abs() > d[l].abs()
                            }
                        } else {
                            false
                        }
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((row, ratio)) = leave else {
                return Ok(Step::Unbounded);
            };
            degenerate = if ratio <= 1e-12 { degenerate + 1 } else { 0 };
            in_basis[self.basis[row]] = false;
            in_basis[q] = true;
            self.basis[row] = q;
        }
        Err(PptError::LinearProgram("iteration limit reached".into()))
    }
}

/// Solves a standard-form LP with a two-phase revised simplex.
pub fn solve(lp: &StandardLp) -> Result<LpOutcome> {
    solve_perturbed(lp, 0.0)
}

/// Like [`solve`], but pivots on a right-hand side shifted by distinct
/// relative amounts of order `eps`, which breaks the ties that make heavily
/// degenerate problems stall. The reported `x` is recomputed from the final
/// basis with the unshifted `b`.
pub fn solve_perturbed(lp: &StandardLp, eps: f64) -> Result<LpOutcome> {
    let (m, n) = (lp.rows, lp.cols);
    if lp.a.len() != m * n || lp.b.len() != m || lp.c.len() != n {
        return Err(PptError::LinearProgram("inconsistent problem shape".into()));
    }
    let sign: Vec<f64> = lp.b.iter().map(|&v| if v < 0.0 { -1.0 } else { 1.0 }).collect();
    let b: Vec<f64> = lp.b.iter().zip(&sign).map(|(v, s)| v * s).collect();
    let scale = 1.0 + b.iter().sum::<f64>();
    let exact_b = b.clone();
    let b = b
        .iter()
        .enumerate()
        .map(|(i, v)| v + eps * scale * (1.0 + (i as f64 * 0.618_034).fract()))
        .collect();
    let mut rs = Revised {
        m,
        n,
        a: &lp.a,
        sign,
        b,
        basis: (n..n + m).collect(),
    };
    // phase one: minimize the sum of artificials
    let phase_one = |j: usize| if j < n { 0.0 } else { 1.0 };
    rs.run(&phase_one, n, false)?;
    let lu = rs.factor()?;
    let x = rs.primal(&lu);
    let infeasibility: f64 = rs
        .basis
        .iter()
        .zip(&x)
        .filter(|(&j, _)| j >= n)
        .map(|(_, v)| v.max(0.0))
        .sum();
    if infeasibility > 1e-9 * scale {
        return Ok(LpOutcome::Infeasible);
    }
    let phase_two = |j: usize| if j < n { lp.c[j] } else { 0.0 };
    if let Step::Unbounded = rs.run(&phase_two, n, true)? {
        return Ok(LpOutcome::Unbounded);
    }
    rs.b = exact_b;
    let lu = rs.factor()?;
    let xb = rs.primal(&lu);
    let y = rs.duals(&lu, &phase_two);
    let mut x = vec![0.0; n];
    for (&j, v) in rs.basis.iter().zip(&xb) {
        if j < n {
            x[j] = v.max(0.0);
        }
    }
    let value = lp.c.iter().zip(&x).map(|(c, x)| c * x).sum();
    let duals = y.iter().zip(&rs.sign).map(|(v, s)| v * s).collect();
    Ok(LpOutcome::Optimal(LpSolution { value, x, duals }))
}

/// Whether `y` lies in the convex hull of `points` (phase-one feasibility of
/// `Σ λ_k p_k = y`, `Σ λ_k = 1`, `λ ≥ 0`).
pub fn in_convex_hull(points: &[Vec<f64>], y: &[f64]) -> Result<bool> {
    let d = y.len();
    let k = points.len();
    if k == 0 {
        return Ok(false);
    }
    let rows = d + 1;
    let mut a = vec![0.0; rows * k];
    for (j, p) in points.iter().enumerate() {
        if p.len() != d {
            return Err(PptError::DimensionMismatch {
                expected: d,
                got: p.len(),
            });
        }
        for i in 0..d {
            a[i * k + j] = p[i];
        }
        a[d * k + j] = 1.0;
    }
    let mut b = y.to_vec();
    b.push(1.0);
    let lp = StandardLp {
        rows,
        cols: k,
        a,
        b,
        c: vec![0.0; k],
    };
    Ok(matches!(solve(&lp)?, LpOutcome::Optimal(_)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn optimal(lp: &StandardLp) -> LpSolution {
        match solve(lp).unwrap() {
            LpOutcome::Optimal(s) => s,
            other => panic!("expected optimum, got {other:?}"),
        }
    }

    #[test]
    fn textbook_problem() {
        // max 3x + 5y st x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18 → 36 at (2, 6)
        let lp = StandardLp {
            rows: 3,
            cols: 5,
            a: vec![
                1.0, 0.0, 1.0, 0.0, 0.0, //
                0.0, 2.0, 0.0, 1.0, 0.0, //
                3.0, 2.0, 0.0, 0.0, 1.0,
            ],
            b: vec![4.0, 12.0, 18.0],
            c: vec![-3.0, -5.0, 0.0, 0.0, 0.0],
        };
        let s = optimal(&lp);
        assert!((s.value + 36.0).abs() < 1e-9);
        assert!((s.x[0] - 2.0).abs() < 1e-9 && (s.x[1] - 6.0).abs() < 1e-9);
        // strong duality: b·y = c·x
        let dual_value: f64 = lp.b.iter().zip(&s.duals).map(|(b, y)| b * y).sum();
        assert!((dual_value - s.value).abs() < 1e-9);
    }

    #[test]
    fn infeasible_and_unbounded() {
        // x1 + x2 = -1 with x ≥ 0
        let lp = StandardLp {
            rows: 1,
            cols: 2,
            a: vec![1.0, 1.0],
            b: vec![-1.0],
            c: vec![0.0, 0.0],
        };
        assert!(matches!(solve(&lp).unwrap(), LpOutcome::Infeasible));
        // min -x1 st x1 - x2 = 0
        let lp = StandardLp {
            rows: 1,
            cols: 2,
            a: vec![1.0, -1.0],
            b: vec![0.0],
            c: vec![-1.0, 0.0],
        };
        assert!(matches!(solve(&lp).unwrap(), LpOutcome::Unbounded));
    }

    #[test]
    fn redundant_rows_are_tolerated() {
        let lp = StandardLp {
            rows: 2,
            cols: 2,
            a: vec![1.0, 1.0, 2.0, 2.0],
            b: vec![1.0, 2.0],
            c: vec![1.0, 2.0],
        };
        let s = optimal(&lp);
        assert!((s.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hull_membership() {
        let tri = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        assert!(in_convex_hull(&tri, &[0.5, 0.5]).unwrap());
        assert!(in_convex_hull(&tri, &[0.0, 0.0]).unwrap());
        assert!(in_convex_hull(&tri, &[0.2, 0.3]).unwrap());
        assert!(!in_convex_hull(&tri, &[0.6, 0.5]).unwrap());
        assert!(!in_convex_hull(&tri, &[-0.01, 0.5]).unwrap());
    }
}
