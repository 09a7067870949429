//! Mesh-discrete weighted Fekete configurations and transfinite-diameter
//! estimates `δ̂^Q_n = W_n^{1/l_n}`.
//!
//! The search maximizes `|VDM_n^Q|` over `d_n`-subsets of the mesh: greedy
//! LU (discrete Leja) seeding followed by single-point exchange passes. A
//! swap of slot `j` for mesh point `k` changes the weighted determinant by the
//! factor `(M^{-1} c_k)_j = y_j·c_k` with `M^T y_j = e_j`, so one transposed
//! solve per slot scores every candidate. Meshes small enough to enumerate
//! are then searched exhaustively.

use serde::{Deserialize, Serialize};

use crate::error::{PptError, Result};
use crate::linalg::{Lu, PIVOT_FLOOR};
use crate::measure::GridMeasure;
use crate::mesh::WeightedMesh;
use crate::polytope::{ConvexBody, MonomialBasis};
use crate::vdm::{BasisEvaluator, Configuration};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeketeOptions {
    /// Cap on exchange passes.
    pub max_passes: usize,
    /// A swap must raise `log|VDM^Q|` by more than this.
    pub tol: f64,
    /// Meshes with at most this many `d_n`-subsets are also searched
    /// exhaustively, so small cases return the global maximum.
    pub exhaustive_limit: u64,
}

impl Default for FeketeOptions {
    fn default() -> Self {
        FeketeOptions {
            max_passes: 50,
            tol: 1e-12,
            exhaustive_limit: 50_000,
        }
    }
}

/// Result of [`fekete_points`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeketeSet {
    pub config: Configuration,
    /// Exchange passes run (including the final pass without a swap).
    pub passes: usize,
    /// `false` when the pass cap was hit while swaps still improved.
    pub converged: bool,
}

impl FeketeSet {
    pub fn log_wvdm(&self) -> f64 {
        self.config.log_wvdm.unwrap_or(f64::NEG_INFINITY)
    }

    pub fn indices(&self) -> &[usize] {
        self.config.mesh_indices.as_deref().unwrap_or(&[])
    }
}

/// Basis columns `e(x_k)` for every mesh point, with their log weights
/// `-n(Q(x_k) - min Q)` and the weighted copies used for greedy seeding.
pub(crate) struct WeightedColumns {
    pub d_n: usize,
    raw: Vec<f64>,
    /// `e(x_k)·exp(-n(Q(x_k) - min Q))`; zero where that underflows.
    pub cols: Vec<f64>,
    pub log_weight: Vec<f64>,
    /// Finite `Q` at the point.
    pub active: Vec<bool>,
    /// Added to `log|det|` of raw columns plus log weights to get `log|VDM_n^Q|`.
    pub offset: f64,
}

impl WeightedColumns {
    pub fn new(mesh: &WeightedMesh, basis: &MonomialBasis) -> Self {
        let eval = BasisEvaluator::for_mesh(basis, mesh);
        let d_n = basis.d_n;
        let q_min = mesh.q_min();
        let n = basis.n as f64;
        let mut raw = vec![0.0; mesh.len() * d_n];
        let mut cols = vec![0.0; mesh.len() * d_n];
        let mut log_weight = vec![f64::NEG_INFINITY; mesh.len()];
        let mut active = vec![false; mesh.len()];
        for k in 0..mesh.len() {
            let q = mesh.q()[k];
            if !q.is_finite() {
                continue;
            }
            let lw = -n * (q - q_min);
            let scale = lw.exp();
            let col = &mut raw[k * d_n..(k + 1) * d_n];
            eval.column(mesh.point(k), col);
            for (w, r) in cols[k * d_n..(k + 1) * d_n].iter_mut().zip(col.iter()) {
                *w = r * scale;
            }
            log_weight[k] = lw;
            active[k] = true;
        }
        let offset = eval.log_correction() - n * d_n as f64 * q_min;
        WeightedColumns {
            d_n,
            raw,
            cols,
            log_weight,
            active,
            offset,
        }
    }

    /// Unweighted basis column of mesh point `k`.
    pub fn col(&self, k: usize) -> &[f64] {
        &self.raw[k * self.d_n..(k + 1) * self.d_n]
    }

    /// Weighted basis column of mesh point `k`.
    pub fn weighted_col(&self, k: usize) -> &[f64] {
        &self.cols[k * self.d_n..(k + 1) * self.d_n]
    }

    /// Unweighted matrix with columns `e(x_k)`, `k ∈ idx`.
    pub fn matrix(&self, idx: &[usize]) -> Vec<f64> {
        let n = self.d_n;
        let mut m = vec![0.0; n * n];
        for (j, &k) in idx.iter().enumerate() {
            for (i, v) in self.col(k).iter().enumerate() {
                m[i * n + j] = *v;
            }
        }
        m
    }

    /// `log|VDM_n^Q|` of the mesh tuple `idx`; `-∞` for repeated indices.
    pub fn log_wvdm(&self, idx: &[usize]) -> f64 {
        for (i, a) in idx.iter().enumerate() {
            if !self.active[*a] || idx[..i].contains(a) {
                return f64::NEG_INFINITY;
            }
        }
        let det = Lu::factor(self.d_n, self.matrix(idx)).log_abs_det();
        if det == f64::NEG_INFINITY {
            det
        } else {
            det + idx.iter().map(|&k| self.log_weight[k]).sum::<f64>() + self.offset
        }
    }

    /// Greedy LU with row pivoting on the `m x d_n` matrix of weighted rows.
    pub fn leja(&self) -> Result<Vec<usize>> {
        let n = self.d_n;
        let m = self.active.len();
        let mut r = self.cols.clone();
        let mut chosen = vec![false; m];
        let mut idx = Vec::with_capacity(n);
        for i in 0..n {
            let mut best = None;
            let mut best_abs = 0.0;
            for k in 0..m {
                if self.active[k] && !chosen[k] {
                    let v = r[k * n + i].abs();
                    if v > best_abs {
                        best_abs = v;
                        best = Some(k);
                    }
                }
            }
            let p = match best {
                Some(p) if best_abs >= PIVOT_FLOOR => p,
                _ => {
                    return Err(PptError::DegenerateMesh(format!(
                        "no mesh point gives a nonzero pivot for basis row {i}; \
                         every {n}-point configuration has VDM^Q = 0"
                    )))
                }
            };
            chosen[p] = true;
            idx.push(p);
            let pivot_row: Vec<f64> = r[p * n + i..(p + 1) * n].to_vec();
            for k in 0..m {
                if self.active[k] && !chosen[k] {
                    let f = r[k * n + i] / pivot_row[0];
                    if f != 0.0 {
                        for (t, pv) in pivot_row.iter().enumerate().skip(1) {
                            r[k * n + i + t] -= f * pv;
                        }
                    }
                }
            }
        }
        Ok(idx)
    }
}

/// Weighted Fekete configuration on the mesh for `basis` (whose `n` is the
/// weight exponent): locally maximal under single swaps, and globally maximal
/// when the mesh is small enough to enumerate. Deterministic given the mesh order.
pub fn fekete_points(mesh: &WeightedMesh, basis: &MonomialBasis, opts: &FeketeOptions) -> Result<FeketeSet> {
    if mesh.dim() != basis.dim {
        return Err(PptError::DimensionMismatch {
            expected: basis.dim,
            got: mesh.dim(),
        });
    }
    if mesh.len() < basis.d_n {
        return Err(PptError::DegenerateMesh(format!(
            "mesh has {} points, basis needs {}",
            mesh.len(),
            basis.d_n
        )));
    }
    let columns = WeightedColumns::new(mesh, basis);
    let mut idx = columns.leja()?;
    let n = basis.d_n;
    let m = mesh.len();
    let mut passes = 0;
    let mut converged = false;
    let mut member = vec![false; m];
    for &k in &idx {
        member[k] = true;
    }
    while passes < opts.max_passes {
        passes += 1;
        let mut improved = false;
        for j in 0..n {
            let lu = Lu::factor(n, columns.matrix(&idx));
            if lu.is_singular() {
                return Err(PptError::DegenerateMesh("exchange reached a singular configuration".into()));
            }
            let mut y = vec![0.0; n];
            y[j] = 1.0;
            lu.solve_transpose(&mut y);
            let base = columns.log_weight[idx[j]];
            let mut best_k = idx[j];
            let mut best = f64::NEG_INFINITY;
            for k in 0..m {
                // other current nodes give a zero ratio up to round-off
                if !columns.active[k] || (member[k] && k != idx[j]) {
                    continue;
                }
                let r: f64 = y.iter().zip(columns.col(k)).map(|(a, b)| a * b).sum::<f64>().abs();
                let gain = r.ln() + columns.log_weight[k] - base;
                if gain > best {
                    best = gain;
                    best_k = k;
                }
            }
            if best > opts.tol && best_k != idx[j] {
                member[idx[j]] = false;
                member[best_k] = true;
                idx[j] = best_k;
                improved = true;
            }
        }
        if !improved {
            converged = true;
            break;
        }
    }
    if subset_count(m, n) <= opts.exhaustive_limit as f64 {
        idx = exhaustive(&columns, m, idx, opts.tol);
    }
    idx.sort_unstable();
    let config = Configuration::from_mesh(mesh, basis, &idx)?;
    if config.log_wvdm == Some(f64::NEG_INFINITY) {
        return Err(PptError::DegenerateMesh("Fekete search ended with VDM^Q = 0".into()));
    }
    Ok(FeketeSet {
        config,
        passes,
        converged,
    })
}

/// `C(m, k)` as a float, saturating far above any useful limit.
fn subset_count(m: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (m - i) as f64 / (i + 1) as f64)
}

/// Best subset by full enumeration; `start` is kept unless beaten by more than `tol`.
fn exhaustive(columns: &WeightedColumns, m: usize, start: Vec<usize>, tol: f64) -> Vec<usize> {
    let k = start.len();
    let mut best_val = columns.log_wvdm(&start);
    let mut best = start;
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        let v = columns.log_wvdm(&idx);
        if v > best_val + tol {
            best_val = v;
            best = idx.clone();
        }
        let Some(pos) = (0..k).rev().find(|&i| idx[i] < m - k + i) else {
            return best;
        };
        idx[pos] += 1;
        for j in pos + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// One entry of the `δ̂^Q_n` sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaEstimate {
    pub n: u32,
    pub d_n: usize,
    pub l_n: u64,
    /// `log W_n` on the mesh (a lower bound on the continuum maximum).
    pub log_w: f64,
    /// `exp(log_w / l_n)`.
    pub delta_hat: f64,
    pub converged: bool,
    pub fekete: FeketeSet,
}

impl DeltaEstimate {
    pub fn from_fekete(fekete: FeketeSet) -> Self {
        let basis = &fekete.config.basis;
        let log_w = fekete.log_wvdm();
        DeltaEstimate {
            n: basis.n,
            d_n: basis.d_n,
            l_n: basis.l_n,
            log_w,
            delta_hat: (log_w / basis.l_n as f64).exp(),
            converged: fekete.converged,
            fekete,
        }
    }

    pub fn log_delta(&self) -> f64 {
        self.log_w / self.l_n as f64
    }
}

/// `δ̂^Q_n` for each `n` in the (strictly increasing) list.
pub fn delta_estimate(
    mesh: &WeightedMesh,
    body: &ConvexBody,
    n_list: &[u32],
    opts: &FeketeOptions,
) -> Result<Vec<DeltaEstimate>> {
    if n_list.is_empty() || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(PptError::InvalidArgument("n list must be nonempty and increasing".into()));
    }
    n_list
        .iter()
        .map(|&n| {
            let basis = body.lattice_points(n)?;
            Ok(DeltaEstimate::from_fekete(fekete_points(mesh, &basis, opts)?))
        })
        .collect()
}

/// Least-squares fit `log δ̂_n ≈ L + a (log n)/n + b/n` over the estimates;
/// returns `exp(L)`. Reported as a diagnostic only, the limit has no
/// guaranteed rate.
pub fn extrapolate_delta(estimates: &[DeltaEstimate]) -> Option<f64> {
    let rows: Vec<[f64; 4]> = estimates
        .iter()
        .filter(|e| e.n >= 2 && e.log_w.is_finite())
        .map(|e| {
            let n = e.n as f64;
            [1.0, n.ln() / n, 1.0 / n, e.log_delta()]
        })
        .collect();
    if rows.len() < 3 {
        return None;
    }
    let mut ata = vec![0.0; 9];
    let mut atb = vec![0.0; 3];
    for r in &rows {
        for i in 0..3 {
            for j in 0..3 {
                ata[i * 3 + j] += r[i] * r[j];
            }
            atb[i] += r[i] * r[3];
        }
    }
    let lu = Lu::factor(3, ata);
    if lu.is_singular() {
        return None;
    }
    lu.solve(&mut atb);
    Some(atb[0].exp())
}

/// `(γ_d / d_n) Σ δ_{x_j}`: the Fekete configuration as an element of `M_P(K)`.
pub fn fekete_measure(config: &Configuration, gamma_d: f64) -> GridMeasure {
    let mut mu = GridMeasure::uniform(config.points.clone(), gamma_d);
    mu.mesh_index = config.mesh_indices.clone();
    mu
}
