//! Log-magnitude of (weighted) Vandermonde determinants
//! `VDM(ζ_1..ζ_{d_n}) = det[e_i(ζ_j)]`, `e_i = z^{α(i)}`.
//!
//! Determinants are never materialized. Rows are evaluated in a scaled
//! tensor-Chebyshev basis when the exponent set is downward closed (the
//! change of basis from monomials is triangular, so the monomial determinant
//! is recovered by subtracting the log of the leading coefficients), columns
//! are equilibrated, and the LU pivots are summed in log scale.

use serde::{Deserialize, Serialize};

use crate::error::{PptError, Result};
use crate::linalg::Lu;
use crate::mesh::WeightedMesh;
use crate::polytope::MonomialBasis;

/// Evaluates the basis functions of `Poly(nP)` at points, in a
/// well-conditioned equivalent basis with a known determinant correction.
#[derive(Clone, Debug)]
pub struct BasisEvaluator {
    basis: MonomialBasis,
    /// `(center, half_width)` per coordinate.
    frame: Vec<(f64, f64)>,
    chebyshev: bool,
    max_deg: Vec<u32>,
    /// `log|det[x^α]| = log|det[e_i]| + log_correction`.
    log_correction: f64,
}

impl BasisEvaluator {
    /// Uses the box `bounds` (per-coordinate `(lo, hi)`) to scale coordinates.
    pub fn new(basis: &MonomialBasis, bounds: &[(f64, f64)]) -> Self {
        let chebyshev = basis.is_downward_closed();
        let frame: Vec<(f64, f64)> = bounds
            .iter()
            .map(|&(lo, hi)| {
                if chebyshev {
                    let half = (hi - lo) / 2.0;
                    ((lo + hi) / 2.0, if half > 0.0 { half } else { 1.0 })
                } else {
                    let s = lo.abs().max(hi.abs());
                    (0.0, if s > 0.0 { s } else { 1.0 })
                }
            })
            .collect();
        let ln2 = std::f64::consts::LN_2;
        let mut log_correction = 0.0;
        for alpha in &basis.exponents {
            for (i, &a) in alpha.iter().enumerate() {
                let ln_h = frame[i].1.ln();
                if chebyshev {
                    if a >= 1 {
                        // T_a((x-c)/h) = 2^{a-1} h^{-a} x^a + lower terms
                        log_correction -= (a as f64 - 1.0) * ln2 - a as f64 * ln_h;
                    }
                } else {
                    log_correction += a as f64 * ln_h;
                }
            }
        }
        BasisEvaluator {
            basis: basis.clone(),
            frame,
            chebyshev,
            max_deg: basis.max_degrees(),
            log_correction,
        }
    }

    pub fn for_points(basis: &MonomialBasis, pts: &[Vec<f64>]) -> Self {
        BasisEvaluator::new(basis, &bounding_box(basis.dim, pts))
    }

    pub fn for_mesh(basis: &MonomialBasis, mesh: &WeightedMesh) -> Self {
        BasisEvaluator::new(basis, &mesh.bounding_box())
    }

    pub fn basis(&self) -> &MonomialBasis {
        &self.basis
    }

    pub fn is_chebyshev(&self) -> bool {
        self.chebyshev
    }

    pub fn log_correction(&self) -> f64 {
        self.log_correction
    }

    /// Writes `e_i(x)` for every basis row `i` into `out`.
    pub fn column(&self, x: &[f64], out: &mut [f64]) {
        let per_coord: Vec<Vec<f64>> = (0..self.basis.dim)
            .map(|i| {
                let (c, h) = self.frame[i];
                let t = (x[i] - c) / h;
                let deg = self.max_deg[i] as usize;
                let mut v = Vec::with_capacity(deg + 1);
                v.push(1.0);
                if deg >= 1 {
                    v.push(t);
                }
                for k in 2..=deg {
                    let next = if self.chebyshev {
                        2.0 * t * v[k - 1] - v[k - 2]
                    } else {
                        t * v[k - 1]
                    };
                    v.push(next);
                }
                v
            })
            .collect();
        for (slot, alpha) in out.iter_mut().zip(&self.basis.exponents) {
            *slot = alpha
                .iter()
                .enumerate()
                .map(|(i, &a)| per_coord[i][a as usize])
                .product();
        }
    }

    pub fn column_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.basis.d_n];
        self.column(x, &mut out);
        out
    }

    /// Row-major `d_n x d_n` matrix with column `j` equal to `e(pts[j])`.
    pub fn matrix(&self, pts: &[Vec<f64>]) -> Vec<f64> {
        let n = self.basis.d_n;
        let mut m = vec![0.0; n * n];
        let mut col = vec![0.0; n];
        for (j, p) in pts.iter().enumerate() {
            self.column(p, &mut col);
            for i in 0..n {
                m[i * n + j] = col[i];
            }
        }
        m
    }

    /// `log|det[x_j^{α(i)}]|` for exactly `d_n` points.
    pub fn log_abs_vdm(&self, pts: &[Vec<f64>]) -> f64 {
        if has_repeated_point(pts) {
            return f64::NEG_INFINITY;
        }
        let n = self.basis.d_n;
        let mut m = self.matrix(pts);
        let mut log_scale = 0.0;
        for j in 0..n {
            let s = (0..n).map(|i| m[i * n + j].abs()).fold(0.0, f64::max);
            if s == 0.0 {
                return f64::NEG_INFINITY;
            }
            log_scale += s.ln();
            for i in 0..n {
                m[i * n + j] /= s;
            }
        }
        let det = Lu::factor(n, m).log_abs_det();
        if det == f64::NEG_INFINITY {
            det
        } else {
            det + log_scale + self.log_correction
        }
    }
}

/// Per-coordinate `(min, max)` over `pts`.
pub fn bounding_box(dim: usize, pts: &[Vec<f64>]) -> Vec<(f64, f64)> {
    (0..dim)
        .map(|i| {
            pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                (lo.min(p[i]), hi.max(p[i]))
            })
        })
        .map(|(lo, hi)| if lo.is_finite() { (lo, hi) } else { (0.0, 0.0) })
        .collect()
}

fn has_repeated_point(pts: &[Vec<f64>]) -> bool {
    let mut sorted: Vec<&Vec<f64>> = pts.iter().collect();
    sorted.sort_by(|a, b| {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    sorted.windows(2).any(|w| w[0] == w[1])
}

fn check_points(basis: &MonomialBasis, pts: &[Vec<f64>]) -> Result<()> {
    if pts.len() != basis.d_n {
        return Err(PptError::DimensionMismatch {
            expected: basis.d_n,
            got: pts.len(),
        });
    }
    if let Some(p) = pts.iter().find(|p| p.len() != basis.dim) {
        return Err(PptError::DimensionMismatch {
            expected: basis.dim,
            got: p.len(),
        });
    }
    Ok(())
}

/// `log|VDM(pts)|`; `-inf` on exact rank deficiency.
pub fn log_abs_vdm(basis: &MonomialBasis, pts: &[Vec<f64>]) -> Result<f64> {
    check_points(basis, pts)?;
    Ok(BasisEvaluator::for_points(basis, pts).log_abs_vdm(pts))
}

/// `log|VDM(pts)| - n Σ_j Q(ζ_j)`; a `+inf` weight value gives `-inf`.
pub fn log_abs_wvdm(basis: &MonomialBasis, pts: &[Vec<f64>], q: &[f64], n: u32) -> Result<f64> {
    check_points(basis, pts)?;
    if q.len() != pts.len() {
        return Err(PptError::DimensionMismatch {
            expected: pts.len(),
            got: q.len(),
        });
    }
    Ok(weighted(log_abs_vdm(basis, pts)?, q, n))
}

fn weighted(log_vdm: f64, q: &[f64], n: u32) -> f64 {
    if log_vdm == f64::NEG_INFINITY || q.iter().any(|v| *v == f64::INFINITY) {
        return f64::NEG_INFINITY;
    }
    log_vdm - n as f64 * q.iter().sum::<f64>()
}

/// `d_n` points of `R^d ⊂ C^d` together with their basis and, when a weight
/// context is attached, the cached `log|VDM_n^Q|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub basis: MonomialBasis,
    pub points: Vec<Vec<f64>>,
    /// Mesh index of each point when drawn from a mesh.
    pub mesh_indices: Option<Vec<usize>>,
    /// `Q(ζ_j)` per point when a weight is attached.
    pub q_values: Option<Vec<f64>>,
    pub log_wvdm: Option<f64>,
}

impl Configuration {
    pub fn new(basis: MonomialBasis, points: Vec<Vec<f64>>) -> Result<Self> {
        check_points(&basis, &points)?;
        Ok(Configuration {
            basis,
            points,
            mesh_indices: None,
            q_values: None,
            log_wvdm: None,
        })
    }

    /// Attaches weight values and caches `log|VDM_n^Q|` with `n = basis.n`.
    pub fn with_weights(mut self, q: Vec<f64>) -> Result<Self> {
        let value = log_abs_wvdm(&self.basis, &self.points, &q, self.basis.n)?;
        self.q_values = Some(q);
        self.log_wvdm = Some(value);
        Ok(self)
    }

    /// The configuration `(mesh[idx_1], ..., mesh[idx_{d_n}])` with the mesh weight attached.
    pub fn from_mesh(mesh: &WeightedMesh, basis: &MonomialBasis, indices: &[usize]) -> Result<Self> {
        if let Some(&k) = indices.iter().find(|&&k| k >= mesh.len()) {
            return Err(PptError::InvalidArgument(format!("mesh index {k} out of range")));
        }
        let points = indices.iter().map(|&k| mesh.point(k).to_vec()).collect();
        let q = indices.iter().map(|&k| mesh.q()[k]).collect();
        let mut c = Configuration::new(basis.clone(), points)?.with_weights(q)?;
        c.mesh_indices = Some(indices.to_vec());
        Ok(c)
    }

    pub fn n(&self) -> u32 {
        self.basis.n
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn log_abs_vdm(&self) -> f64 {
        BasisEvaluator::for_points(&self.basis, &self.points).log_abs_vdm(&self.points)
    }

    /// Recomputes `log|VDM_n^Q|` from the points (`Q ≡ 0` if no weight is attached).
    pub fn recompute_log_wvdm(&self) -> f64 {
        match &self.q_values {
            Some(q) => weighted(self.log_abs_vdm(), q, self.basis.n),
            None => self.log_abs_vdm(),
        }
    }
}

/// Factored Vandermonde matrix of a configuration, for repeated Lagrange
/// ratio evaluations.
pub struct LagrangeBasis<'a> {
    config: &'a Configuration,
    eval: BasisEvaluator,
    lu: Lu,
}

impl<'a> LagrangeBasis<'a> {
    pub fn new(config: &'a Configuration) -> Result<Self> {
        let eval = BasisEvaluator::for_points(&config.basis, &config.points);
        if has_repeated_point(&config.points) {
            return Err(PptError::DegenerateMesh("configuration has repeated points".into()));
        }
        let lu = Lu::factor(config.basis.d_n, eval.matrix(&config.points));
        if lu.is_singular() {
            return Err(PptError::DegenerateMesh(
                "configuration is not unisolvent (VDM = 0)".into(),
            ));
        }
        Ok(LagrangeBasis { config, eval, lu })
    }

    /// `log|ℓ_j(z)|` for every slot `j`, where `ℓ_j(z)` is the ratio of the
    /// Vandermonde with slot `j` replaced by `z` to the original one.
    pub fn log_values(&self, z: &[f64]) -> Vec<f64> {
        let mut c = self.eval.column_vec(z);
        self.lu.solve(&mut c);
        let mut out: Vec<f64> = c.iter().map(|v| v.abs().ln()).collect();
        // exact coincidences: identical column (ratio 1) or repeated column (0)
        if let Some(i) = self.config.points.iter().position(|p| p.as_slice() == z) {
            for (j, v) in out.iter_mut().enumerate() {
                *v = if j == i { 0.0 } else { f64::NEG_INFINITY };
            }
        }
        out
    }
}

/// `log|VDM(pts with slot j replaced by z)| - log|VDM(pts)|`.
pub fn lagrange_log(config: &Configuration, j: usize, z: &[f64]) -> Result<f64> {
    if j >= config.len() {
        return Err(PptError::InvalidArgument(format!("slot {j} out of range")));
    }
    if z.len() != config.basis.dim {
        return Err(PptError::DimensionMismatch {
            expected: config.basis.dim,
            got: z.len(),
        });
    }
    Ok(LagrangeBasis::new(config)?.log_values(z)[j])
}
