//! One-sided lower bounds for the weighted extremal function `V_{P,K,Q}` and
//! the energy `E(V*_{P,K,Q})` through the Rumely formula.
//!
//! Two admissible competitor families are used, both relative to the mesh:
//!
//! * weighted Lagrange polynomials `p_j = ℓ_j e^{nQ(x_j)}` of a Fekete
//!   configuration, admissible by exchange optimality;
//! * the best mesh polynomial, `sup {|p(z)| : p ∈ Poly(nP), |p| ≤ e^{nQ} on the mesh}`,
//!   computed from the dual LP `min Σ|y_k|` subject to `Σ_k y_k e^{-nQ(x_k)} e(x_k) = e(z)`.
//!
//! The second family contains the first, so it is never worse.

use serde::{Deserialize, Serialize};

use crate::error::{PptError, Result};
use crate::fekete::{fekete_measure, fekete_points, DeltaEstimate, FeketeOptions, WeightedColumns};
use crate::lp::{solve_perturbed, LpOutcome, StandardLp};
use crate::mesh::WeightedMesh;
use crate::polytope::{BodyConstants, MonomialBasis};
use crate::vdm::{BasisEvaluator, Configuration, LagrangeBasis};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtremalOptions {
    /// Also solve the mesh-polynomial LP (more expensive, tighter).
    pub use_lp: bool,
}

impl Default for ExtremalOptions {
    fn default() -> Self {
        ExtremalOptions { use_lp: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtremalEval {
    pub z: Vec<f64>,
    pub n: u32,
    /// Best lower bound `u_n(z)`.
    pub value: f64,
    /// `max_j [(1/n) log|ℓ_j(z)| + Q(x_j)]`.
    pub lagrange_value: f64,
    /// Fekete slot attaining `lagrange_value`.
    pub attaining_index: Option<usize>,
    /// `(1/n) log` of the mesh-polynomial LP optimum, when computed.
    pub lp_value: Option<f64>,
}

/// Lower bound for `V_{P,K,Q}(z)` from an exchange-optimal Fekete
/// configuration on `mesh`.
pub fn extremal_lower(
    z: &[f64],
    config: &Configuration,
    mesh: &WeightedMesh,
    opts: &ExtremalOptions,
) -> Result<ExtremalEval> {
    let n = config.n();
    let q = config
        .q_values
        .as_ref()
        .ok_or_else(|| PptError::InvalidArgument("configuration has no weight attached".into()))?;
    let lag = LagrangeBasis::new(config)?;
    let logs = lag.log_values(z);
    let mut lagrange_value = f64::NEG_INFINITY;
    let mut attaining_index = None;
    for (j, l) in logs.iter().enumerate() {
        let v = l / n as f64 + q[j];
        if v > lagrange_value {
            lagrange_value = v;
            attaining_index = Some(j);
        }
    }
    let lp_value = if opts.use_lp {
        Some(MeshPolynomial::optimal(mesh, &config.basis, z)?.log_abs_at(z) / n as f64)
    } else {
        None
    };
    let value = lp_value.map_or(lagrange_value, |v| v.max(lagrange_value));
    Ok(ExtremalEval {
        z: z.to_vec(),
        n,
        value,
        lagrange_value,
        attaining_index,
        lp_value,
    })
}

/// A polynomial `p ∈ Poly(nP)` with `|p| ≤ e^{nQ}` on a mesh, stored as
/// coefficients in the evaluator's basis times `e^{log_factor}`.
#[derive(Clone, Debug)]
pub struct MeshPolynomial {
    eval: BasisEvaluator,
    coefficients: Vec<f64>,
    log_factor: f64,
    /// LP optimum `log sup |p(z)|` at the point it was optimized for.
    pub log_optimum: f64,
}

impl MeshPolynomial {
    /// The polynomial maximizing `|p(z)|` among those bounded by `e^{nQ}` on the mesh.
    pub fn optimal(mesh: &WeightedMesh, basis: &MonomialBasis, z: &[f64]) -> Result<Self> {
        if z.len() != basis.dim {
            return Err(PptError::DimensionMismatch {
                expected: basis.dim,
                got: z.len(),
            });
        }
        let eval = BasisEvaluator::for_mesh(basis, mesh);
        let columns = WeightedColumns::new(mesh, basis);
        let active: Vec<usize> = (0..mesh.len()).filter(|&k| columns.active[k]).collect();
        let rows = basis.d_n;
        let cols = 2 * active.len();
        let target = eval.column_vec(z);
        let s_z = target.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if s_z == 0.0 {
            return Err(PptError::DegenerateMesh("every basis function vanishes at z".into()));
        }
        let mut a = vec![0.0; rows * cols];
        for (t, &k) in active.iter().enumerate() {
            for (i, v) in columns.weighted_col(k).iter().enumerate() {
                a[i * cols + 2 * t] = *v;
                a[i * cols + 2 * t + 1] = -*v;
            }
        }
        let lp = StandardLp {
            rows,
            cols,
            a,
            b: target.iter().map(|v| v / s_z).collect(),
            c: vec![1.0; cols],
        };
        let sol = match solve_perturbed(&lp, 1e-9)? {
            LpOutcome::Optimal(s) => s,
            LpOutcome::Infeasible => {
                return Err(PptError::DegenerateMesh(
                    "mesh is not unisolvent for the basis (z not representable)".into(),
                ))
            }
            LpOutcome::Unbounded => return Err(PptError::LinearProgram("unbounded ℓ1 problem".into())),
        };
        // Rescale the multipliers to exact dual feasibility, so the reported
        // optimum is a true weak-duality bound attained by the certificate.
        let peak = active
            .iter()
            .map(|&k| {
                let v: f64 = columns.weighted_col(k).iter().zip(&sol.duals).map(|(a, y)| a * y).sum();
                v.abs()
            })
            .fold(0.0f64, f64::max);
        if !(peak > 0.0) {
            return Err(PptError::LinearProgram("zero dual certificate".into()));
        }
        let coefficients: Vec<f64> = sol.duals.iter().map(|y| y / peak).collect();
        let dual_value: f64 = coefficients.iter().zip(&lp.b).map(|(y, b)| y * b).sum();
        if !(dual_value > 0.0) {
            return Err(PptError::LinearProgram("non-positive dual value".into()));
        }
        let n = basis.n as f64;
        let log_factor = n * mesh.q_min();
        Ok(MeshPolynomial {
            eval,
            coefficients,
            log_factor,
            log_optimum: s_z.ln() + dual_value.ln() + log_factor,
        })
    }

    /// `log|p(x)|`.
    pub fn log_abs_at(&self, x: &[f64]) -> f64 {
        let e = self.eval.column_vec(x);
        let v: f64 = self.coefficients.iter().zip(&e).map(|(c, e)| c * e).sum();
        v.abs().ln() + self.log_factor
    }
}

/// Largest `(1/n) log|p(x)| - Q(x)` over the audit points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityAudit {
    pub max_violation: f64,
    pub worst_point: Vec<f64>,
    pub points_checked: usize,
}

fn audit_with(points: &[Vec<f64>], q: &dyn Fn(&[f64]) -> f64, u: impl Fn(&[f64]) -> f64) -> AdmissibilityAudit {
    let mut audit = AdmissibilityAudit {
        max_violation: f64::NEG_INFINITY,
        worst_point: Vec::new(),
        points_checked: points.len(),
    };
    for x in points {
        let v = u(x) - q(x);
        if v > audit.max_violation {
            audit.max_violation = v;
            audit.worst_point = x.clone();
        }
    }
    audit
}

/// Admissibility of the Lagrange competitors `max_j [(1/n) log|ℓ_j| + Q(x_j)]`
/// at arbitrary points (e.g. a refined audit mesh).
pub fn audit_lagrange(
    config: &Configuration,
    points: &[Vec<f64>],
    q: &dyn Fn(&[f64]) -> f64,
) -> Result<AdmissibilityAudit> {
    let n = config.n() as f64;
    let qj = config
        .q_values
        .clone()
        .ok_or_else(|| PptError::InvalidArgument("configuration has no weight attached".into()))?;
    let lag = LagrangeBasis::new(config)?;
    Ok(audit_with(points, q, |x| {
        lag.log_values(x)
            .iter()
            .zip(&qj)
            .map(|(l, qv)| l / n + qv)
            .fold(f64::NEG_INFINITY, f64::max)
    }))
}

/// Admissibility of a mesh polynomial at arbitrary points.
pub fn audit_polynomial(
    p: &MeshPolynomial,
    n: u32,
    points: &[Vec<f64>],
    q: &dyn Fn(&[f64]) -> f64,
) -> AdmissibilityAudit {
    audit_with(points, q, |x| p.log_abs_at(x) / n as f64)
}

/// `Ê(V*_{P,K,Q}) = -log δ̂^Q / b_d`.
pub fn energy_via_rumely(delta: &DeltaEstimate, consts: &BodyConstants) -> f64 {
    -delta.log_delta() / consts.b_d
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateauxRow {
    pub h: f64,
    pub energy_plus: f64,
    pub energy_minus: f64,
    /// `(F(h) - F(-h)) / 2h` with `F(t) = -log δ̂^{Q+tu} / b_d`.
    pub derivative: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateauxReport {
    pub rows: Vec<GateauxRow>,
    /// `∫ u dμ̂_{K,Q}` against the Fekete measure of mass `γ_d`.
    pub integral: f64,
    /// `|derivative - integral|` at the smallest step.
    pub discrepancy: f64,
}

/// Compares central differences of `t ↦ Ê(V*_{P,K,Q+tu})` at `t = 0` with
/// `∫ u dμ̂_{K,Q}`.
pub fn gateaux_check(
    mesh: &WeightedMesh,
    basis: &MonomialBasis,
    u: &[f64],
    t_grid: &[f64],
    consts: &BodyConstants,
    opts: &FeketeOptions,
) -> Result<GateauxReport> {
    if u.len() != mesh.len() {
        return Err(PptError::DimensionMismatch {
            expected: mesh.len(),
            got: u.len(),
        });
    }
    let mut steps: Vec<f64> = t_grid.iter().copied().filter(|t| *t > 0.0).collect();
    if steps.is_empty()
        || steps
            .iter()
            .any(|h| !t_grid.iter().any(|t| (t + h).abs() <= 1e-15 * h))
    {
        return Err(PptError::InvalidArgument(
            "t grid must contain ±h pairs symmetric around 0".into(),
        ));
    }
    steps.sort_by(f64::total_cmp);
    steps.dedup();
    let energy = |t: f64| -> Result<f64> {
        let q: Vec<f64> = mesh.q().iter().zip(u).map(|(q, u)| q + t * u).collect();
        let shifted = mesh.with_q(q)?;
        let f = fekete_points(&shifted, basis, opts)?;
        Ok(-(f.log_wvdm() / basis.l_n as f64) / consts.b_d)
    };
    let base = fekete_points(mesh, basis, opts)?;
    let integral = fekete_measure(&base.config, consts.gamma_d).integrate_mesh_values(mesh, u)?;
    let mut rows = Vec::with_capacity(steps.len());
    for h in steps {
        let energy_plus = energy(h)?;
        let energy_minus = energy(-h)?;
        rows.push(GateauxRow {
            h,
            energy_plus,
            energy_minus,
            derivative: (energy_plus - energy_minus) / (2.0 * h),
        });
    }
    let discrepancy = (rows[0].derivative - integral).abs();
    Ok(GateauxReport {
        rows,
        integral,
        discrepancy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::ConvexBody;

    fn setup(m: usize, n: u32, q: impl Fn(&[f64]) -> f64) -> (WeightedMesh, Configuration) {
        let mesh = WeightedMesh::chebyshev_interval(-1.0, 1.0, m).unwrap().with_weight(q).unwrap();
        let basis = ConvexBody::simplex(1).lattice_points(n).unwrap();
        let f = fekete_points(&mesh, &basis, &FeketeOptions::default()).unwrap();
        (mesh, f.config)
    }

    #[test]
    fn value_at_a_node_is_its_weight() {
        let (mesh, config) = setup(41, 6, |_| 0.0);
        let z = config.points[2].clone();
        let e = extremal_lower(&z, &config, &mesh, &ExtremalOptions::default()).unwrap();
        assert_eq!(e.lagrange_value, 0.0);
        assert_eq!(e.attaining_index, Some(2));
        assert!(e.lp_value.unwrap().abs() < 1e-9);
    }

    #[test]
    fn constant_weight_shifts_bound() {
        let (mesh, config) = setup(61, 8, |_| 0.0);
        let (mesh_c, config_c) = setup(61, 8, |_| 0.7);
        assert_eq!(config.mesh_indices, config_c.mesh_indices);
        for z in [1.5, 2.0, -3.0, 0.1] {
            let a = extremal_lower(&[z], &config, &mesh, &ExtremalOptions::default()).unwrap();
            let b = extremal_lower(&[z], &config_c, &mesh_c, &ExtremalOptions::default()).unwrap();
            assert!((b.lagrange_value - a.lagrange_value - 0.7).abs() < 1e-12);
            assert!((b.value - a.value - 0.7).abs() < 1e-9);
        }
    }

    #[test]
    fn lp_bound_dominates_lagrange_and_is_admissible() {
        let (mesh, config) = setup(81, 10, |x| 0.5 * x[0] * x[0]);
        for z in [1.2, 2.0, -1.7] {
            let e = extremal_lower(&[z], &config, &mesh, &ExtremalOptions::default()).unwrap();
            assert!(e.lp_value.unwrap() >= e.lagrange_value - 1e-12);
            let p = MeshPolynomial::optimal(&mesh, &config.basis, &[z]).unwrap();
            assert!((p.log_abs_at(&[z]) - p.log_optimum).abs() < 1e-8);
            let audit = audit_polynomial(&p, 10, mesh.points(), &|x| 0.5 * x[0] * x[0]);
            assert!(audit.max_violation <= 1e-9, "{audit:?}");
        }
        let audit = audit_lagrange(&config, mesh.points(), &|x| 0.5 * x[0] * x[0]).unwrap();
        assert!(audit.max_violation <= 1e-9);
    }

    #[test]
    fn rumely_energy_of_unit_delta_is_zero() {
        let mesh = WeightedMesh::from_points(1, vec![vec![0.0], vec![1.0]], "m").unwrap();
        let b = ConvexBody::simplex(1).lattice_points(1).unwrap();
        let est = DeltaEstimate::from_fekete(fekete_points(&mesh, &b, &FeketeOptions::default()).unwrap());
        assert_eq!(est.delta_hat, 1.0);
        let consts = BodyConstants::exact(1, 1.0, 1.0);
        assert_eq!(energy_via_rumely(&est, &consts), 0.0);
    }

    #[test]
    fn gateaux_constant_and_odd_directions() {
        let mesh = WeightedMesh::chebyshev_interval(-1.0, 1.0, 101).unwrap();
        let basis = ConvexBody::simplex(1).lattice_points(10).unwrap();
        let consts = BodyConstants::exact(1, 1.0, 1.0);
        let ones = vec![1.0; mesh.len()];
        let r = gateaux_check(&mesh, &basis, &ones, &[-1e-3, 0.0, 1e-3], &consts, &FeketeOptions::default())
            .unwrap();
        assert!((r.integral - 1.0).abs() < 1e-12);
        assert!(r.discrepancy < 1e-8);
        let odd: Vec<f64> = mesh.points().iter().map(|x| x[0]).collect();
        let r = gateaux_check(&mesh, &basis, &odd, &[-1e-3, 1e-3], &consts, &FeketeOptions::default())
            .unwrap();
        assert!(r.rows[0].derivative.abs() < 1e-8);
        assert!(gateaux_check(&mesh, &basis, &odd, &[0.1, -0.2], &consts, &FeketeOptions::default()).is_err());
    }
}
