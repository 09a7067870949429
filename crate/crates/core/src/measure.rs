//! Discrete positive measures on mesh points and moment neighborhoods.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{PptError, Result};
use crate::mesh::WeightedMesh;

/// Relative tolerance for total-mass checks.
pub const MASS_TOLERANCE: f64 = 1e-9;

/// A finite positive measure `Σ m_k δ_{x_k}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridMeasure {
    pub points: Vec<Vec<f64>>,
    pub masses: Vec<f64>,
    /// Mesh index of each support point, when known.
    pub mesh_index: Option<Vec<usize>>,
}

impl GridMeasure {
    pub fn new(points: Vec<Vec<f64>>, masses: Vec<f64>) -> Result<Self> {
        if points.len() != masses.len() {
            return Err(PptError::DimensionMismatch {
                expected: points.len(),
                got: masses.len(),
            });
        }
        if masses.iter().any(|m| !m.is_finite() || *m < 0.0) {
            return Err(PptError::InvalidArgument("masses must be finite and nonnegative".into()));
        }
        Ok(GridMeasure {
            points,
            masses,
            mesh_index: None,
        })
    }

    /// `(total / s) Σ δ_{x_j}` over the given points (repeats allowed).
    pub fn uniform(points: Vec<Vec<f64>>, total: f64) -> Self {
        let s = points.len().max(1) as f64;
        let masses = vec![total / s; points.len()];
        GridMeasure {
            points,
            masses,
            mesh_index: None,
        }
    }

    /// Empirical measure `(total / s) Σ δ_{mesh[idx_j]}` of a mesh configuration.
    pub fn from_indices(mesh: &WeightedMesh, indices: &[usize], total: f64) -> Self {
        let points = indices.iter().map(|&k| mesh.point(k).to_vec()).collect();
        let mut mu = GridMeasure::uniform(points, total);
        mu.mesh_index = Some(indices.to_vec());
        mu
    }

    /// Measure with the given mass at every mesh point (zero masses dropped).
    pub fn from_mesh_masses(mesh: &WeightedMesh, masses: &[f64]) -> Result<Self> {
        if masses.len() != mesh.len() {
            return Err(PptError::DimensionMismatch {
                expected: mesh.len(),
                got: masses.len(),
            });
        }
        let keep: Vec<usize> = (0..mesh.len()).filter(|&k| masses[k] != 0.0).collect();
        let mut mu = GridMeasure::new(
            keep.iter().map(|&k| mesh.point(k).to_vec()).collect(),
            keep.iter().map(|&k| masses[k]).collect(),
        )?;
        mu.mesh_index = Some(keep);
        Ok(mu)
    }

    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// Rescales to total mass `total`.
    pub fn normalized(mut self, total: f64) -> Self {
        let t = self.total();
        for m in &mut self.masses {
            *m *= total / t;
        }
        self
    }

    /// Whether the total mass equals `gamma_d` to [`MASS_TOLERANCE`] (membership in `M_P(K)`).
    pub fn has_mass(&self, gamma_d: f64) -> bool {
        (self.total() - gamma_d).abs() <= MASS_TOLERANCE * gamma_d.abs().max(1.0)
    }

    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        self.points.iter().zip(&self.masses).map(|(x, m)| m * f(x)).sum()
    }

    /// `∫ x^α dμ`.
    pub fn moment(&self, alpha: &[u32]) -> f64 {
        self.integrate(|x| x.iter().zip(alpha).map(|(c, &a)| c.powi(a as i32)).product())
    }

    /// Masses per mesh point; support points must be mesh points.
    pub fn mesh_masses(&self, mesh: &WeightedMesh) -> Result<Vec<f64>> {
        let mut out = vec![0.0; mesh.len()];
        for (j, (x, m)) in self.points.iter().zip(&self.masses).enumerate() {
            let k = match &self.mesh_index {
                Some(idx) if idx[j] < mesh.len() && mesh.point(idx[j]) == x.as_slice() => idx[j],
                _ => mesh.index_of(x).ok_or_else(|| {
                    PptError::InvalidArgument(format!("support point {x:?} is not on the mesh"))
                })?,
            };
            out[k] += m;
        }
        Ok(out)
    }

    /// `∫ v dμ` for `v` given by its values on the mesh, with `0·∞ = 0`.
    pub fn integrate_mesh_values(&self, mesh: &WeightedMesh, values: &[f64]) -> Result<f64> {
        let masses = self.mesh_masses(mesh)?;
        Ok(masses
            .iter()
            .zip(values)
            .filter(|(m, _)| **m != 0.0)
            .map(|(m, v)| m * v)
            .sum())
    }

    /// CSV rows `x_1,...,x_d,mass`.
    pub fn to_csv(&self) -> String {
        let dim = self.points.first().map_or(0, Vec::len);
        let mut out = String::new();
        for i in 0..dim {
            let _ = write!(out, "x{},", i + 1);
        }
        out.push_str("mass\n");
        for (x, m) in self.points.iter().zip(&self.masses) {
            for c in x {
                let _ = write!(out, "{c},");
            }
            let _ = writeln!(out, "{m}");
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut points = Vec::new();
        let mut masses = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parsed: std::result::Result<Vec<f64>, _> =
                line.split(',').map(|f| f.trim().parse::<f64>()).collect();
            match parsed {
                Ok(v) if v.len() >= 2 => {
                    masses.push(v[v.len() - 1]);
                    points.push(v[..v.len() - 1].to_vec());
                }
                Ok(_) => {
                    return Err(PptError::Parse(format!("measure line {}: too few fields", lineno + 1)))
                }
                Err(_) if points.is_empty() => continue, // header
                Err(_) => return Err(PptError::Parse(format!("measure line {}: {line}", lineno + 1))),
            }
        }
        GridMeasure::new(points, masses)
    }
}

/// `lower ≤ ∫ x^α dσ ≤ upper`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentConstraint {
    pub exponent: Vec<u32>,
    pub lower: f64,
    pub upper: f64,
}

/// Finite intersection of moment constraints: the neighborhoods `G(μ, k, ε)`
/// and the events used for large-deviation checks.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MomentSet {
    pub constraints: Vec<MomentConstraint>,
}

impl MomentSet {
    /// No constraints: all of `M_P(K)`.
    pub fn everything() -> Self {
        MomentSet::default()
    }

    /// An unsatisfiable set.
    pub fn empty(dim: usize) -> Self {
        MomentSet {
            constraints: vec![MomentConstraint {
                exponent: vec![0; dim],
                lower: 1.0,
                upper: 0.0,
            }],
        }
    }

    pub fn with(mut self, exponent: Vec<u32>, lower: f64, upper: f64) -> Self {
        self.constraints.push(MomentConstraint {
            exponent,
            lower,
            upper,
        });
        self
    }

    /// `G(μ, k, ε)`: all moments of order `1..=k` within `ε` of those of `μ`
    /// (order 0 is fixed by the common total mass). Real points only, so the
    /// imaginary-part monomials are constant and omitted.
    pub fn ball(mu: &GridMeasure, dim: usize, k: u32, eps: f64) -> Self {
        let mut set = MomentSet::default();
        for alpha in exponents_up_to(dim, k) {
            if alpha.iter().sum::<u32>() == 0 {
                continue;
            }
            let c = mu.moment(&alpha);
            set = set.with(alpha, c - eps, c + eps);
        }
        set
    }

    pub fn contains(&self, sigma: &GridMeasure) -> bool {
        self.constraints.iter().all(|c| {
            let m = sigma.moment(&c.exponent);
            m >= c.lower && m <= c.upper
        })
    }

    /// Parses `"e1[,e2..]:lo:hi;..."`; `lo`/`hi` accept `-inf`/`inf`.
    pub fn parse(spec: &str) -> Result<Self> {
        let mut set = MomentSet::default();
        for part in spec.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            if part == "all" {
                continue;
            }
            let fields: Vec<&str> = part.split(':').collect();
            if fields.len() != 3 {
                return Err(PptError::Parse(format!("moment constraint `{part}`")));
            }
            let exponent = fields[0]
                .split(',')
                .map(|e| e.trim().parse::<u32>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| PptError::Parse(format!("exponent in `{part}`: {e}")))?;
            let bound = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| PptError::Parse(format!("bound in `{part}`: {e}")))
            };
            set = set.with(exponent, bound(fields[1])?, bound(fields[2])?);
        }
        Ok(set)
    }
}

/// All `α ∈ (Z⁺)^dim` with `|α| ≤ k`.
pub fn exponents_up_to(dim: usize, k: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut alpha = vec![0u32; dim];
    loop {
        if alpha.iter().sum::<u32>() <= k {
            out.push(alpha.clone());
        }
        let mut i = 0;
        loop {
            if i == dim {
                return out;
            }
            if alpha[i] < k {
                alpha[i] += 1;
                break;
            }
            alpha[i] = 0;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_masses_and_moments() {
        let mu = GridMeasure::uniform(vec![vec![-1.0], vec![1.0]], 1.0);
        assert_eq!(mu.masses, vec![0.5, 0.5]);
        assert!(mu.has_mass(1.0));
        assert_eq!(mu.moment(&[1]), 0.0);
        assert_eq!(mu.moment(&[2]), 1.0);
    }

    #[test]
    fn mesh_masses_accumulate_repeats() {
        let mesh = WeightedMesh::uniform_interval(-1.0, 1.0, 3).unwrap();
        let mu = GridMeasure::from_indices(&mesh, &[0, 2, 2, 1], 2.0);
        assert_eq!(mu.mesh_masses(&mesh).unwrap(), vec![0.5, 0.5, 1.0]);
        let off = GridMeasure::uniform(vec![vec![0.3]], 1.0);
        assert!(off.mesh_masses(&mesh).is_err());
        let v = [1.0, f64::INFINITY, 3.0];
        let mu = GridMeasure::from_mesh_masses(&mesh, &[0.25, 0.0, 0.75]).unwrap();
        assert_eq!(mu.integrate_mesh_values(&mesh, &v).unwrap(), 2.5);
    }

    #[test]
    fn moment_sets() {
        let mu = GridMeasure::uniform(vec![vec![0.0], vec![1.0]], 1.0);
        assert!(MomentSet::everything().contains(&mu));
        assert!(!MomentSet::empty(1).contains(&mu));
        let g = MomentSet::parse("1:0.4:0.6; 2:-inf:inf").unwrap();
        assert!(g.contains(&mu));
        assert!(!MomentSet::parse("1:0.9:inf").unwrap().contains(&mu));
        let ball = MomentSet::ball(&mu, 1, 3, 1e-9);
        assert_eq!(ball.constraints.len(), 3);
        assert!(ball.contains(&mu));
        assert!(MomentSet::parse("1:0").is_err());
        assert_eq!(exponents_up_to(2, 2).len(), 6);
    }

    #[test]
    fn csv_round_trip() {
        let mu = GridMeasure::new(vec![vec![0.5], vec![-0.25]], vec![0.75, 0.25]).unwrap();
        assert_eq!(GridMeasure::from_csv(&mu.to_csv()).unwrap(), mu);
    }
}
