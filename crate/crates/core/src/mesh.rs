//! Finite discretizations of a compact set `K` carrying the weight `Q` and
//! the reference measure `ν`.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{PptError, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct WeightedMesh {
    dim: usize,
    points: Vec<Vec<f64>>,
    q: Vec<f64>,
    nu: Vec<f64>,
    label: String,
}

impl WeightedMesh {
    pub fn new(
        dim: usize,
        points: Vec<Vec<f64>>,
        q: Vec<f64>,
        nu: Vec<f64>,
        label: impl Into<String>,
    ) -> Result<Self> {
        let m = points.len();
        if dim == 0 || m == 0 {
            return Err(PptError::InvalidMesh("mesh needs at least one point".into()));
        }
        if q.len() != m || nu.len() != m {
            return Err(PptError::InvalidMesh(format!(
                "{m} points but {} weights and {} masses",
                q.len(),
                nu.len()
            )));
        }
        for p in &points {
            if p.len() != dim {
                return Err(PptError::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            if p.iter().any(|c| !c.is_finite()) {
                return Err(PptError::InvalidMesh(format!("non-finite point {p:?}")));
            }
        }
        if q.iter().any(|v| v.is_nan() || *v == f64::NEG_INFINITY) {
            return Err(PptError::InvalidMesh("Q must be finite or +inf".into()));
        }
        if !q.iter().any(|v| v.is_finite()) {
            return Err(PptError::InvalidMesh(
                "weight vanishes on the whole mesh (no finite Q)".into(),
            ));
        }
        if nu.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(PptError::InvalidMesh("reference masses must be positive".into()));
        }
        Ok(WeightedMesh {
            dim,
            points,
            q,
            nu,
            label: label.into(),
        })
    }

    /// Unweighted mesh with equal reference masses summing to one.
    pub fn from_points(dim: usize, points: Vec<Vec<f64>>, label: impl Into<String>) -> Result<Self> {
        let m = points.len().max(1);
        let q = vec![0.0; points.len()];
        let nu = vec![1.0 / m as f64; points.len()];
        WeightedMesh::new(dim, points, q, nu, label)
    }

    /// `m` Chebyshev–Lobatto distributed nodes on `[a, b]` (ascending), with
    /// `ν` the normalized arc-length cell masses.
    pub fn chebyshev_interval(a: f64, b: f64, m: usize) -> Result<Self> {
        check_interval(a, b, m)?;
        let xs: Vec<f64> = if m == 1 {
            vec![(a + b) / 2.0]
        } else {
            (0..m)
                .map(|k| {
                    let t = (1.0 - (std::f64::consts::PI * k as f64 / (m - 1) as f64).cos()) / 2.0;
                    a + (b - a) * t
                })
                .collect()
        };
        interval_mesh(xs, a, b, format!("cheb[{a},{b}]x{m}"))
    }

    /// `m` equispaced nodes on `[a, b]` with arc-length masses.
    pub fn uniform_interval(a: f64, b: f64, m: usize) -> Result<Self> {
        check_interval(a, b, m)?;
        let xs: Vec<f64> = if m == 1 {
            vec![(a + b) / 2.0]
        } else {
            (0..m)
                .map(|k| a + (b - a) * k as f64 / (m - 1) as f64)
                .collect()
        };
        interval_mesh(xs, a, b, format!("unif[{a},{b}]x{m}"))
    }

    /// Tensor product of two Chebyshev interval meshes on `[a,b]²`.
    pub fn chebyshev_square(a: f64, b: f64, m: usize) -> Result<Self> {
        let line = WeightedMesh::chebyshev_interval(a, b, m)?;
        let mut points = Vec::with_capacity(m * m);
        let mut nu = Vec::with_capacity(m * m);
        for (x, nx) in line.points.iter().zip(&line.nu) {
            for (y, ny) in line.points.iter().zip(&line.nu) {
                points.push(vec![x[0], y[0]]);
                nu.push(nx * ny);
            }
        }
        let q = vec![0.0; points.len()];
        WeightedMesh::new(2, points, q, nu, format!("cheb[{a},{b}]^2x{m}"))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn point(&self, k: usize) -> &[f64] {
        &self.points[k]
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn nu(&self) -> &[f64] {
        &self.nu
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn nu_total(&self) -> f64 {
        self.nu.iter().sum()
    }

    /// Same points and `ν`, new weight values.
    pub fn with_q(&self, q: Vec<f64>) -> Result<Self> {
        WeightedMesh::new(self.dim, self.points.clone(), q, self.nu.clone(), self.label.clone())
    }

    /// Same points and `ν`, weight `Q(x) = f(x)`.
    pub fn with_weight(&self, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let q = self.points.iter().map(|p| f(p)).collect();
        self.with_q(q)
    }

    pub fn with_nu(&self, nu: Vec<f64>) -> Result<Self> {
        WeightedMesh::new(self.dim, self.points.clone(), self.q.clone(), nu, self.label.clone())
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Per-coordinate `(min, max)` over the mesh.
    pub fn bounding_box(&self) -> Vec<(f64, f64)> {
        (0..self.dim)
            .map(|i| {
                self.points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                    (lo.min(p[i]), hi.max(p[i]))
                })
            })
            .collect()
    }

    /// Smallest finite weight value.
    pub fn q_min(&self) -> f64 {
        self.q
            .iter()
            .copied()
            .filter(|v| v.is_finite())
            .fold(f64::INFINITY, f64::min)
    }

    /// Index of the mesh point with exactly these coordinates.
    pub fn index_of(&self, x: &[f64]) -> Option<usize> {
        self.points.iter().position(|p| p.as_slice() == x)
    }

    /// Content hash of points, weights and masses (not the label).
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.dim as u64).to_le_bytes());
        for ((p, q), nu) in self.points.iter().zip(&self.q).zip(&self.nu) {
            for c in p {
                h.update(c.to_bits().to_le_bytes());
            }
            h.update(q.to_bits().to_le_bytes());
            h.update(nu.to_bits().to_le_bytes());
        }
        hex::encode(h.finalize())
    }

    /// CSV rows `x_1,...,x_d,Q,nu`; `Q = inf` marks a point where `w = 0`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.dim {
            let _ = write!(out, "x{},", i + 1);
        }
        out.push_str("q,nu\n");
        for ((p, q), nu) in self.points.iter().zip(&self.q).zip(&self.nu) {
            for c in p {
                let _ = write!(out, "{c},");
            }
            let _ = writeln!(out, "{q},{nu}");
        }
        out
    }

    /// Parses the format written by [`WeightedMesh::to_csv`]. A header row and
    /// `#` comment lines are skipped; the dimension is the column count minus two.
    pub fn from_csv(text: &str, label: impl Into<String>) -> Result<Self> {
        let mut points = Vec::new();
        let mut q = Vec::new();
        let mut nu = Vec::new();
        let mut dim = None;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let parsed: std::result::Result<Vec<f64>, _> =
                fields.iter().map(|f| f.parse::<f64>()).collect();
            let Ok(values) = parsed else {
                if points.is_empty() && dim.is_none() {
                    continue; // header
                }
                return Err(PptError::Parse(format!("mesh line {}: {line}", lineno + 1)));
            };
            if values.len() < 3 {
                return Err(PptError::Parse(format!(
                    "mesh line {}: need coordinates, q and nu",
                    lineno + 1
                )));
            }
            let d = values.len() - 2;
            if *dim.get_or_insert(d) != d {
                return Err(PptError::Parse(format!("mesh line {}: ragged row", lineno + 1)));
            }
            points.push(values[..d].to_vec());
            q.push(values[d]);
            nu.push(values[d + 1]);
        }
        let dim = dim.ok_or_else(|| PptError::Parse("mesh file has no rows".into()))?;
        WeightedMesh::new(dim, points, q, nu, label)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        WeightedMesh::from_csv(&text, path.display().to_string())
    }
}

fn check_interval(a: f64, b: f64, m: usize) -> Result<()> {
    if !(a < b) || m == 0 {
        return Err(PptError::InvalidMesh(format!(
            "need a < b and m ≥ 1, got [{a}, {b}] with m = {m}"
        )));
    }
    Ok(())
}

/// Cell masses `(x_{k+1} - x_{k-1}) / 2` normalized by the interval length.
fn interval_mesh(xs: Vec<f64>, a: f64, b: f64, label: String) -> Result<WeightedMesh> {
    let m = xs.len();
    let nu: Vec<f64> = if m == 1 {
        vec![1.0]
    } else {
        (0..m)
            .map(|k| {
                let left = if k == 0 { xs[0] } else { xs[k - 1] };
                let right = if k == m - 1 { xs[m - 1] } else { xs[k + 1] };
                (right - left) / 2.0 / (b - a)
            })
            .collect()
    };
    let points = xs.into_iter().map(|x| vec![x]).collect();
    WeightedMesh::new(1, points, vec![0.0; m], nu, label)
}
