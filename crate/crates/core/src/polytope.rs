//! Convex bodies `P ⊂ (R⁺)^d`, the logarithmic indicator `H_P`, the lattice
//! bases of `Poly(nP)` and the normalization constants `γ_d`, `A`, `b_d`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{PptError, Result};
use crate::lp::in_convex_hull;

/// Default cap on `d_n` for [`ConvexBody::lattice_points`].
pub const DEFAULT_BASIS_CAP: usize = 50_000;

/// Largest `k` searched when establishing `Σ ⊂ kP`.
const MAX_K_SIGMA: u32 = 1 << 20;

/// `|f_{n_max} - f_{n_max-1}|` above this flags the `A` estimate as unconverged.
pub const F_N_TOLERANCE: f64 = 1e-3;

/// On-disk body description: `{"dim": d, "vertices": [[...], ...]}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct BodySpec {
    pub dim: usize,
    pub vertices: Vec<Vec<f64>>,
}

/// A convex body given as the convex hull of finitely many points in the
/// nonnegative orthant.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvexBody {
    dim: usize,
    vertices: Vec<Vec<f64>>,
    k_sigma: u32,
    r_sigma: f64,
}

impl ConvexBody {
    pub fn new(dim: usize, vertices: Vec<Vec<f64>>) -> Result<Self> {
        if dim == 0 {
            return Err(PptError::InvalidBody("dimension must be at least 1".into()));
        }
        if vertices.is_empty() {
            return Err(PptError::InvalidBody("no vertices".into()));
        }
        for v in &vertices {
            if v.len() != dim {
                return Err(PptError::DimensionMismatch {
                    expected: dim,
                    got: v.len(),
                });
            }
            if v.iter().any(|c| !c.is_finite() || *c < 0.0) {
                return Err(PptError::InvalidBody(format!(
                    "vertex {v:?} is not in the nonnegative orthant"
                )));
            }
        }
        let r_sigma = vertices
            .iter()
            .map(|v| v.iter().sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max);
        let k_sigma = find_k_sigma(dim, &vertices)?;
        Ok(ConvexBody {
            dim,
            vertices,
            k_sigma,
            r_sigma,
        })
    }

    /// The standard simplex `Σ = conv{0, e_1, ..., e_d}`.
    pub fn simplex(dim: usize) -> Self {
        let mut vertices = vec![vec![0.0; dim]];
        for i in 0..dim {
            let mut e = vec![0.0; dim];
            e[i] = 1.0;
            vertices.push(e);
        }
        ConvexBody::new(dim, vertices).expect("standard simplex is valid")
    }

    /// The unit cube `[0,1]^d`.
    pub fn unit_cube(dim: usize) -> Self {
        let vertices = (0..1usize << dim)
            .map(|mask| (0..dim).map(|i| ((mask >> i) & 1) as f64).collect())
            .collect();
        ConvexBody::new(dim, vertices).expect("unit cube is valid")
    }

    pub fn from_spec(spec: BodySpec) -> Result<Self> {
        ConvexBody::new(spec.dim, spec.vertices)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        ConvexBody::from_spec(serde_json::from_str(text)?)
    }

    pub fn spec(&self) -> BodySpec {
        BodySpec {
            dim: self.dim,
            vertices: self.vertices.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    /// Smallest positive integer `k` with `Σ ⊂ kP`.
    pub fn k_sigma(&self) -> u32 {
        self.k_sigma
    }

    /// Smallest `r` with `P ⊂ rΣ`.
    pub fn r_sigma(&self) -> f64 {
        self.r_sigma
    }

    /// Membership of `y` in `P`, decided by a feasibility LP over the vertices.
    pub fn contains(&self, y: &[f64]) -> Result<bool> {
        if y.len() != self.dim {
            return Err(PptError::DimensionMismatch {
                expected: self.dim,
                got: y.len(),
            });
        }
        in_convex_hull(&self.vertices, y)
    }

    /// `max_{J ∈ P} ⟨J, y⟩`, attained at a vertex.
    pub fn support_value(&self, y: &[f64]) -> f64 {
        self.vertices
            .iter()
            .map(|v| dot_extended(v, y))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `H_P(z) = sup_{J ∈ P} log |z^J|`.
    pub fn h_p(&self, z: &[Complex64]) -> Result<f64> {
        if z.len() != self.dim {
            return Err(PptError::DimensionMismatch {
                expected: self.dim,
                got: z.len(),
            });
        }
        let logs: Vec<f64> = z.iter().map(|c| c.norm().ln()).collect();
        Ok(self.h_p_log(&logs))
    }

    /// `H_P` in terms of `log |z_i|`; `-inf` entries mark zero coordinates.
    ///
    /// With `0·(-∞) = 0`, the supremum runs over the face `P ∩ {J_i = 0 : z_i = 0}`,
    /// which (as `P` sits in the orthant) is the hull of the vertices lying on it.
    pub fn h_p_log(&self, log_moduli: &[f64]) -> f64 {
        let zero: Vec<usize> = (0..self.dim)
            .filter(|&i| log_moduli[i] == f64::NEG_INFINITY)
            .collect();
        self.vertices
            .iter()
            .filter(|v| zero.iter().all(|&i| v[i] == 0.0))
            .map(|v| dot_extended(v, log_moduli))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Exact `Vol(P)` for `d ≤ 3`.
    pub fn volume(&self) -> Result<f64> {
        match self.dim {
            1 => {
                let (lo, hi) = self
                    .vertices
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                        (lo.min(v[0]), hi.max(v[0]))
                    });
                Ok(hi - lo)
            }
            2 => Ok(polygon_area(&self.vertices)),
            3 => Ok(polyhedron_volume(&self.vertices)),
            d => Err(PptError::UnsupportedDimension {
                dim: d,
                reason: "volumes are only computed for d ≤ 3",
            }),
        }
    }

    /// `γ_d = d!·Vol(P)`.
    pub fn gamma_d(&self) -> Result<f64> {
        let vol = self.volume()?;
        if !(vol > 0.0) {
            return Err(PptError::InvalidBody("body has empty interior".into()));
        }
        Ok(factorial(self.dim) * vol)
    }

    pub fn lattice_points(&self, n: u32) -> Result<MonomialBasis> {
        self.lattice_points_capped(n, DEFAULT_BASIS_CAP)
    }

    /// Exponents `α ∈ nP ∩ (Z⁺)^d` in graded-lexicographic order.
    pub fn lattice_points_capped(&self, n: u32, cap: usize) -> Result<MonomialBasis> {
        if n == 0 {
            return Err(PptError::InvalidArgument("n must be at least 1".into()));
        }
        let scaled: Vec<Vec<f64>> = self
            .vertices
            .iter()
            .map(|v| v.iter().map(|c| c * n as f64).collect())
            .collect();
        let upper: Vec<u32> = (0..self.dim)
            .map(|i| {
                let m = scaled.iter().map(|v| v[i]).fold(0.0, f64::max);
                (m + 1e-9).floor() as u32
            })
            .collect();
        let mut exponents = Vec::new();
        let mut alpha = vec![0u32; self.dim];
        loop {
            let y: Vec<f64> = alpha.iter().map(|&a| a as f64).collect();
            if in_convex_hull(&scaled, &y)? {
                exponents.push(alpha.clone());
                if exponents.len() > cap {
                    return Err(PptError::BasisTooLarge {
                        n,
                        count: exponents.len(),
                        cap,
                    });
                }
            }
            // odometer over the bounding box
            let mut i = 0;
            loop {
                if i == self.dim {
                    return Ok(MonomialBasis::new(self.dim, n, exponents));
                }
                if alpha[i] < upper[i] {
                    alpha[i] += 1;
                    break;
                }
                alpha[i] = 0;
                i += 1;
            }
        }
    }

    /// `γ_d`, an extrapolated `A = lim f_n` and `b_d = (d+1)/(A d γ_d)`.
    pub fn constants(&self, n_max: u32) -> Result<BodyConstants> {
        if n_max < 2 {
            return Err(PptError::InvalidArgument("n_max must be at least 2".into()));
        }
        let gamma_d = self.gamma_d()?;
        let d = self.dim as u128;
        let mut seq = Vec::with_capacity(n_max as usize);
        for n in 1..=n_max {
            let basis = self.lattice_points(n)?;
            // l_n = f_n · (n d / (d+1)) · d_n
            let num = (d + 1) * basis.l_n as u128;
            let den = n as u128 * d * basis.d_n as u128;
            let g = gcd(num, den);
            seq.push(FnTerm {
                n,
                d_n: basis.d_n,
                l_n: basis.l_n,
                f_n: num as f64 / den as f64,
                f_n_num: (num / g) as u64,
                f_n_den: (den / g) as u64,
            });
        }
        let last = seq.len() - 1;
        let a_raw = seq[last].f_n;
        let increment = (seq[last].f_n - seq[last - 1].f_n).abs();
        let a = if seq.len() >= 3 {
            let g = |t: &FnTerm| (t.n as f64).powi(2) * t.f_n;
            (g(&seq[last]) - 2.0 * g(&seq[last - 1]) + g(&seq[last - 2])) / 2.0
        } else {
            let n = seq[last].n as f64;
            n * seq[last].f_n - (n - 1.0) * seq[last - 1].f_n
        };
        let b_d = (self.dim as f64 + 1.0) / (a * self.dim as f64 * gamma_d);
        Ok(BodyConstants {
            dim: self.dim,
            gamma_d,
            a,
            a_raw,
            b_d,
            converged: increment <= F_N_TOLERANCE,
            f_n_increment: increment,
            f_n_sequence: seq,
        })
    }
}

/// One term of the sequence defining `A`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FnTerm {
    pub n: u32,
    pub d_n: usize,
    pub l_n: u64,
    pub f_n: f64,
    /// `f_n` as a reduced fraction.
    pub f_n_num: u64,
    pub f_n_den: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct BodyConstants {
    pub dim: usize,
    pub gamma_d: f64,
    /// Extrapolated limit of `f_n`.
    pub a: f64,
    /// `f_{n_max}` itself.
    pub a_raw: f64,
    pub b_d: f64,
    /// `|f_{n_max} - f_{n_max-1}| ≤ F_N_TOLERANCE`.
    pub converged: bool,
    pub f_n_increment: f64,
    pub f_n_sequence: Vec<FnTerm>,
}

impl BodyConstants {
    /// Constants for a body whose `A` is known in closed form (no sequence).
    pub fn exact(dim: usize, gamma_d: f64, a: f64) -> Self {
        BodyConstants {
            dim,
            gamma_d,
            a,
            a_raw: a,
            b_d: (dim as f64 + 1.0) / (a * dim as f64 * gamma_d),
            converged: true,
            f_n_increment: 0.0,
            f_n_sequence: Vec::new(),
        }
    }
}

/// Ordered exponent list of `Poly(nP)`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq, Hash)]
pub struct MonomialBasis {
    pub dim: usize,
    pub n: u32,
    pub exponents: Vec<Vec<u32>>,
    pub d_n: usize,
    pub l_n: u64,
}

impl MonomialBasis {
    /// Sorts and deduplicates `exponents` into graded-lexicographic order.
    pub fn new(dim: usize, n: u32, mut exponents: Vec<Vec<u32>>) -> Self {
        exponents.sort_by(|a, b| graded_lex(a, b));
        exponents.dedup();
        let l_n = exponents
            .iter()
            .map(|a| a.iter().map(|&c| c as u64).sum::<u64>())
            .sum();
        MonomialBasis {
            dim,
            n,
            d_n: exponents.len(),
            l_n,
            exponents,
        }
    }

    /// Every `β ≤ α` (componentwise) of a member `α` is a member.
    pub fn is_downward_closed(&self) -> bool {
        let set: std::collections::HashSet<&Vec<u32>> = self.exponents.iter().collect();
        self.exponents.iter().all(|a| {
            (0..self.dim).all(|i| {
                if a[i] == 0 {
                    return true;
                }
                let mut b = a.clone();
                b[i] -= 1;
                set.contains(&b)
            })
        })
    }

    /// Largest exponent per coordinate.
    pub fn max_degrees(&self) -> Vec<u32> {
        (0..self.dim)
            .map(|i| self.exponents.iter().map(|a| a[i]).max().unwrap_or(0))
            .collect()
    }
}

/// Total degree first, then larger leading coordinates first.
fn graded_lex(a: &[u32], b: &[u32]) -> std::cmp::Ordering {
    let da: u32 = a.iter().sum();
    let db: u32 = b.iter().sum();
    da.cmp(&db).then_with(|| b.cmp(a))
}

/// `⟨v, y⟩` with `0·(±∞) = 0`.
fn dot_extended(v: &[f64], y: &[f64]) -> f64 {
    v.iter()
        .zip(y)
        .map(|(&a, &b)| if a == 0.0 { 0.0 } else { a * b })
        .sum()
}

fn find_k_sigma(dim: usize, vertices: &[Vec<f64>]) -> Result<u32> {
    if !in_convex_hull(vertices, &vec![0.0; dim])? {
        return Err(PptError::InvalidBody(
            "P must contain the origin (Σ ⊂ kP fails for every k)".into(),
        ));
    }
    let ok = |k: u32| -> Result<bool> {
        for i in 0..dim {
            let mut e = vec![0.0; dim];
            e[i] = 1.0 / k as f64;
            if !in_convex_hull(vertices, &e)? {
                return Ok(false);
            }
        }
        Ok(true)
    };
    // e_i/k ∈ P is monotone in k since 0 ∈ P
    let mut hi = 1u32;
    while !ok(hi)? {
        if hi >= MAX_K_SIGMA {
            return Err(PptError::InvalidBody(
                "no k with Σ ⊂ kP; P must meet every coordinate axis".into(),
            ));
        }
        hi *= 2;
    }
    let mut lo = hi / 2; // ok(lo) is false or lo == 0
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

fn factorial(d: usize) -> f64 {
    (1..=d).map(|k| k as f64).product()
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}

fn cross2(o: &[f64], a: &[f64], b: &[f64]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Convex hull (monotone chain) followed by a fan from the first hull vertex.
fn polygon_area(points: &[Vec<f64>]) -> f64 {
    let hull = convex_hull_2d(points);
    if hull.len() < 3 {
        return 0.0;
    }
    let o = &hull[0];
    hull.windows(2)
        .skip(1)
        .map(|w| cross2(o, &w[0], &w[1]) / 2.0)
        .sum::<f64>()
        .abs()
}

fn convex_hull_2d(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut pts: Vec<Vec<f64>> = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<Vec<f64>> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && cross2(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<Vec<f64>> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && cross2(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn sub3(a: &[f64], b: &[f64]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Volume of the hull of `points` in R³ as a fan of pyramids from the first
/// point over every facet. Facets are found by brute force over vertex
/// triples, which is fine for the handful of vertices used here.
fn polyhedron_volume(points: &[Vec<f64>]) -> f64 {
    let scale = points
        .iter()
        .flat_map(|p| p.iter().map(|c| c.abs()))
        .fold(1.0, f64::max);
    let eps = 1e-9 * scale;
    let k = points.len();
    let mut facets: Vec<([f64; 3], f64)> = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            for l in j + 1..k {
                let nrm = cross3(sub3(&points[j], &points[i]), sub3(&points[l], &points[i]));
                let len = dot3(nrm, nrm).sqrt();
                if len <= eps * scale {
                    continue;
                }
                let mut u = [nrm[0] / len, nrm[1] / len, nrm[2] / len];
                let mut off = dot3(u, [points[i][0], points[i][1], points[i][2]]);
                let side: Vec<f64> = points
                    .iter()
                    .map(|p| dot3(u, [p[0], p[1], p[2]]) - off)
                    .collect();
                let above = side.iter().any(|&s| s > eps);
                let below = side.iter().any(|&s| s < -eps);
                if above && below {
                    continue;
                }
                if above {
                    u = [-u[0], -u[1], -u[2]];
                    off = -off;
                }
                if !facets
                    .iter()
                    .any(|(v, o)| dot3(*v, u) > 1.0 - 1e-9 && (o - off).abs() <= eps)
                {
                    facets.push((u, off));
                }
            }
        }
    }
    let apex = [points[0][0], points[0][1], points[0][2]];
    let mut volume = 0.0;
    for (u, off) in &facets {
        let height = off - dot3(*u, apex);
        if height <= eps {
            continue;
        }
        let on: Vec<[f64; 3]> = points
            .iter()
            .map(|p| [p[0], p[1], p[2]])
            .filter(|p| (dot3(*u, *p) - off).abs() <= eps)
            .collect();
        volume += facet_area(&on, *u) * height / 3.0;
    }
    volume
}

/// Area of a planar convex polygon with unit normal `u`, vertices unordered.
fn facet_area(points: &[[f64; 3]], u: [f64; 3]) -> f64 {
    // project into an orthonormal frame of the plane and reuse the 2-d hull
    let helper = if u[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let e1 = cross3(u, helper);
    let n1 = dot3(e1, e1).sqrt();
    let e1 = [e1[0] / n1, e1[1] / n1, e1[2] / n1];
    let e2 = cross3(u, e1);
    let planar: Vec<Vec<f64>> = points.iter().map(|p| vec![dot3(*p, e1), dot3(*p, e2)]).collect();
    polygon_area(&planar)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn support_values() {
        let s2 = ConvexBody::simplex(2);
        assert_eq!(s2.support_value(&[2.0, 1.0]), 2.0);
        assert_eq!(s2.support_value(&[0.0, 0.0]), 0.0);
        assert_eq!(ConvexBody::unit_cube(2).support_value(&[1.0, 1.0]), 2.0);
    }

    #[test]
    fn h_p_examples() {
        let s2 = ConvexBody::simplex(2);
        let e = std::f64::consts::E;
        assert!((s2.h_p(&[c(e * e), c(e)]).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(s2.h_p(&[c(1.0), c(1.0)]).unwrap(), 0.0);
        assert!((s2.h_p(&[c(0.0), c(e)]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(s2.h_p(&[c(0.0), c(0.0)]).unwrap(), 0.0);
        assert!(s2.h_p(&[c(1.0)]).is_err());
    }

    #[test]
    fn h_p_is_neg_infinity_when_the_face_is_empty() {
        // valid bodies contain 0, so build one off the axis face directly
        let body = ConvexBody::unit_cube(2);
        assert_eq!(body.h_p_log(&[f64::NEG_INFINITY, 0.5]), 0.5);
        let shifted = ConvexBody {
            dim: 1,
            vertices: vec![vec![1.0], vec![2.0]],
            k_sigma: 1,
            r_sigma: 2.0,
        };
        assert_eq!(shifted.h_p_log(&[f64::NEG_INFINITY]), f64::NEG_INFINITY);
    }

    #[test]
    fn lattice_point_examples() {
        let b = ConvexBody::simplex(2).lattice_points(1).unwrap();
        assert_eq!(b.exponents, vec![vec![0, 0], vec![1, 0], vec![0, 1]]);
        assert_eq!(b.d_n, 3);
        let sq = ConvexBody::unit_cube(2).lattice_points(2).unwrap();
        assert_eq!((sq.d_n, sq.l_n), (9, 18));
        let s1 = ConvexBody::simplex(1).lattice_points(3).unwrap();
        assert_eq!(s1.exponents, vec![vec![0], vec![1], vec![2], vec![3]]);
        assert_eq!((s1.d_n, s1.l_n), (4, 6));
        assert!(ConvexBody::simplex(1).lattice_points(0).is_err());
    }

    #[test]
    fn basis_cap_is_enforced() {
        let err = ConvexBody::unit_cube(2).lattice_points_capped(10, 50).unwrap_err();
        assert!(matches!(err, PptError::BasisTooLarge { .. }));
    }

    #[test]
    fn sigma_and_r() {
        let s = ConvexBody::simplex(3);
        assert_eq!(s.k_sigma(), 1);
        assert_eq!(s.r_sigma(), 1.0);
        let cube = ConvexBody::unit_cube(3);
        assert_eq!(cube.k_sigma(), 1);
        assert_eq!(cube.r_sigma(), 3.0);
        let small = ConvexBody::new(2, vec![vec![0.0, 0.0], vec![0.3, 0.0], vec![0.0, 0.3]]).unwrap();
        assert_eq!(small.k_sigma(), 4);
        let thin = ConvexBody::new(2, vec![vec![0.0, 0.0], vec![1.0, 0.0]]);
        assert!(thin.is_err());
        let off = ConvexBody::new(1, vec![vec![1.0], vec![2.0]]);
        assert!(off.is_err());
        assert!(ConvexBody::new(1, vec![vec![-1.0], vec![1.0]]).is_err());
    }

    #[test]
    fn volumes_and_gamma() {
        for d in 1..=3 {
            assert!((ConvexBody::simplex(d).gamma_d().unwrap() - 1.0).abs() < 1e-12);
            assert!((ConvexBody::unit_cube(d).volume().unwrap() - 1.0).abs() < 1e-12);
        }
        assert!((ConvexBody::unit_cube(2).gamma_d().unwrap() - 2.0).abs() < 1e-12);
        let big = ConvexBody::new(
            3,
            vec![
                vec![0.0, 0.0, 0.0],
                vec![2.0, 0.0, 0.0],
                vec![0.0, 2.0, 0.0],
                vec![0.0, 0.0, 2.0],
                vec![0.5, 0.5, 0.5],
            ],
        )
        .unwrap();
        assert!((big.volume().unwrap() - 8.0 / 6.0).abs() < 1e-12);
        assert!(matches!(
            ConvexBody::simplex(4).volume(),
            Err(PptError::UnsupportedDimension { .. })
        ));
    }

    #[test]
    fn constants_for_known_bodies() {
        let k = ConvexBody::simplex(1).constants(8).unwrap();
        assert_eq!((k.gamma_d, k.a, k.b_d), (1.0, 1.0, 2.0));
        for t in &k.f_n_sequence {
            assert_eq!(t.n as u64 * t.d_n as u64, 2 * t.l_n);
        }
        let sq = ConvexBody::unit_cube(2).constants(6).unwrap();
        assert!((sq.gamma_d - 2.0).abs() < 1e-12);
        assert!((sq.a - 1.5).abs() < 1e-12);
        assert!((sq.b_d - 0.5).abs() < 1e-12);
        assert!(ConvexBody::simplex(1).constants(1).is_err());
    }

    #[test]
    fn body_json_round_trip() {
        let body = ConvexBody::from_json(r#"{"dim": 2, "vertices": [[0,0],[1,0],[0,1]]}"#).unwrap();
        assert_eq!(body, ConvexBody::simplex(2));
        let text = serde_json::to_string(&body.spec()).unwrap();
        assert_eq!(ConvexBody::from_json(&text).unwrap(), body);
    }
}
