//! Estimators for `J`, `J^Q`, the rate function, `E*` and `Λ` built from
//! mesh transfinite diameters `δ̂^v` over a finite family of weights `v`.
//!
//! With `B(v) = log δ̂^v + b_d ∫v dμ`, the family infimum gives
//! `log Ĵ(μ) = inf_v B(v)` (an upper bound for `log J(μ)`) and everything
//! else follows from it.

use std::cell::RefCell;
use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{PptError, Result};
use crate::fekete::{fekete_points, FeketeOptions};
use crate::measure::{GridMeasure, MomentSet};
use crate::mesh::WeightedMesh;
use crate::polytope::{BodyConstants, MonomialBasis};
use crate::sampler::exact_log_masses;
use crate::vdm::BasisEvaluator;

/// Which side of the true value an estimate lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    Upper,
    Lower,
    Exact,
    Estimate,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounded {
    pub value: f64,
    pub bound: Bound,
}

impl Bounded {
    fn new(value: f64, bound: Bound) -> Self {
        Bounded { value, bound }
    }
}

/// Finite-dimensional family `v = Σ c_i g_i` with `c` in a box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightFamily {
    pub names: Vec<String>,
    /// Generator values per mesh point.
    pub generators: Vec<Vec<f64>>,
    pub lower: f64,
    pub upper: f64,
    /// Index of the base weight `Q` among the generators.
    pub q_index: Option<usize>,
}

impl WeightFamily {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower < upper) {
            return Err(PptError::InvalidArgument("coefficient box must have lower < upper".into()));
        }
        Ok(WeightFamily {
            names: Vec::new(),
            generators: Vec::new(),
            lower,
            upper,
            q_index: None,
        })
    }

    pub fn includes_q(&self) -> bool {
        self.q_index.is_some()
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn push(mut self, name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(PptError::InvalidArgument("family generators must be finite on the mesh".into()));
        }
        if let Some(g) = self.generators.first() {
            if g.len() != values.len() {
                return Err(PptError::DimensionMismatch {
                    expected: g.len(),
                    got: values.len(),
                });
            }
        }
        self.names.push(name.into());
        self.generators.push(values);
        Ok(self)
    }

    /// Adds the mesh weight `Q` as a generator.
    pub fn with_q(mut self, mesh: &WeightedMesh) -> Result<Self> {
        if self.q_index.is_some() {
            return Ok(self);
        }
        let i = self.generators.len();
        self = self.push("Q", mesh.q().to_vec())?;
        self.q_index = Some(i);
        Ok(self)
    }

    /// Adds tensor Chebyshev polynomials of total degree `1..=degree`,
    /// scaled to the mesh bounding box. Constants are left out: they shift
    /// `B(v)` only by the finite-`n` gap between `n d_n/l_n` and `b_d γ_d`.
    pub fn with_chebyshev(mut self, mesh: &WeightedMesh, degree: u32) -> Result<Self> {
        let bounds = mesh.bounding_box();
        let dim = mesh.dim();
        for alpha in crate::measure::exponents_up_to(dim, degree) {
            if alpha.iter().all(|&a| a == 0) {
                continue;
            }
            let values = mesh
                .points()
                .iter()
                .map(|x| {
                    alpha
                        .iter()
                        .zip(x)
                        .zip(&bounds)
                        .map(|((&a, &xi), &(lo, hi))| {
                            let t = if hi > lo { (2.0 * xi - lo - hi) / (hi - lo) } else { 0.0 };
                            chebyshev(a, t)
                        })
                        .product()
                })
                .collect();
            let name = format!("T{}", alpha.iter().map(|a| a.to_string()).collect::<Vec<_>>().join("_"));
            self = self.push(name, values)?;
        }
        Ok(self)
    }

    /// `{Q} ∪ {T_α : 1 ≤ |α| ≤ 4}` with box `[-2, 2]`.
    pub fn standard(mesh: &WeightedMesh) -> Result<Self> {
        WeightFamily::new(-2.0, 2.0)?.with_q(mesh)?.with_chebyshev(mesh, 4)
    }

    /// Parses `q,cheb:4,box:2` style specs (items in any order).
    pub fn parse(spec: &str, mesh: &WeightedMesh) -> Result<Self> {
        let mut half = 2.0;
        let mut want_q = false;
        let mut degree = 0;
        for item in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, val) = item.split_once(':').unwrap_or((item, ""));
            match key {
                "q" | "Q" => want_q = true,
                "cheb" => {
                    degree = val
                        .parse()
                        .map_err(|_| PptError::Parse(format!("bad chebyshev degree in {item:?}")))?
                }
                "box" => {
                    half = val
                        .parse()
                        .map_err(|_| PptError::Parse(format!("bad box half-width in {item:?}")))?
                }
                _ => return Err(PptError::Parse(format!("unknown family item {item:?}"))),
            }
        }
        let mut fam = WeightFamily::new(-half, half)?;
        if want_q {
            fam = fam.with_q(mesh)?;
        }
        if degree > 0 {
            fam = fam.with_chebyshev(mesh, degree)?;
        }
        if fam.is_empty() {
            return Err(PptError::Parse(format!("family {spec:?} has no generators")));
        }
        Ok(fam)
    }

    /// Values of `Σ c_i g_i` on the mesh.
    pub fn combine(&self, coeffs: &[f64]) -> Vec<f64> {
        let m = self.generators.first().map_or(0, Vec::len);
        let mut v = vec![0.0; m];
        for (c, g) in coeffs.iter().zip(&self.generators) {
            if *c != 0.0 {
                for (vi, gi) in v.iter_mut().zip(g) {
                    *vi += c * gi;
                }
            }
        }
        v
    }

    fn q_coeffs(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.len()];
        if let Some(i) = self.q_index {
            c[i] = 1.0;
        }
        c
    }
}

fn chebyshev(k: u32, t: f64) -> f64 {
    let (mut a, mut b) = (1.0, t);
    if k == 0 {
        return a;
    }
    for _ in 1..k {
        (a, b) = (b, 2.0 * t * b - a);
    }
    b
}

/// `log δ̂^v` on the mesh at the basis degree.
pub fn log_delta_with(mesh: &WeightedMesh, basis: &MonomialBasis, v: &[f64], opts: &FeketeOptions) -> Result<f64> {
    let weighted = mesh.with_q(v.to_vec())?;
    let f = fekete_points(&weighted, basis, opts)?;
    Ok(f.log_wvdm() / basis.l_n as f64)
}

/// Settings for the coordinate-descent infimum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub sweeps: usize,
    /// Golden-section bracket width at which a line search stops.
    pub line_tol: f64,
    pub fekete: FeketeOptions,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            sweeps: 4,
            line_tol: 1e-3,
            fekete: FeketeOptions::default(),
        }
    }
}

/// Minimizer of `B(v)` over the family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyInf {
    pub value: f64,
    /// `B` at the base weight (`v = Q`, or `v = 0` without `Q`), same pool.
    pub at_q: f64,
    pub coefficients: Vec<f64>,
    pub boundary_hit: bool,
    pub evaluations: usize,
}

/// `B(v)` with `log δ̂^v` taken as the best weighted Vandermonde over every
/// mesh configuration found so far. Each search result joins the pool, so
/// `log δ̂^v` stays a lower bound for the mesh maximum while no longer
/// depending on which local optimum the exchange search lands in.
struct Objective<'a> {
    mesh: &'a WeightedMesh,
    basis: &'a MonomialBasis,
    family: &'a WeightFamily,
    /// `b_d · mesh masses of μ`.
    scaled_masses: Vec<f64>,
    opts: &'a FeketeOptions,
    frame: BasisEvaluator,
    /// `(mesh indices, log|VDM|)` of every configuration found.
    pool: RefCell<Vec<(Vec<usize>, f64)>>,
    seen: RefCell<HashSet<Vec<usize>>>,
    cache: RefCell<HashMap<Vec<u64>, (Vec<f64>, f64)>>,
}

impl Objective<'_> {
    fn score(&self, c: &[f64]) -> f64 {
        let v = self.family.combine(c);
        let n = self.basis.n as f64;
        let best = self
            .pool
            .borrow()
            .iter()
            .map(|(idx, lv)| lv - n * idx.iter().map(|&k| v[k]).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max);
        let linear: f64 = self
            .scaled_masses
            .iter()
            .zip(&v)
            .filter(|(m, _)| **m != 0.0)
            .map(|(m, v)| m * v)
            .sum();
        best / self.basis.l_n as f64 + linear
    }

    fn eval(&self, c: &[f64]) -> Result<f64> {
        let key: Vec<u64> = c.iter().map(|x| x.to_bits()).collect();
        if let Some((_, v)) = self.cache.borrow().get(&key) {
            return Ok(*v);
        }
        let weighted = self.mesh.with_q(self.family.combine(c))?;
        let found = fekete_points(&weighted, self.basis, self.opts)?;
        let idx = found.indices().to_vec();
        if self.seen.borrow_mut().insert(idx.clone()) {
            let pts: Vec<Vec<f64>> = idx.iter().map(|&k| self.mesh.point(k).to_vec()).collect();
            let lv = self.frame.log_abs_vdm(&pts);
            self.pool.borrow_mut().push((idx, lv));
        }
        let value = self.score(c);
        self.cache.borrow_mut().insert(key, (c.to_vec(), value));
        Ok(value)
    }

    fn evaluations(&self) -> usize {
        self.cache.borrow().len()
    }

    /// Smallest `B` over every evaluated point, rescored with the final
    /// pool, and its coefficients.
    fn final_inf(&self) -> (f64, Vec<f64>) {
        let mut points: Vec<Vec<f64>> = self.cache.borrow().values().map(|(c, _)| c.clone()).collect();
        points.sort_by(|a, b| a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal));
        let mut best = (f64::INFINITY, Vec::new());
        for c in points {
            let v = self.score(&c);
            if v < best.0 {
                best = (v, c);
            }
        }
        best
    }

    /// Coordinate descent with golden-section line searches over `[lo, hi]`
    /// from `start`, leaving coordinate `pinned` fixed.
    fn descend(&self, start: Vec<f64>, pinned: Option<usize>, lo: f64, hi: f64, opts: &SearchOptions) -> Result<(f64, Vec<f64>)> {
        const INV_PHI: f64 = 0.618_033_988_749_894_8;
        let mut c = start;
        let mut best = self.eval(&c)?;
        for _ in 0..opts.sweeps {
            let before = best;
            for i in (0..c.len()).filter(|&i| Some(i) != pinned) {
                let at = |t: f64, c: &[f64]| -> Result<f64> {
                    let mut trial = c.to_vec();
                    trial[i] = t;
                    self.eval(&trial)
                };
                let (mut a, mut b) = (lo, hi);
                let mut x1 = b - INV_PHI * (b - a);
                let mut x2 = a + INV_PHI * (b - a);
                let mut f1 = at(x1, &c)?;
                let mut f2 = at(x2, &c)?;
                while b - a > opts.line_tol {
                    if f1 <= f2 {
                        b = x2;
                        x2 = x1;
                        f2 = f1;
                        x1 = b - INV_PHI * (b - a);
                        f1 = at(x1, &c)?;
                    } else {
                        a = x1;
                        x1 = x2;
                        f1 = f2;
                        x2 = a + INV_PHI * (b - a);
                        f2 = at(x2, &c)?;
                    }
                }
                // the box edges are candidates too, the minimum may sit there
                let mut cands = [(x1, f1), (x2, f2), (lo, at(lo, &c)?), (hi, at(hi, &c)?)];
                cands.sort_by(|p, q| p.1.total_cmp(&q.1));
                if cands[0].1 < best {
                    best = cands[0].1;
                    c[i] = cands[0].0;
                }
            }
            if before - best <= 1e-12 {
                break;
            }
        }
        Ok((best, c))
    }
}

fn objective<'a>(
    mu: &GridMeasure,
    mesh: &'a WeightedMesh,
    basis: &'a MonomialBasis,
    family: &'a WeightFamily,
    consts: &BodyConstants,
    opts: &'a SearchOptions,
) -> Result<Objective<'a>> {
    if family.is_empty() {
        return Err(PptError::InvalidArgument("empty weight family".into()));
    }
    if family.generators[0].len() != mesh.len() {
        return Err(PptError::DimensionMismatch {
            expected: mesh.len(),
            got: family.generators[0].len(),
        });
    }
    let masses = mu.mesh_masses(mesh)?;
    Ok(Objective {
        mesh,
        basis,
        family,
        scaled_masses: masses.iter().map(|m| consts.b_d * m).collect(),
        opts: &opts.fekete,
        frame: BasisEvaluator::for_mesh(basis, mesh),
        pool: RefCell::new(Vec::new()),
        seen: RefCell::new(HashSet::new()),
        cache: RefCell::new(HashMap::new()),
    })
}

/// `inf_v [log δ̂^v + b_d ∫v dμ]` over the family, by coordinate descent
/// from three starts: `v = Q`, `v = 0`, and `Q` plus an alternating
/// perturbation.
pub fn family_inf(
    mu: &GridMeasure,
    mesh: &WeightedMesh,
    basis: &MonomialBasis,
    family: &WeightFamily,
    consts: &BodyConstants,
    opts: &SearchOptions,
) -> Result<FamilyInf> {
    let objective = objective(mu, mesh, basis, family, consts, opts)?;
    let q = family.q_coeffs();
    let zero = vec![0.0; family.len()];
    let mut perturbed = q.clone();
    for (i, c) in perturbed.iter_mut().enumerate() {
        if Some(i) != family.q_index {
            *c = if i % 2 == 0 { 0.5 } else { -0.5 };
        }
    }
    for start in [q.clone(), zero, perturbed] {
        objective.descend(start, None, family.lower, family.upper, opts)?;
    }
    let (value, coefficients) = objective.final_inf();
    let at_q = objective.score(&q);
    let edge = 1e-3 * (family.upper - family.lower);
    let boundary_hit = coefficients
        .iter()
        .any(|c| (c - family.lower).abs() <= edge || (family.upper - c).abs() <= edge);
    Ok(FamilyInf {
        value,
        at_q,
        coefficients,
        boundary_hit,
        evaluations: objective.evaluations(),
    })
}

/// `∫Q dμ` with `0·∞ = 0`.
fn integral_q(mu: &GridMeasure, mesh: &WeightedMesh) -> Result<f64> {
    mu.integrate_mesh_values(mesh, mesh.q())
}

/// `log Ĵ^Q(μ) = inf_v[log δ̂^v + b_d∫v dμ] − b_d∫Q dμ`, an upper bound.
pub fn j_q_estimate(
    mu: &GridMeasure,
    mesh: &WeightedMesh,
    basis: &MonomialBasis,
    family: &WeightFamily,
    consts: &BodyConstants,
    opts: &SearchOptions,
) -> Result<(Bounded, FamilyInf)> {
    let inf = family_inf(mu, mesh, basis, family, consts, opts)?;
    let value = inf.value - consts.b_d * integral_q(mu, mesh)?;
    Ok((Bounded::new(value, Bound::Upper), inf))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub mu: GridMeasure,
    pub n: u32,
    pub log_delta_q: Bounded,
    pub log_j: Bounded,
    pub log_jq: Bounded,
    pub i_lower: Bounded,
    pub e_star: Bounded,
    pub integral_q: f64,
    pub best_v: Vec<f64>,
    pub family: Vec<String>,
    pub boundary_hit: bool,
    pub evaluations: usize,
}

/// `Î(μ) = log δ̂^Q − log Ĵ^Q(μ)`, a lower bound on the rate function.
/// Requires `Q` in the family, which makes it nonnegative by construction.
pub fn rate_function(
    mu: &GridMeasure,
    mesh: &WeightedMesh,
    basis: &MonomialBasis,
    family: &WeightFamily,
    consts: &BodyConstants,
    opts: &SearchOptions,
) -> Result<RateReport> {
    if !family.includes_q() {
        return Err(PptError::InvalidArgument("the rate function needs Q in the family".into()));
    }
    if !mu.has_mass(consts.gamma_d) {
        return Err(PptError::InvalidArgument(format!(
            "measure has mass {}, expected γ_d = {}",
            mu.total(),
            consts.gamma_d
        )));
    }
    let inf = family_inf(mu, mesh, basis, family, consts, opts)?;
    let iq = integral_q(mu, mesh)?;
    let log_delta_q = inf.at_q - consts.b_d * iq;
    let log_jq = inf.value - consts.b_d * iq;
    Ok(RateReport {
        mu: mu.clone(),
        n: basis.n,
        log_delta_q: Bounded::new(log_delta_q, Bound::Estimate),
        log_j: Bounded::new(inf.value, Bound::Upper),
        log_jq: Bounded::new(log_jq, Bound::Upper),
        i_lower: Bounded::new(log_delta_q - log_jq, Bound::Lower),
        e_star: Bounded::new(-inf.value / consts.b_d, Bound::Lower),
        integral_q: iq,
        best_v: inf.coefficients,
        family: family.names.clone(),
        boundary_hit: inf.boundary_hit,
        evaluations: inf.evaluations,
    })
}

/// `Ê*(μ) = −log Ĵ(μ)/b_d`, a lower bound on `E*(μ)`.
pub fn e_star(
    mu: &GridMeasure,
    mesh: &WeightedMesh,
    basis: &MonomialBasis,
    family: &WeightFamily,
    consts: &BodyConstants,
    opts: &SearchOptions,
) -> Result<Bounded> {
    let inf = family_inf(mu, mesh, basis, family, consts, opts)?;
    Ok(Bounded::new(-inf.value / consts.b_d, Bound::Lower))
}

fn require_unit_gamma(consts: &BodyConstants) -> Result<()> {
    if (consts.gamma_d - 1.0).abs() > 1e-12 {
        return Err(PptError::InvalidArgument(format!(
            "Λ uses the γ_d = 1 normalization, body has γ_d = {}",
            consts.gamma_d
        )));
    }
    Ok(())
}

/// `Λ̂(v) = log δ̂^{Q − v/b_d} − log δ̂^Q` for `v` given on the mesh.
pub fn lambda_functional(
    v: &[f64],
    mesh: &WeightedMesh,
    basis: &MonomialBasis,
    consts: &BodyConstants,
    opts: &FeketeOptions,
) -> Result<Bounded> {
    require_unit_gamma(consts)?;
    if v.len() != mesh.len() {
        return Err(PptError::DimensionMismatch {
            expected: mesh.len(),
            got: v.len(),
        });
    }
    let shifted: Vec<f64> = mesh.q().iter().zip(v).map(|(q, v)| q - v / consts.b_d).collect();
    let base = log_delta_with(mesh, basis, mesh.q(), opts)?;
    Ok(Bounded::new(log_delta_with(mesh, basis, &shifted, opts)? - base, Bound::Estimate))
}

/// `sup_v [∫v dμ − Λ̂(v)]` over `v = Σ c_i g_i` (the family's non-`Q`
/// generators, `c` in the family box), a lower bound on the rate function.
pub fn legendre_rate(
    mu: &GridMeasure,
    mesh: &WeightedMesh,
    basis: &MonomialBasis,
    family: &WeightFamily,
    consts: &BodyConstants,
    opts: &SearchOptions,
) -> Result<Bounded> {
    require_unit_gamma(consts)?;
    // ∫v dμ − Λ̂(v) = B(Q) − B(Q − v/b_d): search w = Q + Σ c'_i g_i with
    // c'_i = −c_i/b_d and the Q coefficient pinned at 1.
    let b = consts.b_d;
    let mut shifted = WeightFamily::new(-family.upper / b, -family.lower / b)?.with_q(mesh)?;
    for (i, (name, g)) in family.names.iter().zip(&family.generators).enumerate() {
        if Some(i) != family.q_index {
            shifted = shifted.push(name.clone(), g.clone())?;
        }
    }
    if shifted.len() == 1 {
        return Ok(Bounded::new(0.0, Bound::Lower));
    }
    let obj = objective(mu, mesh, basis, &shifted, consts, opts)?;
    let q = shifted.q_coeffs();
    let mut perturbed = q.clone();
    for (i, c) in perturbed.iter_mut().enumerate().skip(1) {
        *c = if i % 2 == 0 { 0.5 } else { -0.5 } / b;
    }
    for start in [q.clone(), perturbed] {
        obj.descend(start, Some(0), shifted.lower, shifted.upper, opts)?;
    }
    let (inf, _) = obj.final_inf();
    Ok(Bounded::new(obj.score(&q) - inf, Bound::Lower))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JnDirect {
    /// `(1/2l_n) log ∫_{G̃} |VDM_n^Q|^2 dν^{⊗d_n}`.
    pub log_jn: Bounded,
    /// `(1/2l_n) log Z_n` for comparison.
    pub log_zn_root: f64,
}

/// `log J^Q_n(G)` by exhaustive enumeration for a moment neighborhood `G`
/// of empirical measures with mass `γ_d`.
pub fn j_n_direct(
    mesh: &WeightedMesh,
    basis: &MonomialBasis,
    gamma_d: f64,
    neighborhood: &MomentSet,
    budget: u64,
) -> Result<JnDirect> {
    let event = |idx: &[usize]| neighborhood.contains(&GridMeasure::from_indices(mesh, idx, gamma_d));
    let (log_z, log_g) = exact_log_masses(mesh, basis, budget, &event)?;
    let s = 2.0 * basis.l_n as f64;
    Ok(JnDirect {
        log_jn: Bounded::new(log_g / s, Bound::Exact),
        log_zn_root: log_z / s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fekete::fekete_measure;
    use crate::polytope::ConvexBody;

    fn setup(m: usize, n: u32) -> (WeightedMesh, MonomialBasis, BodyConstants) {
        let mesh = WeightedMesh::chebyshev_interval(-1.0, 1.0, m).unwrap();
        let basis = ConvexBody::simplex(1).lattice_points(n).unwrap();
        (mesh, basis, BodyConstants::exact(1, 1.0, 1.0))
    }

    fn quick() -> SearchOptions {
        SearchOptions {
            sweeps: 2,
            line_tol: 1e-2,
            ..SearchOptions::default()
        }
    }

    #[test]
    fn chebyshev_recurrence() {
        for t in [-0.9, -0.2, 0.4, 1.0] {
            assert!((chebyshev(3, t) - (4.0 * t * t * t - 3.0 * t)).abs() < 1e-14);
            assert!((chebyshev(4, t) - (8.0 * t.powi(4) - 8.0 * t * t + 1.0)).abs() < 1e-13);
        }
        assert_eq!(chebyshev(0, 0.3), 1.0);
    }

    #[test]
    fn family_parse() {
        let (mesh, _, _) = setup(21, 4);
        let f = WeightFamily::parse("q,cheb:3,box:1.5", &mesh).unwrap();
        assert_eq!(f.len(), 4);
        assert!(f.includes_q());
        assert_eq!((f.lower, f.upper), (-1.5, 1.5));
        assert!(WeightFamily::parse("bogus", &mesh).is_err());
        assert_eq!(WeightFamily::standard(&mesh).unwrap().len(), 5);
    }

    #[test]
    fn fekete_measure_has_near_zero_rate() {
        let (mesh, basis, consts) = setup(61, 8);
        let fam = WeightFamily::new(-2.0, 2.0).unwrap().with_q(&mesh).unwrap().with_chebyshev(&mesh, 2).unwrap();
        let f = fekete_points(&mesh, &basis, &FeketeOptions::default()).unwrap();
        let mu = fekete_measure(&f.config, 1.0);
        let r = rate_function(&mu, &mesh, &basis, &fam, &consts, &quick()).unwrap();
        assert!(r.i_lower.value >= 0.0);
        assert!(r.i_lower.value < 1e-9, "{}", r.i_lower.value);
        assert_eq!(r.i_lower.bound, Bound::Lower);
    }

    #[test]
    fn j_and_jq_differ_by_weight_integral() {
        let (mesh, basis, consts) = setup(41, 6);
        let mesh = mesh.with_weight(|x| 0.2 * x[0] * x[0] + 0.1).unwrap();
        let fam = WeightFamily::new(-1.0, 1.0).unwrap().with_q(&mesh).unwrap().with_chebyshev(&mesh, 1).unwrap();
        let mu = GridMeasure::from_mesh_masses(&mesh, mesh.nu()).unwrap();
        let r = rate_function(&mu, &mesh, &basis, &fam, &consts, &quick()).unwrap();
        let diff = r.log_j.value - r.log_jq.value;
        assert!((diff - consts.b_d * r.integral_q).abs() < 1e-12);
        assert!(r.log_jq.value <= r.log_delta_q.value + 1e-12);
    }

    #[test]
    fn lambda_of_constants() {
        let (mesh, basis, consts) = setup(31, 5);
        let opts = FeketeOptions::default();
        let zero = lambda_functional(&vec![0.0; mesh.len()], &mesh, &basis, &consts, &opts).unwrap();
        assert_eq!(zero.value, 0.0);
        let c = lambda_functional(&vec![0.7; mesh.len()], &mesh, &basis, &consts, &opts).unwrap();
        assert!((c.value - 0.7).abs() < 1e-9);
        let square = BodyConstants::exact(2, 2.0, 1.5);
        assert!(lambda_functional(&vec![0.0; mesh.len()], &mesh, &basis, &square, &opts).is_err());
    }

    #[test]
    fn jn_direct_extremes() {
        let mesh = WeightedMesh::from_points(1, vec![vec![-1.0], vec![0.0], vec![1.0]], "t").unwrap();
        let basis = ConvexBody::simplex(1).lattice_points(1).unwrap();
        let all = j_n_direct(&mesh, &basis, 1.0, &MomentSet::everything(), 1000).unwrap();
        assert_eq!(all.log_jn.value, all.log_zn_root);
        assert!((all.log_zn_root - (4.0f64 / 3.0).ln() / 2.0).abs() < 1e-14);
        let none = j_n_direct(&mesh, &basis, 1.0, &MomentSet::empty(1), 1000).unwrap();
        assert_eq!(none.log_jn.value, f64::NEG_INFINITY);
    }
}
