//! C ABI over `ppt-core`.
//!
//! Objects are opaque heap handles created by `ppt_*_new`-style functions and
//! released with the matching `ppt_*_free`. Every fallible call returns a
//! [`PptStatus`] and writes its result through an out-pointer; on failure the
//! message is available from [`ppt_last_error`] on the same thread.
//!
//! Points are passed as row-major `n_points × dim` arrays of `double`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use num_complex::Complex64;
use ppt_core::extremal::{extremal_lower, ExtremalOptions};
use ppt_core::fekete::{fekete_points, DeltaEstimate, FeketeOptions, FeketeSet};
use ppt_core::{sampler, ConvexBody, PptError, WeightedMesh};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PptStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidBody = 3,
    UnsupportedDimension = 4,
    DimensionMismatch = 5,
    InvalidMesh = 6,
    DegenerateMesh = 7,
    BudgetExceeded = 8,
    Numerical = 9,
    Io = 10,
    Panic = 11,
}

/// A convex lattice polytope.
pub struct PptBody(ConvexBody);

/// A finite weighted mesh: points, weight `Q` and reference masses.
pub struct PptMesh(WeightedMesh);

/// A weighted Fekete configuration on a mesh.
pub struct PptConfiguration(FeketeSet);

/// Body constants; `converged` is 0 when the extrapolation of `A` did not settle.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PptConstants {
    pub gamma_d: f64,
    pub a: f64,
    pub b_d: f64,
    pub converged: i32,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &PptError) -> PptStatus {
    match e {
        PptError::InvalidBody(_) => PptStatus::InvalidBody,
        PptError::UnsupportedDimension { .. } => PptStatus::UnsupportedDimension,
        PptError::DimensionMismatch { .. } => PptStatus::DimensionMismatch,
        PptError::InvalidMesh(_) => PptStatus::InvalidMesh,
        PptError::DegenerateMesh(_) => PptStatus::DegenerateMesh,
        PptError::BudgetExceeded { .. } => PptStatus::BudgetExceeded,
        PptError::LinearProgram(_) => PptStatus::Numerical,
        PptError::Io(_) | PptError::Json(_) => PptStatus::Io,
        PptError::BasisTooLarge { .. } | PptError::InvalidArgument(_) | PptError::Parse(_) => {
            PptStatus::InvalidArgument
        }
    }
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), (PptStatus, String)>) -> PptStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PptStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            PptStatus::Panic
        }
    }
}

trait IntoFfi<T> {
    fn ffi(self) -> Result<T, (PptStatus, String)>;
}

impl<T> IntoFfi<T> for ppt_core::Result<T> {
    fn ffi(self) -> Result<T, (PptStatus, String)> {
        self.map_err(|e| (status_of(&e), e.to_string()))
    }
}

fn null(what: &str) -> (PptStatus, String) {
    (PptStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (PptStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn rows(data: *const f64, n_rows: usize, dim: usize, what: &str) -> Result<Vec<Vec<f64>>, (PptStatus, String)> {
    if n_rows == 0 {
        return Ok(Vec::new());
    }
    if data.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(data, n_rows * dim)
        .chunks(dim.max(1))
        .map(<[f64]>::to_vec)
        .collect())
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), (PptStatus, String)> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

/// Message of the last failed call on this thread. The pointer stays valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ppt_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ppt_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version contains NUL"),
    };
    VERSION.as_ptr()
}

/// Convex hull of `n_vertices` vertices in the nonnegative orthant of `R^dim`.
///
/// # Safety
/// `vertices` must point to `n_vertices * dim` doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ppt_body_new(
    dim: usize,
    vertices: *const f64,
    n_vertices: usize,
    out: *mut *mut PptBody,
) -> PptStatus {
    guard(|| {
        let v = rows(vertices, n_vertices, dim, "vertices")?;
        let body = ConvexBody::new(dim, v).ffi()?;
        write(out, Box::into_raw(Box::new(PptBody(body))))
    })
}

/// The standard simplex of dimension `dim`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ppt_body_simplex(dim: usize, out: *mut *mut PptBody) -> PptStatus {
    guard(|| {
        if dim == 0 {
            return Err((PptStatus::InvalidArgument, "dimension must be positive".into()));
        }
        write(out, Box::into_raw(Box::new(PptBody(ConvexBody::simplex(dim)))))
    })
}

/// The unit cube `[0, 1]^dim`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ppt_body_cube(dim: usize, out: *mut *mut PptBody) -> PptStatus {
    guard(|| {
        if dim == 0 {
            return Err((PptStatus::InvalidArgument, "dimension must be positive".into()));
        }
        write(out, Box::into_raw(Box::new(PptBody(ConvexBody::unit_cube(dim)))))
    })
}

/// # Safety
/// `body` must come from a `ppt_body_*` constructor and not be freed yet, or be null.
#[no_mangle]
pub unsafe extern "C" fn ppt_body_free(body: *mut PptBody) {
    if !body.is_null() {
        drop(Box::from_raw(body));
    }
}

/// `H_P(z)` for complex `z` given as separate real and imaginary parts.
///
/// # Safety
/// `re` and `im` must point to `dim` doubles each; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ppt_body_h_p(
    body: *const PptBody,
    re: *const f64,
    im: *const f64,
    dim: usize,
    out: *mut f64,
) -> PptStatus {
    guard(|| {
        let body = deref(body, "body")?;
        if dim > 0 && (re.is_null() || im.is_null()) {
            return Err(null("z"));
        }
        let z: Vec<Complex64> = (0..dim).map(|i| Complex64::new(*re.add(i), *im.add(i))).collect();
        write(out, body.0.h_p(&z).ffi()?)
    })
}

/// `d_n = dim Poly(nP)` and `l_n`, the total degree of the Vandermonde.
///
/// # Safety
/// `body` must be a live handle; `d_n` and `l_n` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ppt_body_lattice_counts(
    body: *const PptBody,
    n: u32,
    d_n: *mut usize,
    l_n: *mut u64,
) -> PptStatus {
    guard(|| {
        let basis = deref(body, "body")?.0.lattice_points(n).ffi()?;
        write(d_n, basis.d_n)?;
        write(l_n, basis.l_n)
    })
}

/// `γ_d`, `A` and `b_d` from lattice counts up to `n_max`.
///
/// # Safety
/// `body` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ppt_body_constants(body: *const PptBody, n_max: u32, out: *mut PptConstants) -> PptStatus {
    guard(|| {
        let k = deref(body, "body")?.0.constants(n_max).ffi()?;
        write(
            out,
            PptConstants {
                gamma_d: k.gamma_d,
                a: k.a,
                b_d: k.b_d,
                converged: k.converged as i32,
            },
        )
    })
}

/// A mesh of `n_points` points. `q` (weight) and `nu` (reference masses) may
/// be null, meaning `Q = 0` and equal masses summing to one.
///
/// # Safety
/// `points` must hold `n_points * dim` doubles; non-null `q` and `nu` must
/// hold `n_points` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ppt_mesh_new(
    dim: usize,
    points: *const f64,
    n_points: usize,
    q: *const f64,
    nu: *const f64,
    out: *mut *mut PptMesh,
) -> PptStatus {
    guard(|| {
        let pts = rows(points, n_points, dim, "points")?;
        let q = if q.is_null() {
            vec![0.0; n_points]
        } else {
            slice::from_raw_parts(q, n_points).to_vec()
        };
        let nu = if nu.is_null() {
            vec![1.0 / n_points.max(1) as f64; n_points]
        } else {
            slice::from_raw_parts(nu, n_points).to_vec()
        };
        let mesh = WeightedMesh::new(dim, pts, q, nu, "ffi").ffi()?;
        write(out, Box::into_raw(Box::new(PptMesh(mesh))))
    })
}

/// `m` Chebyshev–Lobatto points on `[a, b]`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ppt_mesh_chebyshev(a: f64, b: f64, m: usize, out: *mut *mut PptMesh) -> PptStatus {
    guard(|| {
        let mesh = WeightedMesh::chebyshev_interval(a, b, m).ffi()?;
        write(out, Box::into_raw(Box::new(PptMesh(mesh))))
    })
}

/// Number of mesh points.
///
/// # Safety
/// `mesh` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn ppt_mesh_len(mesh: *const PptMesh) -> usize {
    mesh.as_ref().map_or(0, |m| m.0.len())
}

/// # Safety
/// `mesh` must come from a `ppt_mesh_*` constructor and not be freed yet, or be null.
#[no_mangle]
pub unsafe extern "C" fn ppt_mesh_free(mesh: *mut PptMesh) {
    if !mesh.is_null() {
        drop(Box::from_raw(mesh));
    }
}

/// `log|VDM_n|` of `d_n` points for the basis of `Poly(nP)`.
///
/// # Safety
/// `points` must hold `n_points * dim` doubles with `dim` the body dimension.
#[no_mangle]
pub unsafe extern "C" fn ppt_log_abs_vdm(
    body: *const PptBody,
    n: u32,
    points: *const f64,
    n_points: usize,
    out: *mut f64,
) -> PptStatus {
    guard(|| {
        let body = &deref(body, "body")?.0;
        let basis = body.lattice_points(n).ffi()?;
        let pts = rows(points, n_points, body.dim(), "points")?;
        write(out, ppt_core::log_abs_vdm(&basis, &pts).ffi()?)
    })
}

/// Weighted Fekete configuration of degree `n` on the mesh.
///
/// # Safety
/// `body` and `mesh` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ppt_fekete(
    body: *const PptBody,
    mesh: *const PptMesh,
    n: u32,
    out: *mut *mut PptConfiguration,
) -> PptStatus {
    guard(|| {
        let basis = deref(body, "body")?.0.lattice_points(n).ffi()?;
        let set = fekete_points(&deref(mesh, "mesh")?.0, &basis, &FeketeOptions::default()).ffi()?;
        write(out, Box::into_raw(Box::new(PptConfiguration(set))))
    })
}

/// Number of points `d_n` in the configuration.
///
/// # Safety
/// `config` must be a live handle or null (returns 0).
#[no_mangle]
pub unsafe extern "C" fn ppt_configuration_len(config: *const PptConfiguration) -> usize {
    config.as_ref().map_or(0, |c| c.0.config.len())
}

/// Copies the points row-major into `buf`, which holds `capacity` doubles.
///
/// # Safety
/// `config` must be a live handle; `buf` must hold `capacity` doubles.
#[no_mangle]
pub unsafe extern "C" fn ppt_configuration_points(
    config: *const PptConfiguration,
    buf: *mut f64,
    capacity: usize,
) -> PptStatus {
    guard(|| {
        let c = &deref(config, "configuration")?.0.config;
        let flat: Vec<f64> = c.points.iter().flatten().copied().collect();
        if capacity < flat.len() {
            return Err((
                PptStatus::InvalidArgument,
                format!("buffer holds {capacity} values, need {}", flat.len()),
            ));
        }
        if buf.is_null() {
            return Err(null("buffer"));
        }
        ptr::copy_nonoverlapping(flat.as_ptr(), buf, flat.len());
        Ok(())
    })
}

/// `log|VDM_n^Q|` of the configuration.
///
/// # Safety
/// `config` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ppt_configuration_log_wvdm(config: *const PptConfiguration, out: *mut f64) -> PptStatus {
    guard(|| write(out, deref(config, "configuration")?.0.log_wvdm()))
}

/// Transfinite diameter estimate `|VDM^Q|^{1/l_n}`, a lower bound for fixed `n`.
///
/// # Safety
/// `config` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ppt_configuration_delta_hat(config: *const PptConfiguration, out: *mut f64) -> PptStatus {
    guard(|| {
        let set = deref(config, "configuration")?.0.clone();
        write(out, DeltaEstimate::from_fekete(set).delta_hat)
    })
}

/// # Safety
/// `config` must come from [`ppt_fekete`] and not be freed yet, or be null.
#[no_mangle]
pub unsafe extern "C" fn ppt_configuration_free(config: *mut PptConfiguration) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Lower bound for the weighted extremal function at a real point `z`.
/// `use_lp` nonzero adds the linear-programming competitor.
///
/// # Safety
/// `config` and `mesh` must be live handles, the configuration computed on
/// that mesh; `z` must hold the body dimension of doubles.
#[no_mangle]
pub unsafe extern "C" fn ppt_extremal_lower(
    config: *const PptConfiguration,
    mesh: *const PptMesh,
    z: *const f64,
    dim: usize,
    use_lp: i32,
    out: *mut f64,
) -> PptStatus {
    guard(|| {
        let set = &deref(config, "configuration")?.0;
        let mesh = &deref(mesh, "mesh")?.0;
        if dim != mesh.dim() {
            return Err((
                PptStatus::DimensionMismatch,
                format!("z has {dim} coordinates, mesh has dimension {}", mesh.dim()),
            ));
        }
        let z = rows(z, 1, dim, "z")?.pop().unwrap_or_default();
        let opts = ExtremalOptions { use_lp: use_lp != 0 };
        write(out, extremal_lower(&z, &set.config, mesh, &opts).ffi()?.value)
    })
}

/// `log Z_n` by exhaustive enumeration, refused beyond `budget` tuples.
///
/// # Safety
/// `body` and `mesh` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ppt_brute_force_log_z(
    body: *const PptBody,
    mesh: *const PptMesh,
    n: u32,
    budget: u64,
    out: *mut f64,
) -> PptStatus {
    guard(|| {
        let basis = deref(body, "body")?.0.lattice_points(n).ffi()?;
        write(out, sampler::brute_force_log_z(&deref(mesh, "mesh")?.0, &basis, budget).ffi()?)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_codes_cover_variants() {
        assert_eq!(status_of(&PptError::Parse("x".into())), PptStatus::InvalidArgument);
        assert_eq!(
            status_of(&PptError::BudgetExceeded { tuples: 1.0, budget: 0 }),
            PptStatus::BudgetExceeded
        );
    }

    #[test]
    fn panics_become_status() {
        let s = guard(|| panic!("boom"));
        assert_eq!(s, PptStatus::Panic);
        let msg = unsafe { CStr::from_ptr(ppt_last_error()) }.to_str().unwrap();
        assert!(msg.contains("boom"));
    }
}
