//! Numerics for weighted pluripotential theory attached to a convex body `P`.
//!
//! The crate evaluates the logarithmic indicator `H_P`, enumerates the
//! monomial bases of `Poly(nP)`, computes weighted Vandermonde determinants in
//! log scale, finds mesh-discrete weighted Fekete configurations, estimates
//! transfinite diameters and extremal functions, samples the Vandermonde
//! point process `|VDM_n^Q|^2 dν^{⊗d_n}` and evaluates the `J`/`J^Q`
//! functionals, rate function and `Λ` functional through inf-over-weights
//! formulas.
//!
//! Everything is desk-scale: `d ≤ 3` for volumes, real meshes, and
//! brute-force enumeration where exact values are needed.

pub mod cache;
pub mod cli;
pub mod error;
pub mod extremal;
pub mod fekete;
pub mod functionals;
pub mod linalg;
pub mod lp;
pub mod measure;
pub mod mesh;
pub mod oracles1d;
pub mod polytope;
pub mod sampler;
pub mod vdm;

pub use error::{PptError, Result};
pub use fekete::{delta_estimate, fekete_points, DeltaEstimate, FeketeOptions};
pub use measure::GridMeasure;
pub use mesh::WeightedMesh;
pub use polytope::{BodyConstants, ConvexBody, MonomialBasis};
pub use vdm::{log_abs_vdm, log_abs_wvdm, Configuration};

/// Library version recorded in every emitted artifact.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
