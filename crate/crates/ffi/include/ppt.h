#ifndef PPT_H
#define PPT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum PptStatus {
  PPT_STATUS_OK = 0,
  PPT_STATUS_NULL_POINTER = 1,
  PPT_STATUS_INVALID_ARGUMENT = 2,
  PPT_STATUS_INVALID_BODY = 3,
  PPT_STATUS_UNSUPPORTED_DIMENSION = 4,
  PPT_STATUS_DIMENSION_MISMATCH = 5,
  PPT_STATUS_INVALID_MESH = 6,
  PPT_STATUS_DEGENERATE_MESH = 7,
  PPT_STATUS_BUDGET_EXCEEDED = 8,
  PPT_STATUS_NUMERICAL = 9,
  PPT_STATUS_IO = 10,
  PPT_STATUS_PANIC = 11,
} PptStatus;

// A convex lattice polytope.
typedef struct PptBody PptBody;

// A weighted Fekete configuration on a mesh.
typedef struct PptConfiguration PptConfiguration;

// A finite weighted mesh: points, weight `Q` and reference masses.
typedef struct PptMesh PptMesh;

// Body constants; `converged` is 0 when the extrapolation of `A` did not settle.
typedef struct PptConstants {
  double gamma_d;
  double a;
  double b_d;
  int32_t converged;
} PptConstants;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread. The pointer stays valid
// until the next failing call on the same thread.
const char *ppt_last_error(void);

// Library version as a static NUL-terminated string.
const char *ppt_version(void);

// Convex hull of `n_vertices` vertices in the nonnegative orthant of `R^dim`.
//
// # Safety
// `vertices` must point to `n_vertices * dim` doubles and `out` must be writable.
enum PptStatus ppt_body_new(size_t dim,
                            const double *vertices,
                            size_t n_vertices,
                            struct PptBody **out);

// The standard simplex of dimension `dim`.
//
// # Safety
// `out` must be writable.
enum PptStatus ppt_body_simplex(size_t dim, struct PptBody **out);

// The unit cube `[0, 1]^dim`.
//
// # Safety
// `out` must be writable.
enum PptStatus ppt_body_cube(size_t dim, struct PptBody **out);

// # Safety
// `body` must come from a `ppt_body_*` constructor and not be freed yet, or be null.
void ppt_body_free(struct PptBody *body);

// `H_P(z)` for complex `z` given as separate real and imaginary parts.
//
// # Safety
// `re` and `im` must point to `dim` doubles each; `out` must be writable.
enum PptStatus ppt_body_h_p(const struct PptBody *body,
                            const double *re,
                            const double *im,
                            size_t dim,
                            double *out);

// `d_n = dim Poly(nP)` and `l_n`, the total degree of the Vandermonde.
//
// # Safety
// `body` must be a live handle; `d_n` and `l_n` must be writable.
enum PptStatus ppt_body_lattice_counts(const struct PptBody *body,
                                       uint32_t n,
                                       size_t *d_n,
                                       uint64_t *l_n);

// `γ_d`, `A` and `b_d` from lattice counts up to `n_max`.
//
// # Safety
// `body` must be a live handle; `out` must be writable.
enum PptStatus ppt_body_constants(const struct PptBody *body,
                                  uint32_t n_max,
                                  struct PptConstants *out);

// A mesh of `n_points` points. `q` (weight) and `nu` (reference masses) may
// be null, meaning `Q = 0` and equal masses summing to one.
//
// # Safety
// `points` must hold `n_points * dim` doubles; non-null `q` and `nu` must
// hold `n_points` doubles; `out` must be writable.
enum PptStatus ppt_mesh_new(size_t dim,
                            const double *points,
                            size_t n_points,
                            const double *q,
                            const double *nu,
                            struct PptMesh **out);

// `m` Chebyshev–Lobatto points on `[a, b]`.
//
// # Safety
// `out` must be writable.
enum PptStatus ppt_mesh_chebyshev(double a, double b, size_t m, struct PptMesh **out);

// Number of mesh points.
//
// # Safety
// `mesh` must be a live handle or null (returns 0).
size_t ppt_mesh_len(const struct PptMesh *mesh);

// # Safety
// `mesh` must come from a `ppt_mesh_*` constructor and not be freed yet, or be null.
void ppt_mesh_free(struct PptMesh *mesh);

// `log|VDM_n|` of `d_n` points for the basis of `Poly(nP)`.
//
// # Safety
// `points` must hold `n_points * dim` doubles with `dim` the body dimension.
enum PptStatus ppt_log_abs_vdm(const struct PptBody *body,
                               uint32_t n,
                               const double *points,
                               size_t n_points,
                               double *out);

// Weighted Fekete configuration of degree `n` on the mesh.
//
// # Safety
// `body` and `mesh` must be live handles; `out` must be writable.
enum PptStatus ppt_fekete(const struct PptBody *body,
                          const struct PptMesh *mesh,
                          uint32_t n,
                          struct PptConfiguration **out);

// Number of points `d_n` in the configuration.
//
// # Safety
// `config` must be a live handle or null (returns 0).
size_t ppt_configuration_len(const struct PptConfiguration *config);

// Copies the points row-major into `buf`, which holds `capacity` doubles.
//
// # Safety
// `config` must be a live handle; `buf` must hold `capacity` doubles.
enum PptStatus ppt_configuration_points(const struct PptConfiguration *config,
                                        double *buf,
                                        size_t capacity);

// `log|VDM_n^Q|` of the configuration.
//
// # Safety
// `config` must be a live handle; `out` must be writable.
enum PptStatus ppt_configuration_log_wvdm(const struct PptConfiguration *config, double *out);

// Transfinite diameter estimate `|VDM^Q|^{1/l_n}`, a lower bound for fixed `n`.
//
// # Safety
// `config` must be a live handle; `out` must be writable.
enum PptStatus ppt_configuration_delta_hat(const struct PptConfiguration *config, double *out);

// # Safety
// `config` must come from [`ppt_fekete`] and not be freed yet, or be null.
void ppt_configuration_free(struct PptConfiguration *config);

// Lower bound for the weighted extremal function at a real point `z`.
// `use_lp` nonzero adds the linear-programming competitor.
//
// # Safety
// `config` and `mesh` must be live handles, the configuration computed on
// that mesh; `z` must hold the body dimension of doubles.
enum PptStatus ppt_extremal_lower(const struct PptConfiguration *config,
                                  const struct PptMesh *mesh,
                                  const double *z,
                                  size_t dim,
                                  int32_t use_lp,
                                  double *out);

// `log Z_n` by exhaustive enumeration, refused beyond `budget` tuples.
//
// # Safety
// `body` and `mesh` must be live handles; `out` must be writable.
enum PptStatus ppt_brute_force_log_z(const struct PptBody *body,
                                     const struct PptMesh *mesh,
                                     uint32_t n,
                                     uint64_t budget,
                                     double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PPT_H */
