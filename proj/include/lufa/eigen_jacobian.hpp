#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "lufa/geom3.hpp"

namespace lufa {

// Fallback thresholds for the incremental forms. A nullopt from any guarded
// operation means "recompute rigorously", not an error.
struct GapGuard {
  double eps_gap{1e-6};   // eigenvalue gaps must exceed eps_gap * trace
  double cos_floor{0.5};  // basis continuity: v_{j,k-1} . v_{j,k} per axis
};

// Row gradient of eigenvalue lambda_j of the cloud covariance with respect to
// point i, computed from scratch: (2/k) [(p_i - m) . v_j] v_j^T.
Vec3 rigorous_lambda_jacobian(std::span<const Vec3> points, const Vec3& m,
                              const EigenBasis& basis, int j, std::size_t i);

// Shortcut update for an old point's row when the increment term is below
// threshold: pure (k-1)/k rescale.
Vec3 lambda_row_scaled(const Vec3& prev_row, std::int64_t k);

// Full O(1) update of an old point's row across the k-th insertion. d_u and
// v_u_hat describe the new point relative to the previous mean; bases must be
// sign-aligned. Fails the cos guard when the eigenvector rotated too far.
std::optional<Vec3> lambda_row_updated(const Vec3& prev_row, double d_u,
                                       const Vec3& v_u_hat, const EigenBasis& prev,
                                       const EigenBasis& cur, int j, std::int64_t k,
                                       const GapGuard& guard = {});

// Row for the newly inserted point itself. Exact (equals the rigorous row at
// i = k) whenever the eigenbasis did not rotate.
std::optional<Vec3> lambda_row_new_point(double d_u, const Vec3& v_u_hat,
                                         const EigenBasis& prev, const EigenBasis& cur,
                                         int j, std::int64_t k,
                                         const GapGuard& guard = {});

// Norm of the increment term in lambda_row_updated; +inf when the cos guard
// would fail. This is what the scheduler compares against its threshold.
double lambda_increment_magnitude(double d_u, const Vec3& v_u_hat,
                                  const EigenBasis& prev, const EigenBasis& cur,
                                  int j, std::int64_t k);

// Coupling coefficients for eigenvector perturbations: rows[m][n] is the row
// gradient of the m-th modal coordinate of eigenvector v_n with respect to
// the probed point. Diagonal rows are zero.
struct Coupling {
  std::array<std::array<Vec3, 3>, 3> rows{};
};

// From-scratch coupling for point i. Fails when any eigenvalue gap is below
// guard.eps_gap * trace (eigenvector derivatives are undefined there).
std::optional<Coupling> rigorous_coupling(std::span<const Vec3> points, const Vec3& m,
                                          const EigenBasis& basis, std::size_t i,
                                          const GapGuard& guard = {});

// O(1) update of an old point's coupling across the k-th insertion. Needs
// healthy gaps at both steps and basis continuity on every axis.
std::optional<Coupling> coupling_updated(const Coupling& prev_c, double d_u,
                                         const Vec3& v_u_hat, const EigenBasis& prev,
                                         const EigenBasis& cur, std::int64_t k,
                                         const GapGuard& guard = {});

// Coupling of the newly inserted point. Algebraically identical to
// rigorous_coupling at i = k, whatever the basis rotation.
std::optional<Coupling> coupling_new_point(double d_u, const Vec3& v_u_hat,
                                           const EigenBasis& cur, std::int64_t k,
                                           const GapGuard& guard = {});

// 3x3 Jacobian of eigenvector v_j with respect to the probed point, assembled
// from a coupling matrix: sum_m v_m rows[m][j].
Mat3 eigenvector_jacobian(const EigenBasis& basis, const Coupling& c, int j);

// Transport weights for eigenvector j's covariance across one insertion:
// w[m] rescales coupling row (m, j). w[j] multiplies a structurally zero row
// and is set to 0.
struct TransportColumn {
  int j{};
  Vec3 w{};
};

std::optional<TransportColumn> transport_weights(const EigenBasis& prev,
                                                 const EigenBasis& cur, std::int64_t k,
                                                 int j, const GapGuard& guard = {});

// Q = V_k diag(w) V_{k-1}^T. Maps every old point's eigenvector Jacobian
// (column j) across the insertion in one multiply, which is what makes the
// covariance update O(1).
Mat3 q_transport(const EigenBasis& prev, const EigenBasis& cur,
                 const TransportColumn& w);

}  // namespace lufa
