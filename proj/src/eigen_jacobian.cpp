#include "lufa/eigen_jacobian.hpp"

#include <cmath>
#include <limits>

namespace lufa {
namespace {

// Strict inequality so an all-zero spectrum fails rather than divides by 0.
bool gap_ok(const EigenBasis& b, int m, int n, const GapGuard& g) {
  return std::abs(b.lambda[n] - b.lambda[m]) > g.eps_gap * std::abs(b.trace());
}

bool all_gaps_ok(const EigenBasis& b, const GapGuard& g) {
  return gap_ok(b, 0, 1, g) && gap_ok(b, 0, 2, g) && gap_ok(b, 1, 2, g);
}

double cos_theta(const EigenBasis& prev, const EigenBasis& cur, int j) {
  return dot(prev.v[j], cur.v[j]);
}

bool all_cos_ok(const EigenBasis& prev, const EigenBasis& cur, const GapGuard& g) {
  for (int j = 0; j < 3; ++j)
    if (cos_theta(prev, cur, j) < g.cos_floor) return false;
  return true;
}

}  // namespace

Vec3 rigorous_lambda_jacobian(std::span<const Vec3> points, const Vec3& m,
                              const EigenBasis& basis, int j, std::size_t i) {
  const double k = static_cast<double>(points.size());
  const double proj = dot(points[i] - m, basis.v[j]);
  return (2.0 / k) * proj * basis.v[j];
}

Vec3 lambda_row_scaled(const Vec3& prev_row, std::int64_t k) {
  return (static_cast<double>(k - 1) / static_cast<double>(k)) * prev_row;
}

std::optional<Vec3> lambda_row_updated(const Vec3& prev_row, double d_u,
                                       const Vec3& v_u_hat, const EigenBasis& prev,
                                       const EigenBasis& cur, int j, std::int64_t k,
                                       const GapGuard& guard) {
  if (d_u == 0.0) return lambda_row_scaled(prev_row, k);
  const double ct = cos_theta(prev, cur, j);
  if (ct < guard.cos_floor) return std::nullopt;
  const double kd = static_cast<double>(k);
  const double cp_prev = dot(v_u_hat, prev.v[j]);
  const double cp_cur = dot(v_u_hat, cur.v[j]);
  const Vec3 increment =
      (d_u / (kd * kd * ct)) * (cp_prev * cur.v[j] + cp_cur * prev.v[j]);
  return lambda_row_scaled(prev_row, k) - increment;
}

std::optional<Vec3> lambda_row_new_point(double d_u, const Vec3& v_u_hat,
                                         const EigenBasis& prev, const EigenBasis& cur,
                                         int j, std::int64_t k, const GapGuard& guard) {
  if (d_u == 0.0) return Vec3{};
  const double ct = cos_theta(prev, cur, j);
  if (ct < guard.cos_floor) return std::nullopt;
  const double kd = static_cast<double>(k);
  const double cp_prev = dot(v_u_hat, prev.v[j]);
  const double cp_cur = dot(v_u_hat, cur.v[j]);
  return (d_u * (kd - 1.0) / (kd * kd * ct)) *
         (cp_prev * cur.v[j] + cp_cur * prev.v[j]);
}

double lambda_increment_magnitude(double d_u, const Vec3& v_u_hat,
                                  const EigenBasis& prev, const EigenBasis& cur,
                                  int j, std::int64_t k) {
  if (d_u == 0.0) return 0.0;
  const double ct = cos_theta(prev, cur, j);
  if (ct <= 0.0) return std::numeric_limits<double>::infinity();
  const double kd = static_cast<double>(k);
  const double cp_prev = dot(v_u_hat, prev.v[j]);
  const double cp_cur = dot(v_u_hat, cur.v[j]);
  return (d_u / (kd * kd * ct)) * norm(cp_prev * cur.v[j] + cp_cur * prev.v[j]);
}

std::optional<Coupling> rigorous_coupling(std::span<const Vec3> points, const Vec3& m,
                                          const EigenBasis& basis, std::size_t i,
                                          const GapGuard& guard) {
  if (!all_gaps_ok(basis, guard)) return std::nullopt;
  const double k = static_cast<double>(points.size());
  const Vec3 r = points[i] - m;
  Coupling c;
  for (int mm = 0; mm < 3; ++mm) {
    for (int nn = 0; nn < 3; ++nn) {
      if (mm == nn) continue;
      const double gap = basis.lambda[nn] - basis.lambda[mm];
      const double pm = dot(r, basis.v[mm]);
      const double pn = dot(r, basis.v[nn]);
      c.rows[mm][nn] = (1.0 / (k * gap)) * (pm * basis.v[nn] + pn * basis.v[mm]);
    }
  }
  return c;
}

std::optional<Coupling> coupling_updated(const Coupling& prev_c, double d_u,
                                         const Vec3& v_u_hat, const EigenBasis& prev,
                                         const EigenBasis& cur, std::int64_t k,
                                         const GapGuard& guard) {
  if (!all_gaps_ok(prev, guard) || !all_gaps_ok(cur, guard)) return std::nullopt;
  if (!all_cos_ok(prev, cur, guard)) return std::nullopt;
  const double kd = static_cast<double>(k);
  Coupling c;
  for (int mm = 0; mm < 3; ++mm) {
    for (int nn = 0; nn < 3; ++nn) {
      if (mm == nn) continue;
      const double gap_prev = prev.lambda[nn] - prev.lambda[mm];
      const double gap_cur = cur.lambda[nn] - cur.lambda[mm];
      const double w = (kd - 1.0) * gap_prev * cos_theta(prev, cur, mm) *
                       cos_theta(prev, cur, nn) / (kd * gap_cur);
      c.rows[mm][nn] = w * prev_c.rows[mm][nn];
      if (d_u != 0.0) {
        const double cp_m = dot(v_u_hat, cur.v[mm]);
        const double cp_n = dot(v_u_hat, cur.v[nn]);
        c.rows[mm][nn] -= (d_u / (kd * kd * gap_cur)) *
                          (cp_m * cur.v[nn] + cp_n * cur.v[mm]);
      }
    }
  }
  return c;
}

std::optional<Coupling> coupling_new_point(double d_u, const Vec3& v_u_hat,
                                           const EigenBasis& cur, std::int64_t k,
                                           const GapGuard& guard) {
  if (!all_gaps_ok(cur, guard)) return std::nullopt;
  Coupling c;
  if (d_u == 0.0) return c;
  const double kd = static_cast<double>(k);
  for (int mm = 0; mm < 3; ++mm) {
    for (int nn = 0; nn < 3; ++nn) {
      if (mm == nn) continue;
      const double gap = cur.lambda[nn] - cur.lambda[mm];
      const double cp_m = dot(v_u_hat, cur.v[mm]);
      const double cp_n = dot(v_u_hat, cur.v[nn]);
      c.rows[mm][nn] = (d_u * (kd - 1.0) / (kd * kd * gap)) *
                       (cp_m * cur.v[nn] + cp_n * cur.v[mm]);
    }
  }
  return c;
}

Mat3 eigenvector_jacobian(const EigenBasis& basis, const Coupling& c, int j) {
  Mat3 out;
  for (int mm = 0; mm < 3; ++mm) {
    if (mm == j) continue;
    out = out + outer(basis.v[mm], c.rows[mm][j]);
  }
  return out;
}

std::optional<TransportColumn> transport_weights(const EigenBasis& prev,
                                                 const EigenBasis& cur, std::int64_t k,
                                                 int j, const GapGuard& guard) {
  const double ct_j = cos_theta(prev, cur, j);
  if (ct_j < guard.cos_floor) return std::nullopt;
  const double kd = static_cast<double>(k);
  TransportColumn out;
  out.j = j;
  for (int mm = 0; mm < 3; ++mm) {
    if (mm == j) continue;  // multiplies a zero coupling row
    if (!gap_ok(prev, mm, j, guard) || !gap_ok(cur, mm, j, guard)) return std::nullopt;
    const double ct_m = cos_theta(prev, cur, mm);
    if (ct_m < guard.cos_floor) return std::nullopt;
    const double gap_prev = prev.lambda[j] - prev.lambda[mm];
    const double gap_cur = cur.lambda[j] - cur.lambda[mm];
    out.w[mm] = (kd - 1.0) * gap_prev * ct_m * ct_j / (kd * gap_cur);
  }
  return out;
}

Mat3 q_transport(const EigenBasis& prev, const EigenBasis& cur,
                 const TransportColumn& w) {
  Mat3 q;
  for (int mm = 0; mm < 3; ++mm) {
    if (mm == w.j) continue;
    q = q + w.w[mm] * outer(cur.v[mm], prev.v[mm]);
  }
  return q;
}

}  // namespace lufa
