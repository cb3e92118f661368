#include "lufa/lufa.hpp"

#include <cmath>
#include <stdexcept>

namespace lufa {
namespace {

bool normal_gaps_ok(const EigenBasis& b, const GapGuard& g) {
  const double floor = g.eps_gap * std::abs(b.trace());
  return std::abs(b.lambda[1] - b.lambda[0]) > floor &&
         std::abs(b.lambda[2] - b.lambda[0]) > floor;
}

// Jacobian of the normal (eigenvector 0) with respect to one point, built
// from the two cross-modal coupling rows. proj_j = (p_i - m) . v_j.
Mat3 normal_jacobian(const EigenBasis& b, const Vec3& r, double k) {
  Mat3 j;
  const double p0 = dot(r, b.v[0]);
  for (int mm = 1; mm < 3; ++mm) {
    const double gap = b.lambda[0] - b.lambda[mm];
    const double pm = dot(r, b.v[mm]);
    const Vec3 row = (1.0 / (k * gap)) * (pm * b.v[0] + p0 * b.v[mm]);
    j = j + outer(b.v[mm], row);
  }
  return j;
}

SymMat3 sandwich(const Mat3& j, const SymMat3& a) {
  return SymMat3::from_mat(j * a.to_mat() * j.transposed());
}

}  // namespace

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::warmup: return "warmup";
    case Mode::fast: return "fast";
    case Mode::rigorous: return "rigorous";
    case Mode::frozen: return "frozen";
  }
  return "unknown";
}

std::array<double, 36> JointCovariance::to_matrix6() const {
  std::array<double, 36> m{};
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      m[6 * r + c] = a_n(r, c);
      m[6 * r + (c + 3)] = a_nm(r, c);
      m[6 * (r + 3) + c] = a_nm(c, r);
      m[6 * (r + 3) + (c + 3)] = a_m(r, c);
    }
  }
  return m;
}

std::optional<Propagated> rigorous_propagate(const TrackedCloud& cloud,
                                             const GapGuard& guard) {
  const std::int64_t k = cloud.stats.k;
  if (k < 3 || cloud.points.size() != static_cast<std::size_t>(k)) return std::nullopt;
  const EigenBasis& b = cloud.basis;
  if (!normal_gaps_ok(b, guard)) return std::nullopt;

  const double kd = static_cast<double>(k);
  Propagated out;
  for (std::int64_t i = 0; i < k; ++i) {
    const SymMat3& ap = cloud.point_covs[i];
    const Vec3 r = cloud.points[i] - cloud.stats.m;
    for (int j = 0; j < 3; ++j) {
      const double coef = (2.0 / kd) * dot(r, b.v[j]);
      out.a_lambda[j] += coef * coef * ap.quad(b.v[j]);
    }
    const Mat3 jn = normal_jacobian(b, r, kd);
    out.joint.a_n += sandwich(jn, ap);
    out.joint.a_nm = out.joint.a_nm + (1.0 / kd) * (jn * ap.to_mat());
    out.joint.a_m += (1.0 / (kd * kd)) * ap;
  }
  return out;
}

StepContext begin_step(TrackedCloud& cloud, const Vec3& p, const SymMat3& cov_p) {
  StepContext ctx;
  ctx.basis_prev = cloud.basis;
  const PushDelta delta = push(cloud.stats, p);
  ctx.k = cloud.stats.k;
  ctx.d_u = delta.d_u;
  ctx.v_u_hat = delta.d_u > 0.0 ? delta.v_u / delta.d_u : Vec3{};
  cloud.points.push_back(p);
  cloud.point_covs.push_back(cov_p);
  cloud.basis = align_sign(eig_sym3(covariance(cloud.stats)), ctx.basis_prev);
  return ctx;
}

double increment_gate_ratio(const StepContext& ctx, const TrackedCloud& cloud,
                            const LufaPolicy& policy) {
  double ratio = 0.0;
  const double kd = static_cast<double>(ctx.k);
  for (int j = 0; j < 3; ++j) {
    const double mag = lambda_increment_magnitude(ctx.d_u, ctx.v_u_hat,
                                                  ctx.basis_prev, cloud.basis, j,
                                                  ctx.k);
    const double lam = std::max(ctx.basis_prev.lambda[j], 0.0);
    const double tau = policy.tau_rel * (2.0 / kd) * std::sqrt(lam) + policy.tau_abs;
    ratio = std::max(ratio, mag / tau);
  }
  return ratio;
}

Mode decide_mode(const LufaState& state, std::int64_t k, double gate_ratio,
                 const LufaPolicy& policy) {
  if (state.mode == Mode::frozen || k >= policy.n_max) return Mode::frozen;
  if (k < policy.n_min) return Mode::warmup;
  if (state.mode == Mode::warmup) return Mode::rigorous;  // first activation
  if (gate_ratio > 1.0) return Mode::rigorous;
  if (state.consecutive_fast + 1 >= policy.n_ct) return Mode::rigorous;
  return Mode::fast;
}

bool fast_covariance_update(TrackedCloud& cloud, const StepContext& ctx,
                            const SymMat3& cov_p, const LufaPolicy& policy) {
  const std::int64_t k = ctx.k;
  const EigenBasis& prev = ctx.basis_prev;
  const EigenBasis& cur = cloud.basis;
  const GapGuard& guard = policy.guard;

  const auto w = transport_weights(prev, cur, k, 0, guard);
  if (!w) return false;

  std::array<Vec3, 3> new_rows;
  for (int j = 0; j < 3; ++j) {
    const auto row = lambda_row_new_point(ctx.d_u, ctx.v_u_hat, prev, cur, j, k, guard);
    if (!row) return false;
    new_rows[j] = *row;
  }

  const double kd = static_cast<double>(k);
  const double scale = (kd - 1.0) / kd;

  // Normal Jacobian of the new point, normal-column coupling only. The gaps
  // it divides by were already vetted by transport_weights.
  Mat3 j_new;
  if (ctx.d_u > 0.0) {
    const double cp0 = dot(ctx.v_u_hat, cur.v[0]);
    for (int mm = 1; mm < 3; ++mm) {
      const double gap = cur.lambda[0] - cur.lambda[mm];
      const double cpm = dot(ctx.v_u_hat, cur.v[mm]);
      const Vec3 row = (ctx.d_u * (kd - 1.0) / (kd * kd * gap)) *
                       (cpm * cur.v[0] + cp0 * cur.v[mm]);
      j_new = j_new + outer(cur.v[mm], row);
    }
  }

  Propagated& cov = cloud.state.cov;
  for (int j = 0; j < 3; ++j) {
    cov.a_lambda[j] = scale * scale * cov.a_lambda[j] +
                      cov_p.quad(new_rows[j]);
  }
  const Mat3 q = q_transport(prev, cur, *w);
  const Mat3 ap = cov_p.to_mat();
  cov.joint.a_n = SymMat3::from_mat(q * cov.joint.a_n.to_mat() * q.transposed()) +
                  sandwich(j_new, cov_p);
  cov.joint.a_nm = scale * (q * cov.joint.a_nm) + (1.0 / kd) * (j_new * ap);
  cov.joint.a_m = scale * scale * cov.joint.a_m + (1.0 / (kd * kd)) * cov_p;
  return true;
}

namespace {

void freeze(TrackedCloud& cloud, const GapGuard& guard) {
  if (const auto r = rigorous_propagate(cloud, guard)) cloud.state.cov = *r;
  cloud.points.clear();
  cloud.points.shrink_to_fit();
  cloud.point_covs.clear();
  cloud.point_covs.shrink_to_fit();
  cloud.state.consecutive_fast = 0;
  cloud.state.mode = Mode::frozen;
}

}  // namespace

Mode add_point(TrackedCloud& cloud, const Vec3& p, const SymMat3& cov_p,
               const LufaPolicy& policy) {
  if (cloud.state.mode == Mode::frozen) return Mode::frozen;

  const StepContext ctx = begin_step(cloud, p, cov_p);
  const double gate = (cloud.state.mode == Mode::fast ||
                       cloud.state.mode == Mode::rigorous)
                          ? increment_gate_ratio(ctx, cloud, policy)
                          : 0.0;
  const Mode mode = decide_mode(cloud.state, ctx.k, gate, policy);

  switch (mode) {
    case Mode::warmup:
      cloud.state.mode = Mode::warmup;
      return Mode::warmup;
    case Mode::fast:
      if (fast_covariance_update(cloud, ctx, cov_p, policy)) {
        ++cloud.state.consecutive_fast;
        cloud.state.mode = Mode::fast;
        return Mode::fast;
      }
      [[fallthrough]];  // guard tripped: refresh rigorously instead
    case Mode::rigorous:
      if (const auto r = rigorous_propagate(cloud, policy.guard)) cloud.state.cov = *r;
      cloud.state.consecutive_fast = 0;
      cloud.state.mode = Mode::rigorous;
      return Mode::rigorous;
    case Mode::frozen:
      freeze(cloud, policy.guard);
      return Mode::frozen;
  }
  return cloud.state.mode;
}

double residual_variance(const Vec3& p, const SymMat3& a_p, const Vec3& n,
                         const Vec3& m, const JointCovariance& joint) {
  if (std::abs(norm(n) - 1.0) > 1e-9)
    throw std::invalid_argument("residual_variance: normal must be unit length");
  const Vec3 r = p - m;
  const double var = a_p.quad(n) + joint.a_n.quad(r) + joint.a_m.quad(n) -
                     2.0 * dot(r, joint.a_nm * n);
  return var > 0.0 ? var : 0.0;
}

}  // namespace lufa
