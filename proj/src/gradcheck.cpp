#include "lufa/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lufa/eigen_jacobian.hpp"
#include "lufa/rng.hpp"
#include "lufa/running_stats.hpp"

namespace lufa {
namespace {

struct EvalResult {
  EigenBasis basis;
  Vec3 m;
};

EvalResult evaluate(const std::vector<Vec3>& points, const EigenBasis* align_to) {
  const CloudStats st = batch_stats(points);
  EvalResult r;
  r.m = st.m;
  r.basis = eig_sym3(covariance(st));
  if (align_to) r.basis = align_sign(r.basis, *align_to);
  return r;
}

// Anisotropic Gaussian cloud (axis scales 3:2:1, random rotation) so all
// eigenvalue gaps stay healthy.
std::vector<Vec3> make_cloud(std::uint64_t seed, int k) {
  Rng rng(seed);
  const Vec3 axis = rng.unit_vec3();
  const double angle = rng.uniform(0.0, 2.0 * 3.14159265358979323846);
  const double c = std::cos(angle), s = std::sin(angle);
  const auto rotate = [&](const Vec3& v) {
    return c * v + s * cross(axis, v) + (1.0 - c) * dot(axis, v) * axis;
  };
  const Vec3 center = 3.0 * rng.normal_vec3();
  std::vector<Vec3> pts(static_cast<std::size_t>(k));
  for (Vec3& p : pts) {
    const Vec3 g = rng.normal_vec3();
    p = center + rotate({3.0 * g.x, 2.0 * g.y, 1.0 * g.z});
  }
  return pts;
}

}  // namespace

GradcheckReport run_gradcheck(const GradcheckConfig& cfg) {
  if (cfg.seeds.empty() || cfg.ks.empty())
    throw std::invalid_argument("run_gradcheck: need at least one seed and one size");

  GradcheckReport report;
  bool injected = cfg.inject_sign_error;

  for (const std::uint64_t seed : cfg.seeds) {
    for (const int k : cfg.ks) {
      if (k < 4) throw std::invalid_argument("run_gradcheck: sizes must be >= 4");
      std::vector<Vec3> pts = make_cloud(seed, k);
      const EvalResult base = evaluate(pts, nullptr);
      const double h = cfg.step_scale *
          std::sqrt(std::max(base.basis.trace(), 1e-30));

      double max_fd_row = 0.0, max_err_row = 0.0;
      double max_fd_jac = 0.0, max_err_jac = 0.0;

      for (std::size_t i = 0; i < pts.size(); ++i) {
        // Central differences of every eigen quantity w.r.t. point i.
        std::array<Vec3, 3> fd_lambda{};
        std::array<Mat3, 3> fd_vec{};
        for (int comp = 0; comp < 3; ++comp) {
          const double orig = pts[i][comp];
          pts[i][comp] = orig + h;
          const EvalResult plus = evaluate(pts, &base.basis);
          pts[i][comp] = orig - h;
          const EvalResult minus = evaluate(pts, &base.basis);
          pts[i][comp] = orig;
          for (int j = 0; j < 3; ++j) {
            fd_lambda[j][comp] = (plus.basis.lambda[j] - minus.basis.lambda[j]) / (2.0 * h);
            const Vec3 dv = (plus.basis.v[j] - minus.basis.v[j]) / (2.0 * h);
            for (int row = 0; row < 3; ++row) fd_vec[j](row, comp) = dv[row];
          }
        }

        const auto coupling = rigorous_coupling(pts, base.m, base.basis, i);
        if (!coupling)
          throw std::runtime_error("run_gradcheck: degenerate spectrum in test cloud");

        for (int j = 0; j < 3; ++j) {
          Vec3 an_row = rigorous_lambda_jacobian(pts, base.m, base.basis, j, i);
          if (injected && i == 0 && j == 0) {
            an_row = -an_row;  // deliberate mistake the harness must catch
            injected = false;
          }
          max_fd_row = std::max(max_fd_row, norm(fd_lambda[j]));
          max_err_row = std::max(max_err_row, norm(an_row - fd_lambda[j]));

          const Mat3 an_jac = eigenvector_jacobian(base.basis, *coupling, j);
          max_fd_jac = std::max(max_fd_jac, fd_vec[j].frobenius());
          max_err_jac = std::max(max_err_jac, (an_jac - fd_vec[j]).frobenius());
        }
      }

      GradcheckCaseResult c;
      c.seed = seed;
      c.k = k;
      c.lambda_rel = max_err_row / std::max(max_fd_row, 1e-300);
      c.vector_rel = max_err_jac / std::max(max_fd_jac, 1e-300);
      report.cases.push_back(c);
      report.worst_lambda = std::max(report.worst_lambda, c.lambda_rel);
      report.worst_vector = std::max(report.worst_vector, c.vector_rel);
    }
  }
  report.pass = report.worst_lambda < cfg.tol_lambda && report.worst_vector < cfg.tol_vector;
  return report;
}

}  // namespace lufa
