#include "lufa/running_stats.hpp"

#include <stdexcept>

namespace lufa {

PushDelta push(CloudStats& stats, const Vec3& p) {
  PushDelta delta;
  if (stats.k == 0) {
    stats.k = 1;
    stats.m = p;
    stats.s = SymMat3{};
    return delta;  // no previous mean; all deltas zero
  }
  const std::int64_t k = stats.k + 1;
  delta.v_u = p - stats.m;
  delta.d_u = norm(delta.v_u);
  delta.d = self_outer(delta.v_u);

  const double ratio = static_cast<double>(k - 1) / static_cast<double>(k);
  stats.m += delta.v_u / static_cast<double>(k);
  stats.s += ratio * delta.d;
  stats.k = k;
  return delta;
}

SymMat3 covariance(const CloudStats& stats) {
  if (stats.k == 0) throw std::domain_error("covariance: empty stats");
  return (1.0 / static_cast<double>(stats.k)) * stats.s;
}

CloudStats batch_stats(std::span<const Vec3> points) {
  if (points.empty()) throw std::invalid_argument("batch_stats: empty point set");
  Vec3 sum{};
  for (const Vec3& p : points) sum += p;
  CloudStats stats;
  stats.k = static_cast<std::int64_t>(points.size());
  stats.m = sum / static_cast<double>(stats.k);
  for (const Vec3& p : points) stats.s += self_outer(p - stats.m);
  return stats;
}

}  // namespace lufa
