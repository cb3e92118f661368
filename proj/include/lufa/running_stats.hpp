#pragma once

#include <cstdint>
#include <span>

#include "lufa/geom3.hpp"

namespace lufa {

// Incremental first/second moments of a point set. `s` is the scatter matrix
// (k times the covariance); both update in O(1) per point.
struct CloudStats {
  std::int64_t k{0};
  Vec3 m{};
  SymMat3 s{};
};

// Per-push byproducts consumed by the incremental Jacobian updates.
// v_u = p - m_prev (unnormalized), d_u = |v_u|, d = v_u v_u^T.
// All zero for the first point.
struct PushDelta {
  double d_u{};
  Vec3 v_u{};
  SymMat3 d{};
};

PushDelta push(CloudStats& stats, const Vec3& p);

// s / k. Throws std::domain_error when k == 0.
SymMat3 covariance(const CloudStats& stats);

// One-pass reference implementation: exact mean, then scatter about it.
// Throws std::invalid_argument on an empty span.
CloudStats batch_stats(std::span<const Vec3> points);

}  // namespace lufa
