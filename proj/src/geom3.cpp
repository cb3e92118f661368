#include "lufa/geom3.hpp"

#include <algorithm>

#include "lufa/detail/jacobi.hpp"

namespace lufa {
namespace {

// Largest-|component| entry made positive; ties resolved to the first index.
Vec3 canonical_sign(const Vec3& v) {
  int best = 0;
  double best_mag = std::abs(v[0]);
  for (int i = 1; i < 3; ++i) {
    const double mag = std::abs(v[i]);
    if (mag > best_mag) {
      best = i;
      best_mag = mag;
    }
  }
  return v[best] < 0.0 ? -v : v;
}

}  // namespace

EigenBasis eig_sym3(const SymMat3& a) {
  std::array<std::array<double, 3>, 3> m{};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m[r][c] = a(r, c);
  std::array<std::array<double, 3>, 3> vecs{};
  detail::jacobi_sweeps<3>(m, vecs);

  std::array<int, 3> order = {0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return m[i][i] < m[j][j]; });

  EigenBasis out;
  for (int j = 0; j < 3; ++j) {
    const int src = order[j];
    out.lambda[j] = m[src][src];
    out.v[j] = canonical_sign({vecs[0][src], vecs[1][src], vecs[2][src]});
  }
  return out;
}

EigenBasis align_sign(const EigenBasis& basis, const EigenBasis& reference) {
  EigenBasis out = basis;
  for (int j = 0; j < 3; ++j) {
    if (dot(out.v[j], reference.v[j]) < 0.0) out.v[j] = -out.v[j];
  }
  return out;
}

}  // namespace lufa
