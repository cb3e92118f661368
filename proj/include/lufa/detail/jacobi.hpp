#pragma once

#include <array>
#include <cmath>

namespace lufa::detail {

// Cyclic Jacobi for symmetric NxN. Rotations are applied in a fixed sweep
// order so the result is bit-deterministic for identical inputs. On return
// `a` is (numerically) diagonal and the columns of `v` are the eigenvectors.
template <int N>
void jacobi_sweeps(std::array<std::array<double, N>, N>& a,
                   std::array<std::array<double, N>, N>& v) {
  for (int r = 0; r < N; ++r)
    for (int c = 0; c < N; ++c) v[r][c] = (r == c) ? 1.0 : 0.0;

  double scale = 0.0;
  for (int r = 0; r < N; ++r)
    for (int c = 0; c < N; ++c) scale = std::max(scale, std::abs(a[r][c]));
  if (scale == 0.0) return;

  const double stop = 1e-15 * scale;
  constexpr int kMaxSweeps = 64;

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < N - 1; ++p)
      for (int q = p + 1; q < N; ++q) off = std::max(off, std::abs(a[p][q]));
    if (off <= stop) break;

    for (int p = 0; p < N - 1; ++p) {
      for (int q = p + 1; q < N; ++q) {
        const double apq = a[p][q];
        if (std::abs(apq) <= 1e-2 * stop) continue;

        const double theta = 0.5 * (a[q][q] - a[p][p]) / apq;
        double t;
        if (std::abs(theta) > 1e150) {
          t = 0.5 / theta;
        } else {
          t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);

        const double app = a[p][p];
        const double aqq = a[q][q];
        a[p][p] = app - t * apq;
        a[q][q] = aqq + t * apq;
        a[p][q] = a[q][p] = 0.0;

        for (int r = 0; r < N; ++r) {
          if (r == p || r == q) continue;
          const double arp = a[r][p];
          const double arq = a[r][q];
          a[r][p] = a[p][r] = arp - s * (arq + tau * arp);
          a[r][q] = a[q][r] = arq + s * (arp - tau * arq);
        }
        for (int r = 0; r < N; ++r) {
          const double vrp = v[r][p];
          const double vrq = v[r][q];
          v[r][p] = vrp - s * (vrq + tau * vrp);
          v[r][q] = vrq + s * (vrp - tau * vrq);
        }
      }
    }
  }
}

}  // namespace lufa::detail
