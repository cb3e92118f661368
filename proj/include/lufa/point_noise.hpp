#pragma once

#include <cstdint>

#include "lufa/geom3.hpp"

namespace lufa {

// Sensor noise parameters. Angles are radians.
struct SensorNoise {
  double sigma_d{0.02};                         // range noise std, meters
  double sigma_w{0.05 * 3.14159265358979323846 / 180.0};  // beam angular noise std
  double eta{0.1};                              // roughness noise ceiling, meters
};

// Incidence angles are clamped here before tan() so grazing rays cannot blow
// up the range-direction variance.
inline constexpr double kDefaultAlphaCap = 85.0 * 3.14159265358979323846 / 180.0;

// One measured return: range, unit ray direction, incidence angle against the
// local surface, and the apparent roughness angle. Angles live in [0, pi/2].
struct RayObservation {
  double d{};
  Vec3 v_r{};
  double alpha{};
  double beta{};

  // Throws std::invalid_argument when p is too short to define a direction.
  static RayObservation from_point(const Vec3& p, double alpha, double beta);
};

// Angle between a ray and a surface normal, orientation-free: acos(|v_r.n|).
double incidence_angle(const Vec3& v_r, const Vec3& n);

// Range-direction noise induced by beam divergence on a slanted surface:
// d * sigma_w * tan(alpha), with alpha clamped to alpha_cap.
double incident_sigma(double d, double sigma_w, double alpha,
                      double alpha_cap = kDefaultAlphaCap);

// Isotropic roughness noise eta * sin(beta), beta = acos(|n_r.n_v|).
// Both normals must be unit length.
double roughness_sigma(double eta, const Vec3& n_r, const Vec3& n_v);

// Covariance of one measured point:
//   (sigma_d^2 + sigma_in^2) v_r v_r^T + (d sigma_w)^2 (I - v_r v_r^T) + sigma_o^2 I
// with sigma_in = incident_sigma(...) and sigma_o = eta * sin(beta).
// Eigenstructure is exact by construction: v_r carries sigma_r^2 + sigma_o^2,
// the two lateral directions carry sigma_phi^2 + sigma_o^2.
// Throws std::invalid_argument when v_r is not unit length (1e-9).
SymMat3 point_covariance(const RayObservation& obs, const SensorNoise& noise,
                         double alpha_cap = kDefaultAlphaCap);

// Same covariance built the long way round: J diag(sigma_d^2, sigma_w^2,
// sigma_w^2) J^T where J = [v_r, -d (v_r x n1), -d (v_r x n2)] for a tangent
// basis (n1, n2) at v_r. The basis is rotated by an angle derived from
// basis_seed; the result must not depend on that choice. Models range plus
// two-axis beam direction perturbations only (no incidence or roughness
// terms). Throws std::invalid_argument when v_r is not unit length (1e-9).
SymMat3 s2_perturbation_covariance(const RayObservation& obs, const SensorNoise& noise,
                                   std::uint64_t basis_seed);

}  // namespace lufa
