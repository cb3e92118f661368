#include "lufa/point_noise.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "lufa/rng.hpp"

namespace lufa {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kHalfPi = 0.5 * kPi;
constexpr double kUnitTol = 1e-9;

double clamp_angle(double a) { return std::clamp(a, 0.0, kHalfPi); }

void require_unit(const Vec3& v, const char* what) {
  if (std::abs(norm(v) - 1.0) > kUnitTol)
    throw std::invalid_argument(std::string(what) + ": direction must be unit length");
}

// Deterministic tangent frame at unit w: seed axis is the coordinate axis
// least aligned with w (first index on ties).
void tangent_basis(const Vec3& w, Vec3& b1, Vec3& b2) {
  int least = 0;
  double least_mag = std::abs(w.x);
  if (std::abs(w.y) < least_mag) { least = 1; least_mag = std::abs(w.y); }
  if (std::abs(w.z) < least_mag) { least = 2; }
  Vec3 h{};
  h[least] = 1.0;
  b1 = normalized(cross(w, h));
  b2 = cross(w, b1);
}

}  // namespace

RayObservation RayObservation::from_point(const Vec3& p, double alpha, double beta) {
  const double d = norm(p);
  if (d < 1e-12) throw std::invalid_argument("RayObservation: zero-range point");
  return {d, p / d, clamp_angle(alpha), clamp_angle(beta)};
}

double incidence_angle(const Vec3& v_r, const Vec3& n) {
  return std::acos(std::clamp(std::abs(dot(v_r, n)), 0.0, 1.0));
}

double incident_sigma(double d, double sigma_w, double alpha, double alpha_cap) {
  const double a = std::min(clamp_angle(alpha), clamp_angle(alpha_cap));
  return d * sigma_w * std::tan(a);
}

double roughness_sigma(double eta, const Vec3& n_r, const Vec3& n_v) {
  require_unit(n_r, "roughness_sigma");
  require_unit(n_v, "roughness_sigma");
  const double beta = incidence_angle(n_r, n_v);
  return eta * std::sin(beta);
}

SymMat3 point_covariance(const RayObservation& obs, const SensorNoise& noise,
                         double alpha_cap) {
  require_unit(obs.v_r, "point_covariance");
  const double sigma_in = incident_sigma(obs.d, noise.sigma_w, obs.alpha, alpha_cap);
  const double sigma_r2 = noise.sigma_d * noise.sigma_d + sigma_in * sigma_in;
  const double sigma_phi = obs.d * noise.sigma_w;
  const double sigma_phi2 = sigma_phi * sigma_phi;
  const double so = noise.eta * std::sin(clamp_angle(obs.beta));
  const double sigma_o2 = so * so;
  // (sigma_r^2 - sigma_phi^2) v v^T + (sigma_phi^2 + sigma_o^2) I
  return (sigma_r2 - sigma_phi2) * self_outer(obs.v_r) +
         SymMat3::scaled_identity(sigma_phi2 + sigma_o2);
}

SymMat3 s2_perturbation_covariance(const RayObservation& obs, const SensorNoise& noise,
                                   std::uint64_t basis_seed) {
  require_unit(obs.v_r, "s2_perturbation_covariance");
  Vec3 b1, b2;
  tangent_basis(obs.v_r, b1, b2);
  const double psi = 2.0 * kPi *
      (static_cast<double>(splitmix64(basis_seed) >> 11) * 0x1.0p-53);
  const Vec3 n1 = std::cos(psi) * b1 + std::sin(psi) * b2;
  const Vec3 n2 = -std::sin(psi) * b1 + std::cos(psi) * b2;

  const Vec3 c0 = obs.v_r;
  const Vec3 c1 = -obs.d * cross(obs.v_r, n1);
  const Vec3 c2 = -obs.d * cross(obs.v_r, n2);
  const double sd2 = noise.sigma_d * noise.sigma_d;
  const double sw2 = noise.sigma_w * noise.sigma_w;
  return sd2 * self_outer(c0) + sw2 * self_outer(c1) + sw2 * self_outer(c2);
}

}  // namespace lufa
