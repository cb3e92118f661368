#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "lufa/eigen_jacobian.hpp"
#include "lufa/geom3.hpp"
#include "lufa/running_stats.hpp"

namespace lufa {

enum class Mode { warmup, fast, rigorous, frozen };

const char* mode_name(Mode m);

// Scheduling policy: warm up to n_min points, refresh rigorously at least
// every n_ct steps or when the increment gate trips, freeze at n_max.
struct LufaPolicy {
  std::int64_t n_min{200};
  std::int64_t n_ct{100};
  std::int64_t n_max{1000};
  double tau_rel{1e-3};
  double tau_abs{1e-9};
  GapGuard guard{};
};

// Joint covariance of the plane normal and center estimates.
struct JointCovariance {
  SymMat3 a_n{};   // Cov(normal)
  Mat3 a_nm{};     // Cov(normal, center), rows on the normal side
  SymMat3 a_m{};   // Cov(center)

  // Row-major 6x6 [A_n, A_nm; A_nm^T, A_m] for spectral checks.
  std::array<double, 36> to_matrix6() const;
};

struct Propagated {
  std::array<double, 3> a_lambda{};  // Var(lambda_j), ascending order
  JointCovariance joint{};
};

struct LufaState {
  Propagated cov{};
  std::int64_t consecutive_fast{0};
  Mode mode{Mode::warmup};
};

// A plane feature under incremental estimation. Points and their covariances
// are retained for rigorous refreshes and released once frozen.
struct TrackedCloud {
  CloudStats stats;
  std::vector<Vec3> points;
  std::vector<SymMat3> point_covs;
  EigenBasis basis{};  // sign-continuous across pushes
  LufaState state{};
};

// O(n) reference propagation: per-point covariances into eigenvalue variances
// plus the joint normal/center covariance, all first order at the current
// cloud. Only the gaps against the normal axis are required, so a disc-like
// cloud with two equal in-plane eigenvalues is fine. nullopt when the normal
// is spectrally undefined (caller keeps its previous state). Needs k >= 3.
std::optional<Propagated> rigorous_propagate(const TrackedCloud& cloud,
                                             const GapGuard& guard = {});

// Geometry of one insertion, shared by scheduling and both update paths.
struct StepContext {
  std::int64_t k{};     // count after the push
  double d_u{};
  Vec3 v_u_hat{};
  EigenBasis basis_prev{};
};

// Push + basis refresh (sign-aligned) + point retention. Covariance state is
// not touched; callers follow up with the fast or rigorous path.
StepContext begin_step(TrackedCloud& cloud, const Vec3& p, const SymMat3& cov_p);

// max_j magnitude_j / tau_j where tau_j = tau_rel * (2/k) sqrt(lambda_j,k-1)
// + tau_abs. The (2/k) sqrt(lambda_j) factor is the RMS norm of a rigorous
// row over the cloud, so tau_rel measures the increment against the typical
// row it perturbs. Ratios above 1 demand a rigorous refresh; a basis that
// jumped past the continuity floor reads as +inf.
double increment_gate_ratio(const StepContext& ctx, const TrackedCloud& cloud,
                            const LufaPolicy& policy);

// Mode for the step that brought the cloud to k points. Rigorous refreshes
// land exactly n_ct steps apart when the gate stays quiet.
Mode decide_mode(const LufaState& state, std::int64_t k, double gate_ratio,
                 const LufaPolicy& policy);

// O(1) covariance update across the insertion described by ctx. Returns false
// with the state untouched when a continuity or gap guard fails; the caller
// must refresh rigorously for this step.
bool fast_covariance_update(TrackedCloud& cloud, const StepContext& ctx,
                            const SymMat3& cov_p, const LufaPolicy& policy);

// Full step: push, gate, mode decision, fast or rigorous update, freeze
// bookkeeping. Returns the mode actually executed; frozen clouds ignore the
// input entirely.
Mode add_point(TrackedCloud& cloud, const Vec3& p, const SymMat3& cov_p,
               const LufaPolicy& policy);

// Variance of the point-to-plane residual n.(p - m), combining the point's
// own covariance with the plane's joint uncertainty. Requires unit n (1e-9);
// roundoff negatives clamp to zero.
double residual_variance(const Vec3& p, const SymMat3& a_p, const Vec3& n,
                         const Vec3& m, const JointCovariance& joint);

}  // namespace lufa
