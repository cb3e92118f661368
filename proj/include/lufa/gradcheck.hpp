#pragma once

#include <cstdint>
#include <vector>

#include "lufa/geom3.hpp"

namespace lufa {

// Central-difference validation of the from-scratch eigenvalue and
// eigenvector Jacobians on seeded anisotropic clouds. Every point and every
// coordinate is probed; errors are normalized by the largest finite-
// difference row (resp. Jacobian) in the case, so near-zero rows cannot
// manufacture fake relative error.
struct GradcheckConfig {
  std::vector<std::uint64_t> seeds{1, 2, 3};
  std::vector<int> ks{5, 20, 100};
  double step_scale{1e-6};  // h = step_scale * rms cloud radius
  double tol_lambda{1e-5};
  double tol_vector{1e-4};
  bool inject_sign_error{false};  // harness self-test: must then fail
};

struct GradcheckCaseResult {
  std::uint64_t seed{};
  int k{};
  double lambda_rel{};  // worst normalized eigenvalue-gradient error
  double vector_rel{};  // worst normalized eigenvector-Jacobian error
};

struct GradcheckReport {
  std::vector<GradcheckCaseResult> cases;
  double worst_lambda{};
  double worst_vector{};
  bool pass{};
};

GradcheckReport run_gradcheck(const GradcheckConfig& cfg);

}  // namespace lufa
