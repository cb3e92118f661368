#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lufa/lufa.hpp"
#include "lufa/point_noise.hpp"

namespace lufa {

// Plane-sampling scenario: several stationary sensors on one side of a
// finite rough plane, each returning the same number of points. Feed order
// interleaves sensors round-robin so the cloud grows from all viewpoints at
// once. Everything is drawn from a single seeded stream; a seed pins every
// generated byte.
struct SimConfig {
  std::uint64_t seed{42};
  int n_lidars{20};
  int points_per_lidar{50};
  double plane_half_extent{10.0};   // plane spans [-h, h]^2, meters
  double lidar_radius{100.0};       // sensors within this range of the center
  double lidar_footprint_std{2.0};  // spread of one sensor's returns around
                                    // its aim point, meters; clustered
                                    // coverage keeps the two in-plane
                                    // eigenvalues apart
  double plane_roughness_std{0.03}; // out-of-plane surface unevenness, meters
  double pose_noise_pos{0.02};      // sensor position error std, meters
  double pose_noise_ang_deg{0.2};   // sensor orientation error std, degrees
  SensorNoise noise{};
  // The sim default gate threshold is deliberately far above the per-step
  // increment floor (which scales like 1/k and would otherwise demand a
  // rigorous refresh at every step): ~10x the expected on-plane increment,
  // so only genuine outliers trip it.
  LufaPolicy policy{.tau_rel = 0.05};
};

struct SimSample {
  Vec3 point;          // measured point, world frame
  RayObservation obs;  // true-geometry range, direction and angles
};

struct Scenario {
  Vec3 plane_center{};
  Vec3 plane_normal{};
  std::vector<SimSample> samples;
};

Scenario generate_scenario(const SimConfig& cfg);

// One row per step once the warmup is over. Timing covers the propagation
// call only (the shared push/eigendecomposition is identical work on both
// sides and is excluded).
struct ComparisonRecord {
  std::int64_t k{};
  std::array<double, 3> a_lambda_lufa{};
  std::array<double, 3> a_lambda_rig{};
  double trace_n_lufa{}, trace_n_rig{};
  double trace_m_lufa{}, trace_m_rig{};
  std::int64_t t_lufa_ns{}, t_rig_ns{};
  Mode mode{Mode::warmup};  // mode the incremental side actually executed
};

struct ComparisonResult {
  std::vector<ComparisonRecord> records;
  TrackedCloud lufa_cloud;      // final incremental-side state
  TrackedCloud rigorous_cloud;  // final reference-side state
};

// Feeds the scenario into two clouds: one scheduled incrementally, one
// refreshed rigorously at every step from n_min on. Guard fallbacks are
// recorded (the failing step keeps its previous covariances), never thrown.
ComparisonResult run_comparison(const Scenario& scenario, const SimConfig& cfg);

// Shortest round-trip decimal formatting; identical records give identical
// bytes. Throws std::runtime_error naming the path on any I/O failure.
void write_csv(const std::string& path, const std::vector<ComparisonRecord>& records);

// Micro-benchmark of one fast update versus one rigorous refresh at fixed
// cloud sizes. The contract: fast stays flat in k, rigorous grows linearly.
struct BenchConfig {
  std::vector<std::int64_t> ks{300, 600, 900};
  int repeats{100};
  int inner{8};                // fast updates per timed block
  double max_fast_ratio{1.5};  // t_fast(last) / t_fast(first)
  double min_rig_ratio{2.0};   // t_rig(last) / t_rig(first)
};

struct BenchRow {
  std::int64_t k{};
  std::int64_t t_fast_ns{};
  std::int64_t t_rig_ns{};
};

struct BenchReport {
  std::vector<BenchRow> rows;
  double fast_ratio{};
  double rig_ratio{};
  bool pass{};
};

BenchReport run_bench(const SimConfig& cfg, const BenchConfig& bench);

}  // namespace lufa
