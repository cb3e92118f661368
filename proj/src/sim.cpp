#include "lufa/sim.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "lufa/rng.hpp"

namespace lufa {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kDeg = kPi / 180.0;

// Deterministic tangent frame: seed axis least aligned with w.
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

Vec3 rodrigues(const Vec3& w, const Vec3& v) {
  const double theta = norm(w);
  if (theta < 1e-12) return v + cross(w, v);
  const Vec3 axis = w / theta;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return c * v + s * cross(axis, v) + (1.0 - c) * dot(axis, v) * axis;
}

std::int64_t now_ns() {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::string fmt(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

ComparisonRecord make_record(std::int64_t k, const TrackedCloud& lufa_cloud,
                             const TrackedCloud& rig_cloud, std::int64_t t_lufa,
                             std::int64_t t_rig, Mode mode) {
  ComparisonRecord rec;
  rec.k = k;
  rec.a_lambda_lufa = lufa_cloud.state.cov.a_lambda;
  rec.a_lambda_rig = rig_cloud.state.cov.a_lambda;
  rec.trace_n_lufa = lufa_cloud.state.cov.joint.a_n.trace();
  rec.trace_n_rig = rig_cloud.state.cov.joint.a_n.trace();
  rec.trace_m_lufa = lufa_cloud.state.cov.joint.a_m.trace();
  rec.trace_m_rig = rig_cloud.state.cov.joint.a_m.trace();
  rec.t_lufa_ns = t_lufa;
  rec.t_rig_ns = t_rig;
  rec.mode = mode;
  return rec;
}

}  // namespace

Scenario generate_scenario(const SimConfig& cfg) {
  if (cfg.n_lidars < 1) throw std::invalid_argument("generate_scenario: n_lidars must be >= 1");
  if (cfg.points_per_lidar < 1)
    throw std::invalid_argument("generate_scenario: points_per_lidar must be >= 1");
  if (cfg.plane_half_extent <= 0.0)
    throw std::invalid_argument("generate_scenario: plane_half_extent must be > 0");
  if (cfg.lidar_radius <= 0.0)
    throw std::invalid_argument("generate_scenario: lidar_radius must be > 0");
  if (cfg.lidar_footprint_std <= 0.0)
    throw std::invalid_argument("generate_scenario: lidar_footprint_std must be > 0");

  Rng rng(cfg.seed);
  Scenario sc;
  sc.plane_center = 2.0 * rng.normal_vec3();
  sc.plane_normal = rng.unit_vec3();

  Vec3 e1, e2;
  tangent_basis(sc.plane_normal, e1, e2);
  const double psi = rng.uniform(0.0, 2.0 * kPi);
  const Vec3 a1 = std::cos(psi) * e1 + std::sin(psi) * e2;
  const Vec3 a2 = -std::sin(psi) * e1 + std::cos(psi) * e2;

  // Sensors sit on the normal-positive side, elevation at least 10 degrees
  // so no ray ever lies inside the plane. Each sensor's returns cluster
  // around an aim point: spread-out patches keep the in-plane spectrum
  // anisotropic, so the in-plane eigenvectors have stable identities. A
  // square filled uniformly would make the two in-plane eigenvalues cross
  // endlessly, which no eigenvector-based propagation can track.
  struct Sensor {
    Vec3 origin;
    Vec3 dtheta;  // orientation error, applied to measured rays, not modeled
    double aim_u, aim_v;
  };
  std::vector<Sensor> sensors(static_cast<std::size_t>(cfg.n_lidars));
  for (Sensor& s : sensors) {
    const double el = rng.uniform(10.0 * kDeg, 80.0 * kDeg);
    const double az = rng.uniform(0.0, 2.0 * kPi);
    const double r = rng.uniform(0.3, 1.0) * cfg.lidar_radius;
    s.origin = sc.plane_center +
               r * (std::cos(el) * (std::cos(az) * a1 + std::sin(az) * a2) +
                    std::sin(el) * sc.plane_normal);
    s.origin += cfg.pose_noise_pos * rng.normal_vec3();
    s.dtheta = (cfg.pose_noise_ang_deg * kDeg) * rng.normal_vec3();
    s.aim_u = rng.uniform(-0.8, 0.8) * cfg.plane_half_extent;
    s.aim_v = rng.uniform(-0.8, 0.8) * cfg.plane_half_extent;
  }

  // Surface normals across the rough plane tilt by roughly
  // atan(roughness / 1m baseline); beta is drawn from that spread.
  const double beta_std = std::atan(cfg.plane_roughness_std);

  const std::size_t total =
      static_cast<std::size_t>(cfg.n_lidars) * static_cast<std::size_t>(cfg.points_per_lidar);
  std::vector<SimSample> grid(total);
  const auto clamp_extent = [&cfg](double x) {
    return std::clamp(x, -cfg.plane_half_extent, cfg.plane_half_extent);
  };
  for (int l = 0; l < cfg.n_lidars; ++l) {
    for (int s = 0; s < cfg.points_per_lidar; ++s) {
      const Sensor& sensor = sensors[static_cast<std::size_t>(l)];
      const double u = clamp_extent(sensor.aim_u + cfg.lidar_footprint_std * rng.normal());
      const double v = clamp_extent(sensor.aim_v + cfg.lidar_footprint_std * rng.normal());
      const double dz = cfg.plane_roughness_std * rng.normal();
      const Vec3 q = sc.plane_center + u * a1 + v * a2 + dz * sc.plane_normal;

      const Vec3 dvec = q - sensor.origin;
      const double d = norm(dvec);
      const Vec3 v_r = dvec / d;
      const double alpha = incidence_angle(v_r, sc.plane_normal);
      const double beta = std::min(0.5 * kPi, std::abs(beta_std * rng.normal()));
      const RayObservation obs{d, v_r, alpha, beta};

      // Measurement noise drawn exactly from the model covariance's
      // eigenstructure: radial and two lateral axes.
      const double sin_b = std::sin(beta);
      const double s_o2 = cfg.noise.eta * sin_b * cfg.noise.eta * sin_b;
      const double s_in = incident_sigma(d, cfg.noise.sigma_w, alpha);
      const double s_rad =
          std::sqrt(cfg.noise.sigma_d * cfg.noise.sigma_d + s_in * s_in + s_o2);
      const double s_lat =
          std::sqrt(d * cfg.noise.sigma_w * d * cfg.noise.sigma_w + s_o2);
      Vec3 t1, t2;
      tangent_basis(v_r, t1, t2);
      const Vec3 eps = s_rad * rng.normal() * v_r +
                       s_lat * rng.normal() * t1 + s_lat * rng.normal() * t2;

      // Orientation error rotates the whole measured ray about the sensor.
      const Vec3 p_world = sensor.origin + rodrigues(sensor.dtheta, q + eps - sensor.origin);

      grid[static_cast<std::size_t>(l) * static_cast<std::size_t>(cfg.points_per_lidar) +
           static_cast<std::size_t>(s)] = SimSample{p_world, obs};
    }
  }

  sc.samples.reserve(total);
  for (int s = 0; s < cfg.points_per_lidar; ++s)
    for (int l = 0; l < cfg.n_lidars; ++l)
      sc.samples.push_back(grid[static_cast<std::size_t>(l) *
                                    static_cast<std::size_t>(cfg.points_per_lidar) +
                                static_cast<std::size_t>(s)]);
  return sc;
}

ComparisonResult run_comparison(const Scenario& scenario, const SimConfig& cfg) {
  const LufaPolicy& policy = cfg.policy;
  ComparisonResult res;
  TrackedCloud& lc = res.lufa_cloud;
  TrackedCloud& rc = res.rigorous_cloud;
  res.records.reserve(scenario.samples.size());

  for (const SimSample& sample : scenario.samples) {
    const SymMat3 ap = point_covariance(sample.obs, cfg.noise);

    // Reference side: rigorous refresh at every step once warm.
    (void)begin_step(rc, sample.point, ap);
    std::int64_t t_rig = 0;
    if (rc.stats.k >= policy.n_min) {
      const std::int64_t t0 = now_ns();
      const auto r = rigorous_propagate(rc, policy.guard);
      t_rig = now_ns() - t0;
      if (r) rc.state.cov = *r;  // degenerate spectrum keeps previous values
    }

    // Incremental side: same steps as add_point, with the propagation call
    // timed. Both sides consume the identical per-point covariance.
    std::int64_t t_lufa = 0;
    Mode executed = Mode::frozen;
    if (lc.state.mode != Mode::frozen) {
      const StepContext ctx = begin_step(lc, sample.point, ap);
      const double gate = (lc.state.mode == Mode::fast ||
                           lc.state.mode == Mode::rigorous)
                              ? increment_gate_ratio(ctx, lc, policy)
                              : 0.0;
      executed = decide_mode(lc.state, ctx.k, gate, policy);

      if (executed == Mode::warmup) {
        lc.state.mode = Mode::warmup;
      } else if (executed == Mode::fast) {
        const std::int64_t t0 = now_ns();
        const bool ok = fast_covariance_update(lc, ctx, ap, policy);
        t_lufa = now_ns() - t0;
        if (ok) {
          ++lc.state.consecutive_fast;
          lc.state.mode = Mode::fast;
        } else {
          executed = Mode::rigorous;  // guard fallback
        }
      }
      if (executed == Mode::rigorous) {
        const std::int64_t t0 = now_ns();
        const auto r = rigorous_propagate(lc, policy.guard);
        t_lufa = now_ns() - t0;
        if (r) lc.state.cov = *r;
        lc.state.consecutive_fast = 0;
        lc.state.mode = Mode::rigorous;
      } else if (executed == Mode::frozen) {
        const std::int64_t t0 = now_ns();
        const auto r = rigorous_propagate(lc, policy.guard);
        t_lufa = now_ns() - t0;
        if (r) lc.state.cov = *r;
        lc.points.clear();
        lc.points.shrink_to_fit();
        lc.point_covs.clear();
        lc.point_covs.shrink_to_fit();
        lc.state.consecutive_fast = 0;
        lc.state.mode = Mode::frozen;
      }
    }

    if (rc.stats.k >= policy.n_min)
      res.records.push_back(make_record(rc.stats.k, lc, rc, t_lufa, t_rig, executed));
  }
  return res;
}

void write_csv(const std::string& path, const std::vector<ComparisonRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path);
  out << "k,a_lambda1_lufa,a_lambda2_lufa,a_lambda3_lufa,"
         "a_lambda1_rig,a_lambda2_rig,a_lambda3_rig,"
         "trace_n_lufa,trace_n_rig,trace_m_lufa,trace_m_rig,"
         "t_lufa_ns,t_rig_ns,mode\n";
  for (const ComparisonRecord& r : records) {
    out << r.k;
    for (int j = 0; j < 3; ++j) out << ',' << fmt(r.a_lambda_lufa[j]);
    for (int j = 0; j < 3; ++j) out << ',' << fmt(r.a_lambda_rig[j]);
    out << ',' << fmt(r.trace_n_lufa) << ',' << fmt(r.trace_n_rig) << ','
        << fmt(r.trace_m_lufa) << ',' << fmt(r.trace_m_rig) << ',' << r.t_lufa_ns
        << ',' << r.t_rig_ns << ',' << mode_name(r.mode) << '\n';
  }
  if (!out.good()) throw std::runtime_error("write_csv: write failed for " + path);
}

BenchReport run_bench(const SimConfig& cfg, const BenchConfig& bench) {
  if (bench.ks.size() < 2) throw std::invalid_argument("run_bench: need at least two sizes");
  const std::int64_t max_k = *std::max_element(bench.ks.begin(), bench.ks.end());

  SimConfig gen = cfg;
  // Enough samples for the largest size plus the probe point.
  gen.points_per_lidar = static_cast<int>((max_k + 1) / gen.n_lidars + 2);
  const Scenario sc = generate_scenario(gen);

  LufaPolicy policy = cfg.policy;
  policy.n_max = max_k + 2;  // never freeze while building

  BenchReport report;
  for (const std::int64_t k : bench.ks) {
    TrackedCloud cloud;
    std::vector<SymMat3> covs;
    covs.reserve(static_cast<std::size_t>(k) + 1);
    for (std::int64_t i = 0; i <= k; ++i)
      covs.push_back(point_covariance(sc.samples[static_cast<std::size_t>(i)].obs, cfg.noise));
    for (std::int64_t i = 0; i + 1 < k; ++i)
      add_point(cloud, sc.samples[static_cast<std::size_t>(i)].point,
                covs[static_cast<std::size_t>(i)], policy);

    // The timed insertion brings the cloud to exactly k points.
    const StepContext ctx =
        begin_step(cloud, sc.samples[static_cast<std::size_t>(k - 1)].point,
                   covs[static_cast<std::size_t>(k - 1)]);
    const SymMat3& ap = covs[static_cast<std::size_t>(k - 1)];

    std::vector<std::int64_t> fast_times(static_cast<std::size_t>(bench.repeats));
    for (int r = 0; r < bench.repeats; ++r) {
      const std::int64_t t0 = now_ns();
      for (int i = 0; i < bench.inner; ++i)
        (void)fast_covariance_update(cloud, ctx, ap, policy);
      fast_times[static_cast<std::size_t>(r)] = (now_ns() - t0) / bench.inner;
    }

    std::vector<std::int64_t> rig_times(static_cast<std::size_t>(bench.repeats));
    for (int r = 0; r < bench.repeats; ++r) {
      const std::int64_t t0 = now_ns();
      (void)rigorous_propagate(cloud, policy.guard);
      rig_times[static_cast<std::size_t>(r)] = now_ns() - t0;
    }

    auto median = [](std::vector<std::int64_t>& v) {
      std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2), v.end());
      return v[v.size() / 2];
    };
    report.rows.push_back({k, median(fast_times), median(rig_times)});
  }

  const BenchRow& first = report.rows.front();
  const BenchRow& last = report.rows.back();
  report.fast_ratio = static_cast<double>(last.t_fast_ns) /
                      static_cast<double>(std::max<std::int64_t>(first.t_fast_ns, 1));
  report.rig_ratio = static_cast<double>(last.t_rig_ns) /
                     static_cast<double>(std::max<std::int64_t>(first.t_rig_ns, 1));
  report.pass = report.fast_ratio <= bench.max_fast_ratio &&
                report.rig_ratio >= bench.min_rig_ratio;
  return report;
}

}  // namespace lufa
