#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lufa/gradcheck.hpp"
#include "lufa/sim.hpp"

namespace {

using nlohmann::json;

// exit codes: 0 ok, 1 tolerance/contract breach, 2 config error, 3 I/O error
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AppConfig {
  lufa::SimConfig sim;
  lufa::GradcheckConfig grad;
  lufa::BenchConfig bench;
  int grad_k{0};  // 0 keeps the default size sweep
};

constexpr double kDeg = 3.14159265358979323846 / 180.0;

double as_number(const std::string& key, const json& v) {
  if (!v.is_number()) throw ConfigError("config error: " + key + " must be a number");
  return v.get<double>();
}

std::int64_t as_integer(const std::string& key, const json& v) {
  if (!v.is_number_integer()) throw ConfigError("config error: " + key + " must be an integer");
  return v.get<std::int64_t>();
}

bool as_flag(const std::string& key, const json& v) {
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_number_integer()) return v.get<std::int64_t>() != 0;
  throw ConfigError("config error: " + key + " must be a boolean");
}

void apply_key(AppConfig& c, const std::string& key, const json& v) {
  auto& sim = c.sim;
  if (key == "seed") sim.seed = static_cast<std::uint64_t>(as_integer(key, v));
  else if (key == "n_lidars") sim.n_lidars = static_cast<int>(as_integer(key, v));
  else if (key == "points_per_lidar") sim.points_per_lidar = static_cast<int>(as_integer(key, v));
  else if (key == "plane_half_extent") sim.plane_half_extent = as_number(key, v);
  else if (key == "lidar_radius") sim.lidar_radius = as_number(key, v);
  else if (key == "lidar_footprint_std") sim.lidar_footprint_std = as_number(key, v);
  else if (key == "plane_roughness_std") sim.plane_roughness_std = as_number(key, v);
  else if (key == "pose_noise_pos") sim.pose_noise_pos = as_number(key, v);
  else if (key == "pose_noise_ang_deg") sim.pose_noise_ang_deg = as_number(key, v);
  else if (key == "sigma_d") sim.noise.sigma_d = as_number(key, v);
  else if (key == "sigma_w_deg") sim.noise.sigma_w = as_number(key, v) * kDeg;
  else if (key == "eta") sim.noise.eta = as_number(key, v);
  else if (key == "n_min") sim.policy.n_min = as_integer(key, v);
  else if (key == "n_ct") sim.policy.n_ct = as_integer(key, v);
  else if (key == "n_max") sim.policy.n_max = as_integer(key, v);
  else if (key == "tau_rel") sim.policy.tau_rel = as_number(key, v);
  else if (key == "tau_abs") sim.policy.tau_abs = as_number(key, v);
  else if (key == "eps_gap") sim.policy.guard.eps_gap = as_number(key, v);
  else if (key == "cos_floor") sim.policy.guard.cos_floor = as_number(key, v);
  else if (key == "grad_step_scale") c.grad.step_scale = as_number(key, v);
  else if (key == "grad_tol_lambda") c.grad.tol_lambda = as_number(key, v);
  else if (key == "grad_tol_vector") c.grad.tol_vector = as_number(key, v);
  else if (key == "grad_k") c.grad_k = static_cast<int>(as_integer(key, v));
  else if (key == "grad_inject_sign_error") c.grad.inject_sign_error = as_flag(key, v);
  else if (key == "bench_repeats") c.bench.repeats = static_cast<int>(as_integer(key, v));
  else if (key == "bench_inner") c.bench.inner = static_cast<int>(as_integer(key, v));
  else if (key == "bench_max_fast_ratio") c.bench.max_fast_ratio = as_number(key, v);
  else if (key == "bench_min_rig_ratio") c.bench.min_rig_ratio = as_number(key, v);
  else throw ConfigError("config error: unknown key '" + key + "'");
}

void validate(const AppConfig& c) {
  const auto& s = c.sim;
  const auto bad = [](const std::string& field) -> ConfigError {
    return ConfigError("config error: invalid value for " + field);
  };
  if (s.n_lidars < 1) throw bad("n_lidars");
  if (s.points_per_lidar < 1) throw bad("points_per_lidar");
  if (s.plane_half_extent <= 0) throw bad("plane_half_extent");
  if (s.lidar_radius <= 0) throw bad("lidar_radius");
  if (s.lidar_footprint_std <= 0) throw bad("lidar_footprint_std");
  if (s.plane_roughness_std < 0) throw bad("plane_roughness_std");
  if (s.pose_noise_pos < 0) throw bad("pose_noise_pos");
  if (s.pose_noise_ang_deg < 0) throw bad("pose_noise_ang_deg");
  if (s.noise.sigma_d < 0) throw bad("sigma_d");
  if (s.noise.sigma_w < 0) throw bad("sigma_w_deg");
  if (s.noise.eta < 0) throw bad("eta");
  if (s.policy.n_min < 3) throw bad("n_min");
  if (s.policy.n_ct < 1) throw bad("n_ct");
  if (s.policy.n_max <= s.policy.n_min) throw bad("n_max");
  if (s.policy.tau_rel < 0) throw bad("tau_rel");
  if (s.policy.tau_abs <= 0) throw bad("tau_abs");
  if (s.policy.guard.eps_gap <= 0) throw bad("eps_gap");
  if (s.policy.guard.cos_floor <= 0 || s.policy.guard.cos_floor > 1) throw bad("cos_floor");
  if (c.grad.step_scale <= 0) throw bad("grad_step_scale");
  if (c.grad.tol_lambda <= 0) throw bad("grad_tol_lambda");
  if (c.grad.tol_vector <= 0) throw bad("grad_tol_vector");
  if (c.grad_k != 0 && c.grad_k < 4) throw bad("grad_k");
  if (c.bench.repeats < 3) throw bad("bench_repeats");
  if (c.bench.inner < 1) throw bad("bench_inner");
}

void load_config_file(AppConfig& c, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config error: " + path + ": " + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config error: " + path + ": expected an object");
  for (const auto& [key, value] : doc.items()) apply_key(c, key, value);
}

void apply_sets(AppConfig& c, const std::vector<std::string>& sets) {
  for (const std::string& kv : sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ConfigError("config error: --set expects key=value, got '" + kv + "'");
    const std::string key = kv.substr(0, eq);
    const json value = json::parse(kv.substr(eq + 1), nullptr, false);
    if (value.is_discarded())
      throw ConfigError("config error: unparseable value for " + key);
    apply_key(c, key, value);
  }
}

int cmd_sim(const AppConfig& cfg, const std::string& out_path) {
  const lufa::Scenario sc = lufa::generate_scenario(cfg.sim);
  const lufa::ComparisonResult res = lufa::run_comparison(sc, cfg.sim);

  int fast = 0, rigorous = 0, frozen = 0;
  double max_gap_lambda = 0.0, max_gap_trace_n = 0.0;
  for (const auto& r : res.records) {
    if (r.mode == lufa::Mode::fast) ++fast;
    if (r.mode == lufa::Mode::rigorous) ++rigorous;
    if (r.mode == lufa::Mode::frozen) ++frozen;
    for (int j = 0; j < 3; ++j) {
      if (r.a_lambda_rig[j] > 0)
        max_gap_lambda = std::max(
            max_gap_lambda, std::abs(r.a_lambda_lufa[j] - r.a_lambda_rig[j]) / r.a_lambda_rig[j]);
    }
    if (r.trace_n_rig > 0)
      max_gap_trace_n = std::max(
          max_gap_trace_n, std::abs(r.trace_n_lufa - r.trace_n_rig) / r.trace_n_rig);
  }

  std::cout << "samples=" << sc.samples.size() << "\n"
            << "records=" << res.records.size() << "\n"
            << "fast_steps=" << fast << "\n"
            << "rigorous_steps=" << rigorous << "\n"
            << "frozen_steps=" << frozen << "\n"
            << "max_rel_gap_a_lambda=" << max_gap_lambda << "\n"
            << "max_rel_gap_trace_n=" << max_gap_trace_n << "\n";

  if (!out_path.empty()) {
    try {
      lufa::write_csv(out_path, res.records);
    } catch (const std::runtime_error& e) {
      throw IoError(e.what());
    }
    std::cout << "csv=" << out_path << "\n";
  }
  return 0;
}

int cmd_gradcheck(AppConfig cfg, bool seed_given) {
  if (seed_given)
    cfg.grad.seeds = {cfg.sim.seed, cfg.sim.seed + 1, cfg.sim.seed + 2};
  if (cfg.grad_k != 0) cfg.grad.ks = {cfg.grad_k};

  const lufa::GradcheckReport report = lufa::run_gradcheck(cfg.grad);
  for (const auto& c : report.cases) {
    std::cout << "gradcheck_case seed=" << c.seed << " k=" << c.k
              << " lambda_rel=" << c.lambda_rel << " vector_rel=" << c.vector_rel << "\n";
  }
  std::cout << "worst_lambda_rel=" << report.worst_lambda << "\n"
            << "worst_vector_rel=" << report.worst_vector << "\n"
            << "pass=" << (report.pass ? 1 : 0) << "\n";
  if (!report.pass) {
    for (const auto& c : report.cases) {
      if (c.lambda_rel >= cfg.grad.tol_lambda || c.vector_rel >= cfg.grad.tol_vector) {
        std::cerr << "gradcheck failed: seed=" << c.seed << " k=" << c.k
                  << " lambda_rel=" << c.lambda_rel << " vector_rel=" << c.vector_rel
                  << "\n";
      }
    }
    return 1;
  }
  return 0;
}

int cmd_bench(const AppConfig& cfg) {
  const lufa::BenchReport report = lufa::run_bench(cfg.sim, cfg.bench);
  for (const auto& row : report.rows) {
    std::cout << "bench k=" << row.k << " t_fast_ns=" << row.t_fast_ns
              << " t_rig_ns=" << row.t_rig_ns << "\n";
  }
  std::cout << "fast_ratio=" << report.fast_ratio << "\n"
            << "rig_ratio=" << report.rig_ratio << "\n"
            << "pass=" << (report.pass ? 1 : 0) << "\n";
  if (!report.pass) {
    std::cerr << "bench failed: fast_ratio=" << report.fast_ratio
              << " (max " << cfg.bench.max_fast_ratio << "), rig_ratio="
              << report.rig_ratio << " (min " << cfg.bench.min_rig_ratio << ")\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Incremental plane-feature uncertainty propagation"};
  app.require_subcommand(1);

  std::string config_path, out_path;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::vector<std::string> sets;

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file");
    cmd->add_option("--seed", seed, "override the config seed")
        ->each([&](const std::string&) { seed_given = true; });
    cmd->add_option("--set", sets, "override one config key (key=value)");
  };

  CLI::App* sim = app.add_subcommand("sim", "run the plane-sampling comparison");
  add_common(sim);
  sim->add_option("--out", out_path, "write the per-step CSV here");

  CLI::App* gradcheck = app.add_subcommand("gradcheck", "finite-difference Jacobian check");
  add_common(gradcheck);

  CLI::App* bench = app.add_subcommand("bench", "fast vs rigorous timing contract");
  add_common(bench);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    AppConfig cfg;
    if (!config_path.empty()) load_config_file(cfg, config_path);
    apply_sets(cfg, sets);
    if (seed_given) cfg.sim.seed = seed;
    validate(cfg);

    if (sim->parsed()) return cmd_sim(cfg, out_path);
    if (gradcheck->parsed()) return cmd_gradcheck(cfg, seed_given);
    if (bench->parsed()) return cmd_bench(cfg);
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
