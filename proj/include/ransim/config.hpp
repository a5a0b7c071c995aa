#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ransim/noise.hpp"
#include "ransim/vec.hpp"
#include "ransim/workers.hpp"

namespace ransim {

// One experiment = one JSON file.  Parsing validates eagerly and reports the
// offending field path; serialization round-trips every field it read.

struct ProblemConfig {
  enum class Kind { Quadratic, Chain };
  Kind kind = Kind::Quadratic;
  std::size_t dim = 0;
  // Quadratic: sampled design matrix, fixed independently of the run seed so
  // every seed in a sweep optimizes the same function.
  std::uint64_t build_seed = 12345;
  std::size_t rows = 20000;
  double ridge = 0.01;
  // Chain: smoothness target and coordinate length scale.
  double smoothness = 1.0;
  double length_scale = 1.0;
  NoiseModel noise;  // BernoulliGate is only meaningful on the chain
};

struct WorkerGroup {
  std::size_t count = 1;
  WorkerProfile profile = WorkerProfile::fixed(1.0);
};

struct PolicyConfig {
  std::string name;  // ransgdm | ringmaster_asgd | vanilla_asgd |
                     // delay_adaptive_asgd | rennala
  std::optional<double> eta;
  std::optional<double> momentum;
  std::optional<std::int64_t> delay_cut;
  std::optional<std::int64_t> batch;
  struct Theory {
    double L = 1.0, delta = 1.0, sigma = 0.0, p = 2.0, eps = 0.1;
  };
  std::optional<Theory> theory;
};

struct HorizonConfig {
  bool by_time = true;
  double max_time = 0.0;
  std::int64_t max_rounds = 0;
};

struct RunConfig {
  std::string name = "trace";
  ProblemConfig problem;
  std::vector<WorkerGroup> workers;
  PolicyConfig policy;
  HorizonConfig horizon;
  std::uint64_t seed = 1;
  std::optional<Vec> x0;  // zeros when absent
};

struct SweepConfig {
  RunConfig base;  // its policy/seed fields are ignored
  std::vector<PolicyConfig> policies;
  std::vector<std::uint64_t> seeds;
  std::size_t time_bins = 50;
};

RunConfig parse_run_config(const std::string& json_text);
SweepConfig parse_sweep_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);
SweepConfig load_sweep_config(const std::string& path);

std::string serialize_run_config(const RunConfig& c);
std::string serialize_sweep_config(const SweepConfig& c);

}  // namespace ransim
