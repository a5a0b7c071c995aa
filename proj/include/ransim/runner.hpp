#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ransim/config.hpp"
#include "ransim/csvio.hpp"
#include "ransim/engine.hpp"
#include "ransim/policies.hpp"
#include "ransim/problem.hpp"

namespace ransim {

// The quadratic is sampled from the build seed only, so every run seed in a
// sweep optimizes the same function.
std::unique_ptr<Problem> build_problem(const ProblemConfig& c);

std::vector<WorkerProfile> expand_workers(const std::vector<WorkerGroup>& groups);

// Knobs the policy actually runs with, after merging explicit values over the
// step-size recipe.  Explicit wins; each override is reported to `warnings`.
struct ResolvedPolicy {
  std::string name;
  double eta = 0.0;
  double momentum = 0.0;      // ransgdm
  std::int64_t delay_cut = 0; // ransgdm, ringmaster_asgd
  std::int64_t batch = 0;     // rennala
};

ResolvedPolicy resolve_policy(const PolicyConfig& c, std::ostream* warnings = nullptr);

std::unique_ptr<ServerPolicy> make_policy(const ResolvedPolicy& r, Vec x0);

// Worker i draws noise from stream 3 + 2i of the run seed; durations use the
// even streams, so oracles and delays never share state.
std::vector<std::unique_ptr<GradientOracle>> build_oracles(const Problem& p,
                                                           const ProblemConfig& c,
                                                           std::size_t n_workers,
                                                           std::uint64_t seed);

Horizon make_horizon(const HorizonConfig& h);

RunTrace run_single(const RunConfig& c, std::ostream* warnings = nullptr,
                    const EngineOptions& opts = {});
// Same run against a problem built once by the caller (sweeps, tuning loops).
RunTrace run_single(const RunConfig& c, const Problem& problem,
                    std::ostream* warnings = nullptr,
                    const EngineOptions& opts = {});

// Linear-interpolation quantile of the values (q in [0, 1]).
double quantile(std::vector<double> values, double q);

// Per-run carry-forward sampling: entry j holds the last recorded state at or
// before max_time * j / bins, for j = 0..bins.
struct BinnedRun {
  std::string policy;
  std::uint64_t seed = 0;
  std::vector<double> time_s, f_gap, grad_norm;
};

BinnedRun bin_trace(const RunTrace& trace, double max_time, std::size_t bins);

struct SweepResult {
  std::vector<SweepCell> cells;      // policy-major, then seed, then bin
  std::vector<RunSummary> summaries; // one per run, same order as execution
};

// Runs the policy x seed cross product on one shared problem.  Each finished
// trace is handed to `sink` (when set) and then dropped, so memory stays flat.
using TraceSink = std::function<void(const RunTrace&)>;
SweepResult run_sweep(const SweepConfig& c, const TraceSink& sink = {},
                      std::ostream* warnings = nullptr);

}  // namespace ransim
