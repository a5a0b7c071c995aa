#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "ransim/policies.hpp"
#include "ransim/problem.hpp"
#include "ransim/vec.hpp"
#include "ransim/workers.hpp"

namespace ransim {

// Stop rule for a simulation: a virtual-time budget or a target number of
// applied server rounds.
struct Horizon {
  enum class Kind { MaxTime, MaxRounds };
  Kind kind = Kind::MaxTime;
  double max_time = 0.0;
  std::int64_t max_rounds = 0;

  static Horizon time(double t);
  static Horizon rounds(std::int64_t k);
};

struct EngineOptions {
  bool record_rows = true;         // one trace row per applied update
  bool record_completions = false; // per-gradient bookkeeping for diagnostics
  bool record_iterates = false;    // x_0, x_1, ... (memory heavy)
  std::uint64_t max_events = 0;    // 0 picks a guard from the horizon
  double divergence_linf = 1e100;  // stop early once the iterate blows past this
};

// The simulation clock can no longer advance but the stop rule is unmet, or
// the event guard tripped.
class SimGuardError : public std::runtime_error {
 public:
  explicit SimGuardError(const std::string& what) : std::runtime_error(what) {}
};

struct TraceRow {
  double time_s = 0.0;
  std::int64_t k = 0;
  double grad_norm = 0.0;
  double f_gap = 0.0;
  std::int64_t accepted = 0;
  std::int64_t discarded = 0;
};

struct CompletionRecord {
  double time = 0.0;
  int worker = 0;
  std::int64_t snapshot_round = 0;
  std::int64_t round_before = 0;  // server round the instant before delivery
  bool accepted = false;
  bool stepped = false;
  double step_norm = 0.0;
};

struct RunSummary {
  std::string policy;
  std::uint64_t seed = 0;
  double final_time = 0.0;
  std::int64_t final_round = 0;
  std::int64_t accepted = 0;
  std::int64_t discarded = 0;
  std::int64_t zero_directions = 0;
  std::int64_t completions = 0;
  std::uint64_t events = 0;
  double initial_grad_norm = 0.0;
  double initial_gap = 0.0;
  double final_grad_norm = 0.0;
  double final_gap = 0.0;
  double final_dist_to_opt = 0.0;  // NaN when the minimizer is unknown
  bool diverged = false;
};

struct RunTrace {
  std::vector<TraceRow> rows;
  std::vector<CompletionRecord> completions;
  std::vector<Vec> iterates;  // indexed by round when recorded
  RunSummary summary;
};

// Runs the asynchronous server loop in virtual time.  Worker i requests work,
// snapshots the current iterate and round, computes for a model-determined
// span, and delivers the oracle's gradient at the snapshot; the policy then
// updates.  Replies are instantaneous; each worker keeps exactly one request
// in flight.  Simultaneous events process gradients before new requests,
// breaking remaining ties by worker index.  `oracles` supplies one private
// oracle per worker; `seed` keys the per-worker duration streams.
RunTrace simulate(const Problem& problem, ServerPolicy& policy,
                  const std::vector<WorkerProfile>& workers,
                  const std::vector<std::unique_ptr<GradientOracle>>& oracles,
                  Horizon horizon, std::uint64_t seed,
                  const EngineOptions& options = {});

}  // namespace ransim
