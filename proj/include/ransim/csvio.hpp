#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "ransim/bounds.hpp"
#include "ransim/engine.hpp"

namespace ransim {

// Shortest decimal form that parses back to the same double, lowercase inf,
// and a sign-normalized nan.  Every number in every CSV goes through this so
// identical runs produce byte-identical files.
std::string format_double(double v);

// Columns: time_s,k,grad_norm,f_gap,accepted,discarded,policy,seed.
// One row per applied update plus the initial state and the horizon row.
void write_trace_csv(std::ostream& out, const RunTrace& trace);

// One row per (policy, seed, time bin).  The per-run columns carry the last
// recorded state at or before the bin edge; the quantile columns aggregate
// f_gap across seeds of the same policy at the same bin.
struct SweepCell {
  std::string policy;
  std::uint64_t seed = 0;
  std::size_t time_bin = 0;  // 0..bins, edge j sits at max_time * j / bins
  double time_s = 0.0;
  double f_gap = 0.0;
  double grad_norm = 0.0;
  double median_f_gap = 0.0;
  double q25_f_gap = 0.0;
  double q75_f_gap = 0.0;
};

void write_sweep_csv(std::ostream& out, const std::vector<SweepCell>& cells);

// Long key,value table: inputs echoed, then the step-size recipe, the fixed
// time bounds with their regime flags, and the elastic-rate recursion prefix.
void write_bounds_csv(std::ostream& out, const BoundsReport& report);

std::string trace_csv_name(const std::string& policy, std::uint64_t seed);

}  // namespace ransim
