#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ransim {

struct CheckResult {
  std::string name;
  bool ok = false;
  std::string detail;  // measured statistic, or what went wrong
};

// Executes the cross-module invariant suite: RNG stream discipline, oracle
// moment certification, policy update rules, event-loop determinism, bound
// fixtures, and file-format stability.  `full` raises the Monte-Carlo sample
// counts from smoke scale to certification scale.  When `out` is given, one
// line per check is streamed as results arrive.
std::vector<CheckResult> run_selfchecks(bool full, std::ostream* out = nullptr);

}  // namespace ransim
