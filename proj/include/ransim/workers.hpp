#pragma once

#include <cstddef>
#include <vector>

#include "ransim/rng.hpp"

namespace ransim {

// Piecewise-constant computation power: rates[i] holds on [knots[i], knots[i+1]),
// and the last rate persists forever. One unit of accumulated power completes
// one gradient computation.
class PiecewisePower {
 public:
  PiecewisePower(std::vector<double> knots, std::vector<double> rates);

  double rate_at(double t) const;

  // Integral of the rate over [t0, t1], 0 when t1 <= t0.
  double integral(double t0, double t1) const;

  // First t >= start with integral(start, t) >= 1; +inf when the remaining
  // power never accumulates a full unit.
  double completion_time(double start) const;

  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& rates() const { return rates_; }

 private:
  std::vector<double> knots_;
  std::vector<double> rates_;
};

// Sum of several power schedules on the union of their knots.
PiecewisePower merge_total_power(const std::vector<PiecewisePower>& parts);

// One worker's speed model. Fixed, Exponential and ParetoDelay draw i.i.d.
// computation durations; Universal follows a deterministic power schedule.
class WorkerProfile {
 public:
  enum class Kind { Fixed, Exponential, ParetoDelay, Universal };

  static WorkerProfile fixed(double tau);
  static WorkerProfile exponential(double mean);
  // Pareto durations with the given mean; min = mean * (shape - 1) / shape.
  static WorkerProfile pareto(double shape, double mean);
  static WorkerProfile universal(PiecewisePower power);

  Kind kind() const { return kind_; }
  bool is_universal() const { return kind_ == Kind::Universal; }

  // Duration of one computation for the stochastic kinds.
  double duration(RngStream& rng) const;

  const PiecewisePower& power() const;

  // Constant-power schedule at rate 1/tau; Fixed kind only.
  PiecewisePower lift() const;

  double fixed_tau() const { return tau_; }
  double mean() const { return mean_; }
  double shape() const { return shape_; }

 private:
  WorkerProfile() = default;

  Kind kind_ = Kind::Fixed;
  double tau_ = 0.0;
  double mean_ = 0.0;
  double shape_ = 0.0;
  std::vector<PiecewisePower> power_;  // empty unless Universal
};

}  // namespace ransim
