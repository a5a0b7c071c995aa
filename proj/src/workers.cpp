#include "ransim/workers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ransim {

PiecewisePower::PiecewisePower(std::vector<double> knots, std::vector<double> rates)
    : knots_(std::move(knots)), rates_(std::move(rates)) {
  if (knots_.empty() || knots_.size() != rates_.size()) {
    throw std::invalid_argument("power schedule needs matching knot and rate lists");
  }
  if (knots_.front() != 0.0) {
    throw std::invalid_argument("power schedule must start at time 0");
  }
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    if (!std::isfinite(knots_[i]) || (i > 0 && knots_[i] <= knots_[i - 1])) {
      throw std::invalid_argument("power schedule knots must be finite and increasing");
    }
    if (!std::isfinite(rates_[i]) || rates_[i] < 0.0) {
      throw std::invalid_argument("power rates must be finite and nonnegative");
    }
  }
}

double PiecewisePower::rate_at(double t) const {
  if (t < 0.0) return 0.0;
  // Last knot <= t.
  auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
  return rates_[static_cast<std::size_t>(it - knots_.begin()) - 1];
}

double PiecewisePower::integral(double t0, double t1) const {
  if (!(t1 > t0)) return 0.0;
  t0 = std::max(t0, 0.0);
  if (!(t1 > t0)) return 0.0;
  double acc = 0.0;
  auto it = std::upper_bound(knots_.begin(), knots_.end(), t0);
  std::size_t i = static_cast<std::size_t>(it - knots_.begin()) - 1;
  double seg_start = t0;
  for (; i + 1 < knots_.size() && knots_[i + 1] < t1; ++i) {
    acc += rates_[i] * (knots_[i + 1] - seg_start);
    seg_start = knots_[i + 1];
  }
  acc += rates_[i] * (t1 - seg_start);
  return acc;
}

double PiecewisePower::completion_time(double start) const {
  if (start < 0.0 || !std::isfinite(start)) {
    throw std::invalid_argument("completion query must start at a finite time >= 0");
  }
  double acc = 0.0;
  auto it = std::upper_bound(knots_.begin(), knots_.end(), start);
  std::size_t i = static_cast<std::size_t>(it - knots_.begin()) - 1;
  double seg_start = start;
  while (true) {
    const double rate = rates_[i];
    const bool last = (i + 1 == knots_.size());
    const double seg_end = last ? std::numeric_limits<double>::infinity() : knots_[i + 1];
    if (rate > 0.0) {
      const double dt = (1.0 - acc) / rate;
      if (seg_start + dt <= seg_end || last) return seg_start + dt;
      acc += rate * (seg_end - seg_start);
    }
    if (last) return std::numeric_limits<double>::infinity();
    seg_start = seg_end;
    ++i;
  }
}

PiecewisePower merge_total_power(const std::vector<PiecewisePower>& parts) {
  if (parts.empty()) {
    throw std::invalid_argument("cannot merge an empty schedule list");
  }
  std::vector<double> knots;
  for (const auto& p : parts) {
    knots.insert(knots.end(), p.knots().begin(), p.knots().end());
  }
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
  std::vector<double> rates(knots.size(), 0.0);
  for (std::size_t i = 0; i < knots.size(); ++i) {
    for (const auto& p : parts) rates[i] += p.rate_at(knots[i]);
  }
  return PiecewisePower(std::move(knots), std::move(rates));
}

WorkerProfile WorkerProfile::fixed(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw std::invalid_argument("fixed duration must be positive and finite");
  }
  WorkerProfile w;
  w.kind_ = Kind::Fixed;
  w.tau_ = tau;
  return w;
}

WorkerProfile WorkerProfile::exponential(double mean) {
  if (!(mean > 0.0) || !std::isfinite(mean)) {
    throw std::invalid_argument("exponential mean must be positive and finite");
  }
  WorkerProfile w;
  w.kind_ = Kind::Exponential;
  w.mean_ = mean;
  return w;
}

WorkerProfile WorkerProfile::pareto(double shape, double mean) {
  if (!(shape > 1.0) || !std::isfinite(shape)) {
    throw std::invalid_argument("pareto duration shape must exceed 1 for a finite mean");
  }
  if (!(mean > 0.0) || !std::isfinite(mean)) {
    throw std::invalid_argument("pareto duration mean must be positive and finite");
  }
  WorkerProfile w;
  w.kind_ = Kind::ParetoDelay;
  w.shape_ = shape;
  w.mean_ = mean;
  return w;
}

WorkerProfile WorkerProfile::universal(PiecewisePower power) {
  WorkerProfile w;
  w.kind_ = Kind::Universal;
  w.power_.push_back(std::move(power));
  return w;
}

double WorkerProfile::duration(RngStream& rng) const {
  switch (kind_) {
    case Kind::Fixed:
      return tau_;
    case Kind::Exponential:
      return rng.exponential(mean_);
    case Kind::ParetoDelay:
      return rng.pareto(shape_, mean_ * (shape_ - 1.0) / shape_);
    case Kind::Universal:
      break;
  }
  throw std::logic_error("universal workers complete via their power schedule");
}

const PiecewisePower& WorkerProfile::power() const {
  if (power_.empty()) {
    throw std::logic_error("only universal workers carry a power schedule");
  }
  return power_.front();
}

PiecewisePower WorkerProfile::lift() const {
  if (kind_ != Kind::Fixed) {
    throw std::logic_error("only fixed-speed workers lift to constant power");
  }
  return PiecewisePower({0.0}, {1.0 / tau_});
}

}  // namespace ransim
