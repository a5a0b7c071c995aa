#include "ransim/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ransim/chain.hpp"

namespace ransim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Ascending rates-prefix sums h_m for sorted taus; validates the list.
std::vector<double> rate_prefix_sums(std::vector<double>& taus) {
  if (taus.empty()) throw std::invalid_argument("worker speed list is empty");
  for (double t : taus) {
    if (!(t > 0.0) || !std::isfinite(t)) {
      throw std::invalid_argument("worker durations must be positive and finite");
    }
  }
  std::sort(taus.begin(), taus.end());
  std::vector<double> h(taus.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < taus.size(); ++i) {
    acc += 1.0 / taus[i];
    h[i] = acc;
  }
  return h;
}

std::int64_t checked_count(double value, const char* what) {
  if (!(value >= 0.0) || value > 9e18) {
    throw std::invalid_argument(std::string(what) + " is out of range");
  }
  return static_cast<std::int64_t>(std::ceil(value));
}

// Epoch-end times when every epoch needs `work` units of total power.
UniversalRecursion run_recursion(const PiecewisePower& merged, double work,
                                 std::int64_t epochs, std::size_t prefix_cap) {
  UniversalRecursion out;
  out.t_final = kInf;
  const auto& knots = merged.knots();
  const auto& rates = merged.rates();
  std::size_t i = 0;
  double pos = 0.0;
  double acc = 0.0;  // power gathered toward the current epoch
  std::int64_t done = 0;
  while (done < epochs) {
    const bool last = (i + 1 == knots.size());
    const double rate = rates[i];
    const double seg_end = last ? kInf : knots[i + 1];
    if (rate <= 0.0) {
      if (last) {
        out.blocked_at = done + 1;
        return out;
      }
      pos = seg_end;
      ++i;
      continue;
    }
    double first_end = pos + (work - acc) / rate;
    if (!last && first_end > seg_end) {
      acc += rate * (seg_end - pos);
      pos = seg_end;
      ++i;
      continue;
    }
    // At least one epoch ends in this segment; ends are spaced work/rate apart.
    const double step = work / rate;
    const std::int64_t remaining = epochs - done;
    std::int64_t fit = remaining;
    if (!last) {
      const double fit_d = 1.0 + std::floor((seg_end - first_end) / step);
      if (fit_d < static_cast<double>(remaining)) fit = static_cast<std::int64_t>(fit_d);
    }
    std::int64_t store = fit;
    if (out.times.size() < prefix_cap) {
      const std::size_t room = prefix_cap - out.times.size();
      if (static_cast<double>(fit) > static_cast<double>(room)) {
        store = static_cast<std::int64_t>(room);
      }
    } else {
      store = 0;
    }
    for (std::int64_t j = 0; j < store; ++j) {
      out.times.push_back(first_end + step * static_cast<double>(j));
    }
    const double last_end = first_end + step * static_cast<double>(fit - 1);
    done += fit;
    if (done == epochs) {
      out.t_final = last_end;
      return out;
    }
    acc = rate * (seg_end - last_end);
    pos = seg_end;
    ++i;
  }
  out.t_final = 0.0;  // epochs == 0
  return out;
}

}  // namespace

double t_of_r(std::vector<double> taus, std::int64_t R) {
  if (R < 1) throw std::invalid_argument("update-window length must be >= 1");
  const std::vector<double> h = rate_prefix_sums(taus);
  double best = kInf;
  for (std::size_t m1 = 1; m1 <= taus.size(); ++m1) {
    const double m = static_cast<double>(m1);
    best = std::min(best, (m / h[m1 - 1]) * (1.0 + static_cast<double>(R) / m));
  }
  return 2.0 * best;
}

double fixed_time_upper_bound(double L, double delta, double sigma, double p,
                              double eps, std::vector<double> taus) {
  if (!(L > 0.0) || !(delta > 0.0)) {
    throw std::invalid_argument("upper bound needs positive L and delta");
  }
  const double alpha = mixing_weight(sigma, p, eps);
  if (!(eps <= std::sqrt(2.0 * L * delta))) {
    throw std::invalid_argument(
        "accuracy is coarser than sqrt(2 L delta); the start point already qualifies");
  }
  const std::vector<double> h = rate_prefix_sums(taus);
  const double common = 76.0 * L * delta / (eps * eps);
  const double scaled = 78.0 * L * delta / (alpha * eps * eps);
  double best = kInf;
  for (std::size_t m1 = 1; m1 <= taus.size(); ++m1) {
    const double m = static_cast<double>(m1);
    best = std::min(best, (m / h[m1 - 1]) * (scaled / m + common));
  }
  return 2.0 * best;
}

double fixed_time_lower_bound_raw(std::vector<double> taus, double gate_prob,
                                  std::size_t dim) {
  if (!(gate_prob > 0.0 && gate_prob <= 1.0)) {
    throw std::invalid_argument("coin bias must be in (0, 1]");
  }
  if (dim < 2) throw std::invalid_argument("chain length must be >= 2");
  const std::vector<double> h = rate_prefix_sums(taus);
  double best = kInf;
  for (std::size_t m1 = 1; m1 <= taus.size(); ++m1) {
    const double m = static_cast<double>(m1);
    best = std::min(best, (1.0 / h[m1 - 1]) * (1.0 / gate_prob + m));
  }
  return (1.0 / 24.0) * best *
         (static_cast<double>(dim) / 2.0 + std::log(0.5));
}

double fixed_time_lower_bound(double L, double delta, double sigma, double p,
                              double eps, std::vector<double> taus) {
  const LowerBoundParams lb = lower_bound_params(L, delta, sigma, p, eps);
  return fixed_time_lower_bound_raw(std::move(taus), lb.gate_prob, lb.dim);
}

std::int64_t universal_epoch_count(double L, double delta, double eps) {
  if (!(L > 0.0) || !(delta > 0.0) || !(eps > 0.0)) {
    throw std::invalid_argument("epoch count needs positive L, delta, eps");
  }
  return checked_count(74.0 * L * delta / (eps * eps), "epoch count");
}

std::int64_t universal_lower_epoch_count(double L, double delta, double eps) {
  if (!(L > 0.0) || !(delta > 0.0) || !(eps > 0.0)) {
    throw std::invalid_argument("chain length needs positive L, delta, eps");
  }
  const double d = std::floor(L * delta / (29184.0 * eps * eps));
  if (d > 9e18) throw std::invalid_argument("chain length is out of range");
  return static_cast<std::int64_t>(d);
}

UniversalRecursion universal_time_recursion(
    const std::vector<PiecewisePower>& profiles, std::int64_t R,
    std::int64_t epochs, std::size_t prefix_cap) {
  if (R < 1) throw std::invalid_argument("per-epoch update count must be >= 1");
  if (epochs < 1) throw std::invalid_argument("epoch count must be >= 1");
  const PiecewisePower merged = merge_total_power(profiles);
  return run_recursion(merged, 4.0 * static_cast<double>(R), epochs, prefix_cap);
}

UniversalLowerBound universal_lower_bound(
    const std::vector<PiecewisePower>& profiles, double L, double delta,
    double sigma, double p, double eps, std::size_t prefix_cap) {
  const LowerBoundParams lb = lower_bound_params(L, delta, sigma, p, eps);
  UniversalLowerBound out;
  out.gate_prob = lb.gate_prob;
  out.epoch_target = static_cast<std::int64_t>(std::ceil(1.0 / (4.0 * lb.gate_prob)));
  out.k_tilde = static_cast<std::int64_t>(
      std::floor(0.5 * static_cast<double>(lb.dim) + std::log(0.5)));
  if (out.k_tilde <= 0) return out;  // too few links to force any delay
  const PiecewisePower merged = merge_total_power(profiles);
  out.recursion = run_recursion(merged, static_cast<double>(out.epoch_target),
                                out.k_tilde, prefix_cap);
  out.time = out.recursion.t_final;
  return out;
}

BoundsReport make_bounds_report(double L, double delta, double sigma, double p,
                                double eps, std::vector<double> taus,
                                std::size_t prefix_cap) {
  BoundsReport r;
  r.L = L;
  r.delta = delta;
  r.sigma = sigma;
  r.p = p;
  r.eps = eps;
  r.theory = theory_params(L, delta, sigma, p, eps);
  r.taus = taus;
  std::sort(r.taus.begin(), r.taus.end());
  r.t_at_cut = t_of_r(r.taus, r.theory.delay_cut);

  const double nan = std::numeric_limits<double>::quiet_NaN();
  r.upper_in_regime = eps <= std::sqrt(2.0 * L * delta);
  r.upper_fixed =
      r.upper_in_regime ? fixed_time_upper_bound(L, delta, sigma, p, eps, r.taus) : nan;
  r.lower_in_regime = eps <= std::sqrt(L * delta / 87552.0);
  r.lower_fixed =
      r.lower_in_regime ? fixed_time_lower_bound(L, delta, sigma, p, eps, r.taus) : nan;

  std::vector<PiecewisePower> lifted;
  lifted.reserve(r.taus.size());
  for (double t : r.taus) lifted.push_back(WorkerProfile::fixed(t).lift());
  r.epochs = universal_epoch_count(L, delta, eps);
  r.recursion =
      universal_time_recursion(lifted, r.theory.delay_cut, r.epochs, prefix_cap);
  if (r.lower_in_regime) {
    r.universal_lb = universal_lower_bound(lifted, L, delta, sigma, p, eps, prefix_cap);
  }
  return r;
}

}  // namespace ransim
