#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ransim/policies.hpp"
#include "ransim/workers.hpp"

namespace ransim {

// Wall-clock span sufficient for any R consecutive applied updates when worker
// i needs tau_i seconds per gradient: 2 min_m (m / h_m)(1 + R/m) over the m
// fastest workers, h_m the sum of their rates.
double t_of_r(std::vector<double> taus, std::int64_t R);

// Time for the normalized-momentum server to reach gradient norm <= eps under
// fixed speeds, with explicit constants.  Requires eps <= sqrt(2 L delta);
// beyond that the start point already qualifies.
double fixed_time_upper_bound(double L, double delta, double sigma, double p,
                              double eps, std::vector<double> taus);

// Floor on the time any asynchronous first-order method needs on the gated
// chain instance matched to (L, delta, sigma, p, eps).
double fixed_time_lower_bound(double L, double delta, double sigma, double p,
                              double eps, std::vector<double> taus);

// Same floor with the instance geometry (coin bias, chain length) given.
double fixed_time_lower_bound_raw(std::vector<double> taus, double gate_prob,
                                  std::size_t dim);

// Applied-update epochs sufficient at accuracy eps: ceil(74 L delta / eps^2).
std::int64_t universal_epoch_count(double L, double delta, double eps);

// Chain length of the matched hard instance: floor(L delta / (29184 eps^2)).
std::int64_t universal_lower_epoch_count(double L, double delta, double eps);

struct UniversalRecursion {
  std::vector<double> times;       // T_1.. up to the storage cap
  double t_final = 0.0;            // T at the requested epoch; +inf when blocked
  std::int64_t blocked_at = -1;    // first epoch that can never finish, -1 if none
};

// Epoch-end times T_K = min{T : (1/4) sum_i integral_{T_{K-1}}^{T} v_i >= R}.
UniversalRecursion universal_time_recursion(
    const std::vector<PiecewisePower>& profiles, std::int64_t R,
    std::int64_t epochs, std::size_t prefix_cap = SIZE_MAX);

struct UniversalLowerBound {
  std::int64_t k_tilde = 0;        // epochs any method needs; <= 0 is vacuous
  std::int64_t epoch_target = 1;   // completed gradients per epoch, ceil(1/(4q))
  double gate_prob = 1.0;
  double time = 0.0;               // T at epoch k_tilde; 0 when vacuous
  UniversalRecursion recursion;
};

// Floor on the time under arbitrary power schedules, via the gated chain.
UniversalLowerBound universal_lower_bound(
    const std::vector<PiecewisePower>& profiles, double L, double delta,
    double sigma, double p, double eps, std::size_t prefix_cap = SIZE_MAX);

// Everything the `bounds` command reports for one parameter tuple.  Fixed
// speeds are lifted to constant powers for the epoch recursions.  Bounds whose
// accuracy regime does not hold are flagged rather than computed.
struct BoundsReport {
  double L = 0.0, delta = 0.0, sigma = 0.0, p = 2.0, eps = 0.0;
  std::vector<double> taus;
  TheoryParams theory;
  double t_at_cut = 0.0;             // t_of_r at R = theory.delay_cut
  bool upper_in_regime = false;
  double upper_fixed = 0.0;          // NaN when out of regime
  bool lower_in_regime = false;
  double lower_fixed = 0.0;          // NaN when out of regime
  std::int64_t epochs = 0;           // universal epoch count
  UniversalRecursion recursion;      // prefix of the upper recursion
  UniversalLowerBound universal_lb;  // vacuous defaults when out of regime
};

BoundsReport make_bounds_report(double L, double delta, double sigma, double p,
                                double eps, std::vector<double> taus,
                                std::size_t prefix_cap = 64);

}  // namespace ransim
