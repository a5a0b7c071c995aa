#include "ransim/special.hpp"

#include <cmath>
#include <numbers>

namespace ransim {

const double k_tail_integral_sup =
    std::sqrt(2.0 * std::numbers::pi * std::numbers::e);

double gauss_tail_integral(double t) {
  // sqrt(e) * sqrt(2*pi) * Prob(N(0,1) <= t), via erfc for accuracy in both tails.
  return k_tail_integral_sup * 0.5 * std::erfc(-t * std::numbers::sqrt2 * 0.5);
}

double gauss_tail_deriv(double t) {
  return std::sqrt(std::numbers::e) * std::exp(-0.5 * t * t);
}

double psi(double t) {
  const double s = 2.0 * t - 1.0;
  if (s <= 0.0) return 0.0;
  return std::exp(1.0 - 1.0 / (s * s));
}

double psi_deriv(double t) {
  const double s = 2.0 * t - 1.0;
  if (s <= 0.0) return 0.0;
  // psi(t) * 4 / s^3, assembled in log space: 4 * exp(1 - s^-2 - 3*ln s).
  return 4.0 * std::exp(1.0 - 1.0 / (s * s) - 3.0 * std::log(s));
}

}  // namespace ransim
