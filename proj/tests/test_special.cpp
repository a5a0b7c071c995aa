#include <cmath>

#include "doctest.h"
#include "ransim/special.hpp"
#include "support/quadrature.hpp"

using namespace ransim;

namespace {
double tail_reference(double t) {
  // Direct quadrature of sqrt(e)*exp(-s^2/2); integrand below 1e-300 left of -40.
  const double lo = -40.0;
  if (t <= lo) return 0.0;
  return testsupport::integrate(
      [](double s) { return std::sqrt(std::exp(1.0)) * std::exp(-0.5 * s * s); }, lo,
      t, 1e-14);
}
}  // namespace

TEST_CASE("tail integral matches quadrature") {
  const double pts[] = {-8.0, -3.0, -1.0, -0.5, 0.0, 0.3, 0.5, 1.0, 2.0, 5.0, 8.0};
  for (double t : pts) {
    CHECK(std::fabs(gauss_tail_integral(t) - tail_reference(t)) < 1e-10);
  }
}

TEST_CASE("tail integral pinned values and range") {
  CHECK(gauss_tail_integral(0.0) == doctest::Approx(2.0663656770612464).epsilon(1e-13));
  CHECK(gauss_tail_integral(-1.0) == doctest::Approx(0.6556795424187986).epsilon(1e-12));
  CHECK(gauss_tail_integral(1.0) == doctest::Approx(3.4770518117036944).epsilon(1e-12));
  CHECK(std::fabs(gauss_tail_integral(20.0) - k_tail_integral_sup) < 1e-10);
  CHECK(k_tail_integral_sup == doctest::Approx(4.132731354122493).epsilon(1e-15));

  // Strictly monotone where the double grid can resolve it; saturates in the
  // far tails where erfc rounds to 0 or 2.
  double prev = 0.0;
  for (double t = -12.0; t <= 7.0; t += 0.25) {
    const double v = gauss_tail_integral(t);
    CHECK(v > 0.0);
    CHECK(v < k_tail_integral_sup);
    CHECK(v > prev);
    prev = v;
  }
  CHECK(gauss_tail_integral(40.0) <= k_tail_integral_sup);
  CHECK(gauss_tail_integral(-40.0) >= 0.0);
}

TEST_CASE("tail integral derivative matches finite differences") {
  const double h = 1e-5;
  for (double t = -5.0; t <= 5.0; t += 0.25) {
    const double fd =
        (gauss_tail_integral(t + h) - gauss_tail_integral(t - h)) / (2.0 * h);
    const double an = gauss_tail_deriv(t);
    CHECK(std::fabs(fd - an) <= 1e-6 * std::max(1.0, std::fabs(an)));
  }
}

TEST_CASE("smooth step flat branch is exactly zero") {
  CHECK(psi(-2.0) == 0.0);
  CHECK(psi(0.0) == 0.0);
  CHECK(psi(0.5) == 0.0);
  CHECK(psi_deriv(0.5) == 0.0);
  CHECK(psi_deriv(-1.0) == 0.0);
}

TEST_CASE("smooth step pinned values") {
  CHECK(psi(1.0) == 1.0);  // exp(1 - 1) exactly
  CHECK(psi(0.75) == doctest::Approx(0.049787068367863944).epsilon(1e-14));
}

TEST_CASE("smooth step is monotone and bounded by e") {
  double prev = -1.0;
  for (double t = 0.5; t <= 6.0; t += 0.05) {
    const double v = psi(t);
    CHECK(v >= prev);
    CHECK(v <= std::exp(1.0));
    prev = v;
  }
  CHECK(psi(100.0) < std::exp(1.0));
  CHECK(psi(1e9) <= std::exp(1.0));
}

TEST_CASE("smooth step derivative matches finite differences, no NaN at the knee") {
  for (double t = 0.55; t <= 3.0; t += 0.05) {
    const double h = 1e-6;
    const double fd = (psi(t + h) - psi(t - h)) / (2.0 * h);
    const double an = psi_deriv(t);
    CHECK(std::fabs(fd - an) <= 2e-5 * std::max(1e-6, std::fabs(an)));
  }
  // Region where exp underflows: must be a clean zero, not 0 * inf.
  CHECK(psi_deriv(0.5 + 1e-9) == 0.0);
  CHECK(std::isfinite(psi_deriv(0.5 + 1e-3)));
  CHECK(psi_deriv(0.5 + 1e-3) >= 0.0);
}
