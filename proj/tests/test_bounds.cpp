#include <cmath>
#include <limits>

#include "doctest.h"
#include "ransim/bounds.hpp"
#include "ransim/chain.hpp"
#include "ransim/rng.hpp"

using namespace ransim;

namespace {

// Independent crossing solver: doubling search plus bisection on the integral.
double crossing_reference(const PiecewisePower& p, double start, double work) {
  double hi = start + 1.0;
  while (p.integral(start, hi) < work && hi - start < 1e12) {
    hi = start + (hi - start) * 2.0;
  }
  if (p.integral(start, hi) < work) return std::numeric_limits<double>::infinity();
  double lo = start;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (p.integral(start, mid) >= work) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("update-window time: pinned values and shape") {
  CHECK(t_of_r({1.0}, 1) == 4.0);
  CHECK(t_of_r({1.0, 1.0, 1.0, 1.0, 1.0}, 5) == 4.0);
  CHECK(t_of_r({1.0, 2.0}, 2) == 2.0 * ((2.0 / 1.5) * 2.0));
  CHECK(t_of_r({4.0, 1.0, 2.0}, 5) == t_of_r({1.0, 2.0, 4.0}, 5));

  // For huge windows the whole pool is worth using: t(R)/R -> 2 / h_n.
  const double h3 = 1.0 + 0.5 + 0.25;
  const double big = 1e9;
  const double ratio = t_of_r({1.0, 2.0, 4.0}, static_cast<std::int64_t>(big)) / big;
  CHECK(ratio == doctest::Approx(2.0 / h3).epsilon(1e-6));

  // Windows never get cheaper as they grow.
  double prev = 0.0;
  for (std::int64_t r = 1; r <= 64; r *= 2) {
    const double t = t_of_r({0.3, 1.0, 2.5}, r);
    CHECK(t > prev);
    prev = t;
  }

  CHECK_THROWS_AS(t_of_r({}, 1), std::invalid_argument);
  CHECK_THROWS_AS(t_of_r({1.0}, 0), std::invalid_argument);
  CHECK_THROWS_AS(t_of_r({0.0}, 1), std::invalid_argument);
}

TEST_CASE("fixed-speed upper bound: noiseless pin, scaling, regime") {
  const double eps = 0.1;
  const double expect = 2.0 * (78.0 / (eps * eps) + 76.0 / (eps * eps));
  CHECK(fixed_time_upper_bound(1.0, 1.0, 0.0, 2.0, eps, {1.0}) ==
        doctest::Approx(expect).epsilon(1e-12));

  // Doubling every duration exactly doubles the bound.
  const double one = fixed_time_upper_bound(2.0, 0.5, 1.0, 2.0, 0.01, {1.0, 2.0, 5.0});
  const double two = fixed_time_upper_bound(2.0, 0.5, 1.0, 2.0, 0.01, {2.0, 4.0, 10.0});
  CHECK(two == 2.0 * one);

  // At p=2 the noise-driven term scales with sigma^2.
  const double c = 2.0 * 76.0 / (eps * eps);
  const double u1 = fixed_time_upper_bound(1.0, 1.0, 0.5, 2.0, eps, {1.0});
  const double u2 = fixed_time_upper_bound(1.0, 1.0, 1.0, 2.0, eps, {1.0});
  CHECK(u2 - c == doctest::Approx(4.0 * (u1 - c)).epsilon(1e-12));

  CHECK_THROWS_AS(fixed_time_upper_bound(1.0, 1.0, 0.0, 2.0, 1.5, {1.0}),
                  std::invalid_argument);
  CHECK_NOTHROW(fixed_time_upper_bound(1.0, 1.0, 0.0, 2.0, std::sqrt(2.0), {1.0}));
}

TEST_CASE("fixed-speed lower bound: pinned value and recipe consistency") {
  CHECK(fixed_time_lower_bound_raw({1.0}, 1.0, 4) == 0.10890440162000455);

  // Noiseless recipe at a length-4 chain reproduces the raw value.
  const double eps = std::sqrt(1.0 / (29184.0 * 4.5));
  CHECK(lower_bound_params(1.0, 1.0, 0.0, 2.0, eps).dim == 4);
  CHECK(fixed_time_lower_bound(1.0, 1.0, 0.0, 2.0, eps, {1.0}) ==
        fixed_time_lower_bound_raw({1.0}, 1.0, 4));

  // A rarer coin or a longer chain can only slow revelation down.
  CHECK(fixed_time_lower_bound_raw({1.0}, 0.1, 4) >
        fixed_time_lower_bound_raw({1.0}, 0.9, 4));
  CHECK(fixed_time_lower_bound_raw({1.0}, 0.5, 40) >
        fixed_time_lower_bound_raw({1.0}, 0.5, 4));

  CHECK_THROWS_AS(fixed_time_lower_bound(1.0, 1.0, 0.0, 2.0, 0.1, {1.0}),
                  std::invalid_argument);  // accuracy outside the chain regime
  CHECK_THROWS_AS(fixed_time_lower_bound_raw({1.0}, 0.0, 4), std::invalid_argument);
  CHECK_THROWS_AS(fixed_time_lower_bound_raw({1.0}, 0.5, 1), std::invalid_argument);
}

TEST_CASE("lower bound never exceeds the upper bound in the shared regime") {
  RngStream rng(31, 0);
  for (int rep = 0; rep < 100; ++rep) {
    const double L = 0.5 + 3.5 * rng.uniform();
    const double delta = 0.5 + 3.5 * rng.uniform();
    const double sigma = 2.0 * rng.uniform();
    const double p = 1.2 + 0.8 * rng.uniform();
    const double eps_max = std::sqrt(L * delta / 87552.0);
    const double eps = eps_max * (0.2 + 0.8 * rng.uniform());
    std::vector<double> taus;
    const int n = 1 + static_cast<int>(rng.uniform() * 4);
    for (int i = 0; i < n; ++i) taus.push_back(0.1 + 1.9 * rng.uniform());
    const double lb = fixed_time_lower_bound(L, delta, sigma, p, eps, taus);
    const double ub = fixed_time_upper_bound(L, delta, sigma, p, eps, taus);
    CHECK(lb > 0.0);
    CHECK(lb <= ub);
  }
}

TEST_CASE("epoch counts") {
  CHECK(universal_epoch_count(1.0, 1.0, 0.1) == 7400);
  CHECK(universal_lower_epoch_count(1.0, 1.0, std::sqrt(1.0 / (29184.0 * 4.5))) == 4);
  CHECK_THROWS_AS(universal_epoch_count(0.0, 1.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(universal_epoch_count(1.0, 1.0, 1e-12), std::invalid_argument);
}

TEST_CASE("epoch recursion: constant pools solve in closed form") {
  std::vector<PiecewisePower> four(4, PiecewisePower({0.0}, {1.0}));
  auto rec = universal_time_recursion(four, 1, 5);
  REQUIRE(rec.times.size() == 5);
  for (int k = 1; k <= 5; ++k) CHECK(rec.times[static_cast<std::size_t>(k - 1)] == k);
  CHECK(rec.t_final == 5.0);
  CHECK(rec.blocked_at == -1);

  // Doubling the power halves every epoch time.
  std::vector<PiecewisePower> fast(4, PiecewisePower({0.0}, {2.0}));
  auto rec2 = universal_time_recursion(fast, 1, 5);
  for (std::size_t i = 0; i < 5; ++i) CHECK(rec2.times[i] == 0.5 * rec.times[i]);

  // Lifted equal fixed speeds: each epoch takes 4 R tau / n.
  std::vector<PiecewisePower> lifted(3, WorkerProfile::fixed(0.5).lift());
  auto rec3 = universal_time_recursion(lifted, 2, 3);
  CHECK(rec3.times[0] == doctest::Approx(4.0 * 2.0 * 0.5 / 3.0).epsilon(1e-14));
  CHECK(rec3.t_final == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("epoch recursion: segment walking and starvation") {
  // Power 1 until t=2 then 3: the first epoch needs 4 units.
  std::vector<PiecewisePower> one{PiecewisePower({0.0, 2.0}, {1.0, 3.0})};
  auto rec = universal_time_recursion(one, 1, 3);
  CHECK(rec.times[0] == doctest::Approx(2.0 + 2.0 / 3.0).epsilon(1e-14));
  CHECK(rec.times[1] == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(rec.times[2] == doctest::Approx(4.0 + 4.0 / 3.0).epsilon(1e-14));

  // Power that dies never finishes the first epoch.
  std::vector<PiecewisePower> dying{PiecewisePower({0.0, 1.0}, {1.0, 0.0})};
  auto blocked = universal_time_recursion(dying, 1, 3);
  CHECK(blocked.blocked_at == 1);
  CHECK(std::isinf(blocked.t_final));
  CHECK(blocked.times.empty());

  // Dying after the second epoch blocks the third.
  std::vector<PiecewisePower> partial{PiecewisePower({0.0, 8.0}, {1.0, 0.0})};
  auto mid = universal_time_recursion(partial, 1, 3);
  CHECK(mid.blocked_at == 3);
  CHECK(mid.times.size() == 2);
  CHECK(mid.times[0] == 4.0);
  CHECK(mid.times[1] == 8.0);

  // The storage cap never changes the final time.
  std::vector<PiecewisePower> pool(2, PiecewisePower({0.0, 3.0}, {0.7, 1.9}));
  auto full = universal_time_recursion(pool, 3, 40);
  auto capped = universal_time_recursion(pool, 3, 40, 4);
  CHECK(capped.times.size() == 4);
  CHECK(capped.t_final == full.t_final);
  for (std::size_t i = 0; i < 4; ++i) CHECK(capped.times[i] == full.times[i]);

  CHECK_THROWS_AS(universal_time_recursion(one, 0, 3), std::invalid_argument);
  CHECK_THROWS_AS(universal_time_recursion(one, 1, 0), std::invalid_argument);
}

TEST_CASE("epoch recursion matches an independent integral solver") {
  RngStream rng(99, 0);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<PiecewisePower> profiles;
    const int n = 1 + static_cast<int>(rng.uniform() * 3);
    for (int w = 0; w < n; ++w) {
      std::vector<double> knots{0.0}, rates;
      const int segs = 1 + static_cast<int>(rng.uniform() * 4);
      for (int s = 0; s < segs; ++s) {
        if (s > 0) knots.push_back(knots.back() + 0.2 + rng.uniform());
        rates.push_back(rng.uniform() < 0.2 ? 0.0 : 0.3 + 2.0 * rng.uniform());
      }
      profiles.emplace_back(knots, rates);
    }
    const std::int64_t R = 1 + static_cast<std::int64_t>(rng.uniform() * 3);
    auto rec = universal_time_recursion(profiles, R, 5);
    const PiecewisePower merged = merge_total_power(profiles);
    double prev = 0.0;
    for (std::size_t k = 0; k < rec.times.size(); ++k) {
      const double ref = crossing_reference(merged, prev, 4.0 * static_cast<double>(R));
      REQUIRE(std::isfinite(ref));
      CHECK(rec.times[k] == doctest::Approx(ref).epsilon(1e-8));
      prev = rec.times[k];
    }
    if (rec.blocked_at != -1) {
      CHECK(std::isinf(
          crossing_reference(merged, prev, 4.0 * static_cast<double>(R))));
    }
  }
}

TEST_CASE("universal floor: chain recipe drives the epoch count and target") {
  // Noiseless, chain length 4: one epoch of one gradient on a unit-power pool.
  const double eps4 = std::sqrt(1.0 / (29184.0 * 4.5));
  std::vector<PiecewisePower> unit{PiecewisePower({0.0}, {1.0})};
  auto lb = universal_lower_bound(unit, 1.0, 1.0, 0.0, 2.0, eps4);
  CHECK(lb.k_tilde == 1);
  CHECK(lb.epoch_target == 1);
  CHECK(lb.gate_prob == 1.0);
  CHECK(lb.time == 1.0);

  // Chain length 10 over two unit workers: 4 epochs at half a second each.
  const double eps10 = std::sqrt(1.0 / (29184.0 * 10.5));
  std::vector<PiecewisePower> two(2, PiecewisePower({0.0}, {1.0}));
  auto lb10 = universal_lower_bound(two, 1.0, 1.0, 0.0, 2.0, eps10);
  CHECK(lb10.k_tilde == 4);
  CHECK(lb10.time == 2.0);

  // A rare coin inflates the per-epoch gradient target to ceil(1/(4q)).
  const double sigma = 92.0 * std::sqrt(2.0) * eps10 * 10.0;
  auto rare = universal_lower_bound(unit, 1.0, 1.0, sigma, 2.0, eps10);
  CHECK(rare.gate_prob == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(rare.epoch_target == 25);
  CHECK(rare.time == doctest::Approx(4.0 * 25.0).epsilon(1e-12));

  // A three-link chain is too short to force any epoch at all.
  const double eps3 = std::sqrt(1.0 / (29184.0 * 3.5));
  auto vac = universal_lower_bound(unit, 1.0, 1.0, 0.0, 2.0, eps3);
  CHECK(vac.k_tilde == 0);
  CHECK(vac.time == 0.0);
  CHECK(vac.recursion.times.empty());
}

TEST_CASE("bounds report assembles every calculator") {
  auto r = make_bounds_report(1.0, 1.0, 1.0, 2.0, 0.05, {2.0, 1.0});
  CHECK(r.taus == std::vector<double>{1.0, 2.0});
  CHECK(r.theory.alpha == doctest::Approx(0.05 * 0.05 / 72.0).epsilon(1e-12));
  CHECK(r.t_at_cut == t_of_r({1.0, 2.0}, r.theory.delay_cut));
  CHECK(r.upper_in_regime);
  CHECK(r.upper_fixed == fixed_time_upper_bound(1.0, 1.0, 1.0, 2.0, 0.05, {1.0, 2.0}));
  CHECK_FALSE(r.lower_in_regime);  // 0.05 is far above sqrt(L delta / 87552)
  CHECK(std::isnan(r.lower_fixed));
  CHECK(r.universal_lb.k_tilde == 0);
  CHECK(r.epochs == universal_epoch_count(1.0, 1.0, 0.05));
  CHECK(r.recursion.times.size() == 64);  // default storage cap
  // Constant merged power 1.5: epoch ends are evenly spaced.
  const double step = 4.0 * static_cast<double>(r.theory.delay_cut) / 1.5;
  CHECK(r.recursion.times[0] == doctest::Approx(step).epsilon(1e-12));
  CHECK(r.recursion.t_final ==
        doctest::Approx(step * static_cast<double>(r.epochs)).epsilon(1e-9));

  // In the fine-accuracy regime the lower side fills in too.
  const double eps = std::sqrt(1.0 / (29184.0 * 10.5));
  auto fine = make_bounds_report(1.0, 1.0, 0.0, 2.0, eps, {1.0});
  CHECK(fine.lower_in_regime);
  CHECK(fine.lower_fixed == fixed_time_lower_bound(1.0, 1.0, 0.0, 2.0, eps, {1.0}));
  CHECK(fine.universal_lb.k_tilde == 4);
  CHECK(fine.lower_fixed <= fine.upper_fixed);
}
