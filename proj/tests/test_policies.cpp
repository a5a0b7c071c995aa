#include <cmath>

#include "doctest.h"
#include "ransim/policies.hpp"
#include "ransim/rng.hpp"

using namespace ransim;

namespace {
GradientMessage msg(Vec g, std::int64_t snapshot_round) {
  GradientMessage m;
  m.grad = std::move(g);
  m.snapshot_round = snapshot_round;
  return m;
}
}  // namespace

TEST_CASE("derived parameters, noiseless regime") {
  auto t = theory_params(1.0, 1.0, 0.0, 2.0, 0.1);
  CHECK(t.alpha == 1.0);
  CHECK(t.beta == 0.0);
  CHECK(t.delay_cut == 1);
  CHECK(t.eta == doctest::Approx(0.1 / 24.0).epsilon(1e-15));
  CHECK(t.rounds == 7200);  // ceil(72 / 0.01)
}

TEST_CASE("derived parameters, clamp boundary is exact") {
  const double sigma = 1.0;
  const double eps = 3.0 * std::pow(2.0, 1.5) * sigma;
  auto t = theory_params(1.0, 100.0, sigma, 2.0, eps);
  CHECK(t.alpha == 1.0);
  CHECK(t.beta == 0.0);
  CHECK(t.delay_cut == 1);
}

TEST_CASE("derived parameters, noise-dominated regime") {
  const double L = 2.0, delta = 3.0, sigma = 1.0, eps = 0.05;
  auto t = theory_params(L, delta, sigma, 2.0, eps);
  const double alpha_ref = std::pow(eps / (3.0 * std::pow(2.0, 1.5) * sigma), 2.0);
  CHECK(t.alpha == doctest::Approx(alpha_ref).epsilon(1e-14));
  CHECK(t.beta == doctest::Approx(1.0 - alpha_ref).epsilon(1e-14));
  CHECK(t.eta == doctest::Approx(alpha_ref * eps / (24.0 * L)).epsilon(1e-14));
  CHECK(t.delay_cut == static_cast<std::int64_t>(std::ceil(1.0 / alpha_ref)));
  CHECK(t.rounds ==
        static_cast<std::int64_t>(std::ceil(72.0 * L * delta / (alpha_ref * eps * eps))));

  // Doubling sigma quarters alpha exactly at p = 2.
  auto t2 = theory_params(L, delta, 2.0 * sigma, 2.0, eps);
  CHECK(t2.alpha == t.alpha / 4.0);

  // p = 1.5 uses the cubic exponent.
  auto t3 = theory_params(L, delta, sigma, 1.5, eps);
  const double a3 = std::pow(eps / (3.0 * std::pow(2.0, 2.5 / 1.5) * sigma), 3.0);
  CHECK(t3.alpha == doctest::Approx(a3).epsilon(1e-14));
}

TEST_CASE("derived parameters reject bad inputs") {
  CHECK_THROWS_AS(theory_params(0.0, 1.0, 1.0, 2.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(theory_params(1.0, 0.0, 1.0, 2.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(theory_params(1.0, 1.0, -1.0, 2.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(theory_params(1.0, 1.0, 1.0, 1.0, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(theory_params(1.0, 1.0, 1.0, 2.1, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(theory_params(1.0, 1.0, 1.0, 2.0, 0.0), std::invalid_argument);
}

TEST_CASE("normalized momentum: fixed step length and warm-up") {
  NormalizedMomentumPolicy p(Vec{0.0, 0.0, 0.0}, 0.5, 0.9, 4);

  // First update ignores the momentum state entirely.
  auto o1 = p.on_gradient(msg({3.0, 4.0, 0.0}, 0));
  CHECK(o1.accepted);
  CHECK(o1.stepped);
  CHECK(o1.delay == 0);
  CHECK(p.round() == 1);
  CHECK(p.iterate()[0] == doctest::Approx(-0.3).epsilon(1e-15));
  CHECK(p.iterate()[1] == doctest::Approx(-0.4).epsilon(1e-15));
  CHECK(p.iterate()[2] == 0.0);
  CHECK(norm2(p.direction_state()) == doctest::Approx(0.1 * 5.0).epsilon(1e-15));

  // Second update still uses the plain gradient.
  Vec before = p.iterate();
  auto o2 = p.on_gradient(msg({0.0, 0.0, 2.0}, 1));
  CHECK(o2.stepped);
  Vec after = p.iterate();
  CHECK(after[2] == doctest::Approx(before[2] - 0.5).epsilon(1e-14));
  CHECK(after[0] == before[0]);

  // From the third update on, the buffer mixes.
  Vec v_before = p.direction_state();
  p.on_gradient(msg({1.0, 0.0, 0.0}, 2));
  const Vec& v = p.direction_state();
  for (int i = 0; i < 3; ++i) {
    CHECK(v[i] == doctest::Approx(0.9 * v_before[i] + 0.1 * (i == 0 ? 1.0 : 0.0))
                      .epsilon(1e-15));
  }
}

TEST_CASE("normalized momentum: every applied step has the same length") {
  NormalizedMomentumPolicy p(Vec(4, 0.0), 0.01, 0.9, 100);
  RngStream rng(200, 0);
  Vec prev = p.iterate(), g(4);
  for (int i = 0; i < 500; ++i) {
    rng.fill_student_t(g, 1.5, 1.0);
    auto o = p.on_gradient(msg(g, p.round()));
    REQUIRE(o.stepped);
    const Vec& cur = p.iterate();
    CHECK(std::fabs(dist2(cur, prev) - 0.01) < 1e-15);
    prev = cur;
  }
}

TEST_CASE("normalized momentum: stale gradients leave all state untouched") {
  NormalizedMomentumPolicy p(Vec{0.0, 0.0}, 0.5, 0.9, 2);
  p.on_gradient(msg({1.0, 0.0}, 0));
  p.on_gradient(msg({1.0, 0.0}, 1));
  p.on_gradient(msg({0.0, 1.0}, 2));
  const Vec x_before = p.iterate();
  const Vec v_before = p.direction_state();
  const auto k_before = p.round();

  auto o = p.on_gradient(msg({100.0, 100.0}, 1));  // staleness 2 >= cut 2
  CHECK_FALSE(o.accepted);
  CHECK_FALSE(o.stepped);
  CHECK(o.delay == 2);
  CHECK(p.round() == k_before);
  CHECK(p.discarded_count() == 1);
  for (int i = 0; i < 2; ++i) {
    CHECK(p.iterate()[i] == x_before[i]);
    CHECK(p.direction_state()[i] == v_before[i]);
  }
}

TEST_CASE("normalized momentum: zero direction advances the round in place") {
  // Exactly representable cancellation: v3 = 0.5*v2 + 0.5*g3 = 0.
  NormalizedMomentumPolicy p(Vec{0.0, 0.0}, 0.25, 0.5, 10);
  p.on_gradient(msg({4.0, 0.0}, 0));
  p.on_gradient(msg({4.0, 0.0}, 1));
  const Vec x_before = p.iterate();
  auto o = p.on_gradient(msg({-2.0, 0.0}, 2));
  CHECK(o.stepped);
  CHECK(o.step_norm == 0.0);
  CHECK(p.round() == 3);
  CHECK(p.zero_direction_count() == 1);
  CHECK(p.iterate()[0] == x_before[0]);

  // Zero first gradient does the same.
  NormalizedMomentumPolicy p2(Vec{1.0, 1.0}, 0.25, 0.5, 10);
  auto oz = p2.on_gradient(msg({0.0, 0.0}, 0));
  CHECK(oz.stepped);
  CHECK(p2.round() == 1);
  CHECK(p2.zero_direction_count() == 1);
  CHECK(p2.iterate()[0] == 1.0);
}

TEST_CASE("future-stamped gradients are a logic error") {
  NormalizedMomentumPolicy p(Vec{0.0}, 0.1, 0.9, 5);
  CHECK_THROWS_AS(p.on_gradient(msg({1.0}, 3)), std::logic_error);
}

TEST_CASE("delay-cut asgd applies raw gradient steps") {
  DelayCutAsgdPolicy p(Vec{0.0, 0.0}, 1.0, 1);
  auto o = p.on_gradient(msg({1.0, 0.0}, 0));
  CHECK(o.stepped);
  CHECK(p.iterate()[0] == -1.0);
  CHECK(p.round() == 1);

  // Any nonzero staleness is dropped at cut 1.
  auto o2 = p.on_gradient(msg({5.0, 5.0}, 0));
  CHECK_FALSE(o2.accepted);
  CHECK(o2.delay == 1);
  CHECK(p.iterate()[0] == -1.0);
  CHECK(p.round() == 1);
}

TEST_CASE("vanilla asgd accepts arbitrarily stale gradients") {
  VanillaAsgdPolicy p(Vec{0.0}, 0.5);
  for (int i = 0; i < 5; ++i) p.on_gradient(msg({1.0}, 0));
  CHECK(p.round() == 5);
  CHECK(p.discarded_count() == 0);
  CHECK(p.iterate()[0] == doctest::Approx(-2.5).epsilon(1e-15));
}

TEST_CASE("delay-adaptive asgd shrinks the step with staleness") {
  DelayAdaptiveAsgdPolicy p(Vec{0.0}, 1.0);
  p.on_gradient(msg({1.0}, 0));  // delay 0, step 1
  CHECK(p.iterate()[0] == -1.0);
  auto o = p.on_gradient(msg({1.0}, 0));  // delay 1, step 1/2
  CHECK(o.delay == 1);
  CHECK(p.iterate()[0] == -1.5);
  p.on_gradient(msg({1.0}, 0));  // delay 2, step 1/3
  CHECK(p.iterate()[0] == doctest::Approx(-1.5 - 1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("batch collect: current-round gradients pool, stale ones drop") {
  BatchCollectPolicy p(Vec{0.0, 0.0}, 1.0, 2);
  auto o1 = p.on_gradient(msg({1.0, 0.0}, 0));
  CHECK(o1.accepted);
  CHECK_FALSE(o1.stepped);
  CHECK(p.buffered_count() == 1);
  CHECK(p.round() == 0);

  auto o2 = p.on_gradient(msg({0.0, 1.0}, 0));
  CHECK(o2.stepped);
  CHECK(p.round() == 1);
  CHECK(p.buffered_count() == 0);
  CHECK(p.iterate()[0] == -0.5);  // x -= (eta/B) * sum
  CHECK(p.iterate()[1] == -0.5);

  // A leftover gradient from round 0 arrives after the flush: discarded.
  auto o3 = p.on_gradient(msg({7.0, 7.0}, 0));
  CHECK_FALSE(o3.accepted);
  CHECK(p.discarded_count() == 1);
  CHECK(p.round() == 1);
  CHECK(p.iterate()[0] == -0.5);

  // Batch of one behaves like plain descent at the current point.
  BatchCollectPolicy p1(Vec{0.0}, 0.5, 1);
  auto o4 = p1.on_gradient(msg({2.0}, 0));
  CHECK(o4.stepped);
  CHECK(p1.iterate()[0] == -1.0);
}

TEST_CASE("policy constructor validation") {
  CHECK_THROWS_AS(NormalizedMomentumPolicy(Vec{0.0}, 0.0, 0.9, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(NormalizedMomentumPolicy(Vec{0.0}, 0.1, 1.0, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(NormalizedMomentumPolicy(Vec{0.0}, 0.1, 0.9, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(DelayCutAsgdPolicy(Vec{0.0}, 0.1, 0), std::invalid_argument);
  CHECK_THROWS_AS(VanillaAsgdPolicy(Vec{0.0}, -0.1), std::invalid_argument);
  CHECK_THROWS_AS(BatchCollectPolicy(Vec{0.0}, 0.1, 0), std::invalid_argument);
}
