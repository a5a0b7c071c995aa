#include <cmath>

#include "doctest.h"
#include "ransim/chain.hpp"
#include "support/quadrature.hpp"

using namespace ransim;

namespace {

// Independent term-by-term reference: quadrature tail integral, direct step.
double psi_ref(double t) {
  if (t <= 0.5) return 0.0;
  return std::exp(1.0 - std::pow(2.0 * t - 1.0, -2.0));
}

double tail_ref(double t) {
  if (t <= -40.0) return 0.0;
  return testsupport::integrate(
      [](double s) { return std::sqrt(std::exp(1.0)) * std::exp(-0.5 * s * s); },
      -40.0, t, 1e-14);
}

double chain_value_ref(const Vec& u) {
  double h = -psi_ref(1.0) * tail_ref(u[0]);
  for (std::size_t i = 1; i < u.size(); ++i) {
    h += psi_ref(-u[i - 1]) * tail_ref(-u[i]) - psi_ref(u[i - 1]) * tail_ref(u[i]);
  }
  return h;
}

}  // namespace

TEST_CASE("progress measure") {
  CHECK(prog_above({}, 0.0) == 0);
  CHECK(prog_above({0.0, 0.0, 0.0}, 0.0) == 0);
  CHECK(prog_above({0.6, 0.0, 0.7, 0.0}, 0.5) == 3);
  CHECK(prog_above({0.6, 0.0, 0.7, 0.0}, 0.0) == 3);
  CHECK(prog_above({0.1, 0.2, 0.3}, 0.0) == 3);
  CHECK(prog_above({1.0, 1.0}, 1.0) == 0);  // strictly above only
  CHECK(prog_above({-2.0, 0.0}, 1.0) == 1);
}

TEST_CASE("chain value pinned at the origin") {
  ZeroChain c(3);
  CHECK(c.value({0.0, 0.0, 0.0}) ==
        doctest::Approx(-2.0663656770612464).epsilon(1e-13));
}

TEST_CASE("chain value matches term-by-term quadrature reference") {
  ZeroChain c(6);
  RngStream rng(101, 0);
  Vec u(6);
  for (int rep = 0; rep < 40; ++rep) {
    for (double& v : u) v = 4.0 * rng.uniform() - 2.0;
    CHECK(std::fabs(c.value(u) - chain_value_ref(u)) < 1e-10);
  }
}

TEST_CASE("chain gradient pinned at the origin") {
  ZeroChain c(5);
  Vec g;
  c.grad({0.0, 0.0, 0.0, 0.0, 0.0}, g);
  CHECK(g[0] == doctest::Approx(-1.6487212707001282).epsilon(1e-15));
  for (std::size_t j = 1; j < 5; ++j) CHECK(g[j] == 0.0);
}

TEST_CASE("chain gradient matches central finite differences") {
  const std::size_t d = 10;
  ZeroChain c(d);
  RngStream rng(102, 0);
  Vec u(d), g, up, um;
  for (int rep = 0; rep < 1000; ++rep) {
    for (double& v : u) v = 4.0 * rng.uniform() - 2.0;
    c.grad(u, g);
    double err2 = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      up = u;
      um = u;
      const double h = 1e-6;
      up[j] += h;
      um[j] -= h;
      const double fd = (c.value(up) - c.value(um)) / (2.0 * h);
      err2 += (fd - g[j]) * (fd - g[j]);
    }
    CHECK(std::sqrt(err2) <= 1e-5 * std::max(1.0, norm2(g)));
  }
}

TEST_CASE("chain gradient structure on random points") {
  const std::size_t d = 10;
  ZeroChain c(d);
  RngStream rng(103, 0);
  Vec u(d), g;
  for (int rep = 0; rep < 2000; ++rep) {
    for (double& v : u) v = 4.0 * rng.uniform() - 2.0;
    c.grad(u, g);

    // Bounded in the sup norm.
    CHECK(linf_norm(g) <= 23.0);

    // Gradient support runs at most one link past the half-threshold support.
    CHECK(prog_above(g, 1e-14) <= prog_above(u, 0.5) + 1);

    // Until the last link is crossed, the gradient stays large.
    if (prog_above(u, 1.0) < d) {
      CHECK(norm2(g) >= 1.0);
    }
  }
}

TEST_CASE("chain gradient is exactly zero past the frontier") {
  const std::size_t d = 8;
  ZeroChain c(d);
  Vec u(d, 0.0), g;
  u[0] = 0.9;
  u[1] = -0.7;
  u[2] = 0.4;  // support ends at 3, half-threshold support at 2
  c.grad(u, g);
  for (std::size_t j = 4; j < d; ++j) CHECK(g[j] == 0.0);
}

TEST_CASE("scaled chain: scaling identity and smoothness witness") {
  const std::size_t d = 6;
  const double L = 3.0, lambda = 0.25;
  ChainProblem p(d, L, lambda);
  ZeroChain raw(d);
  RngStream rng(104, 0);
  Vec u(d), x(d), gs, gr;
  for (int rep = 0; rep < 200; ++rep) {
    for (std::size_t i = 0; i < d; ++i) {
      u[i] = 4.0 * rng.uniform() - 2.0;
      x[i] = lambda * u[i];
    }
    p.grad(x, gs);
    raw.grad(u, gr);
    for (std::size_t i = 0; i < d; ++i) {
      CHECK(gs[i] == doctest::Approx(L * lambda / 152.0 * gr[i]).epsilon(1e-12));
    }
    CHECK(p.value(x) ==
          doctest::Approx(L * lambda * lambda / 152.0 * raw.value(u)).epsilon(1e-11));
  }

  Vec y(d), gx, gy;
  for (int rep = 0; rep < 500; ++rep) {
    for (std::size_t i = 0; i < d; ++i) {
      x[i] = lambda * (4.0 * rng.uniform() - 2.0);
      y[i] = lambda * (4.0 * rng.uniform() - 2.0);
    }
    p.grad(x, gx);
    p.grad(y, gy);
    CHECK(dist2(gx, gy) <= L * dist2(x, y) * (1.0 + 1e-10));
  }
}

TEST_CASE("scaled chain keeps a gradient floor before the last link") {
  const double L = 2.0, eps = 1e-3;
  const double lambda = 608.0 * eps / L;
  const std::size_t d = 7;
  ChainProblem p(d, L, lambda);
  RngStream rng(105, 0);
  Vec x(d), g;
  for (int rep = 0; rep < 500; ++rep) {
    for (std::size_t i = 0; i + 1 < d; ++i) x[i] = lambda * (4.0 * rng.uniform() - 2.0);
    x[d - 1] = 0.0;  // last link not crossed
    p.grad(x, g);
    // L*lambda/152 = 4*eps by the recipe's constants.
    CHECK(norm2(g) >= 4.0 * eps * (1.0 - 1e-12));
  }
}

TEST_CASE("lower-bound parameter recipe") {
  // Unit length scale drops out at eps = 1/608.
  auto p1 = lower_bound_params(1.0, 1.0, 1.0, 2.0, 1.0 / 608.0);
  CHECK(p1.lambda == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(p1.dim == 12);  // floor(369664 / 29184)
  const double q_ref = std::pow(92.0 * std::sqrt(2.0) / 608.0, 2.0);
  CHECK(p1.gate_prob == doctest::Approx(q_ref).epsilon(1e-12));

  // Boundary accuracy keeps exactly three links.
  const double eps_b = std::sqrt(1.0 / 87552.0);
  CHECK(lower_bound_params(1.0, 1.0, 1.0, 2.0, eps_b).dim == 3);
  CHECK_THROWS_AS(lower_bound_params(1.0, 1.0, 1.0, 2.0, eps_b * 1.01),
                  std::invalid_argument);

  // Noiseless: the coin is always heads.
  CHECK(lower_bound_params(1.0, 1.0, 0.0, 2.0, 1e-3).gate_prob == 1.0);

  // Large sigma pushes the coin bias below 1.
  auto p2 = lower_bound_params(1.0, 1.0, 5.0, 1.5, 1e-3);
  CHECK(p2.gate_prob < 1.0);
  CHECK(p2.gate_prob > 0.0);

  CHECK_THROWS_AS(lower_bound_params(1.0, 1.0, 1.0, 1.0, 1e-3),
                  std::invalid_argument);
  CHECK_THROWS_AS(lower_bound_params(1.0, 1.0, 1.0, 2.5, 1e-3),
                  std::invalid_argument);
}

TEST_CASE("gated oracle: full-bias coin reproduces the exact gradient") {
  ChainProblem p(6, 1.0, 0.5);
  GatedOracle o(p, 1.0, RngStream(106, 0));
  RngStream rng(107, 0);
  Vec x(6), s, g;
  for (int rep = 0; rep < 100; ++rep) {
    for (double& v : x) v = rng.uniform() - 0.5;
    o.sample(x, s);
    p.grad(x, g);
    for (std::size_t i = 0; i < 6; ++i) CHECK(s[i] == g[i]);
  }
}

TEST_CASE("gated oracle: at most one coordinate differs, right after the support") {
  ChainProblem p(8, 1.0, 1.0);
  GatedOracle o(p, 0.3, RngStream(108, 0));
  RngStream rng(109, 0);
  Vec x(8, 0.0), s, g;
  for (int rep = 0; rep < 2000; ++rep) {
    const std::size_t support = rep % 8;
    for (std::size_t i = 0; i < 8; ++i) {
      x[i] = i < support ? (2.0 * rng.uniform() - 1.0) * 1.5 + 0.01 : 0.0;
    }
    const std::size_t prog = prog_above(x, 0.0);
    o.sample(x, s);
    p.grad(x, g);
    std::size_t differing = 0, where = 0;
    for (std::size_t i = 0; i < 8; ++i) {
      if (s[i] != g[i]) {
        ++differing;
        where = i + 1;
      }
    }
    CHECK(differing <= 1);
    if (differing == 1) CHECK(where == prog + 1);
  }
}

TEST_CASE("gated oracle is unbiased at a fixed point") {
  ChainProblem p(6, 1.0, 1.0);
  GatedOracle o(p, 0.2, RngStream(110, 0));
  Vec x = {0.9, -0.8, 0.0, 0.0, 0.0, 0.0};
  Vec g, s, mean(6, 0.0);
  p.grad(x, g);
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    o.sample(x, s);
    for (std::size_t j = 0; j < 6; ++j) mean[j] += s[j] - g[j];
  }
  // Noise only at the gated frontier coordinate; sd there is O(|g|/sqrt(q)).
  for (std::size_t j = 0; j < 6; ++j) {
    CHECK(std::fabs(mean[j] / n) < 3.0 * linf_norm(g) / std::sqrt(0.2 * n));
  }
}

TEST_CASE("gated oracle p-th moment certification, quick version") {
  const double L = 1.0, delta = 1.0, sigma = 1.0, p_mom = 2.0, eps = 1e-3;
  auto lb = lower_bound_params(L, delta, sigma, p_mom, eps);
  ChainProblem prob(lb.dim, L, lb.lambda);
  GatedOracle oracle(prob, lb.gate_prob, RngStream(111, 0));
  RngStream rng(112, 0);
  Vec x(lb.dim), s, g;
  for (int pt = 0; pt < 20; ++pt) {
    for (double& v : x) v = lb.lambda * (4.0 * rng.uniform() - 2.0);
    prob.grad(x, g);
    double acc = 0.0;
    const int n = 2000;
    for (int i = 0; i < n; ++i) {
      oracle.sample(x, s);
      acc += std::pow(dist2(s, g), p_mom);
    }
    CHECK(acc / n <= std::pow(sigma, p_mom) * 1.1);
  }
}
