#include "ransim/selfcheck.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <utility>

#include "ransim/bounds.hpp"
#include "ransim/chain.hpp"
#include "ransim/config.hpp"
#include "ransim/csvio.hpp"
#include "ransim/engine.hpp"
#include "ransim/policies.hpp"
#include "ransim/problem.hpp"
#include "ransim/rng.hpp"
#include "ransim/runner.hpp"
#include "ransim/special.hpp"
#include "ransim/workers.hpp"

namespace ransim {
namespace {

struct Scale {
  std::size_t mc = 0;      // large Monte-Carlo sample count
  std::size_t points = 0;  // finite-difference / property sample points
  std::size_t reps = 0;    // repetitions of randomized scenarios
};

using Verdict = std::pair<bool, std::string>;
using CheckFn = std::function<Verdict(const Scale&)>;

std::string num(double v) {
  std::ostringstream ss;
  ss << std::setprecision(6) << v;
  return ss.str();
}

Verdict good(const std::string& detail) { return {true, detail}; }
Verdict bad(const std::string& detail) { return {false, detail}; }

double uniform_in(RngStream& rng, double lo, double hi) {
  return lo + (hi - lo) * rng.uniform();
}

QuadraticProblem identity_quadratic(std::size_t d) {
  std::vector<double> a(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) a[i * d + i] = 1.0;
  return QuadraticProblem::from_dense(std::move(a), Vec(d, 0.0));
}

std::vector<std::unique_ptr<GradientOracle>> gaussian_oracles(
    const Problem& p, double scale, std::size_t n, std::uint64_t seed) {
  std::vector<std::unique_ptr<GradientOracle>> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(make_additive_oracle(
        p, NoiseModel::gaussian(scale),
        RngStream(seed, 3 + 2 * static_cast<std::uint64_t>(i))));
  }
  return out;
}

std::vector<std::unique_ptr<GradientOracle>> exact_oracles(const Problem& p,
                                                           std::size_t n) {
  std::vector<std::unique_ptr<GradientOracle>> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(std::make_unique<ExactOracle>(p));
  return out;
}

GradientMessage fresh_message(const ServerPolicy& policy, Vec grad) {
  GradientMessage m;
  m.grad = std::move(grad);
  m.snapshot_round = policy.round();
  m.worker_id = 0;
  m.completion_time = 0.0;
  return m;
}

// ---- RNG ----

Verdict check_rng_replay(const Scale&) {
  RngStream a(42, 7), b(42, 7), c(42, 8);
  bool same = true, differs = false;
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.next_u64();
    same = same && (x == b.next_u64());
    differs = differs || (x != c.next_u64());
  }
  if (!same) return bad("stream (42,7) did not replay identically");
  if (!differs) return bad("streams 7 and 8 produced the same sequence");
  return good("1000 draws replayed; sibling stream independent");
}

Verdict check_rng_normal_moments(const Scale& s) {
  RngStream rng(7, 1);
  const auto n = static_cast<double>(s.mc);
  double sum = 0.0, sumsq = 0.0;
  for (std::size_t i = 0; i < s.mc; ++i) {
    const double x = rng.normal();
    sum += x;
    sumsq += x * x;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  const double mean_tol = 4.5 / std::sqrt(n);
  const double var_tol = 4.5 * std::sqrt(2.0 / n);
  if (std::fabs(mean) > mean_tol) return bad("mean " + num(mean));
  if (std::fabs(var - 1.0) > var_tol) return bad("variance " + num(var));
  return good("mean " + num(mean) + ", variance " + num(var));
}

Verdict check_rng_exponential_mean(const Scale& s) {
  RngStream rng(7, 2);
  const double target = 0.02;
  double sum = 0.0;
  for (std::size_t i = 0; i < s.mc; ++i) sum += rng.exponential(target);
  const double mean = sum / static_cast<double>(s.mc);
  const double tol = 4.5 * target / std::sqrt(static_cast<double>(s.mc));
  if (std::fabs(mean - target) > tol) return bad("mean " + num(mean));
  return good("mean " + num(mean) + " vs " + num(target));
}

Verdict check_rng_pareto_floor(const Scale& s) {
  RngStream rng(7, 3);
  const double shape = 3.0, floor = 2.0;
  const double target_mean = shape * floor / (shape - 1.0);  // 3.0
  const double sd = std::sqrt(shape * floor * floor /
                              ((shape - 1.0) * (shape - 1.0) * (shape - 2.0)));
  double sum = 0.0;
  double min_seen = 1e300;
  for (std::size_t i = 0; i < s.mc; ++i) {
    const double x = rng.pareto(shape, floor);
    sum += x;
    min_seen = std::min(min_seen, x);
  }
  const double mean = sum / static_cast<double>(s.mc);
  if (min_seen < floor) return bad("draw below the floor: " + num(min_seen));
  const double tol = 4.5 * sd / std::sqrt(static_cast<double>(s.mc));
  if (std::fabs(mean - target_mean) > tol) return bad("mean " + num(mean));
  return good("floor held, mean " + num(mean));
}

// ---- special functions ----

Verdict check_step_function(const Scale& s) {
  if (psi(0.2) != 0.0 || psi(0.5) != 0.0) return bad("not exactly flat left of 1/2");
  if (psi(1.0) != 1.0) return bad("psi(1) != 1");
  double prev = 0.0;
  for (int i = 1; i <= 40; ++i) {
    const double t = 0.5 + 2.5 * i / 40.0;
    const double v = psi(t);
    if (v < prev) return bad("not increasing at t=" + num(t));
    prev = v;
  }
  const std::size_t pts = std::max<std::size_t>(s.points, 10);
  for (std::size_t i = 0; i < pts; ++i) {
    const double t = 0.56 + 2.4 * static_cast<double>(i) / static_cast<double>(pts);
    const double h = 1e-6;
    const double fd = (psi(t + h) - psi(t - h)) / (2.0 * h);
    const double an = psi_deriv(t);
    if (std::fabs(fd - an) > 1e-5 * std::max(1.0, std::fabs(an))) {
      return bad("derivative mismatch at t=" + num(t));
    }
  }
  return good("flat branch exact, derivative matches differences");
}

Verdict check_tail_integral(const Scale& s) {
  if (!(gauss_tail_integral(-40.0) < 1e-200)) return bad("left limit not ~0");
  if (std::fabs(gauss_tail_integral(40.0) - k_tail_integral_sup) > 1e-12) {
    return bad("right limit misses the supremum");
  }
  double prev = -1.0;
  for (int i = 0; i <= 40; ++i) {
    const double t = -4.0 + 8.0 * i / 40.0;
    const double v = gauss_tail_integral(t);
    if (v <= prev) return bad("not strictly increasing at t=" + num(t));
    prev = v;
  }
  const std::size_t pts = std::max<std::size_t>(s.points, 10);
  for (std::size_t i = 0; i < pts; ++i) {
    const double t = -3.0 + 6.0 * static_cast<double>(i) / static_cast<double>(pts);
    const double h = 1e-6;
    const double fd = (gauss_tail_integral(t + h) - gauss_tail_integral(t - h)) / (2.0 * h);
    const double an = gauss_tail_deriv(t);
    if (std::fabs(fd - an) > 1e-5 * std::max(1.0, std::fabs(an))) {
      return bad("derivative mismatch at t=" + num(t));
    }
  }
  return good("limits, monotonicity and derivative verified");
}

// ---- chain instance ----

Verdict check_chain_gradient_bounded(const Scale& s) {
  ZeroChain chain(10);
  RngStream rng(11, 0);
  Vec u(10), g(10);
  double worst = 0.0;
  for (std::size_t rep = 0; rep < 200 * s.reps; ++rep) {
    for (auto& c : u) c = uniform_in(rng, -2.0, 2.0);
    chain.grad(u, g);
    worst = std::max(worst, linf_norm(g));
    if (linf_norm(g) > 23.0) return bad("sup-norm " + num(linf_norm(g)));
  }
  return good("largest sup-norm seen " + num(worst));
}

Verdict check_chain_gradient_support(const Scale& s) {
  ZeroChain chain(10);
  RngStream rng(11, 1);
  Vec u(10), g(10);
  for (std::size_t rep = 0; rep < 200 * s.reps; ++rep) {
    for (auto& c : u) c = uniform_in(rng, -2.0, 2.0);
    chain.grad(u, g);
    if (prog_above(g, 0.0) > prog_above(u, 0.5) + 1) {
      return bad("gradient support ran ahead of the point's support");
    }
  }
  return good("support never leads by more than one link");
}

Verdict check_chain_gradient_nonzero(const Scale& s) {
  ZeroChain chain(10);
  RngStream rng(11, 2);
  Vec u(10), g(10);
  double weakest = 1e300;
  for (std::size_t rep = 0; rep < 200 * s.reps; ++rep) {
    for (auto& c : u) c = uniform_in(rng, -2.0, 2.0);
    if (prog_above(u, 1.0) >= 10) continue;
    chain.grad(u, g);
    weakest = std::min(weakest, norm2(g));
    if (norm2(g) < 1.0) return bad("norm " + num(norm2(g)) + " before the last link");
  }
  return good("smallest norm before completion " + num(weakest));
}

Verdict check_chain_finite_diff(const Scale& s) {
  ChainProblem p(8, 1.0, 2.0);
  RngStream rng(11, 3);
  Vec u(8), g(8);
  const double lambda = p.length_scale();
  for (std::size_t rep = 0; rep < std::max<std::size_t>(s.points, 8); ++rep) {
    for (auto& c : u) c = uniform_in(rng, -2.0 * lambda, 2.0 * lambda);
    p.grad(u, g);
    for (std::size_t i = 0; i < u.size(); ++i) {
      const double h = 1e-6 * std::max(1.0, std::fabs(u[i]));
      Vec up = u, dn = u;
      up[i] += h;
      dn[i] -= h;
      const double fd = (p.value(up) - p.value(dn)) / (2.0 * h);
      if (std::fabs(fd - g[i]) > 1e-5 * std::max(1.0, norm2(g))) {
        return bad("coordinate " + std::to_string(i) + " fd " + num(fd) +
                   " vs " + num(g[i]));
      }
    }
  }
  return good("analytic gradient matches central differences");
}

Verdict check_chain_recipe(const Scale&) {
  const auto lp = lower_bound_params(1.0, 1.0, 1.0, 2.0, 1e-3);
  if (std::fabs(lp.lambda - 0.608) > 1e-15) return bad("length scale " + num(lp.lambda));
  if (lp.dim != 34) return bad("chain length " + std::to_string(lp.dim));
  if (std::fabs(lp.gate_prob - 0.016928) > 1e-9) return bad("coin bias " + num(lp.gate_prob));
  try {
    lower_bound_params(1.0, 1.0, 1.0, 2.0, 0.1);
    return bad("accepted an accuracy outside the short-chain regime");
  } catch (const std::invalid_argument&) {
  }
  return good("scale 0.608, length 34, bias 0.016928; regime gate enforced");
}

// ---- oracles ----

Verdict check_gated_oracle_unbiased(const Scale& s) {
  ChainProblem p(6, 1.0, 2.0);
  const double q = 0.3;
  GatedOracle oracle(p, q, RngStream(21, 3));
  Vec x = {2.0, 1.8, 0.2, 0.0, 0.0, 0.0};
  Vec exact(6), draw(6);
  p.grad(x, exact);
  const std::size_t n = std::max<std::size_t>(s.mc / 10, 1000);
  Vec mean(6, 0.0), m2(6, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    oracle.sample(x, draw);
    for (std::size_t j = 0; j < 6; ++j) {
      mean[j] += draw[j];
      m2[j] += draw[j] * draw[j];
    }
  }
  for (std::size_t j = 0; j < 6; ++j) {
    mean[j] /= static_cast<double>(n);
    const double var = m2[j] / static_cast<double>(n) - mean[j] * mean[j];
    const double se = std::sqrt(std::max(var, 0.0) / static_cast<double>(n));
    if (std::fabs(mean[j] - exact[j]) > 5.0 * se + 1e-12) {
      return bad("coordinate " + std::to_string(j) + " off by " +
                 num(mean[j] - exact[j]));
    }
  }
  return good(std::to_string(n) + " draws, every coordinate within 5 s.e.");
}

Verdict check_gated_oracle_single_coin(const Scale& s) {
  ChainProblem p(6, 1.0, 2.0);
  const double q = 0.3;
  GatedOracle oracle(p, q, RngStream(21, 5));
  Vec x = {2.0, 1.8, 0.2, 0.0, 0.0, 0.0};
  Vec exact(6), draw(6);
  p.grad(x, exact);
  for (std::size_t rep = 0; rep < 300 * s.reps; ++rep) {
    oracle.sample(x, draw);
    int diffs = 0;
    for (std::size_t j = 0; j < 6; ++j) {
      const double d = std::fabs(draw[j] - exact[j]);
      if (d <= 1e-9 * std::max(1.0, std::fabs(exact[j]))) continue;
      ++diffs;
      const bool zeroed = draw[j] == 0.0;
      const bool boosted =
          std::fabs(draw[j] - exact[j] / q) <= 1e-9 * std::fabs(exact[j] / q);
      if (!zeroed && !boosted) return bad("gated value is neither 0 nor scaled");
    }
    if (diffs > 1) return bad("more than one coordinate gated in a single draw");
  }
  return good("draws differ from the exact gradient in at most one coordinate");
}

Verdict check_quadratic_certificate(const Scale&) {
  const auto p = QuadraticProblem::build(8, 600, 0.05, RngStream(7, 0));
  Vec g(8);
  p.grad(p.x_star(), g);
  if (norm2(g) > 1e-7 * (1.0 + norm2(p.rhs()))) {
    return bad("gradient at the reference minimizer: " + num(norm2(g)));
  }
  RngStream rng(31, 0);
  for (int rep = 0; rep < 20; ++rep) {
    Vec y = p.x_star();
    for (auto& c : y) c += 1e-3 * rng.normal();
    if (p.value(y) < p.f_star() - 1e-12) return bad("found a point below the minimum");
  }
  Vec u(8), v(8), au(8), av(8);
  for (auto& c : u) c = rng.normal();
  for (auto& c : v) c = rng.normal();
  p.matvec(u, au);
  p.matvec(v, av);
  const double uav = dot(u, av), vau = dot(v, au);
  if (std::fabs(uav - vau) > 1e-10 * std::max(1.0, std::fabs(uav))) {
    return bad("matrix not symmetric under the inner product");
  }
  if (p.smoothness() < p.top_eigenvalue_estimate()) {
    return bad("certified smoothness below the power-iteration estimate");
  }
  return good("minimizer, symmetry and smoothness certificates hold");
}

Verdict check_additive_oracle_unbiased(const Scale& s) {
  const auto p = identity_quadratic(5);
  RngStream point_rng(31, 1);
  Vec x(5);
  for (auto& c : x) c = point_rng.normal();
  Vec exact(5), draw(5);
  p.grad(x, exact);
  const std::size_t n = std::max<std::size_t>(s.mc / 10, 1000);
  for (const auto& model :
       {NoiseModel::gaussian(0.7), NoiseModel::pareto(3.0, 1.0)}) {
    auto oracle = make_additive_oracle(p, model, RngStream(31, 11));
    Vec mean(5, 0.0), m2(5, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      oracle->sample(x, draw);
      for (std::size_t j = 0; j < 5; ++j) {
        mean[j] += draw[j];
        m2[j] += draw[j] * draw[j];
      }
    }
    for (std::size_t j = 0; j < 5; ++j) {
      mean[j] /= static_cast<double>(n);
      const double var = m2[j] / static_cast<double>(n) - mean[j] * mean[j];
      const double se = std::sqrt(std::max(var, 0.0) / static_cast<double>(n));
      if (std::fabs(mean[j] - exact[j]) > 5.0 * se + 1e-12) {
        return bad("bias in coordinate " + std::to_string(j));
      }
    }
  }
  return good("gaussian and centered heavy-tail noise both average out");
}

// ---- server policies ----

Verdict check_policy_step_length(const Scale& s) {
  NormalizedMomentumPolicy policy(Vec(3, 0.0), 0.05, 0.9, 1000);
  RngStream rng(41, 0);
  for (std::size_t rep = 0; rep < 100 * s.reps + 100; ++rep) {
    Vec g(3);
    for (auto& c : g) c = rng.normal();
    const Vec before = policy.iterate();
    const auto out = policy.on_gradient(fresh_message(policy, g));
    if (!out.accepted || !out.stepped) return bad("fresh gradient not applied");
    const double len = dist2(before, policy.iterate());
    if (std::fabs(len - 0.05) > 1e-13) return bad("step length " + num(len));
  }
  return good("every applied step moved exactly one step size");
}

Verdict check_policy_discard_rule(const Scale&) {
  NormalizedMomentumPolicy policy(Vec(2, 0.0), 0.1, 0.5, 3);
  RngStream rng(41, 1);
  for (int i = 0; i < 5; ++i) {
    Vec g = {rng.normal(), rng.normal()};
    policy.on_gradient(fresh_message(policy, g));
  }
  const Vec before = policy.iterate();
  const auto round = policy.round();
  GradientMessage stale;
  stale.grad = {1.0, 1.0};
  stale.snapshot_round = round - 3;  // staleness equal to the cut: discard
  const auto dropped = policy.on_gradient(stale);
  if (dropped.accepted) return bad("staleness at the cut was applied");
  if (policy.round() != round || dist2(before, policy.iterate()) != 0.0) {
    return bad("a discarded gradient changed server state");
  }
  GradientMessage usable;
  usable.grad = {1.0, 1.0};
  usable.snapshot_round = round - 2;  // inside the window: apply
  const auto applied = policy.on_gradient(usable);
  if (!applied.accepted || applied.delay != 2) return bad("in-window gradient rejected");
  if (policy.discarded_count() != 1) return bad("discard counter off");
  return good("strict cut at staleness 3, window at 2 accepted");
}

Verdict check_policy_zero_direction(const Scale&) {
  NormalizedMomentumPolicy policy(Vec(2, 0.0), 1.0, 0.5, 1000);
  policy.on_gradient(fresh_message(policy, {4.0, 0.0}));
  policy.on_gradient(fresh_message(policy, {4.0, 0.0}));
  const Vec before = policy.iterate();
  const auto out = policy.on_gradient(fresh_message(policy, {-2.0, 0.0}));
  if (!out.accepted || !out.stepped) return bad("cancelled direction was rejected");
  if (out.step_norm != 0.0) return bad("cancelled direction moved the iterate");
  if (policy.zero_direction_count() != 1) return bad("zero-direction counter off");
  if (policy.round() != 3) return bad("round did not advance on the zero step");
  if (dist2(before, policy.iterate()) != 0.0) return bad("iterate moved on a zero step");
  return good("exact cancellation freezes the iterate but advances the round");
}

// ---- parameter recipes and time calculators ----

Verdict check_recipe_noiseless(const Scale&) {
  const auto t = theory_params(1.0, 1.0, 0.0, 2.0, 0.1);
  if (t.alpha != 1.0 || t.beta != 0.0) return bad("noiseless mixing weight not 1");
  if (std::fabs(t.eta - 0.1 / 24.0) > 1e-18) return bad("step size " + num(t.eta));
  if (t.delay_cut != 1) return bad("delay cut " + std::to_string(t.delay_cut));
  if (t.rounds != 7200) return bad("round budget " + std::to_string(t.rounds));
  return good("alpha 1, beta 0, eta eps/24, cut 1, budget 7200");
}

Verdict check_recipe_noise_scaling(const Scale&) {
  const auto t1 = theory_params(1.0, 1.0, 1.0, 2.0, 0.1);
  const auto t2 = theory_params(1.0, 1.0, 2.0, 2.0, 0.1);
  if (t2.alpha != t1.alpha / 4.0) return bad("doubling sigma did not quarter alpha");
  if (t2.rounds < 3 * t1.rounds) return bad("round budget did not scale with 1/alpha");
  if (std::fabs(t1.beta - (1.0 - t1.alpha)) > 1e-18) return bad("beta is not 1 - alpha");
  return good("variance-regime scaling in sigma verified");
}

Verdict check_window_span_fixture(const Scale&) {
  if (t_of_r({1.0}, 1) != 4.0) return bad("single unit-speed worker span");
  if (std::fabs(t_of_r({1.0, 2.0}, 2) - 16.0 / 3.0) > 1e-12) {
    return bad("two-worker span " + num(t_of_r({1.0, 2.0}, 2)));
  }
  return good("window spans match hand-computed values");
}

Verdict check_upper_bound_fixture(const Scale&) {
  const double u = fixed_time_upper_bound(1.0, 1.0, 0.0, 2.0, 0.1, {1.0});
  if (std::fabs(u - 30800.0) > 1e-12 * 30800.0) return bad("value " + num(u));
  try {
    fixed_time_upper_bound(1.0, 1.0, 0.0, 2.0, 2.0, {1.0});
    return bad("accepted an accuracy coarser than the initial gap allows");
  } catch (const std::invalid_argument&) {
  }
  return good("noiseless single-worker value and regime gate verified");
}

Verdict check_lower_bound_fixture(const Scale&) {
  const double v = fixed_time_lower_bound_raw({1.0}, 1.0, 4);
  if (std::fabs(v - 0.10890440162000455) > 1e-12) return bad("value " + num(v));
  return good("pinned raw value reproduced");
}

Verdict check_bound_order(const Scale& s) {
  RngStream rng(99, 0);
  for (std::size_t rep = 0; rep < 20 * s.reps; ++rep) {
    const double L = uniform_in(rng, 0.5, 2.0);
    const double delta = uniform_in(rng, 0.5, 2.0);
    const double sigma = uniform_in(rng, 0.0, 1.0);
    const double p = uniform_in(rng, 1.1, 2.0);
    const double eps = std::sqrt(L * delta / 87552.0) * uniform_in(rng, 0.05, 0.8);
    std::vector<double> taus;
    const int n = 1 + static_cast<int>(rng.uniform() * 4);
    for (int i = 0; i < n; ++i) taus.push_back(uniform_in(rng, 0.5, 8.0));
    const double lo = fixed_time_lower_bound(L, delta, sigma, p, eps, taus);
    const double hi = fixed_time_upper_bound(L, delta, sigma, p, eps, taus);
    if (!(lo <= hi)) return bad("floor exceeded the ceiling at rep " + std::to_string(rep));
  }
  return good("floor stayed below the ceiling on every sampled tuple");
}

Verdict check_recursion_constant_pool(const Scale&) {
  std::vector<PiecewisePower> pool(4, PiecewisePower({0.0}, {1.0}));
  const auto rec = universal_time_recursion(pool, 4, 5);
  if (rec.blocked_at != -1) return bad("constant pool reported as blocked");
  for (std::size_t k = 0; k < rec.times.size(); ++k) {
    const double want = 4.0 * static_cast<double>(k + 1);
    if (std::fabs(rec.times[k] - want) > 1e-12) {
      return bad("epoch " + std::to_string(k + 1) + " ended at " + num(rec.times[k]));
    }
  }
  if (std::fabs(rec.t_final - 20.0) > 1e-12) return bad("final time " + num(rec.t_final));
  return good("four unit rates finish each epoch in exactly four seconds");
}

Verdict check_recursion_vs_integral(const Scale& s) {
  RngStream rng(99, 1);
  for (std::size_t rep = 0; rep < 5 * s.reps + 5; ++rep) {
    std::vector<PiecewisePower> profiles;
    const int n = 1 + static_cast<int>(rng.uniform() * 3);
    for (int i = 0; i < n; ++i) {
      std::vector<double> knots = {0.0};
      std::vector<double> rates = {uniform_in(rng, 0.1, 3.0)};
      const int extra = static_cast<int>(rng.uniform() * 3);
      for (int j = 0; j < extra; ++j) {
        knots.push_back(knots.back() + uniform_in(rng, 0.5, 2.0));
        rates.push_back(uniform_in(rng, 0.1, 3.0));
      }
      profiles.emplace_back(std::move(knots), std::move(rates));
    }
    const std::int64_t R = 1 + static_cast<std::int64_t>(rng.uniform() * 4);
    const auto rec = universal_time_recursion(profiles, R, 4);
    const auto merged = merge_total_power(profiles);
    double start = 0.0;
    for (std::size_t k = 0; k < rec.times.size(); ++k) {
      const double work = 4.0 * static_cast<double>(R);
      double lo = start, hi = std::max(1.0, start * 2.0 + 1.0);
      while (merged.integral(start, hi) < work) hi = hi * 2.0 + 1.0;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (merged.integral(start, mid) >= work ? hi : lo) = mid;
      }
      if (std::fabs(rec.times[k] - hi) > 1e-8 * std::max(1.0, hi)) {
        return bad("epoch " + std::to_string(k + 1) + ": " + num(rec.times[k]) +
                   " vs bisection " + num(hi));
      }
      start = rec.times[k];
    }
  }
  return good("closed-form epoch ends agree with integral bisection");
}

// ---- event loop ----

struct SmallRun {
  RunTrace trace;
};

SmallRun noisy_run(std::uint64_t seed, const std::string& which, double horizon_s) {
  static const QuadraticProblem problem = identity_quadratic(3);
  std::vector<WorkerProfile> workers(6, WorkerProfile::exponential(0.3));
  auto oracles = gaussian_oracles(problem, 0.5, workers.size(), seed);
  std::unique_ptr<ServerPolicy> policy;
  Vec x0 = {1.0, -1.0, 2.0};
  if (which == "ransgdm") {
    policy = std::make_unique<NormalizedMomentumPolicy>(x0, 0.05, 0.9, 8);
  } else if (which == "vanilla_asgd") {
    policy = std::make_unique<VanillaAsgdPolicy>(x0, 0.05);
  } else {
    policy = std::make_unique<BatchCollectPolicy>(x0, 0.05, 3);
  }
  EngineOptions opts;
  opts.record_completions = true;
  opts.record_iterates = true;
  SmallRun r;
  r.trace = simulate(problem, *policy, workers, oracles, Horizon::time(horizon_s),
                     seed, opts);
  return r;
}

Verdict check_engine_replay(const Scale&) {
  const auto a = noisy_run(11, "ransgdm", 20.0);
  const auto b = noisy_run(11, "ransgdm", 20.0);
  if (a.trace.completions.size() != b.trace.completions.size()) {
    return bad("completion counts differ across identical runs");
  }
  for (std::size_t i = 0; i < a.trace.completions.size(); ++i) {
    const auto& x = a.trace.completions[i];
    const auto& y = b.trace.completions[i];
    if (x.time != y.time || x.worker != y.worker ||
        x.snapshot_round != y.snapshot_round || x.accepted != y.accepted) {
      return bad("completion " + std::to_string(i) + " differs");
    }
  }
  if (a.trace.summary.final_gap != b.trace.summary.final_gap) {
    return bad("final gap differs across identical runs");
  }
  const auto c = noisy_run(12, "ransgdm", 20.0);
  if (c.trace.summary.final_gap == a.trace.summary.final_gap &&
      c.trace.completions.size() == a.trace.completions.size()) {
    return bad("changing the seed changed nothing");
  }
  return good("identical seeds replay, sibling seed diverges");
}

Verdict check_engine_tie_order(const Scale&) {
  const auto problem = identity_quadratic(1);
  std::vector<WorkerProfile> workers(2, WorkerProfile::fixed(1.0));
  auto oracles = exact_oracles(problem, 2);
  VanillaAsgdPolicy policy({1.0}, 0.25);
  EngineOptions opts;
  opts.record_completions = true;
  const auto trace =
      simulate(problem, policy, workers, oracles, Horizon::rounds(2), 1, opts);
  if (trace.completions.size() != 2) return bad("expected exactly two deliveries");
  const auto& first = trace.completions[0];
  const auto& second = trace.completions[1];
  if (first.time != 1.0 || second.time != 1.0) return bad("fixed durations drifted");
  if (first.worker != 0 || second.worker != 1) return bad("tie not broken by worker index");
  if (first.round_before != 0 || second.round_before != 1) {
    return bad("deliveries did not serialize");
  }
  if (second.snapshot_round != 0) return bad("second snapshot should predate both steps");
  if (trace.summary.final_gap != 0.125) {
    return bad("final gap " + num(trace.summary.final_gap));
  }
  return good("simultaneous arrivals serialized in worker order");
}

Verdict check_engine_policy_isolation(const Scale&) {
  const auto a = noisy_run(5, "ransgdm", 10.0);
  const auto b = noisy_run(5, "vanilla_asgd", 10.0);
  const auto c = noisy_run(5, "rennala", 10.0);
  const auto timeline = [](const SmallRun& r) {
    std::vector<std::pair<double, int>> t;
    for (const auto& rec : r.trace.completions) t.emplace_back(rec.time, rec.worker);
    return t;
  };
  if (timeline(a) != timeline(b) || timeline(a) != timeline(c)) {
    return bad("the server rule leaked into worker timing");
  }
  return good("completion timelines identical across server rules");
}

Verdict check_engine_work_conservation(const Scale&) {
  const auto r = noisy_run(11, "ransgdm", 20.0).trace.summary;
  if (r.completions != r.accepted + r.discarded) {
    return bad("deliveries " + std::to_string(r.completions) + " != applied " +
               std::to_string(r.accepted) + " + dropped " + std::to_string(r.discarded));
  }
  if (r.final_round != r.accepted) return bad("round counter drifted from accepted count");
  return good("every delivery was either applied or dropped");
}

Verdict check_staleness_window(const Scale&) {
  const auto run = noisy_run(13, "ransgdm", 30.0);
  const double eta = 0.05;
  const std::int64_t cut = 8;
  std::size_t checked = 0;
  for (const auto& rec : run.trace.completions) {
    if (!rec.accepted) continue;
    const std::int64_t delay = rec.round_before - rec.snapshot_round;
    if (delay >= cut) return bad("applied update with staleness at the cut");
    const auto& snap = run.trace.iterates.at(static_cast<std::size_t>(rec.snapshot_round));
    const auto& now = run.trace.iterates.at(static_cast<std::size_t>(rec.round_before));
    if (dist2(snap, now) > eta * static_cast<double>(delay) + 1e-10) {
      return bad("drift exceeded step size times staleness");
    }
    ++checked;
  }
  if (checked < 20) return bad("too few applied updates to certify the window");
  return good(std::to_string(checked) + " applied updates inside the drift window");
}

Verdict check_dyadic_reduction(const Scale&) {
  const auto problem = identity_quadratic(2);
  const std::vector<double> taus = {0.25, 1.0, 8.0};
  std::vector<WorkerProfile> fixed, lifted;
  for (const double t : taus) {
    fixed.push_back(WorkerProfile::fixed(t));
    lifted.push_back(WorkerProfile::universal(WorkerProfile::fixed(t).lift()));
  }
  const auto run = [&](const std::vector<WorkerProfile>& w) {
    auto oracles = exact_oracles(problem, w.size());
    VanillaAsgdPolicy policy({1.0, 1.0}, 0.01);
    EngineOptions opts;
    opts.record_completions = true;
    return simulate(problem, policy, w, oracles, Horizon::rounds(40), 3, opts);
  };
  const auto a = run(fixed), b = run(lifted);
  if (a.completions.size() != b.completions.size()) return bad("delivery counts differ");
  for (std::size_t i = 0; i < a.completions.size(); ++i) {
    if (a.completions[i].time != b.completions[i].time ||
        a.completions[i].worker != b.completions[i].worker) {
      return bad("delivery " + std::to_string(i) + " differs between the two encodings");
    }
  }
  return good("reciprocal-rate schedules replay the fixed-duration run exactly");
}

Verdict check_engine_guard(const Scale&) {
  const auto problem = identity_quadratic(1);
  std::vector<WorkerProfile> workers(1, WorkerProfile::fixed(1.0));
  auto oracles = exact_oracles(problem, 1);
  VanillaAsgdPolicy policy({1.0}, 1e-9);
  EngineOptions opts;
  opts.max_events = 5;
  try {
    simulate(problem, policy, workers, oracles, Horizon::rounds(1000000), 1, opts);
  } catch (const SimGuardError&) {
    return good("runaway loop stopped by the event guard");
  }
  return bad("the event guard never fired");
}

// ---- files and configs ----

Verdict check_trace_bytes_stable(const Scale&) {
  const auto a = noisy_run(17, "ransgdm", 10.0);
  const auto b = noisy_run(17, "ransgdm", 10.0);
  std::ostringstream sa, sb;
  write_trace_csv(sa, a.trace);
  write_trace_csv(sb, b.trace);
  if (sa.str() != sb.str()) return bad("repeated run serialized differently");
  if (sa.str().find("time_s,k,grad_norm,f_gap,accepted,discarded,policy,seed") != 0) {
    return bad("header drifted");
  }
  return good("identical bytes across a repeated run");
}

RunConfig sample_run_config() {
  RunConfig c;
  c.name = "roundtrip";
  c.problem.kind = ProblemConfig::Kind::Quadratic;
  c.problem.dim = 3;
  c.problem.build_seed = 42;
  c.problem.rows = 10;
  c.problem.ridge = 0.5;
  c.problem.noise = NoiseModel::student_t(1.5, 1.0);
  WorkerGroup g1;
  g1.count = 2;
  g1.profile = WorkerProfile::fixed(2.0);
  WorkerGroup g2;
  g2.count = 1;
  g2.profile = WorkerProfile::universal(PiecewisePower({0.0, 1.0}, {1.0, 0.5}));
  c.workers = {g1, g2};
  c.policy.name = "ransgdm";
  c.policy.eta = 0.01;
  c.policy.momentum = 0.9;
  c.policy.delay_cut = 4;
  c.horizon.by_time = true;
  c.horizon.max_time = 2.5;
  c.seed = 9;
  c.x0 = Vec{0.5, -1.0, 2.0};
  return c;
}

Verdict check_config_round_trip(const Scale&) {
  const auto c = sample_run_config();
  const std::string once = serialize_run_config(c);
  const auto parsed = parse_run_config(once);
  const std::string twice = serialize_run_config(parsed);
  if (once != twice) return bad("serialize-parse-serialize changed the text");
  if (parsed.problem.dim != 3 || parsed.workers.size() != 2 ||
      parsed.workers[0].count != 2 || !parsed.x0 || (*parsed.x0)[2] != 2.0 ||
      parsed.policy.delay_cut != 4 || parsed.seed != 9) {
    return bad("a field changed value across the round trip");
  }
  return good("run config text is a fixed point of parse + serialize");
}

Verdict check_sweep_round_trip(const Scale&) {
  SweepConfig s;
  s.base = sample_run_config();
  s.base.policy = PolicyConfig{};
  PolicyConfig a;
  a.name = "vanilla_asgd";
  a.eta = 0.1;
  PolicyConfig b;
  b.name = "rennala";
  b.eta = 0.1;
  b.batch = 3;
  s.policies = {a, b};
  s.seeds = {1, 2};
  s.time_bins = 4;
  const std::string once = serialize_sweep_config(s);
  const auto parsed = parse_sweep_config(once);
  const std::string twice = serialize_sweep_config(parsed);
  if (once != twice) return bad("serialize-parse-serialize changed the text");
  if (parsed.policies.size() != 2 || parsed.seeds != std::vector<std::uint64_t>{1, 2} ||
      parsed.time_bins != 4) {
    return bad("a field changed value across the round trip");
  }
  return good("sweep config text is a fixed point of parse + serialize");
}

Verdict check_bounds_report_pure(const Scale&) {
  const auto a = make_bounds_report(1.0, 1.0, 0.5, 2.0, 0.05, {1.0, 2.0, 4.0});
  const auto b = make_bounds_report(1.0, 1.0, 0.5, 2.0, 0.05, {1.0, 2.0, 4.0});
  std::ostringstream sa, sb;
  write_bounds_csv(sa, a);
  write_bounds_csv(sb, b);
  if (sa.str() != sb.str()) return bad("identical inputs produced different reports");
  return good("report is a pure function of its inputs");
}

struct NamedCheck {
  const char* name;
  CheckFn fn;
};

const NamedCheck kChecks[] = {
    {"rng.replay", check_rng_replay},
    {"rng.normal_moments", check_rng_normal_moments},
    {"rng.exponential_mean", check_rng_exponential_mean},
    {"rng.pareto_floor", check_rng_pareto_floor},
    {"special.step_function", check_step_function},
    {"special.tail_integral", check_tail_integral},
    {"chain.gradient_bounded", check_chain_gradient_bounded},
    {"chain.gradient_support", check_chain_gradient_support},
    {"chain.gradient_nonzero", check_chain_gradient_nonzero},
    {"chain.finite_diff", check_chain_finite_diff},
    {"chain.recipe_fixture", check_chain_recipe},
    {"oracle.gated_unbiased", check_gated_oracle_unbiased},
    {"oracle.gated_single_coin", check_gated_oracle_single_coin},
    {"oracle.additive_unbiased", check_additive_oracle_unbiased},
    {"problem.quadratic_certificate", check_quadratic_certificate},
    {"policy.step_length", check_policy_step_length},
    {"policy.discard_rule", check_policy_discard_rule},
    {"policy.zero_direction", check_policy_zero_direction},
    {"recipe.noiseless_fixture", check_recipe_noiseless},
    {"recipe.noise_scaling", check_recipe_noise_scaling},
    {"bounds.window_span_fixture", check_window_span_fixture},
    {"bounds.upper_fixture", check_upper_bound_fixture},
    {"bounds.lower_fixture", check_lower_bound_fixture},
    {"bounds.order", check_bound_order},
    {"bounds.recursion_constant_pool", check_recursion_constant_pool},
    {"bounds.recursion_vs_integral", check_recursion_vs_integral},
    {"engine.replay", check_engine_replay},
    {"engine.tie_order", check_engine_tie_order},
    {"engine.policy_isolation", check_engine_policy_isolation},
    {"engine.work_conservation", check_engine_work_conservation},
    {"engine.staleness_window", check_staleness_window},
    {"engine.dyadic_reduction", check_dyadic_reduction},
    {"engine.event_guard", check_engine_guard},
    {"files.trace_bytes_stable", check_trace_bytes_stable},
    {"files.config_round_trip", check_config_round_trip},
    {"files.sweep_round_trip", check_sweep_round_trip},
    {"files.bounds_report_pure", check_bounds_report_pure},
};

}  // namespace

std::vector<CheckResult> run_selfchecks(bool full, std::ostream* out) {
  const Scale scale = full ? Scale{1000000, 60, 5} : Scale{200000, 15, 1};
  std::vector<CheckResult> results;
  for (const auto& check : kChecks) {
    CheckResult r;
    r.name = check.name;
    try {
      const auto [ok, detail] = check.fn(scale);
      r.ok = ok;
      r.detail = detail;
    } catch (const std::exception& e) {
      r.ok = false;
      r.detail = std::string("exception: ") + e.what();
    }
    if (out) {
      *out << (r.ok ? "ok   " : "FAIL ") << r.name << "  (" << r.detail << ")\n";
    }
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace ransim
