#include "ransim/runner.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "ransim/chain.hpp"

namespace ransim {

std::unique_ptr<Problem> build_problem(const ProblemConfig& c) {
  if (c.kind == ProblemConfig::Kind::Quadratic) {
    return std::make_unique<QuadraticProblem>(
        QuadraticProblem::build(c.dim, c.rows, c.ridge, RngStream(c.build_seed, 0)));
  }
  return std::make_unique<ChainProblem>(c.dim, c.smoothness, c.length_scale);
}

std::vector<WorkerProfile> expand_workers(const std::vector<WorkerGroup>& groups) {
  if (groups.empty()) throw std::invalid_argument("runner: no worker groups");
  std::vector<WorkerProfile> out;
  for (const WorkerGroup& g : groups) {
    if (g.count < 1) throw std::invalid_argument("runner: worker group count must be >= 1");
    for (std::size_t i = 0; i < g.count; ++i) out.push_back(g.profile);
  }
  return out;
}

ResolvedPolicy resolve_policy(const PolicyConfig& c, std::ostream* warnings) {
  ResolvedPolicy r;
  r.name = c.name;
  std::optional<TheoryParams> tp;
  if (c.theory) {
    tp = theory_params(c.theory->L, c.theory->delta, c.theory->sigma, c.theory->p,
                       c.theory->eps);
  }
  const auto overridden = [&](const char* field) {
    if (tp && warnings) {
      *warnings << "policy " << c.name << ": explicit " << field
                << " overrides the derived value\n";
    }
  };

  if (c.eta) {
    r.eta = *c.eta;
    overridden("eta");
  } else if (tp) {
    r.eta = tp->eta;
  } else {
    throw std::invalid_argument("runner: policy " + c.name + " needs eta or theory");
  }

  if (c.name == "ransgdm") {
    if (c.momentum) {
      r.momentum = *c.momentum;
      overridden("momentum");
    } else if (tp) {
      r.momentum = tp->beta;
    } else {
      throw std::invalid_argument("runner: ransgdm needs momentum or theory");
    }
  }
  if (c.name == "ransgdm" || c.name == "ringmaster_asgd") {
    if (c.delay_cut) {
      r.delay_cut = *c.delay_cut;
      overridden("delay_cut");
    } else if (tp) {
      r.delay_cut = tp->delay_cut;
    } else {
      throw std::invalid_argument("runner: " + c.name + " needs delay_cut or theory");
    }
  }
  if (c.name == "rennala") {
    if (!c.batch) throw std::invalid_argument("runner: rennala needs batch");
    r.batch = *c.batch;
  }
  return r;
}

std::unique_ptr<ServerPolicy> make_policy(const ResolvedPolicy& r, Vec x0) {
  if (r.name == "ransgdm") {
    return std::make_unique<NormalizedMomentumPolicy>(std::move(x0), r.eta,
                                                      r.momentum, r.delay_cut);
  }
  if (r.name == "ringmaster_asgd") {
    return std::make_unique<DelayCutAsgdPolicy>(std::move(x0), r.eta, r.delay_cut);
  }
  if (r.name == "vanilla_asgd") {
    return std::make_unique<VanillaAsgdPolicy>(std::move(x0), r.eta);
  }
  if (r.name == "delay_adaptive_asgd") {
    return std::make_unique<DelayAdaptiveAsgdPolicy>(std::move(x0), r.eta);
  }
  if (r.name == "rennala") {
    return std::make_unique<BatchCollectPolicy>(std::move(x0), r.eta, r.batch);
  }
  throw std::invalid_argument("runner: unknown policy " + r.name);
}

std::vector<std::unique_ptr<GradientOracle>> build_oracles(const Problem& p,
                                                           const ProblemConfig& c,
                                                           std::size_t n_workers,
                                                           std::uint64_t seed) {
  std::vector<std::unique_ptr<GradientOracle>> out;
  out.reserve(n_workers);
  for (std::size_t i = 0; i < n_workers; ++i) {
    RngStream rng(seed, 3 + 2 * static_cast<std::uint64_t>(i));
    if (c.noise.kind == NoiseModel::Kind::BernoulliGate) {
      const auto* chain = dynamic_cast<const ChainProblem*>(&p);
      if (chain == nullptr) {
        throw std::invalid_argument("runner: gate noise requires the chain problem");
      }
      out.push_back(std::make_unique<GatedOracle>(*chain, c.noise.gate_prob, rng));
    } else {
      out.push_back(make_additive_oracle(p, c.noise, rng));
    }
  }
  return out;
}

Horizon make_horizon(const HorizonConfig& h) {
  return h.by_time ? Horizon::time(h.max_time) : Horizon::rounds(h.max_rounds);
}

RunTrace run_single(const RunConfig& c, std::ostream* warnings,
                    const EngineOptions& opts) {
  const auto problem = build_problem(c.problem);
  return run_single(c, *problem, warnings, opts);
}

RunTrace run_single(const RunConfig& c, const Problem& problem,
                    std::ostream* warnings, const EngineOptions& opts) {
  if (problem.dim() != c.problem.dim) {
    throw std::invalid_argument("runner: problem dimension does not match the config");
  }
  const auto workers = expand_workers(c.workers);
  auto oracles = build_oracles(problem, c.problem, workers.size(), c.seed);
  Vec x0 = c.x0 ? *c.x0 : Vec(c.problem.dim, 0.0);
  auto policy = make_policy(resolve_policy(c.policy, warnings), std::move(x0));
  return simulate(problem, *policy, workers, oracles, make_horizon(c.horizon),
                  c.seed, opts);
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile: no values");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile: q must be in [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(h);
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

BinnedRun bin_trace(const RunTrace& trace, double max_time, std::size_t bins) {
  if (trace.rows.empty()) {
    throw std::invalid_argument("bin_trace: the trace has no recorded rows");
  }
  if (!(max_time >= 0.0) || !std::isfinite(max_time)) {
    throw std::invalid_argument("bin_trace: max_time must be finite and >= 0");
  }
  if (bins < 1) throw std::invalid_argument("bin_trace: bins must be >= 1");
  BinnedRun out;
  out.policy = trace.summary.policy;
  out.seed = trace.summary.seed;
  out.time_s.reserve(bins + 1);
  out.f_gap.reserve(bins + 1);
  out.grad_norm.reserve(bins + 1);
  std::size_t i = 0;
  for (std::size_t j = 0; j <= bins; ++j) {
    const double edge =
        max_time * (static_cast<double>(j) / static_cast<double>(bins));
    while (i + 1 < trace.rows.size() && trace.rows[i + 1].time_s <= edge) ++i;
    // Row 0 sits at time 0, so every edge has a predecessor to carry forward.
    out.time_s.push_back(edge);
    out.f_gap.push_back(trace.rows[i].f_gap);
    out.grad_norm.push_back(trace.rows[i].grad_norm);
  }
  return out;
}

SweepResult run_sweep(const SweepConfig& c, const TraceSink& sink,
                      std::ostream* warnings) {
  if (c.policies.empty()) throw std::invalid_argument("runner: sweep has no policies");
  if (c.seeds.empty()) throw std::invalid_argument("runner: sweep has no seeds");
  if (!c.base.horizon.by_time) {
    throw std::invalid_argument("runner: sweep requires a max_time horizon");
  }
  const auto problem = build_problem(c.base.problem);
  const double max_time = c.base.horizon.max_time;
  const std::size_t bins = c.time_bins;

  // Resolve once per policy so override warnings print once, not per seed.
  std::vector<ResolvedPolicy> resolved;
  for (const PolicyConfig& p : c.policies) {
    resolved.push_back(resolve_policy(p, warnings));
  }

  SweepResult result;
  std::vector<BinnedRun> binned;
  binned.reserve(c.policies.size() * c.seeds.size());
  for (std::size_t pi = 0; pi < c.policies.size(); ++pi) {
    for (const std::uint64_t seed : c.seeds) {
      RunConfig rc = c.base;
      rc.policy = c.policies[pi];
      rc.seed = seed;
      Vec x0 = rc.x0 ? *rc.x0 : Vec(rc.problem.dim, 0.0);
      const auto workers = expand_workers(rc.workers);
      auto oracles = build_oracles(*problem, rc.problem, workers.size(), seed);
      auto policy = make_policy(resolved[pi], std::move(x0));
      RunTrace trace = simulate(*problem, *policy, workers, oracles,
                                make_horizon(rc.horizon), seed);
      binned.push_back(bin_trace(trace, max_time, bins));
      result.summaries.push_back(trace.summary);
      if (sink) sink(trace);
    }
  }

  const std::size_t n_seeds = c.seeds.size();
  for (std::size_t pi = 0; pi < c.policies.size(); ++pi) {
    std::vector<double> med(bins + 1), q25(bins + 1), q75(bins + 1);
    for (std::size_t j = 0; j <= bins; ++j) {
      std::vector<double> gaps;
      gaps.reserve(n_seeds);
      for (std::size_t si = 0; si < n_seeds; ++si) {
        gaps.push_back(binned[pi * n_seeds + si].f_gap[j]);
      }
      med[j] = quantile(gaps, 0.5);
      q25[j] = quantile(gaps, 0.25);
      q75[j] = quantile(gaps, 0.75);
    }
    for (std::size_t si = 0; si < n_seeds; ++si) {
      const BinnedRun& b = binned[pi * n_seeds + si];
      for (std::size_t j = 0; j <= bins; ++j) {
        SweepCell cell;
        cell.policy = b.policy;
        cell.seed = b.seed;
        cell.time_bin = j;
        cell.time_s = b.time_s[j];
        cell.f_gap = b.f_gap[j];
        cell.grad_norm = b.grad_norm[j];
        cell.median_f_gap = med[j];
        cell.q25_f_gap = q25[j];
        cell.q75_f_gap = q75[j];
        result.cells.push_back(std::move(cell));
      }
    }
  }
  return result;
}

}  // namespace ransim
