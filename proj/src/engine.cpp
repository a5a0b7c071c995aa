#include "ransim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "ransim/rng.hpp"

namespace ransim {

namespace {

constexpr int kGradientArrival = 0;  // processed before requests at equal times
constexpr int kRequestArrival = 1;

struct Event {
  double time = 0.0;
  int kind = kGradientArrival;
  int worker = 0;
  std::uint64_t seq = 0;
};

struct LaterFirst {
  bool operator()(const Event& a, const Event& b) const {
    if (a.time != b.time) return a.time > b.time;
    if (a.kind != b.kind) return a.kind > b.kind;
    if (a.worker != b.worker) return a.worker > b.worker;
    return a.seq > b.seq;
  }
};

double saturating_guard(double estimate) {
  const double events = 64.0 + 16.0 * estimate;
  const double capped = std::min(events, 4e18);
  return std::max(4e6, capped);
}

std::uint64_t default_event_guard(const std::vector<WorkerProfile>& workers,
                                  const Horizon& horizon) {
  const double n = static_cast<double>(workers.size());
  if (horizon.kind == Horizon::Kind::MaxRounds) {
    const double k = static_cast<double>(horizon.max_rounds);
    return static_cast<std::uint64_t>(saturating_guard(2.0 * n * (k + 1.0)));
  }
  // Expected completions within the time budget, per worker.
  double est = 0.0;
  for (const auto& w : workers) {
    switch (w.kind()) {
      case WorkerProfile::Kind::Fixed:
        est += horizon.max_time / w.fixed_tau();
        break;
      case WorkerProfile::Kind::Exponential:
      case WorkerProfile::Kind::ParetoDelay:
        est += horizon.max_time / w.mean();
        break;
      case WorkerProfile::Kind::Universal:
        est += w.power().integral(0.0, horizon.max_time);
        break;
    }
  }
  return static_cast<std::uint64_t>(saturating_guard(2.0 * (est + n)));
}

}  // namespace

Horizon Horizon::time(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw std::invalid_argument("time horizon must be finite and >= 0");
  }
  Horizon h;
  h.kind = Kind::MaxTime;
  h.max_time = t;
  return h;
}

Horizon Horizon::rounds(std::int64_t k) {
  if (k < 0) {
    throw std::invalid_argument("round horizon must be >= 0");
  }
  Horizon h;
  h.kind = Kind::MaxRounds;
  h.max_rounds = k;
  return h;
}

RunTrace simulate(const Problem& problem, ServerPolicy& policy,
                  const std::vector<WorkerProfile>& workers,
                  const std::vector<std::unique_ptr<GradientOracle>>& oracles,
                  Horizon horizon, std::uint64_t seed,
                  const EngineOptions& options) {
  const std::size_t n = workers.size();
  if (n == 0) throw std::invalid_argument("at least one worker is required");
  if (oracles.size() != n) {
    throw std::invalid_argument("need exactly one oracle per worker");
  }
  for (const auto& o : oracles) {
    if (!o) throw std::invalid_argument("oracle list holds a null entry");
  }
  const std::size_t d = problem.dim();
  if (policy.iterate().size() != d) {
    throw std::invalid_argument("policy iterate dimension does not match the problem");
  }

  RunTrace trace;
  RunSummary& s = trace.summary;
  s.policy = std::string(policy.name());
  s.seed = seed;

  Vec diag(d);
  s.initial_gap = problem.value_and_grad(policy.iterate(), diag) - problem.gap_reference();
  s.initial_grad_norm = norm2(diag);

  const bool want_rows = options.record_rows;
  if (want_rows) {
    trace.rows.push_back({0.0, policy.round(), s.initial_grad_norm, s.initial_gap,
                          policy.accepted_count(), policy.discarded_count()});
  }
  if (options.record_iterates) trace.iterates.push_back(policy.iterate());

  const std::uint64_t guard =
      options.max_events != 0 ? options.max_events : default_event_guard(workers, horizon);

  std::priority_queue<Event, std::vector<Event>, LaterFirst> queue;
  std::uint64_t seq = 0;

  std::vector<Vec> snapshot_x(n);
  std::vector<std::int64_t> snapshot_round(n, 0);
  std::vector<RngStream> duration_rng;
  duration_rng.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    duration_rng.emplace_back(seed, 2 + 2 * static_cast<std::uint64_t>(i));
  }

  const bool round_target_met =
      horizon.kind == Horizon::Kind::MaxRounds && policy.round() >= horizon.max_rounds;
  if (!round_target_met) {
    for (std::size_t i = 0; i < n; ++i) {
      queue.push({0.0, kRequestArrival, static_cast<int>(i), seq++});
    }
  }

  double final_time = std::numeric_limits<double>::quiet_NaN();
  if (round_target_met) final_time = 0.0;
  Vec g(d);

  while (!queue.empty()) {
    const Event ev = queue.top();
    queue.pop();
    if (horizon.kind == Horizon::Kind::MaxTime && ev.time > horizon.max_time) {
      final_time = horizon.max_time;
      break;
    }
    if (++s.events > guard) {
      throw SimGuardError(
          "event guard tripped; raise max_events if this workload is intentional");
    }

    const int w = ev.worker;
    if (ev.kind == kRequestArrival) {
      snapshot_x[static_cast<std::size_t>(w)] = policy.iterate();
      snapshot_round[static_cast<std::size_t>(w)] = policy.round();
      const auto& profile = workers[static_cast<std::size_t>(w)];
      double done_at;
      if (profile.is_universal()) {
        done_at = profile.power().completion_time(ev.time);
      } else {
        done_at = ev.time + profile.duration(duration_rng[static_cast<std::size_t>(w)]);
      }
      if (std::isfinite(done_at)) {
        queue.push({done_at, kGradientArrival, w, seq++});
      }
      continue;
    }

    // Gradient arrival: evaluate at the snapshot, deliver, then re-request.
    oracles[static_cast<std::size_t>(w)]->sample(snapshot_x[static_cast<std::size_t>(w)], g);
    GradientMessage msg;
    msg.grad = g;
    msg.snapshot_round = snapshot_round[static_cast<std::size_t>(w)];
    msg.worker_id = w;
    msg.completion_time = ev.time;
    const std::int64_t round_before = policy.round();
    const StepOutcome out = policy.on_gradient(msg);
    ++s.completions;
    if (options.record_completions) {
      trace.completions.push_back({ev.time, w, msg.snapshot_round, round_before,
                                   out.accepted, out.stepped, out.step_norm});
    }
    if (out.stepped) {
      const Vec& x = policy.iterate();
      if (!all_finite(x) || linf_norm(x) > options.divergence_linf) {
        s.diverged = true;
        final_time = ev.time;
        break;
      }
      if (options.record_iterates) trace.iterates.push_back(x);
      if (want_rows) {
        const double gap = problem.value_and_grad(x, diag) - problem.gap_reference();
        trace.rows.push_back({ev.time, policy.round(), norm2(diag), gap,
                              policy.accepted_count(), policy.discarded_count()});
      }
      if (horizon.kind == Horizon::Kind::MaxRounds && policy.round() >= horizon.max_rounds) {
        final_time = ev.time;
        break;
      }
    }
    queue.push({ev.time, kRequestArrival, w, seq++});
  }

  if (std::isnan(final_time)) {
    if (horizon.kind == Horizon::Kind::MaxTime) {
      final_time = horizon.max_time;  // queue drained early: idle to the budget
    } else {
      throw SimGuardError("all workers starved before the round target was reached");
    }
  }

  s.final_time = final_time;
  s.final_round = policy.round();
  s.accepted = policy.accepted_count();
  s.discarded = policy.discarded_count();
  s.zero_directions = policy.zero_direction_count();
  s.final_gap = problem.value_and_grad(policy.iterate(), diag) - problem.gap_reference();
  s.final_grad_norm = norm2(diag);
  s.final_dist_to_opt = problem.dist_to_opt(policy.iterate());

  if (want_rows) {
    const TraceRow tail{final_time, s.final_round, s.final_grad_norm, s.final_gap,
                        s.accepted, s.discarded};
    const TraceRow& last = trace.rows.back();
    if (last.time_s != tail.time_s || last.k != tail.k ||
        last.accepted != tail.accepted || last.discarded != tail.discarded) {
      trace.rows.push_back(tail);
    }
  }
  return trace;
}

}  // namespace ransim
