#pragma once
// Server-side update rules.  A policy owns the iterate and its round counter;
// the engine feeds it completed gradients in arrival order.  The round counter
// advances exactly once per applied update, never on a discard.

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

#include "ransim/vec.hpp"

namespace ransim {

// Parameters derived from (smoothness L, initial gap, noise level sigma,
// tail exponent p, target accuracy eps).
struct TheoryParams {
  double alpha = 1.0;           // noise-driven mixing weight in (0, 1]
  double eta = 0.0;             // step size
  double beta = 0.0;            // momentum = 1 - alpha
  std::int64_t delay_cut = 1;   // discard threshold on staleness
  std::int64_t rounds = 0;      // accepted updates needed for the guarantee
};

// Noise-driven mixing weight alpha alone; 1 when the noise is negligible at
// this accuracy.  Shared by the step-size recipe and the time calculators.
double mixing_weight(double sigma, double p, double eps);

TheoryParams theory_params(double L, double delta, double sigma, double p,
                           double eps);

struct GradientMessage {
  Vec grad;
  std::int64_t snapshot_round = 0;  // server round when the point was handed out
  int worker_id = 0;
  double completion_time = 0.0;
};

struct StepOutcome {
  bool accepted = false;      // message contributed to server state
  bool stepped = false;       // the round advanced
  std::int64_t delay = 0;     // staleness at arrival
  double step_norm = 0.0;     // ||x_next - x|| as applied
};

class ServerPolicy {
 public:
  explicit ServerPolicy(Vec x0) : x_(std::move(x0)) {}
  virtual ~ServerPolicy() = default;

  virtual StepOutcome on_gradient(const GradientMessage& m) = 0;
  virtual std::string_view name() const = 0;

  const Vec& iterate() const { return x_; }
  std::int64_t round() const { return k_; }
  std::int64_t accepted_count() const { return accepted_; }
  std::int64_t discarded_count() const { return discarded_; }
  std::int64_t zero_direction_count() const { return zero_directions_; }

 protected:
  std::int64_t delay_of(const GradientMessage& m) const;

  Vec x_;
  std::int64_t k_ = 0;
  std::int64_t accepted_ = 0;
  std::int64_t discarded_ = 0;
  std::int64_t zero_directions_ = 0;
};

// Normalized momentum steps of fixed length eta; stale gradients are dropped
// before they can touch the momentum buffer.  The first two applied updates
// use the plain gradient so stale zero-state momentum never leaks in.
class NormalizedMomentumPolicy final : public ServerPolicy {
 public:
  NormalizedMomentumPolicy(Vec x0, double eta, double momentum,
                           std::int64_t delay_cut);
  StepOutcome on_gradient(const GradientMessage& m) override;
  std::string_view name() const override { return "ransgdm"; }
  const Vec& direction_state() const { return v_; }

 private:
  double eta_;
  double momentum_;
  std::int64_t delay_cut_;
  Vec v_;
};

// Plain stale-gradient descent with the same discard rule, no normalization.
class DelayCutAsgdPolicy final : public ServerPolicy {
 public:
  DelayCutAsgdPolicy(Vec x0, double eta, std::int64_t delay_cut);
  StepOutcome on_gradient(const GradientMessage& m) override;
  std::string_view name() const override { return "ringmaster_asgd"; }

 private:
  double eta_;
  std::int64_t delay_cut_;
};

// Applies every gradient regardless of staleness.
class VanillaAsgdPolicy final : public ServerPolicy {
 public:
  VanillaAsgdPolicy(Vec x0, double eta);
  StepOutcome on_gradient(const GradientMessage& m) override;
  std::string_view name() const override { return "vanilla_asgd"; }

 private:
  double eta_;
};

// Applies every gradient with step eta0 / (1 + staleness).
class DelayAdaptiveAsgdPolicy final : public ServerPolicy {
 public:
  DelayAdaptiveAsgdPolicy(Vec x0, double eta0);
  StepOutcome on_gradient(const GradientMessage& m) override;
  std::string_view name() const override { return "delay_adaptive_asgd"; }

 private:
  double eta0_;
};

// Collects a batch of gradients taken at the current iterate; anything stamped
// at an older round is discarded.  Steps with the batch mean.
class BatchCollectPolicy final : public ServerPolicy {
 public:
  BatchCollectPolicy(Vec x0, double eta, std::int64_t batch);
  StepOutcome on_gradient(const GradientMessage& m) override;
  std::string_view name() const override { return "rennala"; }
  std::int64_t buffered_count() const { return buffered_; }

 private:
  double eta_;
  std::int64_t batch_;
  std::int64_t buffered_ = 0;
  Vec sum_;
};

}  // namespace ransim
