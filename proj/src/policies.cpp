#include "ransim/policies.hpp"

#include <cmath>
#include <stdexcept>

namespace ransim {

namespace {

std::int64_t checked_ceil(double v, const char* what) {
  if (!(v >= 0.0) || v > 9.0e18) {
    throw std::invalid_argument(std::string(what) + ": out of integer range");
  }
  return static_cast<std::int64_t>(std::ceil(v));
}

}  // namespace

double mixing_weight(double sigma, double p, double eps) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("theory: sigma must be >= 0");
  if (!(p > 1.0 && p <= 2.0)) throw std::invalid_argument("theory: p must be in (1, 2]");
  if (!(eps > 0.0)) throw std::invalid_argument("theory: eps must be > 0");
  if (sigma == 0.0) return 1.0;
  const double ratio = eps / (3.0 * std::pow(2.0, (p + 1.0) / p) * sigma);
  return std::min(1.0, std::pow(ratio, p / (p - 1.0)));
}

TheoryParams theory_params(double L, double delta, double sigma, double p,
                           double eps) {
  if (!(L > 0.0)) throw std::invalid_argument("theory: L must be > 0");
  if (!(delta > 0.0)) throw std::invalid_argument("theory: delta must be > 0");

  TheoryParams out;
  out.alpha = mixing_weight(sigma, p, eps);
  out.eta = out.alpha * eps / (24.0 * L);
  out.beta = 1.0 - out.alpha;
  out.delay_cut = checked_ceil(1.0 / out.alpha, "theory delay cut");
  out.rounds = checked_ceil(72.0 * L * delta / (out.alpha * eps * eps), "theory rounds");
  return out;
}

std::int64_t ServerPolicy::delay_of(const GradientMessage& m) const {
  if (m.snapshot_round > k_) {
    throw std::logic_error("policy: gradient stamped in the future");
  }
  return k_ - m.snapshot_round;
}

NormalizedMomentumPolicy::NormalizedMomentumPolicy(Vec x0, double eta,
                                                   double momentum,
                                                   std::int64_t delay_cut)
    : ServerPolicy(std::move(x0)),
      eta_(eta),
      momentum_(momentum),
      delay_cut_(delay_cut),
      v_(x_.size(), 0.0) {
  if (!(eta > 0.0)) throw std::invalid_argument("policy: eta must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw std::invalid_argument("policy: momentum must be in [0, 1)");
  }
  if (delay_cut < 1) throw std::invalid_argument("policy: delay cut must be >= 1");
}

StepOutcome NormalizedMomentumPolicy::on_gradient(const GradientMessage& m) {
  const std::int64_t delta = delay_of(m);
  if (delta >= delay_cut_) {
    ++discarded_;
    return {false, false, delta, 0.0};
  }
  const double mix = (k_ <= 1) ? 0.0 : momentum_;
  const double fresh = 1.0 - momentum_;
  for (std::size_t i = 0; i < v_.size(); ++i) {
    v_[i] = mix * v_[i] + fresh * m.grad[i];
  }
  const double nv = norm2(v_);
  ++accepted_;
  ++k_;
  if (nv == 0.0 || !std::isfinite(nv)) {
    // Degenerate direction: the round still advances, the iterate stays put.
    ++zero_directions_;
    return {true, true, delta, 0.0};
  }
  add_scaled(x_, -eta_ / nv, v_);
  return {true, true, delta, eta_};
}

DelayCutAsgdPolicy::DelayCutAsgdPolicy(Vec x0, double eta, std::int64_t delay_cut)
    : ServerPolicy(std::move(x0)), eta_(eta), delay_cut_(delay_cut) {
  if (!(eta > 0.0)) throw std::invalid_argument("policy: eta must be > 0");
  if (delay_cut < 1) throw std::invalid_argument("policy: delay cut must be >= 1");
}

StepOutcome DelayCutAsgdPolicy::on_gradient(const GradientMessage& m) {
  const std::int64_t delta = delay_of(m);
  if (delta >= delay_cut_) {
    ++discarded_;
    return {false, false, delta, 0.0};
  }
  add_scaled(x_, -eta_, m.grad);
  ++accepted_;
  ++k_;
  return {true, true, delta, eta_ * norm2(m.grad)};
}

VanillaAsgdPolicy::VanillaAsgdPolicy(Vec x0, double eta)
    : ServerPolicy(std::move(x0)), eta_(eta) {
  if (!(eta > 0.0)) throw std::invalid_argument("policy: eta must be > 0");
}

StepOutcome VanillaAsgdPolicy::on_gradient(const GradientMessage& m) {
  const std::int64_t delta = delay_of(m);
  add_scaled(x_, -eta_, m.grad);
  ++accepted_;
  ++k_;
  return {true, true, delta, eta_ * norm2(m.grad)};
}

DelayAdaptiveAsgdPolicy::DelayAdaptiveAsgdPolicy(Vec x0, double eta0)
    : ServerPolicy(std::move(x0)), eta0_(eta0) {
  if (!(eta0 > 0.0)) throw std::invalid_argument("policy: eta must be > 0");
}

StepOutcome DelayAdaptiveAsgdPolicy::on_gradient(const GradientMessage& m) {
  const std::int64_t delta = delay_of(m);
  const double step = eta0_ / (1.0 + static_cast<double>(delta));
  add_scaled(x_, -step, m.grad);
  ++accepted_;
  ++k_;
  return {true, true, delta, step * norm2(m.grad)};
}

BatchCollectPolicy::BatchCollectPolicy(Vec x0, double eta, std::int64_t batch)
    : ServerPolicy(std::move(x0)), eta_(eta), batch_(batch), sum_(x_.size(), 0.0) {
  if (!(eta > 0.0)) throw std::invalid_argument("policy: eta must be > 0");
  if (batch < 1) throw std::invalid_argument("policy: batch must be >= 1");
}

StepOutcome BatchCollectPolicy::on_gradient(const GradientMessage& m) {
  const std::int64_t delta = delay_of(m);
  if (delta > 0) {
    // Stamped at an older iterate; only gradients at the current point count.
    ++discarded_;
    return {false, false, delta, 0.0};
  }
  add_scaled(sum_, 1.0, m.grad);
  ++buffered_;
  ++accepted_;
  if (buffered_ < batch_) {
    return {true, false, 0, 0.0};
  }
  const double scale = eta_ / static_cast<double>(batch_);
  const double applied = scale * norm2(sum_);
  add_scaled(x_, -scale, sum_);
  sum_.assign(sum_.size(), 0.0);
  buffered_ = 0;
  ++k_;
  return {true, true, 0, applied};
}

}  // namespace ransim
