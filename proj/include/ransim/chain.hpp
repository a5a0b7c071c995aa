#pragma once
// Chain objective whose coordinates can only be unlocked one after another,
// plus the single-coin gated oracle that hides the next link, and the
// parameter recipe tying (accuracy, noise level) to (scale, length, coin bias).

#include <cstddef>

#include "ransim/problem.hpp"
#include "ransim/rng.hpp"
#include "ransim/vec.hpp"

namespace ransim {

// Largest 1-based index i with |x_i| > alpha; 0 if none.
std::size_t prog_above(const Vec& x, double alpha);

// Unscaled chain of coupled bump/tail terms.  The gradient's support never
// runs more than one link ahead of the point's own support, the gradient is
// bounded in every norm, and it stays bounded away from zero until the last
// link is reached.
struct ZeroChain {
  std::size_t dim = 0;

  explicit ZeroChain(std::size_t d);
  double value(const Vec& u) const;
  void grad(const Vec& u, Vec& out) const;
};

// Scaled instance f(x) = (L*lambda^2/152) * chain(x/lambda); L-smooth by
// construction because the unscaled chain is 152-smooth.
class ChainProblem final : public Problem {
 public:
  ChainProblem(std::size_t dim, double smoothness, double lambda);

  std::size_t dim() const override { return chain_.dim; }
  double value(const Vec& x) const override;
  void grad(const Vec& x, Vec& out) const override;
  double smoothness() const override { return l_; }
  // The chain's infimum has no closed form; the gap column reports raw value.
  double gap_reference() const override { return 0.0; }

  double length_scale() const { return lambda_; }
  const ZeroChain& chain() const { return chain_; }

 private:
  ZeroChain chain_;
  double l_;
  double lambda_;
};

struct LowerBoundParams {
  double lambda = 0.0;     // coordinate length scale
  std::size_t dim = 0;     // chain length
  double gate_prob = 1.0;  // oracle coin bias
};

// Valid for eps <= sqrt(L*delta/87552), which keeps the chain length >= 3.
LowerBoundParams lower_bound_params(double L, double delta, double sigma, double p,
                                    double eps);

// Coin bias making the gated oracle's p-th noise moment at most sigma^p.
double recipe_gate_prob(double L, double lambda, double sigma, double p);

// One shared Bernoulli coin per call: coordinates past the point's support are
// returned scaled by coin/q, so the next link is revealed only when the coin
// lands heads.  Unbiased, and differs from the exact gradient in at most the
// single coordinate right after the support.
class GatedOracle final : public GradientOracle {
 public:
  GatedOracle(const ChainProblem& problem, double gate_prob, RngStream rng);
  void sample(const Vec& x, Vec& out) override;
  double gate_prob() const { return q_; }

 private:
  const ChainProblem& p_;
  double q_;
  RngStream rng_;
};

}  // namespace ransim
