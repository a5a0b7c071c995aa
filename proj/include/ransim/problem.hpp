#pragma once
// Optimization problems and the gradient oracles workers query.
// An oracle instance belongs to exactly one worker: it carries private RNG
// state, and sharing it would entangle otherwise independent streams.

#include <cstddef>
#include <limits>
#include <memory>
#include <vector>

#include "ransim/noise.hpp"
#include "ransim/rng.hpp"
#include "ransim/vec.hpp"

namespace ransim {

class Problem {
 public:
  virtual ~Problem() = default;
  virtual std::size_t dim() const = 0;
  virtual double value(const Vec& x) const = 0;
  virtual void grad(const Vec& x, Vec& out) const = 0;
  virtual double value_and_grad(const Vec& x, Vec& g) const {
    grad(x, g);
    return value(x);
  }
  // Smoothness constant the step-size rules may rely on.
  virtual double smoothness() const = 0;
  // Value subtracted in the trace gap column (minimum when known, else 0).
  virtual double gap_reference() const = 0;
  // ||x - minimizer|| when the minimizer is known, NaN otherwise.
  virtual double dist_to_opt(const Vec&) const {
    return std::numeric_limits<double>::quiet_NaN();
  }
};

// f(x) = 0.5 x'Ax - b'x with A = (1/rows) X'X + ridge*I, X iid standard normal,
// b = A x_star.  The smoothness constant is certified by power iteration and
// the reference minimum by a conjugate-gradient solve.
class QuadraticProblem final : public Problem {
 public:
  static QuadraticProblem build(std::size_t dim, std::size_t rows, double ridge,
                                RngStream rng);
  // Direct constructor for tests: row-major symmetric matrix.
  static QuadraticProblem from_dense(std::vector<double> a_row_major, Vec x_star);

  std::size_t dim() const override { return d_; }
  double value(const Vec& x) const override;
  void grad(const Vec& x, Vec& out) const override;
  double value_and_grad(const Vec& x, Vec& g) const override;
  double smoothness() const override { return l_; }
  double gap_reference() const override { return f_star_; }
  double dist_to_opt(const Vec& x) const override { return dist2(x, x_star_); }

  const Vec& x_star() const { return x_star_; }
  const Vec& rhs() const { return b_; }
  double f_star() const { return f_star_; }
  double top_eigenvalue_estimate() const { return top_eig_; }

  void matvec(const Vec& x, Vec& out) const;

 private:
  QuadraticProblem() = default;
  void certify(RngStream& rng);

  std::size_t d_ = 0;
  std::vector<double> a_;  // row-major d x d, symmetric
  Vec b_, x_star_;
  double l_ = 0.0;        // certified upper bound on the top eigenvalue
  double top_eig_ = 0.0;  // power-iteration estimate
  double f_star_ = 0.0;
};

class GradientOracle {
 public:
  virtual ~GradientOracle() = default;
  virtual void sample(const Vec& x, Vec& out) = 0;
};

class ExactOracle final : public GradientOracle {
 public:
  explicit ExactOracle(const Problem& p) : p_(p) {}
  void sample(const Vec& x, Vec& out) override { p_.grad(x, out); }

 private:
  const Problem& p_;
};

// Exact gradient plus iid per-coordinate noise.  Pareto draws are centered by
// their mean so the oracle stays unbiased.
class AdditiveNoiseOracle final : public GradientOracle {
 public:
  AdditiveNoiseOracle(const Problem& p, NoiseModel model, RngStream rng);
  void sample(const Vec& x, Vec& out) override;

 private:
  const Problem& p_;
  NoiseModel model_;
  RngStream rng_;
};

std::unique_ptr<GradientOracle> make_additive_oracle(const Problem& p,
                                                     const NoiseModel& model,
                                                     RngStream rng);

}  // namespace ransim
