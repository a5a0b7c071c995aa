#include "ransim/chain.hpp"

#include <cmath>
#include <stdexcept>

#include "ransim/special.hpp"

namespace ransim {

std::size_t prog_above(const Vec& x, double alpha) {
  for (std::size_t i = x.size(); i > 0; --i) {
    if (std::fabs(x[i - 1]) > alpha) return i;
  }
  return 0;
}

ZeroChain::ZeroChain(std::size_t d) : dim(d) {
  if (d == 0) throw std::invalid_argument("chain: dim must be > 0");
}

double ZeroChain::value(const Vec& u) const {
  if (u.size() != dim) throw std::invalid_argument("chain: dimension mismatch");
  // Head term; psi(1) = 1.
  double h = -gauss_tail_integral(u[0]);
  for (std::size_t i = 1; i < dim; ++i) {
    h += psi(-u[i - 1]) * gauss_tail_integral(-u[i]) -
         psi(u[i - 1]) * gauss_tail_integral(u[i]);
  }
  return h;
}

void ZeroChain::grad(const Vec& u, Vec& out) const {
  if (u.size() != dim) throw std::invalid_argument("chain: dimension mismatch");
  out.assign(dim, 0.0);
  out[0] = -gauss_tail_deriv(u[0]);
  for (std::size_t j = 1; j < dim; ++j) {
    // Term i = j, differentiated in its second argument.
    out[j] += -psi(-u[j - 1]) * gauss_tail_deriv(-u[j]) -
              psi(u[j - 1]) * gauss_tail_deriv(u[j]);
  }
  for (std::size_t j = 0; j + 1 < dim; ++j) {
    // Term i = j+1, differentiated in its first argument.
    out[j] += -psi_deriv(-u[j]) * gauss_tail_integral(-u[j + 1]) -
              psi_deriv(u[j]) * gauss_tail_integral(u[j + 1]);
  }
}

ChainProblem::ChainProblem(std::size_t dim, double smoothness, double lambda)
    : chain_(dim), l_(smoothness), lambda_(lambda) {
  if (!(smoothness > 0.0)) throw std::invalid_argument("chain: smoothness must be > 0");
  if (!(lambda > 0.0)) throw std::invalid_argument("chain: lambda must be > 0");
}

double ChainProblem::value(const Vec& x) const {
  Vec u(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) u[i] = x[i] / lambda_;
  return (l_ * lambda_ * lambda_ / 152.0) * chain_.value(u);
}

void ChainProblem::grad(const Vec& x, Vec& out) const {
  Vec u(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) u[i] = x[i] / lambda_;
  chain_.grad(u, out);
  const double s = l_ * lambda_ / 152.0;
  for (double& g : out) g *= s;
}

LowerBoundParams lower_bound_params(double L, double delta, double sigma, double p,
                                    double eps) {
  if (!(L > 0.0)) throw std::invalid_argument("lower bound: L must be > 0");
  if (!(delta > 0.0)) throw std::invalid_argument("lower bound: delta must be > 0");
  if (!(sigma >= 0.0)) throw std::invalid_argument("lower bound: sigma must be >= 0");
  if (!(p > 1.0 && p <= 2.0)) {
    throw std::invalid_argument("lower bound: p must be in (1, 2]");
  }
  if (!(eps > 0.0)) throw std::invalid_argument("lower bound: eps must be > 0");
  if (!(eps <= std::sqrt(L * delta / 87552.0))) {
    throw std::invalid_argument(
        "lower bound: eps too coarse for a chain of length >= 3");
  }
  LowerBoundParams out;
  out.lambda = 608.0 * eps / L;
  out.dim = static_cast<std::size_t>(std::floor(L * delta / (29184.0 * eps * eps)));
  out.gate_prob = recipe_gate_prob(L, out.lambda, sigma, p);
  return out;
}

double recipe_gate_prob(double L, double lambda, double sigma, double p) {
  if (!(p > 1.0 && p <= 2.0)) {
    throw std::invalid_argument("gate: p must be in (1, 2]");
  }
  if (sigma <= 0.0) return 1.0;  // exact oracle is allowed
  const double base = std::pow(2.0, 1.0 / p) * 23.0 * L * lambda / (152.0 * sigma);
  return std::min(1.0, std::pow(base, p / (p - 1.0)));
}

GatedOracle::GatedOracle(const ChainProblem& problem, double gate_prob, RngStream rng)
    : p_(problem), q_(gate_prob), rng_(rng) {
  if (!(q_ > 0.0 && q_ <= 1.0)) {
    throw std::invalid_argument("gate: probability must be in (0, 1]");
  }
}

void GatedOracle::sample(const Vec& x, Vec& out) {
  const std::size_t prog = prog_above(x, 0.0);
  p_.grad(x, out);
  // One coin for the whole call.
  const double factor = rng_.bernoulli(q_) ? 1.0 / q_ : 0.0;
  for (std::size_t j = prog; j < out.size(); ++j) out[j] *= factor;
}

}  // namespace ransim
