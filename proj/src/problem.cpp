#include "ransim/problem.hpp"

#include <cmath>
#include <stdexcept>

namespace ransim {

namespace {
constexpr double k_cg_residual = 1e-10;
constexpr double k_power_rel_tol = 1e-6;
}  // namespace

QuadraticProblem QuadraticProblem::build(std::size_t dim, std::size_t rows,
                                         double ridge, RngStream rng) {
  if (dim == 0) throw std::invalid_argument("quadratic: dim must be > 0");
  if (rows == 0) throw std::invalid_argument("quadratic: rows must be > 0");
  if (!(ridge > 0.0)) throw std::invalid_argument("quadratic: ridge must be > 0");

  QuadraticProblem q;
  q.d_ = dim;
  q.a_.assign(dim * dim, 0.0);

  // Accumulate X'X one data row at a time; X itself is never stored.
  Vec row(dim);
  for (std::size_t r = 0; r < rows; ++r) {
    rng.fill_normal(row, 1.0);
    for (std::size_t i = 0; i < dim; ++i) {
      const double ri = row[i];
      double* arow = &q.a_[i * dim];
      for (std::size_t j = i; j < dim; ++j) arow[j] += ri * row[j];
    }
  }
  const double inv_rows = 1.0 / static_cast<double>(rows);
  for (std::size_t i = 0; i < dim; ++i) {
    for (std::size_t j = i; j < dim; ++j) {
      double v = q.a_[i * dim + j] * inv_rows;
      if (i == j) v += ridge;
      q.a_[i * dim + j] = v;
      q.a_[j * dim + i] = v;
    }
  }

  q.x_star_.resize(dim);
  rng.fill_normal(q.x_star_, 1.0);
  q.b_.resize(dim);
  q.matvec(q.x_star_, q.b_);
  q.certify(rng);
  return q;
}

QuadraticProblem QuadraticProblem::from_dense(std::vector<double> a_row_major,
                                              Vec x_star) {
  const std::size_t d = x_star.size();
  if (a_row_major.size() != d * d) {
    throw std::invalid_argument("quadratic: matrix/vector size mismatch");
  }
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) {
      if (a_row_major[i * d + j] != a_row_major[j * d + i]) {
        throw std::invalid_argument("quadratic: matrix must be symmetric");
      }
    }
  }
  QuadraticProblem q;
  q.d_ = d;
  q.a_ = std::move(a_row_major);
  q.x_star_ = std::move(x_star);
  q.b_.resize(d);
  q.matvec(q.x_star_, q.b_);
  RngStream rng(0xC0FFEE, 0);
  q.certify(rng);
  return q;
}

void QuadraticProblem::matvec(const Vec& x, Vec& out) const {
  if (x.size() != d_) throw std::invalid_argument("matvec: dimension mismatch");
  out.resize(d_);
  for (std::size_t i = 0; i < d_; ++i) {
    const double* arow = &a_[i * d_];
    double s = 0.0;
    for (std::size_t j = 0; j < d_; ++j) s += arow[j] * x[j];
    out[i] = s;
  }
}

double QuadraticProblem::value(const Vec& x) const {
  Vec ax;
  matvec(x, ax);
  return 0.5 * dot(x, ax) - dot(b_, x);
}

void QuadraticProblem::grad(const Vec& x, Vec& out) const {
  matvec(x, out);
  for (std::size_t i = 0; i < d_; ++i) out[i] -= b_[i];
}

double QuadraticProblem::value_and_grad(const Vec& x, Vec& g) const {
  grad(x, g);
  // 0.5 x'Ax - b'x = 0.5 (x'g - x'b) with g = Ax - b.
  return 0.5 * (dot(x, g) - dot(x, b_));
}

void QuadraticProblem::certify(RngStream& rng) {
  // Top eigenvalue by power iteration, inflated by the certification margin.
  Vec v(d_), av(d_);
  rng.fill_normal(v, 1.0);
  double nv = norm2(v);
  for (std::size_t i = 0; i < d_; ++i) v[i] /= nv;
  double rho = 0.0;
  for (int it = 0; it < 20000; ++it) {
    matvec(v, av);
    const double next = dot(v, av);
    const double na = norm2(av);
    if (na == 0.0) break;  // A = 0 is excluded by ridge > 0, defensive only
    for (std::size_t i = 0; i < d_; ++i) v[i] = av[i] / na;
    if (it > 30 && std::fabs(next - rho) <= 1e-13 * std::fabs(next)) {
      rho = next;
      break;
    }
    rho = next;
  }
  top_eig_ = rho;
  l_ = rho * (1.0 + k_power_rel_tol);

  // Reference minimum: conjugate gradient on A y = b.
  Vec y(d_, 0.0), r = b_, p = b_, ap(d_);
  double rr = dot(r, r);
  const double target = k_cg_residual * k_cg_residual;
  for (std::size_t it = 0; it < 10 * d_ + 100 && rr > target; ++it) {
    matvec(p, ap);
    const double pap = dot(p, ap);
    if (pap <= 0.0) break;  // cannot happen for ridge > 0, defensive only
    const double step = rr / pap;
    for (std::size_t i = 0; i < d_; ++i) {
      y[i] += step * p[i];
      r[i] -= step * ap[i];
    }
    const double rr_next = dot(r, r);
    const double mix = rr_next / rr;
    for (std::size_t i = 0; i < d_; ++i) p[i] = r[i] + mix * p[i];
    rr = rr_next;
  }
  f_star_ = value(y);
}

AdditiveNoiseOracle::AdditiveNoiseOracle(const Problem& p, NoiseModel model,
                                         RngStream rng)
    : p_(p), model_(model), rng_(rng) {
  model_.validate();
  if (model_.kind == NoiseModel::Kind::BernoulliGate) {
    throw std::invalid_argument(
        "noise: the bernoulli gate only applies to the chain oracle");
  }
}

void AdditiveNoiseOracle::sample(const Vec& x, Vec& out) {
  p_.grad(x, out);
  switch (model_.kind) {
    case NoiseModel::Kind::None:
      return;
    case NoiseModel::Kind::GaussianIid:
      for (double& g : out) g += model_.scale * rng_.normal();
      return;
    case NoiseModel::Kind::StudentTIid:
      for (double& g : out) g += model_.scale * rng_.student_t(model_.dof);
      return;
    case NoiseModel::Kind::ParetoIid: {
      const double mean = model_.shape / (model_.shape - 1.0);
      for (double& g : out) {
        g += model_.scale * (rng_.pareto(model_.shape, 1.0) - mean);
      }
      return;
    }
    case NoiseModel::Kind::BernoulliGate:
      break;
  }
  throw std::logic_error("noise: unreachable kind");
}

std::unique_ptr<GradientOracle> make_additive_oracle(const Problem& p,
                                                     const NoiseModel& model,
                                                     RngStream rng) {
  if (model.kind == NoiseModel::Kind::None) {
    return std::make_unique<ExactOracle>(p);
  }
  return std::make_unique<AdditiveNoiseOracle>(p, model, rng);
}

}  // namespace ransim
