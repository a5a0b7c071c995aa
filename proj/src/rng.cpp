#include "ransim/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace ransim {

namespace {

// splitmix64 finalizer; decorrelates (seed, stream_id) pairs into engine keys.
std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : gen_(mix64(mix64(seed) ^ mix64(~stream_id))), seed_(seed), stream_id_(stream_id) {}

double RngStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_normal_ = v * f;
  has_spare_ = true;
  return u * f;
}

double RngStream::gamma(double shape) {
  if (!(shape > 0.0)) throw std::invalid_argument("gamma: shape must be > 0");
  if (shape < 1.0) {
    // Boost from shape+1; uniform kept strictly positive so pow is finite.
    const double u = 1.0 - uniform();
    return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (u > 0.0 && std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double RngStream::student_t(double dof) {
  if (!(dof > 0.0)) throw std::invalid_argument("student_t: dof must be > 0");
  const double z = normal();
  double w = chi_square(dof);
  while (w <= 0.0) w = chi_square(dof);  // underflow guard, astronomically rare
  return z / std::sqrt(w / dof);
}

void RngStream::fill_normal(Vec& out, double scale) {
  for (double& x : out) x = scale * normal();
}

void RngStream::fill_student_t(Vec& out, double dof, double scale) {
  for (double& x : out) x = scale * student_t(dof);
}

}  // namespace ransim
