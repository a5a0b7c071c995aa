#pragma once
// Deterministic random streams.  Each stream is addressed by (seed, stream_id)
// and replays the exact same draw sequence on every run.  All samplers are
// implemented here instead of through std:: distributions, whose draw
// sequences are not pinned down by the standard.

#include <cstdint>
#include <random>

#include "ransim/vec.hpp"

namespace ransim {

class RngStream {
 public:
  RngStream() : RngStream(0, 0) {}
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Standard normal via Marsaglia polar; the paired draw is cached.
  double normal();

  // Marsaglia-Tsang, any shape > 0, unit scale.
  double gamma(double shape);

  double chi_square(double dof) { return 2.0 * gamma(0.5 * dof); }

  // dof > 0: z / sqrt(w / dof) with w chi-square(dof).
  double student_t(double dof);

  double exponential(double mean) { return -mean * std::log1p(-uniform()); }

  // Classic Pareto with given minimum value; mean = shape*min/(shape-1) for shape > 1.
  double pareto(double shape, double min_value) {
    return min_value * std::pow(1.0 - uniform(), -1.0 / shape);
  }

  void fill_normal(Vec& out, double scale);
  void fill_student_t(Vec& out, double dof, double scale);

 private:
  std::mt19937_64 gen_;
  std::uint64_t seed_ = 0;
  std::uint64_t stream_id_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace ransim
