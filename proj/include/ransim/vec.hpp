#pragma once
// Dense vector helpers shared by problems, server policies and the engine.
// Plain std::vector<double> throughout; dimensions are validated at the few
// entry points where mismatches could silently corrupt a run.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace ransim {

using Vec = std::vector<double>;

inline void require_same_dim(const Vec& a, const Vec& b, const char* where) {
  if (a.size() != b.size()) {
    throw std::invalid_argument(std::string(where) + ": dimension mismatch");
  }
}

inline double dot(const Vec& a, const Vec& b) {
  require_same_dim(a, b, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Euclidean norm, scaled to stay finite for entries near the overflow edge.
inline double norm2(const Vec& a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::fabs(x));
  if (m == 0.0 || !std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : a) {
    const double r = x / m;
    s += r * r;
  }
  return m * std::sqrt(s);
}

inline double linf_norm(const Vec& a) {
  double m = 0.0;
  for (double x : a) m = std::max(m, std::fabs(x));
  return m;
}

// out = alpha*a + beta*b
inline void axpby(double alpha, const Vec& a, double beta, const Vec& b, Vec& out) {
  require_same_dim(a, b, "axpby");
  out.resize(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = alpha * a[i] + beta * b[i];
}

// y += alpha*x
inline void add_scaled(Vec& y, double alpha, const Vec& x) {
  require_same_dim(y, x, "add_scaled");
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * x[i];
}

inline void scale_in_place(Vec& y, double alpha) {
  for (double& v : y) v *= alpha;
}

inline Vec sub(const Vec& a, const Vec& b) {
  require_same_dim(a, b, "sub");
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

inline double dist2(const Vec& a, const Vec& b) {
  require_same_dim(a, b, "dist2");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  if (m == 0.0 || !std::isfinite(m)) return m;
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double r = (a[i] - b[i]) / m;
    s += r * r;
  }
  return m * std::sqrt(s);
}

inline bool all_finite(const Vec& a) {
  for (double x : a) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

}  // namespace ransim
