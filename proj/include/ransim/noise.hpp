#pragma once
// Gradient-noise descriptions.  A model is data only; draws happen in the
// oracle that owns the stream.

#include <stdexcept>
#include <string>

namespace ransim {

struct NoiseModel {
  enum class Kind { None, GaussianIid, StudentTIid, ParetoIid, BernoulliGate };

  Kind kind = Kind::None;
  double scale = 0.0;      // per-coordinate scale for the iid kinds
  double dof = 0.0;        // StudentTIid tail index
  double shape = 0.0;      // ParetoIid tail index
  double gate_prob = 1.0;  // BernoulliGate

  static NoiseModel none() { return {}; }

  static NoiseModel gaussian(double scale) {
    NoiseModel m;
    m.kind = Kind::GaussianIid;
    m.scale = scale;
    m.validate();
    return m;
  }

  static NoiseModel student_t(double dof, double scale) {
    NoiseModel m;
    m.kind = Kind::StudentTIid;
    m.dof = dof;
    m.scale = scale;
    m.validate();
    return m;
  }

  static NoiseModel pareto(double shape, double scale) {
    NoiseModel m;
    m.kind = Kind::ParetoIid;
    m.shape = shape;
    m.scale = scale;
    m.validate();
    return m;
  }

  static NoiseModel bernoulli_gate(double q) {
    NoiseModel m;
    m.kind = Kind::BernoulliGate;
    m.gate_prob = q;
    m.validate();
    return m;
  }

  void validate() const {
    switch (kind) {
      case Kind::None:
        return;
      case Kind::GaussianIid:
        if (!(scale >= 0.0)) throw std::invalid_argument("noise: scale must be >= 0");
        return;
      case Kind::StudentTIid:
        if (!(scale >= 0.0)) throw std::invalid_argument("noise: scale must be >= 0");
        // dof <= 1 has no mean, so the oracle could not be unbiased.
        if (!(dof > 1.0)) throw std::invalid_argument("noise: student-t dof must be > 1");
        return;
      case Kind::ParetoIid:
        if (!(scale >= 0.0)) throw std::invalid_argument("noise: scale must be >= 0");
        // The draw is centered by its mean, which requires shape > 1.
        if (!(shape > 1.0)) throw std::invalid_argument("noise: pareto shape must be > 1");
        return;
      case Kind::BernoulliGate:
        if (!(gate_prob > 0.0 && gate_prob <= 1.0)) {
          throw std::invalid_argument("noise: gate probability must be in (0, 1]");
        }
        return;
    }
    throw std::invalid_argument("noise: unknown kind");
  }
};

}  // namespace ransim
