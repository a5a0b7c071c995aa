#pragma once
// Building blocks of the chain objective: a C-infinity step (psi) and a
// bounded strictly increasing antiderivative of a scaled Gaussian (the tail
// integral).  Both are numerically hardened near their flat regions.

namespace ransim {

// sqrt(2*pi*e); the tail integral increases from 0 to this value.
extern const double k_tail_integral_sup;

// sqrt(e) * integral of exp(-s^2/2) over (-inf, t].  Range (0, sqrt(2*pi*e)).
double gauss_tail_integral(double t);

// d/dt of the above: sqrt(e) * exp(-t^2/2).
double gauss_tail_deriv(double t);

// 0 for t <= 1/2, exp(1 - (2t-1)^-2) for t > 1/2.  Flat-zero branch is exact.
double psi(double t);

// d/dt psi; evaluated in log space so the 0 * inf region near t = 1/2
// underflows cleanly to 0 instead of producing NaN.
double psi_deriv(double t);

}  // namespace ransim
