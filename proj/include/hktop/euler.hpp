// Continuous-time Euler top: vector field, parameter conversions from the
// principal moments of inertia, quadratic integrals, linear Poisson brackets
// and a classical RK4 reference integrator.

#pragma once

#include <utility>

#include "hktop/core.hpp"

namespace hktop {

enum class Formulation { Velocity, Momentum, Raw };

struct Inertia {
  Vec3 I;

  explicit Inertia(const Vec3& moments) : I(moments) {
    if (!(I[0] > 0.0 && I[1] > 0.0 && I[2] > 0.0))
      throw NonPositiveInertia("principal moments of inertia must be positive");
  }
};

struct AlphaParams {
  Vec3 alpha;
  Formulation formulation = Formulation::Raw;
};

// alpha_i = (I_j - I_k)/I_i   (angular velocities), or
// alpha_i = 1/I_k - 1/I_j     (angular momenta).
inline AlphaParams alpha_from_inertia(const Inertia& inertia, Formulation f) {
  if (f == Formulation::Raw)
    throw ArgumentOutOfRange("alpha_from_inertia: pick Velocity or Momentum");
  Vec3 a;
  for (int i = 0; i < 3; ++i) {
    const CyclicIndex ci(i);
    const double Ij = inertia.I[ci.j()];
    const double Ik = inertia.I[ci.k()];
    a[i] = (f == Formulation::Velocity) ? (Ij - Ik) / inertia.I[i]
                                        : 1.0 / Ik - 1.0 / Ij;
  }
  return {a, f};
}

// xdot_i = alpha_i x_j x_k
inline Vec3 euler_rhs(const Vec3& x, const AlphaParams& a) {
  return {a.alpha[0] * x[1] * x[2], a.alpha[1] * x[2] * x[0],
          a.alpha[2] * x[0] * x[1]};
}

// H^(beta) = (beta_1 x_1^2 + beta_2 x_2^2 + beta_3 x_3^2)/2; an integral of
// the flow iff beta is orthogonal to alpha.
inline double integral_Hbeta(const Vec3& x, const Vec3& beta) {
  return 0.5 * (beta[0] * x[0] * x[0] + beta[1] * x[1] * x[1] +
                beta[2] * x[2] * x[2]);
}

inline Vec3 grad_Hbeta(const Vec3& x, const Vec3& beta) {
  return {beta[0] * x[0], beta[1] * x[1], beta[2] * x[2]};
}

// G_i = (alpha_j x_k^2 - alpha_k x_j^2)/2; satisfies sum alpha_i G_i = 0.
inline double integral_G(const Vec3& x, const AlphaParams& a, CyclicIndex i) {
  const int j = i.j(), k = i.k();
  return 0.5 * (a.alpha[j] * x[k] * x[k] - a.alpha[k] * x[j] * x[j]);
}

// Linear bracket {x_i,x_j} = gamma_k x_k as an antisymmetric matrix.
inline Mat3 linear_bracket_matrix(const Vec3& x, const Vec3& gamma) {
  Mat3 P;
  P(0, 1) = gamma[2] * x[2];
  P(1, 2) = gamma[0] * x[0];
  P(2, 0) = gamma[1] * x[1];
  P(1, 0) = -P(0, 1);
  P(2, 1) = -P(1, 2);
  P(0, 2) = -P(2, 0);
  return P;
}

inline Vec3 rk4_step(const Vec3& x, const AlphaParams& a, double h) {
  if (h == 0.0) throw ArgumentOutOfRange("rk4_step: h must be nonzero");
  const Vec3 k1 = euler_rhs(x, a);
  const Vec3 k2 = euler_rhs(x + 0.5 * h * k1, a);
  const Vec3 k3 = euler_rhs(x + 0.5 * h * k2, a);
  const Vec3 k4 = euler_rhs(x + h * k3, a);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Any pair spanning the orthogonal complement of v.  Built from the cross
// product with the least-aligned coordinate axis.
inline std::pair<Vec3, Vec3> orthogonal_basis(const Vec3& v) {
  const double n = norm(v);
  if (n == 0.0) throw ZeroVector("orthogonal_basis: zero vector has no complement basis");
  int least = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(v[i]) < std::abs(v[least])) least = i;
  Vec3 axis;
  axis[least] = 1.0;
  Vec3 b1 = cross(v, axis);
  b1 *= 1.0 / norm(b1);
  Vec3 b2 = cross(v, b1);
  b2 *= 1.0 / norm(b2);
  return {b1, b2};
}

}  // namespace hktop
