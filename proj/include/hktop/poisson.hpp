// Invariant Poisson structures of the HK map: the cubic bracket family
//
//   {x_i,x_j} = C_i d_j x_k (1 - d_k d_i x_j^2) - C_j d_i x_k (1 - d_j d_k x_i^2),
//
// its analytic derivatives, and the residual verifiers (Jacobi identity,
// invariance under the map, Casimirs, the dependence relation with
// integral-valued coefficients, the density construction and the continuum
// limit towards the linear Euler-top brackets).

#pragma once

#include <functional>

#include "hktop/core.hpp"
#include "hktop/euler.hpp"
#include "hktop/hk.hpp"

namespace hktop {

struct PoissonTensor {
  Vec3 C;
  DeltaParams delta;
};

// A differentiable scalar function with its analytic gradient.
struct ScalarField {
  std::function<double(const Vec3&)> value;
  std::function<Vec3(const Vec3&)> gradient;
};

namespace detail {

// {x_i,x_j} for the cyclic triple starting at i.
inline double bracket_entry(const PoissonTensor& P, const Vec3& x, CyclicIndex ci) {
  const int i = ci.i, j = ci.j(), k = ci.k();
  const Vec3& d = P.delta.delta;
  return P.C[i] * d[j] * x[k] * (1.0 - d[k] * d[i] * x[j] * x[j]) -
         P.C[j] * d[i] * x[k] * (1.0 - d[j] * d[k] * x[i] * x[i]);
}

// d{x_i,x_j}/dx_l, hand-differentiated cubics.
inline double bracket_entry_partial(const PoissonTensor& P, const Vec3& x,
                                    CyclicIndex ci, int l) {
  const int i = ci.i, j = ci.j(), k = ci.k();
  const Vec3& d = P.delta.delta;
  if (l == i) return 2.0 * P.C[j] * d[i] * d[j] * d[k] * x[i] * x[k];
  if (l == j) return -2.0 * P.C[i] * d[i] * d[j] * d[k] * x[j] * x[k];
  return P.C[i] * d[j] * (1.0 - d[k] * d[i] * x[j] * x[j]) -
         P.C[j] * d[i] * (1.0 - d[j] * d[k] * x[i] * x[i]);
}

}  // namespace detail

inline Mat3 bracket_matrix(const PoissonTensor& P, const Vec3& x) {
  Mat3 M;
  for (int i = 0; i < 3; ++i) {
    const CyclicIndex ci(i);
    const double e = detail::bracket_entry(P, x, ci);
    M(ci.i, ci.j()) = e;
    M(ci.j(), ci.i) = -e;
  }
  return M;
}

// dP/dx_l as a full antisymmetric matrix.
inline Mat3 bracket_partial(const PoissonTensor& P, const Vec3& x, int l) {
  Mat3 M;
  for (int i = 0; i < 3; ++i) {
    const CyclicIndex ci(i);
    const double e = detail::bracket_entry_partial(P, x, ci, l);
    M(ci.i, ci.j()) = e;
    M(ci.j(), ci.i) = -e;
  }
  return M;
}

// Bracket built from an invariant density and an integral of motion:
// {x_i,x_j} = phi(x) dI/dx_k.
inline Mat3 bracket_from_density(const std::function<double(const Vec3&)>& phi,
                                 const ScalarField& I, const Vec3& x) {
  const double p = phi(x);
  const Vec3 g = I.gradient(x);
  Mat3 M;
  M(0, 1) = p * g[2];
  M(1, 2) = p * g[0];
  M(2, 0) = p * g[1];
  M(1, 0) = -M(0, 1);
  M(2, 1) = -M(1, 2);
  M(0, 2) = -M(2, 0);
  return M;
}

// log F_i with its analytic gradient.
inline ScalarField log_F_field(CyclicIndex i, const DeltaParams& d) {
  return {
      [i, d](const Vec3& x) { return std::log(integral_F(x, d, i)); },
      [i, d](const Vec3& x) {
        const double f = integral_F(x, d, i);
        return (1.0 / f) * grad_F(x, d, i);
      }};
}

// The density pairing with log F_i in the bracket construction: the product
// of the two quadratic factors carrying d_i, scaled by 1/(2 d_i).  With this
// scaling the construction reproduces the bracket with C = e_i exactly.
inline std::function<double(const Vec3&)> matched_density_field(CyclicIndex i,
                                                                const DeltaParams& d) {
  const int j = i.j(), k = i.k();
  const Vec3 dd = d.delta;
  const int ii = i.i;
  return [ii, j, k, dd](const Vec3& x) {
    const double uj = 1.0 - dd[k] * dd[ii] * x[j] * x[j];
    const double uk = 1.0 - dd[ii] * dd[j] * x[k] * x[k];
    return uj * uk / (2.0 * dd[ii]);
  };
}

// Max cyclic-sum residual of the Jacobi identity, using analytic derivatives.
inline double jacobi_residual(const PoissonTensor& P, const Vec3& x) {
  const Mat3 M = bracket_matrix(P, x);
  const Mat3 D0 = bracket_partial(P, x, 0);
  const Mat3 D1 = bracket_partial(P, x, 1);
  const Mat3 D2 = bracket_partial(P, x, 2);
  const std::array<const Mat3*, 3> D{&D0, &D1, &D2};
  const int i = 0, j = 1, k = 2;
  double res = 0.0;
  for (int l = 0; l < 3; ++l)
    res += M(i, l) * (*D[l])(j, k) + M(j, l) * (*D[l])(k, i) + M(k, l) * (*D[l])(i, j);
  return std::abs(res);
}

// || DPhi P(x) DPhi^T - P(Phi x) ||_max for the HK map with P's own delta.
inline double invariance_residual(const PoissonTensor& P, const Vec3& x) {
  const Vec3 xt = hk_step(x, P.delta);
  const Mat3 J = jacobian_matrix(x, P.delta);
  const Mat3 pushed = J * bracket_matrix(P, x) * J.transposed();
  return norm_max(pushed - bracket_matrix(P, xt));
}

// || P_i grad F_i ||_inf where P_i is the bracket with C = e_i.
inline double casimir_residual(CyclicIndex i, const Vec3& x, const DeltaParams& d) {
  Vec3 C;
  C[i.i] = 1.0;
  const Mat3 M = bracket_matrix(PoissonTensor{C, d}, x);
  return norm_inf(M * grad_F(x, d, i));
}

// Evaluates the family at the integral-valued coefficients
// (C_i, C_j, C_k) = (d_i / F_j, d_j F_i, d_k); the result vanishes.
inline double dependence_residual(const Vec3& x, const DeltaParams& d, CyclicIndex i) {
  const int j = i.j(), k = i.k();
  Vec3 C;
  C[i.i] = d.delta[i.i] / integral_F(x, d, CyclicIndex(j));
  C[j] = d.delta[j] * integral_F(x, d, i);
  C[k] = d.delta[k];
  return norm_max(bracket_matrix(PoissonTensor{C, d}, x));
}

// gamma vectors of the linear brackets shadowing pb_1, pb_2, pb_3 as eps -> 0.
inline Vec3 continuum_gamma(CyclicIndex i, const Vec3& alpha) {
  switch (i.i) {
    case 0: return {0.0, -alpha[2], alpha[1]};
    case 1: return {alpha[2], 0.0, -alpha[0]};
    default: return {-alpha[1], alpha[0], 0.0};
  }
}

struct ContinuumLimitResult {
  double slope = std::numeric_limits<double>::quiet_NaN();  // NaN when remainders vanish
  std::vector<double> remainder;
};

// Fits the order of the entrywise remainder
//   bracket(C = e_i, delta = eps*alpha/2) - (eps/2) * linear bracket(gamma_i);
// the expected order is 3.
inline ContinuumLimitResult continuum_limit_check(const Vec3& x, const Vec3& alpha,
                                                  CyclicIndex i,
                                                  std::span<const double> eps_list) {
  if (eps_list.size() < 2)
    throw ArgumentOutOfRange("continuum_limit_check: need at least 2 eps values");
  for (std::size_t t = 1; t < eps_list.size(); ++t)
    if (!(eps_list[t] < eps_list[t - 1]) || !(eps_list[t] > 0.0))
      throw ArgumentOutOfRange("continuum_limit_check: eps_list must be positive decreasing");
  if (norm(alpha) == 0.0)
    throw ArgumentOutOfRange("continuum_limit_check: alpha must be nonzero");

  const Vec3 gamma = continuum_gamma(i, alpha);
  ContinuumLimitResult result;
  bool positive = true;
  for (double eps : eps_list) {
    Vec3 C;
    C[i.i] = 1.0;
    const PoissonTensor P{C, DeltaParams{0.5 * eps * alpha}};
    Mat3 lead = linear_bracket_matrix(x, gamma);
    for (double& e : lead.a) e *= 0.5 * eps;
    const double rem = norm_max(bracket_matrix(P, x) - lead);
    result.remainder.push_back(rem);
    positive = positive && rem > 0.0;
  }
  if (positive)
    result.slope = fit_loglog_slope(eps_list, result.remainder);
  return result;
}

}  // namespace hktop
