// Implicit discretization xt_i - x_i = gamma alpha_i (xt_j + x_j)(xt_k + x_k)
// with the simplest choice gamma = eps/4, solved by Newton iteration from the
// explicit Euler predictor.  It conserves the continuous integrals G_i
// exactly at the converged solution, in contrast with the HK map's F_i.

#pragma once

#include "hktop/core.hpp"
#include "hktop/euler.hpp"

namespace hktop {

struct BLSConfig {
  AlphaParams alpha;
  double eps;
  double gamma;
  double newton_tol = 1e-13;
  int max_iter = 50;

  BLSConfig(const AlphaParams& a, double eps_) : alpha(a), eps(eps_), gamma(eps_ / 4.0) {
    if (!(eps > 0.0)) throw ArgumentOutOfRange("BLSConfig: eps must be positive");
  }
  BLSConfig(const AlphaParams& a, double eps_, double gamma_)
      : alpha(a), eps(eps_), gamma(gamma_) {
    if (!(eps > 0.0)) throw ArgumentOutOfRange("BLSConfig: eps must be positive");
  }
};

struct BLSStepResult {
  Vec3 x;
  int iterations;     // Newton iterations until the residual passed newton_tol
  double residual;    // final residual, usually polished to machine level
};

// Full Newton solve.  Iteration continues past newton_tol while the residual
// keeps improving, so the per-step G_i error sits at rounding level rather
// than at the tolerance; newton_tol is the acceptance bound only.
inline BLSStepResult bls_step_detailed(const Vec3& x, const BLSConfig& cfg) {
  if (!(cfg.newton_tol > 0.0))
    throw ArgumentOutOfRange("bls_step: newton_tol must be positive");
  const Vec3& a = cfg.alpha.alpha;
  const double g = cfg.gamma;

  auto residual = [&](const Vec3& y) {
    Vec3 r;
    for (int i = 0; i < 3; ++i) {
      const CyclicIndex ci(i);
      r[i] = y[i] - x[i] -
             g * a[i] * (y[ci.j()] + x[ci.j()]) * (y[ci.k()] + x[ci.k()]);
    }
    return r;
  };

  Vec3 y = x + cfg.eps * euler_rhs(x, cfg.alpha);
  Vec3 r = residual(y);
  double res = norm_inf(r);
  int accepted_at = (res < cfg.newton_tol) ? 0 : -1;
  for (int it = 1; it <= cfg.max_iter && res > 0.0; ++it) {
    Mat3 J = Mat3::identity();
    for (int i = 0; i < 3; ++i) {
      const CyclicIndex ci(i);
      J(i, ci.j()) = -g * a[i] * (y[ci.k()] + x[ci.k()]);
      J(i, ci.k()) = -g * a[i] * (y[ci.j()] + x[ci.j()]);
    }
    Vec3 dy;
    try {
      dy = solve3(J, r);
    } catch (const SingularMatrix&) {
      throw SingularJacobian("bls_step: Newton Jacobian is singular");
    }
    const Vec3 y_next = y - dy;
    const Vec3 r_next = residual(y_next);
    const double next = norm_inf(r_next);
    if (next >= res) break;  // rounding floor, keep the best iterate
    y = y_next;
    r = r_next;
    res = next;
    if (accepted_at < 0 && res < cfg.newton_tol) accepted_at = it;
  }
  if (accepted_at < 0)
    throw NewtonDiverged("bls_step: Newton iteration did not reach newton_tol");
  return {y, accepted_at, res};
}

inline Vec3 bls_step(const Vec3& x, const BLSConfig& cfg) {
  return bls_step_detailed(x, cfg).x;
}

// The defining relations are symmetric under x <-> xt with gamma -> -gamma,
// so the inverse step is the forward solve with negated gamma.
inline Vec3 bls_inverse_step(const Vec3& xt, const BLSConfig& cfg) {
  BLSConfig back = cfg;
  back.gamma = -cfg.gamma;
  return bls_step_detailed(xt, back).x;
}

}  // namespace hktop
