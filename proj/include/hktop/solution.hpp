// Closed-form solution of the HK map in Jacobi elliptic functions.
//
// For the sign pattern delta_1 < 0, delta_2 > 0, delta_3 < 0 the orbit through
// x0 is, depending on the regime,
//
//   F_2 > 1:  x = (A_1 cn, A_2 sn, A_3 dn)(nu n + phi_0)
//   F_2 < 1:  x = (A_1 dn, A_2 sn, A_3 cn)(nu n + phi_0)
//
// with amplitudes, modulus and sn^2(nu/2) determined by the integrals F_i.
// The integrals fix only the squares, so amplitude signs, the phase branch
// and the sign of nu remain open; fit_solution resolves them by deterministic
// search, accepting the candidate that reproduces x0 and one forward map step.

#pragma once

#include "hktop/core.hpp"
#include "hktop/elliptic.hpp"
#include "hktop/hk.hpp"

namespace hktop {

enum class SolutionAnsatz { CnSnDn, DnSnCn };

struct EllipticSolution {
  SolutionAnsatz ansatz;
  Vec3 amplitude;
  EllipticModulus modulus;
  double nu;    // discrete frequency: one map step advances the argument by nu
  double phi0;  // phase at n = 0
};

inline Vec3 eval_solution(const EllipticSolution& sol, long n) {
  const double u = sol.nu * static_cast<double>(n) + sol.phi0;
  const auto f = jacobi_sn_cn_dn(u, sol.modulus);
  const Vec3& A = sol.amplitude;
  if (sol.ansatz == SolutionAnsatz::CnSnDn)
    return {A[0] * f.cn, A[1] * f.sn, A[2] * f.dn};
  return {A[0] * f.dn, A[1] * f.sn, A[2] * f.cn};
}

namespace detail {

// Residuals of the half-argument amplitude conditions, cross-multiplied to
// avoid dividing by sn or k^2 near degenerate fits.
inline bool ansatz_conditions_hold(const EllipticSolution& sol, const DeltaParams& d) {
  const auto h = jacobi_sn_cn_dn(0.5 * sol.nu, sol.modulus);
  const double k2 = sol.modulus.k2();
  const Vec3& A = sol.amplitude;
  const Vec3& dd = d.delta;
  double lhs[3], rhs[3];
  if (sol.ansatz == SolutionAnsatz::CnSnDn) {
    lhs[0] = A[0] * h.sn * h.dn;
    rhs[0] = -dd[0] * A[1] * A[2] * h.cn;
    lhs[1] = A[1] * h.sn;
    rhs[1] = dd[1] * A[0] * A[2] * h.cn * h.dn;
    lhs[2] = A[2] * k2 * h.sn * h.cn;
    rhs[2] = -dd[2] * A[0] * A[1] * h.dn;
  } else {
    lhs[0] = A[0] * k2 * h.sn * h.cn;
    rhs[0] = -dd[0] * A[1] * A[2] * h.dn;
    lhs[1] = A[1] * h.sn;
    rhs[1] = dd[1] * A[0] * A[2] * h.cn * h.dn;
    lhs[2] = A[2] * h.sn * h.dn;
    rhs[2] = -dd[2] * A[0] * A[1] * h.cn;
  }
  for (int i = 0; i < 3; ++i)
    if (std::abs(lhs[i] - rhs[i]) >
        1e-9 * (1.0 + std::abs(lhs[i]) + std::abs(rhs[i])))
      return false;
  return true;
}

}  // namespace detail

inline EllipticSolution fit_solution(const Vec3& x0, const DeltaParams& d) {
  const Vec3& dd = d.delta;
  if (!(dd[0] < 0.0 && dd[1] > 0.0 && dd[2] < 0.0))
    throw WrongSignPattern(
        "fit_solution: requires delta_1 < 0, delta_2 > 0, delta_3 < 0");

  const double F1 = integral_F(x0, d, CyclicIndex(0));
  const double F2 = integral_F(x0, d, CyclicIndex(1));
  const double F3 = integral_F(x0, d, CyclicIndex(2));
  if (std::abs(F2 - 1.0) < 1e-10)
    throw RegimeBoundary("fit_solution: F_2 = 1 separatrix, modulus degenerates");
  const bool regime1 = F2 > 1.0;

  const double A1_sq = (1.0 - F3) / (dd[1] * dd[2]);
  const double A2_sq = regime1 ? (1.0 - 1.0 / F3) / (dd[0] * dd[2])
                               : (1.0 - F1) / (dd[0] * dd[2]);
  const double A3_sq = (1.0 - 1.0 / F1) / (dd[0] * dd[1]);
  const double k_sq = regime1 ? (1.0 - 1.0 / F3) / (1.0 - F1)
                              : (1.0 - F1) / (1.0 - 1.0 / F3);
  const double sn_half_sq = regime1 ? 1.0 - F1 : 1.0 - 1.0 / F3;

  if (!(A1_sq >= 0.0)) throw InconsistentInitialData("fit_solution: A_1^2 negative");
  if (!(A2_sq >= 0.0)) throw InconsistentInitialData("fit_solution: A_2^2 negative");
  if (!(A3_sq >= 0.0)) throw InconsistentInitialData("fit_solution: A_3^2 negative");
  if (!(k_sq > 0.0 && k_sq < 1.0))
    throw InconsistentInitialData("fit_solution: k^2 outside (0,1)");
  if (!(sn_half_sq > 0.0 && sn_half_sq <= 1.0))
    throw InconsistentInitialData("fit_solution: sn^2(nu/2) outside (0,1]");
  if (std::sqrt(k_sq) >= 0.999)
    throw RegimeBoundary("fit_solution: modulus k >= 0.999, too close to the separatrix");

  const EllipticModulus k = EllipticModulus::from_k2(k_sq);
  const double quarter = agm_K(k);
  const double nu0 = 2.0 * arcsn(std::sqrt(sn_half_sq), k);
  const Vec3 x1 = hk_step(x0, d);

  const double mag[3] = {std::sqrt(A1_sq), std::sqrt(A2_sq), std::sqrt(A3_sq)};
  const double nu_candidates[4] = {nu0, -nu0, 4.0 * quarter - nu0,
                                   -(4.0 * quarter - nu0)};

  for (int s1 : {1, -1}) {
    for (int s2 : {1, -1}) {
      for (int s3 : {1, -1}) {
        const Vec3 A{s1 * mag[0], s2 * mag[1], s3 * mag[2]};
        if (A[1] == 0.0 || (regime1 ? A[0] : A[2]) == 0.0) continue;
        const double t_sn = x0[1] / A[1];
        const double t_cn = regime1 ? x0[0] / A[0] : x0[2] / A[2];
        if (std::abs(t_sn * t_sn + t_cn * t_cn - 1.0) > 1e-6) continue;
        double phi0 = ellint_F(std::atan2(t_sn, t_cn), k);
        if (phi0 < 0.0) phi0 += 4.0 * quarter;  // phase branch lives in [0, 4K)
        for (double nu : nu_candidates) {
          EllipticSolution sol{regime1 ? SolutionAnsatz::CnSnDn
                                       : SolutionAnsatz::DnSnCn,
                               A, k, nu, phi0};
          const Vec3 e0 = eval_solution(sol, 0);
          if (!(mixed_deviation(e0[0], x0[0]) <= 1e-10 &&
                mixed_deviation(e0[1], x0[1]) <= 1e-10 &&
                mixed_deviation(e0[2], x0[2]) <= 1e-10))
            continue;
          const Vec3 e1 = eval_solution(sol, 1);
          if (!(mixed_deviation(e1[0], x1[0]) <= 1e-9 &&
                mixed_deviation(e1[1], x1[1]) <= 1e-9 &&
                mixed_deviation(e1[2], x1[2]) <= 1e-9))
            continue;
          if (!detail::ansatz_conditions_hold(sol, d)) continue;
          return sol;
        }
      }
    }
  }
  throw InconsistentInitialData(
      "fit_solution: no amplitude sign / phase branch reproduces x0 and one map step");
}

}  // namespace hktop
