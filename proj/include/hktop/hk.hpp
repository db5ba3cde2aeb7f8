// The Hirota-Kimura map
//
//   xt_i - x_i = delta_i (xt_j x_k + x_j xt_k),   (i j k) cyclic,
//
// solved as xt = A(x,delta)^{-1} x with A carrying unit diagonal and row-i
// off-diagonal entries -delta_i x_k, -delta_i x_j.  This header holds the map,
// its inverse and Jacobian, the conserved quantities F_i and H_i^(beta), the
// Lemma-1 ratios, the invariant volume densities and the Jonas map.

#pragma once

#include <optional>
#include <vector>

#include "hktop/core.hpp"
#include "hktop/euler.hpp"

namespace hktop {

struct DeltaParams {
  Vec3 delta;
};

// Parameters of the discrete system, optionally remembering the continuous
// source they came from (delta_i = eps * alpha_i / 2).
struct HKContext {
  DeltaParams delta;
  std::optional<AlphaParams> alpha;
  std::optional<double> eps;

  static HKContext from_delta(const Vec3& d) { return {{d}, std::nullopt, std::nullopt}; }

  static HKContext from_alpha(const AlphaParams& a, double eps) {
    if (!(eps > 0.0)) throw ArgumentOutOfRange("HKContext: eps must be positive");
    return {{0.5 * eps * a.alpha}, a, eps};
  }
};

enum class DensityForm { Product, Square };

// Picks one of the six invariant volume densities:
//   Product: phi = (1 - d_i d_j x_k^2)(1 - d_j d_k x_i^2)
//   Square:  phi = (1 - d_i d_j x_k^2)^2
struct DensityChoice {
  DensityForm form = DensityForm::Product;
  CyclicIndex index{0};
};

inline Mat3 build_A(const Vec3& x, const DeltaParams& d) {
  Mat3 A = Mat3::identity();
  for (int i = 0; i < 3; ++i) {
    const CyclicIndex ci(i);
    A(i, ci.j()) = -d.delta[i] * x[ci.k()];
    A(i, ci.k()) = -d.delta[i] * x[ci.j()];
  }
  return A;
}

// det A(x,delta) as the expanded quartic
//   1 - d_j d_k x_i^2 - d_i d_k x_j^2 - d_i d_j x_k^2 - 2 d_1 d_2 d_3 x_1 x_2 x_3.
inline double det_A(const Vec3& x, const DeltaParams& d) {
  const Vec3& dd = d.delta;
  return 1.0 - dd[1] * dd[2] * x[0] * x[0] - dd[0] * dd[2] * x[1] * x[1] -
         dd[0] * dd[1] * x[2] * x[2] - 2.0 * dd[0] * dd[1] * dd[2] * x[0] * x[1] * x[2];
}

namespace detail {

// The map is birational; poles of the rational expressions are genuine, so a
// step near the indeterminacy locus raises instead of amplifying noise.
inline void require_regular(const Vec3& x, const DeltaParams& d) {
  const double nd = norm(d.delta);
  const double nx = norm(x);
  const double floor_ = 1e-12 * (1.0 + nd * nd * nx * nx * nx * nx);
  if (std::abs(det_A(x, d)) < floor_)
    throw SingularMatrix("hk_step: det A(x,delta) vanishes (indeterminacy locus)");
}

}  // namespace detail

inline Vec3 hk_step(const Vec3& x, const DeltaParams& d) {
  detail::require_regular(x, d);
  return solve3(build_A(x, d), x);
}

// From xt = A(xt,-delta) x the inverse map is the forward map with -delta.
inline Vec3 hk_step_inverse(const Vec3& xt, const DeltaParams& d) {
  return hk_step(xt, DeltaParams{-d.delta});
}

// DPhi(x) = A(x,delta)^{-1} A(xt,-delta), columns obtained by differentiating
// the defining relations with respect to x.
inline Mat3 jacobian_matrix(const Vec3& x, const DeltaParams& d) {
  const Vec3 xt = hk_step(x, d);
  const Mat3 A = build_A(x, d);
  const Mat3 B = build_A(xt, DeltaParams{-d.delta});
  Mat3 J;
  for (int c = 0; c < 3; ++c) {
    const Vec3 col = solve3(A, Vec3{B(0, c), B(1, c), B(2, c)});
    for (int r = 0; r < 3; ++r) J(r, c) = col[r];
  }
  return J;
}

// F_i = (1 - d_k d_i x_j^2) / (1 - d_i d_j x_k^2); F_1 F_2 F_3 = 1.
inline double integral_F(const Vec3& x, const DeltaParams& d, CyclicIndex i) {
  const int j = i.j(), k = i.k();
  const Vec3& dd = d.delta;
  const double num = 1.0 - dd[k] * dd[i.i] * x[j] * x[j];
  const double den = 1.0 - dd[i.i] * dd[j] * x[k] * x[k];
  if (std::abs(den) < 1e-14 * (1.0 + std::abs(num)))
    throw DenominatorVanishes("integral_F: 1 - d_i d_j x_k^2 vanishes");
  return num / den;
}

// Analytic gradient of F_i; only the j and k components are nonzero.
inline Vec3 grad_F(const Vec3& x, const DeltaParams& d, CyclicIndex i) {
  const int j = i.j(), k = i.k();
  const Vec3& dd = d.delta;
  const double num = 1.0 - dd[k] * dd[i.i] * x[j] * x[j];
  const double den = 1.0 - dd[i.i] * dd[j] * x[k] * x[k];
  if (std::abs(den) < 1e-14 * (1.0 + std::abs(num)))
    throw DenominatorVanishes("grad_F: 1 - d_i d_j x_k^2 vanishes");
  Vec3 g;
  g[j] = -2.0 * dd[k] * dd[i.i] * x[j] / den;
  g[k] = 2.0 * dd[i.i] * dd[j] * x[k] * num / (den * den);
  return g;
}

// H_i^(beta) = H^(beta) / (1 - d_j d_k x_i^2), an integral of the map for
// every beta orthogonal to delta.
inline double integral_H(const Vec3& x, const DeltaParams& d, const Vec3& beta,
                         CyclicIndex i) {
  const double ortho = std::abs(dot(beta, d.delta));
  if (ortho > 1e-12 * norm(beta) * norm(d.delta))
    throw NotOrthogonal("integral_H: beta must be orthogonal to delta");
  const int j = i.j(), k = i.k();
  const double den = 1.0 - d.delta[j] * d.delta[k] * x[i.i] * x[i.i];
  if (std::abs(den) < 1e-14)
    throw DenominatorVanishes("integral_H: 1 - d_j d_k x_i^2 vanishes");
  return integral_Hbeta(x, beta) / den;
}

enum class RatioSign { Plus, Minus };

// Lemma-1 ratio (x_i +/- d_i x_j x_k) / (1 - d_j d_k x_i^2).  The minus
// ratio after a step equals the plus ratio before it.
inline double lemma_ratio(const Vec3& x, const DeltaParams& d, CyclicIndex i,
                          RatioSign sign) {
  const int j = i.j(), k = i.k();
  const double den = 1.0 - d.delta[j] * d.delta[k] * x[i.i] * x[i.i];
  if (std::abs(den) < 1e-14)
    throw DenominatorVanishes("lemma_ratio: 1 - d_j d_k x_i^2 vanishes");
  const double cross_term = d.delta[i.i] * x[j] * x[k];
  const double num = (sign == RatioSign::Plus) ? x[i.i] + cross_term : x[i.i] - cross_term;
  return num / den;
}

// Evaluates the chosen invariant volume density; det DPhi = phi(xt)/phi(x)
// holds for each of the six choices.
inline double density(const Vec3& x, const DeltaParams& d, DensityChoice choice) {
  const int i = choice.index.i, j = choice.index.j(), k = choice.index.k();
  const Vec3& dd = d.delta;
  const double uk = 1.0 - dd[i] * dd[j] * x[k] * x[k];
  if (choice.form == DensityForm::Square) return uk * uk;
  const double ui = 1.0 - dd[j] * dd[k] * x[i] * x[i];
  return uk * ui;
}

// Jonas map: solves x_i + xt_i + x_j xt_k + x_k xt_j = 0 from its own linear
// system (unit diagonal, +x_k and +x_j off the diagonal in row i).  The
// sign conjugacy to the HK map at delta = (-1,-1,-1) is a tested fact, not
// an implementation shortcut.
inline Vec3 jonas_step(const Vec3& x) {
  Mat3 B = Mat3::identity();
  for (int i = 0; i < 3; ++i) {
    const CyclicIndex ci(i);
    B(i, ci.j()) = x[ci.k()];
    B(i, ci.k()) = x[ci.j()];
  }
  return solve3(B, -x);
}

struct FExpansionResult {
  std::array<double, 3> slope{};                 // fitted order of |r_i - 1|, expect ~2
  std::vector<std::array<double, 3>> ratio;      // r_i per eps, expect -> 1
};

// Checks F_i = 1 + (eps^2 alpha_i / 2) G_i + O(eps^4) with delta = eps*alpha/2
// by fitting the decay order of r_i(eps) - 1, r_i = (F_i - 1)/((eps^2 alpha_i/2) G_i).
inline FExpansionResult f_expansion_check(const Vec3& x, const AlphaParams& a,
                                          std::span<const double> eps_list) {
  if (eps_list.size() < 4)
    throw ArgumentOutOfRange("f_expansion_check: need at least 4 eps values");
  for (std::size_t t = 1; t < eps_list.size(); ++t)
    if (!(eps_list[t] < eps_list[t - 1]) || !(eps_list[t] > 0.0))
      throw ArgumentOutOfRange("f_expansion_check: eps_list must be positive decreasing");

  std::array<double, 3> g;
  for (int i = 0; i < 3; ++i) {
    g[i] = a.alpha[i] * integral_G(x, a, CyclicIndex(i));
    if (g[i] == 0.0)
      throw DegenerateInstance("f_expansion_check: alpha_i * G_i vanishes at x");
  }

  FExpansionResult result;
  std::array<std::vector<double>, 3> dev;
  for (double eps : eps_list) {
    const DeltaParams d{0.5 * eps * a.alpha};
    std::array<double, 3> r;
    for (int i = 0; i < 3; ++i) {
      const double fi = integral_F(x, d, CyclicIndex(i));
      r[i] = (fi - 1.0) / (0.5 * eps * eps * g[i]);
      dev[i].push_back(std::abs(r[i] - 1.0));
    }
    result.ratio.push_back(r);
  }
  for (int i = 0; i < 3; ++i)
    result.slope[i] = fit_loglog_slope(eps_list, dev[i]);
  return result;
}

}  // namespace hktop
