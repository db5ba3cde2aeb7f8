// Jacobi elliptic functions sn, cn, dn of real argument and modulus
// 0 <= k < 1, the complete quarter period K(k), and the inverse arcsn via
// Carlson's symmetric integral R_F.
//
// sn/cn/dn use the descending AGM scheme (Abramowitz & Stegun 16.4): run the
// arithmetic-geometric mean upward, seed phi_N = 2^N a_N u, then unwind
//   sin(2 phi_{n-1} - phi_n) = (c_n / a_n) sin(phi_n).
// Arguments are first reduced modulo the real period 4K so the upward
// doubling never amplifies roundoff; a trigonometric series takes over for
// very small moduli.

#pragma once

#include <algorithm>

#include "hktop/core.hpp"

namespace hktop {

class EllipticModulus {
 public:
  explicit EllipticModulus(double k) : k_(k), k2_(k * k) {
    if (!(k >= 0.0) || !(k < 1.0))
      throw ModulusOutOfRange("elliptic modulus must satisfy 0 <= k < 1");
  }
  static EllipticModulus from_k2(double k2) {
    if (!(k2 >= 0.0) || !(k2 < 1.0))
      throw ModulusOutOfRange("elliptic modulus squared must satisfy 0 <= k^2 < 1");
    return EllipticModulus(std::sqrt(k2));
  }
  double k() const { return k_; }
  double k2() const { return k2_; }

 private:
  double k_;
  double k2_;
};

namespace detail {
inline constexpr double pi = 3.14159265358979323846264338327950288;
inline constexpr int agm_max_iter = 32;
}  // namespace detail

// Complete elliptic integral of the first kind, K = pi / (2 agm(1, k')).
inline double agm_K(EllipticModulus k) {
  double a = 1.0;
  double b = std::sqrt(1.0 - k.k2());
  for (int n = 0; n < detail::agm_max_iter && std::abs(a - b) > 1e-17 * a; ++n) {
    const double an = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = an;
  }
  return detail::pi / (a + b);
}

struct JacobiSnCnDn {
  double sn, cn, dn;
};

inline JacobiSnCnDn jacobi_sn_cn_dn(double u, EllipticModulus k) {
  const double k2 = k.k2();

  // Small-modulus series (A&S 16.13), error O(k^4) < 1e-20 on this branch.
  if (k2 < 1e-10) {
    const double s = std::sin(u), c = std::cos(u);
    const double w = 0.25 * k2 * (u - s * c);
    return {s - w * c, c + w * s, 1.0 - 0.5 * k2 * s * s};
  }

  const double quarter = agm_K(k);
  const double ur = std::remainder(u, 4.0 * quarter);

  double a_seq[detail::agm_max_iter + 1];
  double c_seq[detail::agm_max_iter + 1];
  double a = 1.0, b = std::sqrt(1.0 - k2);
  a_seq[0] = a;
  c_seq[0] = k.k();
  int n = 0;
  while (n < detail::agm_max_iter &&
         std::abs(c_seq[n]) > std::numeric_limits<double>::epsilon() * a) {
    const double an = 0.5 * (a + b);
    const double cn_next = 0.5 * (a - b);
    b = std::sqrt(a * b);
    a = an;
    ++n;
    a_seq[n] = a;
    c_seq[n] = cn_next;
  }

  double phi = std::ldexp(a_seq[n] * ur, n);
  for (int m = n; m >= 1; --m) {
    const double s = std::clamp(c_seq[m] / a_seq[m] * std::sin(phi), -1.0, 1.0);
    phi = 0.5 * (phi + std::asin(s));
  }
  const double sn = std::sin(phi);
  const double cn = std::cos(phi);
  const double dn = std::sqrt(1.0 - k2 * sn * sn);  // dn > 0 for k < 1, real u
  return {sn, cn, dn};
}

// Carlson's symmetric integral R_F(x,y,z); duplication with the fifth-order
// Taylor tail (error ~ tol^6, tol = 0.0025 reaches double precision).
inline double carlson_rf(double x, double y, double z) {
  if (x < 0.0 || y < 0.0 || z < 0.0 || x + y <= 0.0 || y + z <= 0.0 || x + z <= 0.0)
    throw ArgumentOutOfRange("carlson_rf: arguments must be nonnegative, at most one zero");
  constexpr double errtol = 0.0025;
  double xt = x, yt = y, zt = z, ave = 0.0, dx = 0.0, dy = 0.0, dz = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double sx = std::sqrt(xt), sy = std::sqrt(yt), sz = std::sqrt(zt);
    const double lam = sx * (sy + sz) + sy * sz;
    xt = 0.25 * (xt + lam);
    yt = 0.25 * (yt + lam);
    zt = 0.25 * (zt + lam);
    ave = (xt + yt + zt) / 3.0;
    dx = (ave - xt) / ave;
    dy = (ave - yt) / ave;
    dz = (ave - zt) / ave;
    if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) < errtol) break;
  }
  const double e2 = dx * dy - dz * dz;
  const double e3 = dx * dy * dz;
  return (1.0 + (e2 / 24.0 - 0.1 - 3.0 * e3 / 44.0) * e2 + e3 / 14.0) / std::sqrt(ave);
}

// Inverse of sn on the principal branch: u in [-K, K] with sn(u,k) = s.
inline double arcsn(double s, EllipticModulus k) {
  if (!(s >= -1.0 && s <= 1.0))
    throw ArgumentOutOfRange("arcsn: argument must lie in [-1, 1]");
  return s * carlson_rf(1.0 - s * s, 1.0 - k.k2() * s * s, 1.0);
}

// Incomplete elliptic integral of the first kind F(phi, k) for any real phi,
// reduced by F(phi + n pi) = F(phi) + 2 n K.
inline double ellint_F(double phi, EllipticModulus k) {
  const double n = std::round(phi / detail::pi);
  const double r = phi - n * detail::pi;  // in [-pi/2, pi/2]
  double f = arcsn(std::sin(r), k);
  if (n != 0.0) f += 2.0 * n * agm_K(k);
  return f;
}

// Max absolute residual over the six addition formulas used in the
// closed-form solution of the HK map.
inline double addition_formula_residuals(double xi, double eta, EllipticModulus k) {
  const auto fxi = jacobi_sn_cn_dn(xi, k);
  const auto fet = jacobi_sn_cn_dn(eta, k);
  const auto fp = jacobi_sn_cn_dn(xi + eta, k);
  const auto fm = jacobi_sn_cn_dn(xi - eta, k);
  const double k2 = k.k2();
  const double den = 1.0 - k2 * fxi.sn * fxi.sn * fet.sn * fet.sn;
  if (std::abs(den) < 1e-14)
    throw DenominatorVanishes("addition formulas: 1 - k^2 sn^2 xi sn^2 eta vanishes");

  const double r1 = (fp.cn - fm.cn) + 2.0 * fxi.sn * fxi.dn * fet.sn * fet.dn / den;
  const double r2 = (fp.sn - fm.sn) - 2.0 * fxi.cn * fxi.dn * fet.sn / den;
  const double r3 = (fp.dn - fm.dn) + 2.0 * k2 * fxi.sn * fxi.cn * fet.sn * fet.cn / den;
  const double r4 =
      (fp.sn * fm.dn + fm.sn * fp.dn) - 2.0 * fxi.sn * fxi.dn * fet.cn / den;
  const double r5 =
      (fp.cn * fm.dn + fm.cn * fp.dn) - 2.0 * fxi.cn * fxi.dn * fet.cn * fet.dn / den;
  const double r6 =
      (fp.sn * fm.cn + fm.sn * fp.cn) - 2.0 * fxi.sn * fxi.cn * fet.dn / den;

  return std::max({std::abs(r1), std::abs(r2), std::abs(r3), std::abs(r4),
                   std::abs(r5), std::abs(r6)});
}

}  // namespace hktop
