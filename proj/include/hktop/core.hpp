// Vec3/Mat3 arithmetic, the cyclic index convention, a pivoted 3x3 solver
// and deterministic sampling shared by all modules.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hktop {

// ---------------------------------------------------------------------------
// Error types. Every numerical failure mode has its own class so callers can
// map them to exit codes / messages without string matching.
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularMatrix : public Error { public: using Error::Error; };
class DenominatorVanishes : public Error { public: using Error::Error; };
class NotOrthogonal : public Error { public: using Error::Error; };
class DegenerateInstance : public Error { public: using Error::Error; };
class NonPositiveInertia : public Error { public: using Error::Error; };
class ZeroVector : public Error { public: using Error::Error; };
class ModulusOutOfRange : public Error { public: using Error::Error; };
class ArgumentOutOfRange : public Error { public: using Error::Error; };
class WrongSignPattern : public Error { public: using Error::Error; };
class RegimeBoundary : public Error { public: using Error::Error; };
class InconsistentInitialData : public Error { public: using Error::Error; };
class NewtonDiverged : public Error { public: using Error::Error; };
class SingularJacobian : public Error { public: using Error::Error; };

// ---------------------------------------------------------------------------
// Vec3
// ---------------------------------------------------------------------------

struct Vec3 {
  std::array<double, 3> c{0.0, 0.0, 0.0};

  constexpr Vec3() = default;
  constexpr Vec3(double a, double b, double d) : c{a, b, d} {}

  constexpr double operator[](int i) const { return c[static_cast<std::size_t>(i)]; }
  constexpr double& operator[](int i) { return c[static_cast<std::size_t>(i)]; }

  Vec3& operator+=(const Vec3& o) {
    for (int i = 0; i < 3; ++i) c[i] += o.c[i];
    return *this;
  }
  Vec3& operator-=(const Vec3& o) {
    for (int i = 0; i < 3; ++i) c[i] -= o.c[i];
    return *this;
  }
  Vec3& operator*=(double s) {
    for (auto& v : c) v *= s;
    return *this;
  }

  bool finite() const {
    return std::isfinite(c[0]) && std::isfinite(c[1]) && std::isfinite(c[2]);
  }
};

inline Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
inline Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
inline Vec3 operator*(double s, Vec3 a) { return a *= s; }
inline Vec3 operator*(Vec3 a, double s) { return a *= s; }
inline Vec3 operator-(const Vec3& a) { return {-a[0], -a[1], -a[2]}; }

inline double dot(const Vec3& a, const Vec3& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2],
          a[0] * b[1] - a[1] * b[0]};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline double norm_inf(const Vec3& a) {
  return std::max({std::abs(a[0]), std::abs(a[1]), std::abs(a[2])});
}

// ---------------------------------------------------------------------------
// Cyclic index convention: (i j k) ranges over the cyclic shifts of (0 1 2).
// Stored zero-based; user-facing labels add one.
// ---------------------------------------------------------------------------

struct CyclicIndex {
  int i = 0;

  constexpr explicit CyclicIndex(int idx) : i(idx) {
    if (idx < 0 || idx > 2) throw ArgumentOutOfRange("cyclic index must be 0, 1 or 2");
  }
  constexpr int j() const { return (i + 1) % 3; }
  constexpr int k() const { return (i + 2) % 3; }
  constexpr CyclicIndex next() const { return CyclicIndex((i + 1) % 3); }
};

// ---------------------------------------------------------------------------
// Mat3, row-major
// ---------------------------------------------------------------------------

struct Mat3 {
  std::array<double, 9> a{};

  constexpr double operator()(int r, int c) const {
    return a[static_cast<std::size_t>(3 * r + c)];
  }
  constexpr double& operator()(int r, int c) {
    return a[static_cast<std::size_t>(3 * r + c)];
  }

  static constexpr Mat3 identity() {
    Mat3 m;
    m(0, 0) = m(1, 1) = m(2, 2) = 1.0;
    return m;
  }
  static constexpr Mat3 diagonal(double d0, double d1, double d2) {
    Mat3 m;
    m(0, 0) = d0;
    m(1, 1) = d1;
    m(2, 2) = d2;
    return m;
  }

  Mat3 transposed() const {
    Mat3 t;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) t(r, c) = (*this)(c, r);
    return t;
  }
};

inline Mat3 operator*(const Mat3& m, const Mat3& n) {
  Mat3 p;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) {
      double s = 0.0;
      for (int l = 0; l < 3; ++l) s += m(r, l) * n(l, c);
      p(r, c) = s;
    }
  return p;
}

inline Vec3 operator*(const Mat3& m, const Vec3& v) {
  Vec3 w;
  for (int r = 0; r < 3; ++r)
    w[r] = m(r, 0) * v[0] + m(r, 1) * v[1] + m(r, 2) * v[2];
  return w;
}

inline Mat3 operator-(const Mat3& m, const Mat3& n) {
  Mat3 d;
  for (int t = 0; t < 9; ++t) d.a[t] = m.a[t] - n.a[t];
  return d;
}

inline double norm_max(const Mat3& m) {
  double v = 0.0;
  for (double e : m.a) v = std::max(v, std::abs(e));
  return v;
}

// Cofactor expansion along the first row; exact arithmetic structure, no
// pivoting.  The elimination-based value lives in the test oracle.
inline double det3(const Mat3& m) {
  return m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1)) -
         m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0)) +
         m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0));
}

// Solves M x = b by Gaussian elimination with partial pivoting.  The
// singularity test is relative to the matrix magnitude, since delta sweeps
// put entries across many orders of magnitude.
inline Vec3 solve3(const Mat3& m, const Vec3& b) {
  double aug[3][4];
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) aug[r][c] = m(r, c);
    aug[r][3] = b[r];
  }
  const double scale = std::max(norm_max(m), std::numeric_limits<double>::min());

  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::abs(aug[r][col]) > std::abs(aug[piv][col])) piv = r;
    if (std::abs(aug[piv][col]) <= 1e-14 * scale)
      throw SingularMatrix("solve3: pivot below 1e-14 * |M|");
    if (piv != col)
      for (int c = col; c < 4; ++c) std::swap(aug[piv][c], aug[col][c]);
    for (int r = col + 1; r < 3; ++r) {
      const double f = aug[r][col] / aug[col][col];
      for (int c = col; c < 4; ++c) aug[r][c] -= f * aug[col][c];
    }
  }
  Vec3 x;
  for (int r = 2; r >= 0; --r) {
    double s = aug[r][3];
    for (int c = r + 1; c < 3; ++c) s -= aug[r][c] * x[c];
    x[r] = s / aug[r][r];
  }
  if (!x.finite()) throw SingularMatrix("solve3: non-finite solution");
  return x;
}

inline Mat3 invert3(const Mat3& m) {
  Mat3 inv;
  for (int c = 0; c < 3; ++c) {
    Vec3 e;
    e[c] = 1.0;
    Vec3 col = solve3(m, e);
    for (int r = 0; r < 3; ++r) inv(r, c) = col[r];
  }
  return inv;
}

// ---------------------------------------------------------------------------
// Deterministic sampling.  SplitMix64: same seed gives the same stream on
// every platform (pure 64-bit integer arithmetic).
// ---------------------------------------------------------------------------

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform in [-1, 1)
  double next_symmetric() { return 2.0 * next_double() - 1.0; }

 private:
  std::uint64_t state_;
};

inline Vec3 sample_state(std::uint64_t seed, double box) {
  if (box < 0.0) throw ArgumentOutOfRange("sample_state: box must be >= 0");
  SplitMix64 rng(seed);
  Vec3 x;
  for (int i = 0; i < 3; ++i) x[i] = box * rng.next_symmetric();
  return x;
}

// ---------------------------------------------------------------------------
// Small numeric helpers used across modules and by the CLI.
// ---------------------------------------------------------------------------

// Mixed absolute/relative comparison: |a-b| <= tol * (1 + max(|a|,|b|)).
inline bool close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * (1.0 + std::max(std::abs(a), std::abs(b)));
}

inline double mixed_deviation(double a, double b) {
  return std::abs(a - b) / (1.0 + std::max(std::abs(a), std::abs(b)));
}

// Least-squares slope of log(values) against log(abscissae); the standard
// observed-order fit for convergence studies.
inline double fit_loglog_slope(std::span<const double> abscissae,
                               std::span<const double> values) {
  if (abscissae.size() != values.size() || abscissae.size() < 2)
    throw ArgumentOutOfRange("fit_loglog_slope: need two or more matching samples");
  const std::size_t n = abscissae.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t t = 0; t < n; ++t) {
    if (!(abscissae[t] > 0.0) || !(values[t] > 0.0))
      throw ArgumentOutOfRange("fit_loglog_slope: samples must be positive");
    const double lx = std::log(abscissae[t]);
    const double ly = std::log(values[t]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double dn = static_cast<double>(n);
  return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

// Central finite differences of a vector field; used as a cross-check oracle
// against analytic Jacobians, never as the primary path.
template <typename F>
Mat3 finite_difference_jacobian(F&& f, const Vec3& x, double h = 1e-6) {
  Mat3 J;
  for (int c = 0; c < 3; ++c) {
    Vec3 xp = x, xm = x;
    xp[c] += h;
    xm[c] -= h;
    const Vec3 fp = f(xp);
    const Vec3 fm = f(xm);
    for (int r = 0; r < 3; ++r) J(r, c) = (fp[r] - fm[r]) / (2.0 * h);
  }
  return J;
}

}  // namespace hktop
