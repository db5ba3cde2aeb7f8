#include <catch2/catch_amalgamated.hpp>

#include "hktop/euler.hpp"
#include "oracles.hpp"

using namespace hktop;

namespace {

Vec3 beta_cross_gamma(const Vec3& beta, const Vec3& gamma) {
  Vec3 a;
  for (int i = 0; i < 3; ++i) {
    const CyclicIndex c(i);
    a[i] = beta[c.j()] * gamma[c.k()] - beta[c.k()] * gamma[c.j()];
  }
  return a;
}

}  // namespace

TEST_CASE("euler_rhs basics") {
  const AlphaParams a{{-1.0 / 6.0, 2.0 / 3.0, -0.5}, Formulation::Raw};

  const Vec3 eq = euler_rhs(Vec3{1.7, 0.0, 0.0}, a);
  CHECK(norm(eq) == 0.0);

  const Vec3 z = euler_rhs(Vec3{1.0, 2.0, 3.0}, AlphaParams{});
  CHECK(norm(z) == 0.0);

  const Vec3 v = euler_rhs(Vec3{1.0, 1.0, 1.0}, a);
  CHECK(v[0] == a.alpha[0]);
  CHECK(v[1] == a.alpha[1]);
  CHECK(v[2] == a.alpha[2]);
}

TEST_CASE("alpha_from_inertia, both formulations") {
  const Inertia I(Vec3{1.0, 2.0, 3.0});

  const AlphaParams mom = alpha_from_inertia(I, Formulation::Momentum);
  CHECK(std::abs(mom.alpha[0] - (1.0 / 3.0 - 1.0 / 2.0)) < 1e-15);
  CHECK(std::abs(mom.alpha[1] - 2.0 / 3.0) < 1e-15);
  CHECK(std::abs(mom.alpha[2] + 0.5) < 1e-15);

  const AlphaParams vel = alpha_from_inertia(I, Formulation::Velocity);
  CHECK(vel.alpha[0] == -1.0);
  CHECK(vel.alpha[1] == 1.0);
  CHECK(std::abs(vel.alpha[2] + 1.0 / 3.0) < 1e-16);

  const AlphaParams sym = alpha_from_inertia(Inertia(Vec3{2.0, 2.0, 2.0}),
                                             Formulation::Velocity);
  CHECK(norm(sym.alpha) == 0.0);

  CHECK_THROWS_AS(Inertia(Vec3{1.0, -2.0, 3.0}), NonPositiveInertia);
}

TEST_CASE("ordered inertia gives the (-,+,-) delta sign pattern") {
  SplitMix64 rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    double m0 = 0.2 + rng.next_double();
    const Vec3 I{m0, m0 + 0.1 + rng.next_double(), m0 + 1.2 + rng.next_double()};
    for (Formulation f : {Formulation::Velocity, Formulation::Momentum}) {
      const Vec3 a = alpha_from_inertia(Inertia(I), f).alpha;
      const double eps = 0.05 + 0.1 * rng.next_double();
      const Vec3 delta = 0.5 * eps * a;
      CHECK(delta[0] < 0.0);
      CHECK(delta[1] > 0.0);
      CHECK(delta[2] < 0.0);
    }
  }
}

TEST_CASE("H^beta values and time derivative identity") {
  CHECK(integral_Hbeta(Vec3{}, Vec3{4.0, 5.0, 6.0}) == 0.0);
  CHECK(integral_Hbeta(Vec3{1.0, 2.0, 3.0}, Vec3{1.0, 1.0, 1.0}) == 7.0);

  // d/dt H^(beta) along the flow equals (beta . alpha) x1 x2 x3.
  SplitMix64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const AlphaParams a{
        {rng.next_symmetric(), rng.next_symmetric(), rng.next_symmetric()},
        Formulation::Raw};
    const Vec3 beta{rng.next_symmetric(), rng.next_symmetric(), rng.next_symmetric()};
    const Vec3 x = sample_state(1000 + trial, 1.5);
    const double lhs = dot(grad_Hbeta(x, beta), euler_rhs(x, a));
    const double rhs = dot(beta, a.alpha) * x[0] * x[1] * x[2];
    CHECK(std::abs(lhs - rhs) <= 1e-13 * (1.0 + std::abs(lhs)));
  }
}

TEST_CASE("G_i relations") {
  const AlphaParams zero_x_alpha{{0.3, -0.4, 0.9}, Formulation::Raw};
  for (int i = 0; i < 3; ++i)
    CHECK(integral_G(Vec3{}, zero_x_alpha, CyclicIndex(i)) == 0.0);

  SplitMix64 rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    const AlphaParams a{
        {rng.next_symmetric(), rng.next_symmetric(), rng.next_symmetric()},
        Formulation::Raw};
    const Vec3 x = sample_state(5000 + trial, 2.0);

    double sum = 0.0;
    for (int i = 0; i < 3; ++i)
      sum += a.alpha[i] * integral_G(x, a, CyclicIndex(i));
    CHECK(std::abs(sum) <= 1e-14 * (1.0 + norm(a.alpha) * norm(x) * norm(x)));

    // alpha_i H^(beta) = beta_j G_k - beta_k G_j for beta orthogonal to alpha
    auto [b1, b2] = orthogonal_basis(a.alpha);
    for (const Vec3& beta : {b1, b2}) {
      const double H = integral_Hbeta(x, beta);
      for (int i = 0; i < 3; ++i) {
        const CyclicIndex c(i);
        const double lhs = a.alpha[i] * H;
        const double rhs = beta[c.j()] * integral_G(x, a, CyclicIndex(c.k())) -
                           beta[c.k()] * integral_G(x, a, CyclicIndex(c.j()));
        CHECK(std::abs(lhs - rhs) <= 1e-13 * (1.0 + std::abs(lhs)));
      }
    }
  }
}

TEST_CASE("linear bracket generates the flow when alpha = beta x gamma") {
  CHECK(norm_max(linear_bracket_matrix(Vec3{}, Vec3{1.0, 2.0, 3.0})) == 0.0);

  SplitMix64 rng(23);
  for (int trial = 0; trial < 300; ++trial) {
    const Vec3 beta{rng.next_symmetric(), rng.next_symmetric(), rng.next_symmetric()};
    const Vec3 gamma{rng.next_symmetric(), rng.next_symmetric(), rng.next_symmetric()};
    const AlphaParams a{beta_cross_gamma(beta, gamma), Formulation::Raw};
    const Vec3 x = sample_state(9000 + trial, 1.5);
    const Vec3 ham = linear_bracket_matrix(x, gamma) * grad_Hbeta(x, beta);
    const Vec3 field = euler_rhs(x, a);
    CHECK(norm_inf(ham - field) <= 1e-13 * (1.0 + norm_inf(field)));
  }
}

TEST_CASE("four explicit Hamiltonian formulations reproduce the field") {
  SplitMix64 rng(29);
  for (int trial = 0; trial < 50; ++trial) {
    const Vec3 I{0.5 + rng.next_double(), 1.6 + rng.next_double(),
                 2.7 + rng.next_double()};
    const Inertia inertia(I);
    const Vec3 a_vel = alpha_from_inertia(inertia, Formulation::Velocity).alpha;
    const Vec3 a_mom = alpha_from_inertia(inertia, Formulation::Momentum).alpha;

    struct Formulation3 {
      Vec3 alpha, beta, gamma;
    };
    const Formulation3 forms[4] = {
        // velocity pair; the first gamma is the sign-corrected one
        {a_vel, I, Vec3{-I[0] / (I[1] * I[2]), -I[1] / (I[2] * I[0]),
                        -I[2] / (I[0] * I[1])}},
        {a_vel, Vec3{I[0] * I[0], I[1] * I[1], I[2] * I[2]},
         Vec3{1.0 / (I[1] * I[2]), 1.0 / (I[2] * I[0]), 1.0 / (I[0] * I[1])}},
        // momentum pair; the first is the body-frame bracket {M_i,M_j} = -M_k
        {a_mom, Vec3{1.0 / I[0], 1.0 / I[1], 1.0 / I[2]}, Vec3{-1.0, -1.0, -1.0}},
        {a_mom, Vec3{1.0, 1.0, 1.0}, Vec3{1.0 / I[0], 1.0 / I[1], 1.0 / I[2]}},
    };

    const Vec3 x = sample_state(700 + trial, 1.2);
    for (const auto& f : forms) {
      // each pair satisfies the compatibility relation alpha = beta x gamma
      CHECK(norm_inf(beta_cross_gamma(f.beta, f.gamma) - f.alpha) <=
            1e-13 * (1.0 + norm_inf(f.alpha)));
      const Vec3 ham = linear_bracket_matrix(x, f.gamma) * grad_Hbeta(x, f.beta);
      const Vec3 field = euler_rhs(x, AlphaParams{f.alpha, Formulation::Raw});
      CHECK(norm_inf(ham - field) <= 1e-13 * (1.0 + norm_inf(field)));
    }
  }
}

TEST_CASE("rk4_step fixed point and local order") {
  const AlphaParams a{{-1.0 / 6.0, 2.0 / 3.0, -0.5}, Formulation::Raw};
  const Vec3 eq{0.9, 0.0, 0.0};
  CHECK(norm_inf(rk4_step(eq, a, 0.05) - eq) == 0.0);
  CHECK_THROWS_AS(rk4_step(eq, a, 0.0), ArgumentOutOfRange);

  // One-step H drift scales like h^5: halving h shrinks it ~32x.
  const Vec3 x0{1.0, 0.8, 0.6};
  const Vec3 beta{a.alpha[1], -a.alpha[0], 0.0};  // orthogonal to alpha
  const double H0 = integral_Hbeta(x0, beta);
  double prev = 0.0;
  std::vector<double> hs{0.2, 0.1, 0.05, 0.025};
  std::vector<double> drifts;
  for (double h : hs) {
    const double drift = std::abs(integral_Hbeta(rk4_step(x0, a, h), beta) - H0);
    drifts.push_back(drift);
    if (prev > 0.0) {
      const double ratio = prev / drift;
      CHECK(ratio > 20.0);
      CHECK(ratio < 44.0);
    }
    prev = drift;
  }
  const double slope = fit_loglog_slope(hs, drifts);
  CHECK(slope > 4.6);
  CHECK(slope < 5.4);

  // each G_i drifts at least as fast as h^5 (a leading coefficient may cancel)
  for (int i = 0; i < 3; ++i) {
    const double g0 = integral_G(x0, a, CyclicIndex(i));
    std::vector<double> gd;
    for (double h : hs)
      gd.push_back(std::abs(integral_G(rk4_step(x0, a, h), a, CyclicIndex(i)) - g0));
    CHECK(fit_loglog_slope(hs, gd) > 4.6);
  }
}

TEST_CASE("rk4 observed global order is four") {
  const AlphaParams a{{-1.0 / 6.0, 2.0 / 3.0, -0.5}, Formulation::Raw};
  const Vec3 x0{1.0, 0.8, 0.6};
  const double T = 1.0;

  Vec3 ref = x0;
  const int n_ref = 4000;
  for (int s = 0; s < n_ref; ++s) ref = rk4_step(ref, a, T / n_ref);

  std::vector<double> hs{0.1, 0.05, 0.025, 0.0125};
  std::vector<double> errs;
  for (double h : hs) {
    Vec3 y = x0;
    const int n = static_cast<int>(std::round(T / h));
    for (int s = 0; s < n; ++s) y = rk4_step(y, a, h);
    errs.push_back(norm_inf(y - ref));
  }
  const double slope = fit_loglog_slope(hs, errs);
  CHECK(slope > 3.8);
  CHECK(slope < 4.2);
}

TEST_CASE("orthogonal_basis contract and displayed bases") {
  const auto [u, v] = orthogonal_basis(Vec3{1.0, 0.0, 0.0});
  CHECK(std::abs(dot(u, Vec3{1.0, 0.0, 0.0})) < 1e-14);
  CHECK(std::abs(dot(v, Vec3{1.0, 0.0, 0.0})) < 1e-14);
  CHECK(norm(cross(u, v)) > 0.5);  // independent

  CHECK_THROWS_AS(orthogonal_basis(Vec3{}), ZeroVector);

  const Inertia I(Vec3{1.0, 2.0, 3.0});
  const Vec3 a_mom = alpha_from_inertia(I, Formulation::Momentum).alpha;
  CHECK(std::abs(dot(Vec3{1.0, 1.0, 1.0}, a_mom)) < 1e-15);
  CHECK(std::abs(dot(Vec3{1.0, 0.5, 1.0 / 3.0}, a_mom)) < 1e-15);  // 1/I_i

  const Vec3 a_vel = alpha_from_inertia(I, Formulation::Velocity).alpha;
  CHECK(std::abs(dot(Vec3{1.0, 2.0, 3.0}, a_vel)) < 1e-15);
  CHECK(std::abs(dot(Vec3{1.0, 4.0, 9.0}, a_vel)) < 1e-15);

  SplitMix64 rng(41);
  for (int trial = 0; trial < 200; ++trial) {
    const Vec3 w = sample_state(100 + trial, 3.0);
    if (norm(w) < 1e-6) continue;
    const auto [b1, b2] = orthogonal_basis(w);
    CHECK(std::abs(dot(b1, w)) <= 1e-14 * norm(w));
    CHECK(std::abs(dot(b2, w)) <= 1e-14 * norm(w));
    CHECK(norm(cross(b1, b2)) > 1e-8);
  }
}
