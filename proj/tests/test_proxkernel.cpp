#include <cmath>
#include <functional>
#include <limits>

#include "doctest.h"
#include "offgrid/proxfun.hpp"

using namespace offgrid;

namespace {

constexpr double kPi = 3.14159265358979323846;

double fd(const ProxFunction& F, int order, double t, double h = 1e-6) {
  return (F.deriv(order - 1, t + h) - F.deriv(order - 1, t - h)) / (2 * h);
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::Structural;
}

}  // namespace

TEST_SUITE("proxkernel") {

TEST_CASE("torus wrap and displacement conventions") {
  CHECK(torus_wrap(0.75) == doctest::Approx(-0.25).epsilon(1e-15));
  CHECK(torus_wrap(-0.75) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(torus_wrap(0.5) == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(torus_wrap(1.25) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(torus_wrap(0.1) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(displacement(Domain::Line, 3.5, 1.25) == doctest::Approx(2.25));
  CHECK(displacement(Domain::Torus, 0.9, 0.1) ==
        doctest::Approx(-0.2).epsilon(1e-12));
}

TEST_CASE("gaussian profile closed forms") {
  const ProxFunction& F = prox_function(Preset::Gaussian);
  CHECK(F.g_inf() == doctest::Approx(0.5).epsilon(1e-15));
  for (double t : {0.0, 0.3, 1.0, 2.5, -1.7}) {
    CHECK(F(t) == doctest::Approx(std::exp(-t * t / 4)).epsilon(1e-14));
  }
  CHECK(F.deriv(2, 0.0) == doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(F.deriv(4, 0.0) == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(F.deriv(6, 0.0) == doctest::Approx(-15.0 / 8.0).epsilon(1e-14));
}

TEST_CASE("dirichlet profile closed forms") {
  const ProxFunction& F = prox_function(Preset::Dirichlet);
  CHECK(F.g_inf() == doctest::Approx(kPi * kPi / 3).epsilon(1e-15));
  for (double t : {0.3, 1.0, 2.5, 17.25}) {
    CHECK(F(t) ==
          doctest::Approx(std::sin(kPi * t) / (kPi * t)).epsilon(1e-12));
  }
  CHECK(F(0.0) == doctest::Approx(1.0).epsilon(1e-15));
  double pi2 = kPi * kPi;
  CHECK(F.deriv(2, 0.0) == doctest::Approx(-pi2 / 3).epsilon(1e-13));
  CHECK(F.deriv(4, 0.0) == doctest::Approx(pi2 * pi2 / 5).epsilon(1e-13));
  CHECK(F.deriv(6, 0.0) ==
        doctest::Approx(-pi2 * pi2 * pi2 / 7).epsilon(1e-13));
}

TEST_CASE("derivatives match finite differences") {
  for (Preset preset : {Preset::Gaussian, Preset::Dirichlet}) {
    const ProxFunction& F = prox_function(preset);
    for (int order = 1; order <= 4; ++order) {
      for (double t : {0.0, 0.004, 0.05, 0.37, 1.1, 2.6, -0.8, 7.3}) {
        double want = fd(F, order, t);
        CHECK(F.deriv(order, t) ==
              doctest::Approx(want).epsilon(1e-5).scale(1.0));
      }
    }
  }
}

TEST_CASE("odd derivatives are odd, even derivatives even") {
  for (Preset preset : {Preset::Gaussian, Preset::Dirichlet}) {
    const ProxFunction& F = prox_function(preset);
    for (double t : {0.02, 0.41, 1.7}) {
      for (int order = 0; order <= 6; ++order) {
        double sym = order % 2 == 0 ? 1.0 : -1.0;
        CHECK(F.deriv(order, -t) ==
              doctest::Approx(sym * F.deriv(order, t)).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("envelopes dominate and decrease") {
  for (Preset preset : {Preset::Gaussian, Preset::Dirichlet}) {
    const ProxFunction& F = prox_function(preset);
    for (int i = 0; i <= 3; ++i) {
      for (double r : {0.05, 0.4, 1.3, 4.0, 17.0, 80.0}) {
        double env = F.envelope(i, r);
        for (int k = 0; k <= 400; ++k) {
          double x = r + 0.11 * k;
          CHECK(env >= std::abs(F.deriv(i, x)) - 1e-12);
        }
        CHECK(F.envelope(i, 1.3 * r) <= env + 1e-15);
      }
    }
  }
}

TEST_CASE("sup bounds and dimensionless constants") {
  const ProxFunction& G = prox_function(Preset::Gaussian);
  // stationary points of |F^(i)| are known in closed form for the
  // squared-exponential profile
  double sup1 = std::sqrt(2.0) / 2.0 * std::exp(-0.5);
  double t1sq = 6.0 - 2.0 * std::sqrt(6.0);
  double t1 = std::sqrt(t1sq);
  double sup3 = (3.0 * t1 / 4.0 - t1 * t1sq / 8.0) * std::exp(-t1sq / 4.0);
  CHECK(G.sup_abs_deriv(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(G.sup_abs_deriv(1) == doctest::Approx(sup1).epsilon(1e-9));
  CHECK(G.sup_abs_deriv(2) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(G.sup_abs_deriv(3) == doctest::Approx(sup3).epsilon(1e-9));
  CHECK(G.sup_abs_deriv(4) == doctest::Approx(0.75).epsilon(1e-9));

  ProxConstants pc = prox_constants(G);
  CHECK(pc.L[1] == doctest::Approx(std::exp(-0.5)).epsilon(1e-9));
  CHECK(pc.L[2] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(pc.L[4] == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(pc.L6 == doctest::Approx(15.0).epsilon(1e-12));

  ProxConstants pd = prox_constants(prox_function(Preset::Dirichlet));
  CHECK(pd.L6 == doctest::Approx(27.0 / 7.0).epsilon(1e-12));
  CHECK(pd.L[2] == doctest::Approx(1.0).epsilon(1e-9));  // sup at the origin
}

TEST_CASE("correlation gap closed forms") {
  const ProxFunction& G = prox_function(Preset::Gaussian);
  CHECK(epsilon_of(G, 1.0) ==
        doctest::Approx(0.2211992169285951).epsilon(1e-12));
  for (double r : {0.15, 0.3, 0.8}) {
    CHECK(epsilon_of(G, r) ==
          doctest::Approx(1.0 - std::exp(-r * r / 4)).epsilon(1e-12));
  }
  const ProxFunction& D = prox_function(Preset::Dirichlet);
  for (double r : {0.15, 0.3, 0.6}) {
    double sinc = std::sin(kPi * r) / (kPi * r);
    CHECK(epsilon_of(D, r) == doctest::Approx(1.0 - sinc).epsilon(1e-10));
  }
}

TEST_CASE("curvature margin closed forms and sign change") {
  const ProxFunction& G = prox_function(Preset::Gaussian);
  for (double r : {0.2, 0.6, 1.0}) {
    double want = (1.0 - r * r / 2) * std::exp(-r * r / 4);
    CHECK(nu_of(G, r) == doctest::Approx(want).epsilon(1e-10));
  }
  const ProxFunction& D = prox_function(Preset::Dirichlet);
  CHECK(nu_of(D, 0.6) > 0.0);
  CHECK(nu_of(D, 0.7) < 0.0);  // curvature flips before the first sinc zero
}

TEST_CASE("separation radius conventions and defining property") {
  const ProxFunction& G = prox_function(Preset::Gaussian);
  CHECK(delta_separation(G, 0.5, 1) == 0.0);
  CHECK(std::isinf(delta_separation(G, 0.0, 3)));
  CHECK(std::isinf(delta_separation(G, -1.0, 2)));

  auto sum_ok = [&](const ProxFunction& F, double u, int s, double delta) {
    for (int i = 0; i <= 3; ++i) {
      double sum = 0.0;
      for (int m = 1; m < s; ++m) {
        sum += std::pow(F.g_inf(), -0.5 * i) * F.envelope(i, m * delta);
      }
      if (2.0 * sum > u) return false;
    }
    return true;
  };
  for (Preset preset : {Preset::Gaussian, Preset::Dirichlet}) {
    const ProxFunction& F = prox_function(preset);
    for (double u : {0.3, 0.02}) {
      for (int s : {2, 5}) {
        double delta = delta_separation(F, u, s);
        CHECK(delta > 0.0);
        CHECK(sum_ok(F, u, s, delta));
        CHECK_FALSE(sum_ok(F, u, s, 0.9 * delta));
      }
    }
  }
  // smaller tolerance or more spikes push the radius out
  CHECK(delta_separation(G, 0.02, 3) > delta_separation(G, 0.3, 3));
  CHECK(delta_separation(G, 0.1, 6) >= delta_separation(G, 0.1, 2));
}

TEST_CASE("interpolation bounds against hand-derived values") {
  const ProxFunction& G = prox_function(Preset::Gaussian);
  double r = 0.3;
  double L1 = std::exp(-0.5), L2 = 1.0, L4 = 3.0, L6 = 15.0;
  double t1sq = 6.0 - 2.0 * std::sqrt(6.0);
  double t1 = std::sqrt(t1sq);
  double L3 = std::pow(2.0, 1.5) * (3.0 * t1 / 4.0 - t1 * t1sq / 8.0) *
              std::exp(-t1sq / 4.0);
  double eps_half = 1.0 - std::exp(-r * r / 16.0);
  double nu2r = (1.0 - 2.0 * r * r) * std::exp(-r * r);
  double want1 = std::min({0.5, L2, L3, L4, L6, nu2r / 10.0, eps_half / 10.0});
  double want2 = std::min({1.0 / 6.0, 8.0 * eps_half / (10.0 * (5 + 2 * L1)),
                           8.0 * nu2r / (9.0 * (2 * L2 + 2 * L3 + 4))});
  HinfBounds hb = h_infinity_bounds(G, r);
  CHECK(hb.h1 == doctest::Approx(want1).epsilon(1e-8));
  CHECK(hb.h2 == doctest::Approx(want2).epsilon(1e-8));
}

TEST_CASE("interpolation bounds reject out-of-regime radii") {
  const ProxFunction& G = prox_function(Preset::Gaussian);
  CHECK(kind_of([&] { h_infinity_bounds(G, 1.2); }) == ErrorKind::Domain);
  CHECK(kind_of([&] { h_infinity_bounds(G, 0.0); }) == ErrorKind::Domain);
  const ProxFunction& D = prox_function(Preset::Dirichlet);
  // nu(2r) <= 0 at r = 0.35 for the periodic profile
  CHECK(kind_of([&] { h_infinity_bounds(D, 0.35); }) == ErrorKind::Domain);
  CHECK_NOTHROW(h_infinity_bounds(D, 0.3));
}

TEST_CASE("separation requirement at s = 1 is the near radius") {
  for (Preset preset : {Preset::Gaussian, Preset::Dirichlet}) {
    const ProxFunction& F = prox_function(preset);
    double r = 0.25;
    CHECK(separation_requirement(F, 0.5, r, 1) ==
          doctest::Approx(4.0 * r / std::sqrt(F.g_inf())).epsilon(1e-12));
    CHECK(separation_requirement(F, 0.5, r, 4) >=
          separation_requirement(F, 0.5, r, 1));
  }
}

TEST_CASE("limit kernel derivative table") {
  for (Preset preset : {Preset::Gaussian, Preset::Dirichlet}) {
    const ProxFunction& F = prox_function(preset);
    Domain dom = preset == Preset::Gaussian ? Domain::Line : Domain::Torus;
    double sigma = preset == Preset::Gaussian ? 0.7 : 1.0 / 63;
    double a = 0.1, b = preset == Preset::Gaussian ? 0.35 : 0.104;
    // normalized diagonal slope and the transpose identity
    CHECK(prox_kernel_derivative(F, 1, 1, a, a, sigma, dom) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(prox_kernel_derivative(F, 0, 0, a, a, sigma, dom) ==
          doctest::Approx(1.0).epsilon(1e-12));
    for (int i = 0; i <= 3; ++i) {
      for (int j = 0; j <= 3; ++j) {
        CHECK(prox_kernel_derivative(F, i, j, a, b, sigma, dom) ==
              doctest::Approx(prox_kernel_derivative(F, j, i, b, a, sigma,
                                                     dom))
                  .epsilon(1e-12));
      }
    }
    // first-order terms are odd in the displacement
    CHECK(prox_kernel_derivative(F, 1, 0, a, b, sigma, dom) ==
          doctest::Approx(-prox_kernel_derivative(F, 1, 0, b, a, sigma, dom))
              .epsilon(1e-12));
  }
  const ProxFunction& G = prox_function(Preset::Gaussian);
  CHECK(prox_kernel_derivative(G, 3, 3, 0.2, 0.2, 0.5, Domain::Line) ==
        doctest::Approx(15.0).epsilon(1e-12));
  const ProxFunction& D = prox_function(Preset::Dirichlet);
  CHECK(prox_kernel_derivative(D, 3, 3, 0.2, 0.2, 1.0 / 63, Domain::Torus) ==
        doctest::Approx(27.0 / 7.0).epsilon(1e-12));
}

}  // TEST_SUITE
