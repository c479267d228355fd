#include <cmath>
#include <vector>

#include "doctest.h"
#include "offgrid/dictionary.hpp"

using namespace offgrid;

namespace {

constexpr double kPi = 3.14159265358979323846;

/// Exact normalized correlation of the periodic low-pass feature:
/// (1/T)(1 + 2 sum_{k<=fc} cos(2 pi k u)).
double lowpass_corr(int T, double u) {
  int fc = (T - 1) / 2;
  double s = 1.0;
  for (int k = 1; k <= fc; ++k) s += 2.0 * std::cos(2 * kPi * k * u);
  return s / T;
}

}  // namespace

TEST_SUITE("dictionary") {

TEST_CASE("normalized features have unit norm and tangent orthogonality") {
  struct Case {
    FeatureFamily fam;
    ObservationMeasure mu;
    double theta;
  };
  std::vector<Case> cases;
  cases.push_back({make_gaussian_family(0.8, 10.0, 0.4),
                   make_line_grid(-10.0, 10.0, 400), 1.3});
  cases.push_back({make_dirichlet_family(31), make_torus_grid(31), 0.37});
  cases.push_back({make_dirichlet_family(31), make_fourier_basis(15), 0.37});
  for (const Case& c : cases) {
    FeatureBundle b = normalized_feature(c.fam, c.mu, c.theta, 3);
    CHECK(c.mu.norm(b.f) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(c.mu.dot(b.d1, b.f) == doctest::Approx(0.0).scale(1.0).epsilon(1e-10));
    CHECK(b.raw_norm > 0.0);
  }
}

TEST_CASE("feature derivatives match finite differences") {
  FeatureFamily fam = make_gaussian_family(0.8, 10.0, 0.4);
  ObservationMeasure mu = make_line_grid(-10.0, 10.0, 400);
  double theta = 0.9, h = 1e-6;
  FeatureBundle b = normalized_feature(fam, mu, theta, 3);
  FeatureBundle up = normalized_feature(fam, mu, theta + h, 2);
  FeatureBundle dn = normalized_feature(fam, mu, theta - h, 2);
  CHECK(mu.norm(b.d1 - (up.f - dn.f) / (2 * h)) <= 1e-5);
  CHECK(mu.norm(b.d2 - (up.d1 - dn.d1) / (2 * h)) <= 1e-4);
  CHECK(mu.norm(b.d3 - (up.d2 - dn.d2) / (2 * h)) <= 1e-3);
}

TEST_CASE("covariant bundle is orthonormal to first order") {
  FeatureFamily fam = make_dirichlet_family(63);
  ObservationMeasure mu = make_torus_grid(63);
  CovariantBundle cb = covariant_bundle(fam, mu, 0.21, 3);
  CHECK(mu.norm(cb.D0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mu.norm(cb.D1) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(mu.dot(cb.D0, cb.D1) == doctest::Approx(0.0).scale(1.0).epsilon(1e-10));
  CHECK(cb.g > 0.0);
}

TEST_CASE("dense-grid correlation approaches the limit profile") {
  // sigma = 1 bumps observed on a wide fine grid: the empirical normalized
  // correlation at displacement u must sit within 1e-3 of exp(-u^2/4)
  FeatureFamily fam = make_gaussian_family(1.0, 12.0, 0.5);
  ObservationMeasure mu = make_line_grid(-12.0, 12.0, 24000);
  double u = 0.7;
  double got = empirical_kernel(fam, mu, 0, 0, 0.0, u);
  CHECK(got == doctest::Approx(std::exp(-u * u / 4)).epsilon(1e-3));
  double g = g_of(fam, mu, 0.0);
  CHECK(std::sqrt(g) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-3));
}

TEST_CASE("periodic low-pass correlation is exact on grid and basis") {
  int T = 31;
  FeatureFamily fam = make_dirichlet_family(T);
  for (const ObservationMeasure& mu :
       {make_torus_grid(T), make_fourier_basis((T - 1) / 2)}) {
    for (double u : {0.01, 0.11, 0.26}) {
      double got = empirical_kernel(fam, mu, 0, 0, 0.4, 0.4 + u);
      CHECK(got == doctest::Approx(lowpass_corr(T, u)).epsilon(1e-10));
    }
    // metric density has the closed form g_inf (T^2 - 1) at scale sigma = 1/T
    double g = g_of(fam, mu, 0.2);
    CHECK(g == doctest::Approx(kPi * kPi / 3 * (T * T - 1.0)).epsilon(1e-8));
  }
}

TEST_CASE("normalized diagonal slope is one") {
  FeatureFamily fam = make_dirichlet_family(63);
  ObservationMeasure mu = make_torus_grid(63);
  CHECK(empirical_kernel(fam, mu, 1, 1, 0.3, 0.3) ==
        doctest::Approx(1.0).epsilon(1e-10));
  FeatureFamily gf = make_gaussian_family(0.8, 10.0, 0.4);
  ObservationMeasure gm = make_line_grid(-10.0, 10.0, 800);
  CHECK(empirical_kernel(gf, gm, 1, 1, 0.5, 0.5) ==
        doctest::Approx(1.0).epsilon(1e-10));
  CHECK(kernel_curvature(fam, mu, 0.3) ==
        doctest::Approx(empirical_kernel(fam, mu, 3, 3, 0.3, 0.3))
            .epsilon(1e-12));
}

TEST_CASE("metric table distances") {
  int T = 63;
  FeatureFamily fam = make_dirichlet_family(T);
  ObservationMeasure mu = make_torus_grid(T);
  MetricTable metric = build_metric_table(fam, mu);
  double sq = std::sqrt(kPi * kPi / 3 * (T * T - 1.0));
  // constant density: distances are flat gaps scaled by sqrt(g), and the
  // torus distance takes the short way around
  CHECK(metric.distance(0.1, 0.3) == doctest::Approx(0.2 * sq).epsilon(1e-6));
  CHECK(metric.distance(0.9, 0.1) == doctest::Approx(0.2 * sq).epsilon(1e-6));
  CHECK(metric.total() == doctest::Approx(sq).epsilon(1e-6));
  CHECK(metric.distance(0.25, 0.25) == doctest::Approx(0.0).scale(1.0));

  FeatureFamily gf = make_gaussian_family(0.8, 10.0, 0.4);
  ObservationMeasure gm = make_line_grid(-10.0, 10.0, 800);
  MetricTable gym = build_metric_table(gf, gm);
  CHECK(gym.distance(-1.0, 1.0) ==
        doctest::Approx(gym.distance(-1.0, 0.0) + gym.distance(0.0, 1.0))
            .epsilon(1e-10));
}

TEST_CASE("degenerate features are rejected") {
  // a bump far narrower than the node spacing carries almost no mass on
  // any node for most locations
  FeatureFamily fam = make_gaussian_family(1e-3, 10.0, 0.1);
  ObservationMeasure mu = make_line_grid(-10.0, 10.0, 50);
  bool threw = false;
  try {
    normalized_feature(fam, mu, 0.1234, 0);
  } catch (const Error& e) {
    threw = true;
    CHECK(e.kind() == ErrorKind::Domain);
  }
  CHECK(threw);
}

TEST_CASE("family constructors validate their inputs") {
  CHECK_THROWS_AS(make_dirichlet_family(10), Error);   // even
  CHECK_THROWS_AS(make_dirichlet_family(1), Error);    // too small
  CHECK_THROWS_AS(make_gaussian_family(0.0, 1.0, 0.5), Error);
  CHECK_THROWS_AS(make_gaussian_family(1.0, 1.0, 1.5), Error);
  FeatureFamily fam = make_gaussian_schedule(256, 0.5);
  CHECK(fam.sigma == doctest::Approx(1.0 / std::sqrt(0.5 * std::log(256.0))));
  CHECK(fam.theta_hi == doctest::Approx(0.5 * std::log(256.0)));
}

TEST_CASE("window violations are rejected at synthesis level") {
  FeatureFamily fam = make_gaussian_family(0.8, 10.0, 0.4);
  // locations must stay inside the shrunk window [-6, 6]
  CHECK(fam.theta_lo == doctest::Approx(-6.0));
  CHECK(fam.theta_hi == doctest::Approx(6.0));
}

}  // TEST_SUITE
