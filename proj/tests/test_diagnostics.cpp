#include <cmath>

#include "doctest.h"
#include "offgrid/diagnostics.hpp"

using namespace offgrid;

TEST_SUITE("diagnostics") {

TEST_CASE("low-pass metric ratio has a closed form") {
  for (int T : {15, 31}) {
    FeatureFamily fam = make_dirichlet_family(T);
    double want = T / std::sqrt(T * T - 1.0);
    CHECK(compute_CT(fam, make_torus_grid(T)) ==
          doctest::Approx(want).epsilon(1e-10));
    CHECK(compute_CT(fam, make_fourier_basis((T - 1) / 2)) ==
          doctest::Approx(want).epsilon(1e-10));
    // the ratio sits within the advertised band around one
    CHECK(std::abs(1.0 - want) <= 1.0 / (2.0 * (T * T - 1.0)));
  }
}

TEST_CASE("metric ratio never undercuts one") {
  FeatureFamily fam = make_gaussian_family(0.8, 10.0, 0.4);
  ObservationMeasure mu = make_line_grid(-10.0, 10.0, 500);
  CHECK(compute_CT(fam, mu) >= 1.0);
}

TEST_CASE("kernel deviation report basics") {
  FeatureFamily fam = make_dirichlet_family(15);
  ObservationMeasure mu = make_torus_grid(15);
  ApproxReport rep = compute_VT(fam, mu);
  CHECK(rep.V_T == std::max(rep.V1, rep.V2));
  CHECK(rep.V1 >= 0.0);
  CHECK(rep.V2 >= 0.0);
  CHECK(rep.grid_step <= fam.sigma / 10.0 + 1e-15);
  CHECK(rep.V_T < 1.0);
  CHECK(rep.C_T == doctest::Approx(15.0 / std::sqrt(224.0)).epsilon(1e-10));
  // explicit steps beyond the resolution cap are rejected
  CHECK_THROWS_AS(compute_VT(fam, mu, fam.sigma), Error);
}

TEST_CASE("wide window and dense sampling make the kernels agree") {
  // generous margins: quadrature and truncation effects sit far below
  // any tolerance of interest, so the empirical kernel IS the limit kernel
  FeatureFamily fam = make_gaussian_family(1.0, 14.0, 0.5);
  ObservationMeasure mu = make_line_grid(-14.0, 14.0, 1400);
  ApproxReport rep = compute_VT(fam, mu);
  CHECK(rep.V_T <= 1e-6);
}

TEST_CASE("assumption audit passes a comfortable configuration") {
  FeatureFamily fam = make_gaussian_family(0.4, 40.0, 0.5);
  ObservationMeasure mu = make_line_grid(-40.0, 40.0, 1000);
  double req = fam.sigma * separation_requirement(fam.prox(), 0.5, 0.3, 2);
  double half = 0.5 * 1.05 * req;
  REQUIRE(half < fam.theta_hi);
  AssumptionCheck chk =
      check_assumption(fam, mu, 0.5, 0.3, 2, {-half, half});
  CHECK(chk.ok);
  CHECK(chk.regularity);
  CHECK(chk.f_properties);
  CHECK(chk.proximity);
  CHECK(chk.separation);
  CHECK(chk.failure.empty());
  CHECK(chk.slack_v1 > 0.0);
  CHECK(chk.slack_v2 > 0.0);
  CHECK(chk.min_gap == doctest::Approx(2 * half).epsilon(1e-12));
  CHECK(chk.required_gap == doctest::Approx(req).epsilon(1e-12));

  AssumptionCheck close =
      check_assumption(fam, mu, 0.5, 0.3, 2, {-0.2 * req, 0.2 * req});
  CHECK_FALSE(close.ok);
  CHECK_FALSE(close.separation);
  CHECK(close.failure.rfind("separation", 0) == 0);
}

TEST_CASE("assumption audit flags an out-of-regime radius") {
  FeatureFamily fam = make_dirichlet_family(15);
  ObservationMeasure mu = make_torus_grid(15);
  AssumptionCheck chk = check_assumption(fam, mu, 0.5, 0.35, 1, {0.5});
  CHECK_FALSE(chk.ok);
  CHECK_FALSE(chk.f_properties);
  CHECK_FALSE(chk.failure.empty());
}

TEST_CASE("assumption audit flags a truncated window") {
  // locations nearly reach the observation boundary, so translation
  // invariance of the kernel breaks down near the edges
  FeatureFamily fam = make_gaussian_family(0.4, 4.0, 0.05);
  ObservationMeasure mu = make_line_grid(-4.0, 4.0, 200);
  AssumptionCheck chk = check_assumption(fam, mu, 0.5, 0.3, 1, {0.0});
  CHECK_FALSE(chk.ok);
  CHECK_FALSE(chk.proximity);
  CHECK(chk.failure.rfind("proximity", 0) == 0);
  CHECK(chk.V_T > chk.H1);
}

}  // TEST_SUITE
