#include <cmath>

#include "doctest.h"
#include "offgrid/hypotest.hpp"

using namespace offgrid;

namespace {

Mixture spikes(std::initializer_list<double> beta,
               std::initializer_list<double> theta) {
  Mixture m;
  m.beta = Eigen::VectorXd(static_cast<long>(beta.size()));
  m.theta = Eigen::VectorXd(static_cast<long>(theta.size()));
  long i = 0;
  for (double b : beta) m.beta[i++] = b;
  i = 0;
  for (double t : theta) m.theta[i++] = t;
  return m;
}

}  // namespace

TEST_SUITE("hypotest") {

TEST_CASE("statistics match their definitions") {
  FeatureFamily fam = make_dirichlet_family(31);
  ObservationMeasure mu = make_torus_grid(31);
  NoiseModel nm = make_grid_white(mu, 0.9);
  Mixture null_mix = spikes({1.0}, {0.3});
  Eigen::VectorXd m0 = synthesize(fam, mu, null_mix);
  Rng rng = Rng::keyed(8, 0, 0);
  Eigen::VectorXd y = m0 + sample_noise(nm, rng);

  double want = mu.dot(y - m0, y - m0) - nm.expected_sq_norm;
  CHECK(stat_goodness(mu, y, m0, nm) == doctest::Approx(want).epsilon(1e-12));

  SolverConfig cfg;
  cfg.kappa = 0.2;
  FitResult fr = fit(fam, mu, y, cfg);
  CHECK(stat_proximity(mu, fr.model, m0) ==
        doctest::Approx(mu.dot(fr.model - m0, fr.model - m0)).epsilon(1e-12));

  Certificate cert = build_certificate(fam, mu, null_mix.theta,
                                       Eigen::VectorXd::Ones(1));
  double want3 = fr.estimate.l1() - mu.dot(y, cert.p);
  CHECK(stat_support(mu, y, fr, cert) ==
        doctest::Approx(want3).epsilon(1e-12));
}

TEST_CASE("goodness threshold and risk bound formulas") {
  CHECK(threshold_goodness(3.0) == doctest::Approx(4.5).epsilon(1e-15));
  ObservationMeasure mu = make_torus_grid(256);
  NoiseModel nm = make_grid_white(mu, 1.0);
  double rho = 4.0, t = 8.0;
  double gap = rho * rho - t;
  double want = nm.xi_T / (t * t) + 4 * nm.xi_T / (gap * gap) +
                std::exp(-gap * gap / (32 * nm.delta_T * rho * rho));
  CHECK(risk_bound_goodness(rho, t, nm) ==
        doctest::Approx(want).epsilon(1e-12));
  // tiny thresholds drive the bound into the clip
  CHECK(risk_bound_goodness(1.0, 1e-6, nm) == 2.0);
}

TEST_CASE("spread-regime separation formula") {
  ObservationMeasure mu = make_torus_grid(256);
  NoiseModel nm = make_grid_white(mu, 1.0);
  double alpha = 0.1;
  double want = std::max(
      std::pow(40 * nm.xi_T / alpha, 0.25),
      8.0 * std::sqrt(2 * nm.delta_T * std::log(2 / alpha)));
  CHECK(rho_quartic(alpha, nm) == doctest::Approx(want).epsilon(1e-12));
  CHECK_THROWS_AS(rho_quartic(0.0, nm), Error);
  CHECK_THROWS_AS(rho_quartic(1.5, nm), Error);
}

TEST_CASE("sparse-regime pair satisfies its defining identities") {
  TheoryConstants tc;
  tc.C0 = 1.7;
  double kappa = 0.3;
  for (int s : {1, 3}) {
    for (int s0 : {0, 2}) {
      SparseThreshold st = rho_sparse(0.1, s, s0, kappa, tc);
      CHECK(st.kappa == kappa);
      CHECK(st.t == doctest::Approx(tc.C0 * tc.C0 * std::max(s0, 1) * kappa *
                                    kappa)
                        .epsilon(1e-12));
      CHECK(st.rho == doctest::Approx(tc.C0 * std::sqrt(double(std::max(s, 1))) *
                                          kappa +
                                      std::sqrt(st.t))
                          .epsilon(1e-12));
      // the null band never reaches the alternative separation
      CHECK(std::sqrt(st.t) < st.rho);
    }
  }
}

TEST_CASE("penalty level rule") {
  ObservationMeasure mu = make_torus_grid(128);
  NoiseModel nm = make_grid_white(mu, 1.2);
  FeatureFamily fam = make_dirichlet_family(128 + 1);
  Geometry geom = Geometry::of(fam);
  TheoryConstants tc;
  double alpha = 0.1;
  double tau = std::max(tc.c_small() * geom.theta_len / (alpha * geom.sigma),
                        std::exp(1.0));
  double want = tc.C1 * 1.2 * std::sqrt(nm.delta_T * std::log(tau));
  CHECK(kappa_for_level(alpha, nm, geom, tc) ==
        doctest::Approx(want).epsilon(1e-12));
  // absurdly lax levels still leave a positive penalty via the clamp
  CHECK(kappa_for_level(0.999999, nm, geom, tc) >=
        tc.C1 * 1.2 * std::sqrt(nm.delta_T) * 0.99);
}

TEST_CASE("closed-form sparse separation and detection radius") {
  ObservationMeasure mu = make_torus_grid(256);
  NoiseModel nm = make_grid_white(mu, 1.0);
  FeatureFamily fam = make_dirichlet_family(257);
  Geometry geom = Geometry::of(fam);
  TheoryConstants tc;
  double r1 = rho_sparse_closed(0.1, 1, 0, nm, geom, tc);
  double r4 = rho_sparse_closed(0.1, 4, 0, nm, geom, tc);
  CHECK(r1 > 0.0);
  CHECK(r4 == doctest::Approx(2.0 * r1).epsilon(1e-12));

  DetectionRadius d = rho_detection(0.1, 1, 0, nm, geom, tc);
  CHECK(d.value ==
        doctest::Approx(std::min(d.term_quartic, d.term_sparse))
            .epsilon(1e-12));
  CHECK(d.quartic_binding == (d.term_quartic <= d.term_sparse));
  CHECK(d.term_quartic ==
        doctest::Approx(std::pow(80 * nm.xi_T / 0.1, 0.25)).epsilon(1e-12));
  // the sparse term grows with s while the quartic term stays fixed
  DetectionRadius d16 = rho_detection(0.1, 16, 0, nm, geom, tc);
  CHECK(d16.term_quartic == doctest::Approx(d.term_quartic).epsilon(1e-12));
  CHECK(d16.term_sparse == doctest::Approx(4.0 * d.term_sparse).epsilon(1e-12));
}

TEST_CASE("support-test separation") {
  TheoryConstants tc;
  tc.C4 = 1.3;
  tc.C5 = 0.8;
  CHECK(rho_support(3, 0.2, 0.5, tc) ==
        doctest::Approx(1.3 * 3 * 0.2 + 0.8 * 0.5).epsilon(1e-12));
}

TEST_CASE("support discrepancy geometry") {
  FeatureFamily fam = make_dirichlet_family(63);
  ObservationMeasure mu = make_torus_grid(63);
  MetricTable metric = build_metric_table(fam, mu);
  NullSpec null;
  null.mixture = spikes({1.0, -0.5}, {0.2, 0.7});
  double r = 0.3;

  // the null itself carries zero discrepancy
  CHECK(discrepancy(metric, null.mixture, null, r) ==
        doctest::Approx(0.0).scale(1.0).epsilon(1e-12));

  // a far spike contributes its absolute mass
  Mixture far = spikes({1.0, -0.5, 0.37}, {0.2, 0.7, 0.45});
  CHECK(discrepancy(metric, far, null, r) ==
        doctest::Approx(0.37).epsilon(1e-10));

  // a sign-matched in-ball displacement contributes |beta| d^2
  double shift = 0.001;
  Mixture near = spikes({1.0, -0.5}, {0.2 + shift, 0.7});
  double d = metric.distance(0.2 + shift, 0.2);
  REQUIRE(d < r);
  CHECK(discrepancy(metric, near, null, r) ==
        doctest::Approx(1.0 * d * d).epsilon(1e-6));

  // a sign flip inside the ball is off-support mass
  Mixture flipped = spikes({-1.0, -0.5}, {0.2, 0.7});
  CHECK(discrepancy(metric, flipped, null, r) ==
        doctest::Approx(1.0).epsilon(1e-10));

  // overlapping balls violate the precondition (the metric magnifies flat
  // gaps by sqrt(g) ~ 114 here, so the anchors must nearly coincide)
  NullSpec tight;
  tight.mixture = spikes({1.0, 1.0}, {0.2, 0.202});
  bool threw = false;
  try {
    discrepancy(metric, tight.mixture, tight, r);
  } catch (const Error& e) {
    threw = true;
    CHECK(e.kind() == ErrorKind::Domain);
  }
  CHECK(threw);
}

TEST_CASE("test kinds parse from strings") {
  CHECK(test_kind_from_string("goodness") == TestKind::Goodness);
  CHECK(test_kind_from_string("T1") == TestKind::Goodness);
  CHECK(test_kind_from_string("proximity") == TestKind::Proximity);
  CHECK(test_kind_from_string("t2") == TestKind::Proximity);
  CHECK(test_kind_from_string("support") == TestKind::Support);
  CHECK(test_kind_from_string("combined") == TestKind::Combined);
  CHECK(test_kind_from_string("max") == TestKind::Combined);
  CHECK_THROWS_AS(test_kind_from_string("bogus"), Error);
  CHECK(to_string(TestKind::Goodness) == "goodness");
  CHECK(to_string(TestKind::Support) == "support");
}

TEST_CASE("orchestrated tests honor thresholds and overrides") {
  FeatureFamily fam = make_dirichlet_family(63);
  ObservationMeasure mu = make_torus_grid(63);
  NoiseModel nm = make_grid_white(mu, 1.0);
  NullSpec null;  // empty null: pure noise under H0

  Rng rng = Rng::keyed(12, 0, 0);
  Eigen::VectorXd y = sample_noise(nm, rng);

  TestParams params;
  params.alpha = 0.1;
  TestOutcome out = run_test(TestKind::Goodness, fam, mu, y, null, nm, params);
  CHECK(out.kind == TestKind::Goodness);
  CHECK(out.threshold ==
        doctest::Approx(threshold_goodness(rho_quartic(0.1, nm)))
            .epsilon(1e-12));
  CHECK(out.reject == (std::abs(out.statistic) > out.threshold));

  params.threshold = 1e-9;  // everything rejects at a vanishing threshold
  TestOutcome forced =
      run_test(TestKind::Goodness, fam, mu, y, null, nm, params);
  CHECK(forced.reject);

  params.threshold.reset();
  params.kappa = 0.5;
  params.s = 1;
  TestOutcome prox =
      run_test(TestKind::Proximity, fam, mu, y, null, nm, params);
  CHECK(prox.kind == TestKind::Proximity);
  CHECK(prox.threshold ==
        doctest::Approx(rho_sparse(0.1, 1, 0, 0.5, params.consts).t)
            .epsilon(1e-12));

  TestOutcome comb =
      run_test(TestKind::Combined, fam, mu, y, null, nm, params);
  CHECK(comb.parts.size() == 2);
  bool any = comb.parts[0].reject || comb.parts[1].reject;
  CHECK(comb.reject == any);
}

TEST_CASE("support test needs a null support and a threshold") {
  FeatureFamily fam = make_dirichlet_family(63);
  ObservationMeasure mu = make_torus_grid(63);
  NoiseModel nm = make_grid_white(mu, 0.1);
  NullSpec null;
  TestParams params;
  Rng rng = Rng::keyed(2, 0, 0);
  Eigen::VectorXd y = sample_noise(nm, rng);
  CHECK_THROWS_AS(run_test(TestKind::Support, fam, mu, y, null, nm, params),
                  Error);

  null.mixture = spikes({1.0}, {0.4});
  y = synthesize(fam, mu, null.mixture) + sample_noise(nm, rng);
  bool threw = false;
  try {
    run_test(TestKind::Support, fam, mu, y, null, nm, params);
  } catch (const Error& e) {
    threw = true;
    CHECK(e.kind() == ErrorKind::Config);  // missing explicit threshold
  }
  CHECK(threw);

  params.threshold = 0.6;
  params.kappa = 0.08;
  TestOutcome out = run_test(TestKind::Support, fam, mu, y, null, nm, params);
  CHECK(out.kind == TestKind::Support);
  CHECK(out.threshold == doctest::Approx(0.6));
  CHECK(out.reject == (std::abs(out.statistic) > 0.6));
}

}  // TEST_SUITE
