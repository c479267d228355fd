#include <cmath>

#include "doctest.h"
#include "offgrid/noise.hpp"
#include "offgrid/signal.hpp"

using namespace offgrid;

TEST_SUITE("noise_signal") {

TEST_CASE("grid white noise moments") {
  ObservationMeasure mu = make_line_grid(-10.0, 10.0, 100);
  NoiseModel nm = make_grid_white(mu, 1.5);
  double delta = 20.0 / 100;
  CHECK(nm.delta_T == doctest::Approx(delta).epsilon(1e-14));
  CHECK(nm.expected_sq_norm ==
        doctest::Approx(1.5 * 1.5 * delta * 100).epsilon(1e-12));
  CHECK(nm.xi_T == doctest::Approx(2 * std::pow(1.5, 4) * delta * delta * 100)
                       .epsilon(1e-12));

  ObservationMeasure tor = make_torus_grid(64);
  NoiseModel tw = make_grid_white(tor, 1.0);
  CHECK(tw.delta_T == doctest::Approx(1.0 / 64).epsilon(1e-14));
  CHECK(tw.expected_sq_norm == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(tw.xi_T == doctest::Approx(2.0 / 64).epsilon(1e-12));
}

TEST_CASE("basis colored noise moments") {
  ObservationMeasure mu = make_fourier_basis(3);  // dimension 7
  Eigen::VectorXd xi(7);
  xi << 0.5, 0.3, 0.3, 0.1, 0.1, 0.05, 0.05;
  NoiseModel nm = make_basis_colored(mu, 2.0, xi);
  CHECK(nm.delta_T == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(nm.expected_sq_norm == doctest::Approx(4.0 * xi.sum()).epsilon(1e-12));
  CHECK(nm.xi_T ==
        doctest::Approx(2.0 * 16.0 * xi.squaredNorm()).epsilon(1e-12));
}

TEST_CASE("truncated white noise moments") {
  ObservationMeasure mu = make_fourier_basis(10);  // dimension 21
  NoiseModel nm = make_truncated_white(mu, 1.0, 15);
  CHECK(nm.delta_T == doctest::Approx(1.0 / 15).epsilon(1e-14));
  CHECK(nm.expected_sq_norm == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(nm.xi_T == doctest::Approx(2.0 / 15).epsilon(1e-12));
  CHECK(nm.basis_weights.head(15).minCoeff() ==
        doctest::Approx(1.0 / 15).epsilon(1e-14));
  CHECK(nm.basis_weights.tail(6).maxCoeff() == doctest::Approx(0.0));
}

TEST_CASE("noise summary matches gaussian fourth moment identity") {
  ObservationMeasure mu = make_torus_grid(32);
  NoiseModel nm = make_grid_white(mu, 0.8);
  NoiseSummary s = noise_summary(nm);
  CHECK(s.expected_fourth ==
        doctest::Approx(s.expected_sq_norm * s.expected_sq_norm + s.xi_T)
            .epsilon(1e-12));
}

TEST_CASE("sampled moments agree with the formulas") {
  ObservationMeasure mu = make_torus_grid(64);
  NoiseModel nm = make_grid_white(mu, 1.0);
  const int N = 20000;
  double sum = 0.0, sumsq = 0.0;
  for (int rep = 0; rep < N; ++rep) {
    Rng rng = Rng::keyed(99, 5, static_cast<uint64_t>(rep));
    Eigen::VectorXd w = sample_noise(nm, rng);
    double q = mu.dot(w, w);
    sum += q;
    sumsq += q * q;
  }
  double mean = sum / N;
  double var = sumsq / N - mean * mean;
  CHECK(std::abs(mean - nm.expected_sq_norm) <=
        4.0 * std::sqrt(nm.xi_T / N));
  CHECK(var == doctest::Approx(nm.xi_T).epsilon(0.15));

  ObservationMeasure bas = make_fourier_basis(8);
  NoiseModel bw = make_truncated_white(bas, 1.3, 9);
  sum = 0.0;
  for (int rep = 0; rep < N; ++rep) {
    Rng rng = Rng::keyed(7, 3, static_cast<uint64_t>(rep));
    Eigen::VectorXd w = sample_noise(bw, rng);
    sum += bas.dot(w, w);
  }
  CHECK(std::abs(sum / N - bw.expected_sq_norm) <=
        4.0 * std::sqrt(bw.xi_T / N));
}

TEST_CASE("keyed generator is reproducible and decorrelated") {
  ObservationMeasure mu = make_torus_grid(31);
  NoiseModel nm = make_grid_white(mu, 1.0);
  Rng a = Rng::keyed(42, 1, 7);
  Rng b = Rng::keyed(42, 1, 7);
  Rng c = Rng::keyed(42, 1, 8);
  Rng d = Rng::keyed(42, 2, 7);
  Eigen::VectorXd wa = sample_noise(nm, a);
  Eigen::VectorXd wb = sample_noise(nm, b);
  Eigen::VectorXd wc = sample_noise(nm, c);
  Eigen::VectorXd wd = sample_noise(nm, d);
  CHECK((wa - wb).cwiseAbs().maxCoeff() == 0.0);
  CHECK((wa - wc).cwiseAbs().maxCoeff() > 0.0);
  CHECK((wa - wd).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("synthesis is linear in the mixture") {
  FeatureFamily fam = make_dirichlet_family(31);
  ObservationMeasure mu = make_torus_grid(31);
  Mixture m1, m2, both;
  m1.beta = Eigen::VectorXd::Constant(1, 0.8);
  m1.theta = Eigen::VectorXd::Constant(1, 0.2);
  m2.beta = Eigen::VectorXd::Constant(1, -1.4);
  m2.theta = Eigen::VectorXd::Constant(1, 0.6);
  both.beta = Eigen::VectorXd(2);
  both.beta << 0.8, -1.4;
  both.theta = Eigen::VectorXd(2);
  both.theta << 0.2, 0.6;
  Eigen::VectorXd lhs = synthesize(fam, mu, both);
  Eigen::VectorXd rhs =
      synthesize(fam, mu, m1) + synthesize(fam, mu, m2);
  CHECK(mu.norm(lhs - rhs) <= 1e-12);
  CHECK(both.l1() == doctest::Approx(2.2).epsilon(1e-14));
}

TEST_CASE("locations outside the window are rejected") {
  FeatureFamily fam = make_gaussian_family(0.8, 10.0, 0.4);  // window [-6, 6]
  ObservationMeasure mu = make_line_grid(-10.0, 10.0, 200);
  Mixture bad;
  bad.beta = Eigen::VectorXd::Constant(1, 1.0);
  bad.theta = Eigen::VectorXd::Constant(1, 7.5);
  bool threw = false;
  try {
    synthesize(fam, mu, bad);
  } catch (const Error& e) {
    threw = true;
    CHECK(e.kind() == ErrorKind::Domain);
  }
  CHECK(threw);
}

TEST_CASE("noiseless observation equals synthesis") {
  FeatureFamily fam = make_dirichlet_family(31);
  ObservationMeasure mu = make_torus_grid(31);
  Mixture mix;
  mix.beta = Eigen::VectorXd::Constant(1, 1.1);
  mix.theta = Eigen::VectorXd::Constant(1, 0.45);
  Eigen::VectorXd clean = observe(fam, mu, mix, nullptr, nullptr);
  CHECK(mu.norm(clean - synthesize(fam, mu, mix)) == 0.0);

  NoiseModel nm = make_grid_white(mu, 0.7);
  Rng rng = Rng::keyed(1, 0, 0);
  Eigen::VectorXd noisy = observe(fam, mu, mix, &nm, &rng);
  CHECK(mu.norm(noisy - clean) > 0.0);
}

TEST_CASE("gram matrix of separated anchors is near identity") {
  FeatureFamily fam = make_dirichlet_family(63);
  ObservationMeasure mu = make_torus_grid(63);
  Eigen::VectorXd thetas(3);
  thetas << 0.1, 0.45, 0.8;
  Eigen::MatrixXd G = gram_matrix(fam, mu, thetas);
  CHECK(G(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(G(1, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((G - G.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(gram_min_eigenvalue(fam, mu, thetas) > 0.8);
  CHECK(gram_min_eigenvalue(fam, mu, Eigen::VectorXd()) == 1.0);
}

}  // TEST_SUITE
