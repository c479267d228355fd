#include "offgrid/noise.hpp"

#include <cmath>

namespace offgrid {

NoiseModel make_grid_white(const ObservationMeasure& mu, double sigma_bar) {
  require(mu.kind == MeasureKind::Grid, ErrorKind::Structural,
          "grid-white noise needs a grid measure");
  require(sigma_bar >= 0.0, ErrorKind::Domain, "noise level must be >= 0");
  NoiseModel nm;
  nm.kind = NoiseKind::GridWhite;
  nm.sigma_bar = sigma_bar;
  nm.dim = mu.dim();
  nm.delta_T = mu.weight;
  double s2 = sigma_bar * sigma_bar;
  double T = static_cast<double>(nm.dim);
  nm.expected_sq_norm = s2 * nm.delta_T * T;
  nm.xi_T = 2.0 * s2 * s2 * nm.delta_T * nm.delta_T * T;
  return nm;
}

NoiseModel make_basis_colored(const ObservationMeasure& mu, double sigma_bar,
                              const Eigen::VectorXd& xi) {
  require(mu.kind == MeasureKind::Basis, ErrorKind::Structural,
          "colored noise needs a basis measure");
  require(xi.size() == mu.dim(), ErrorKind::Structural,
          "noise weight count must match the basis dimension");
  require(xi.minCoeff() >= 0.0, ErrorKind::Domain,
          "noise weights must be nonnegative");
  require(sigma_bar >= 0.0, ErrorKind::Domain, "noise level must be >= 0");
  NoiseModel nm;
  nm.kind = NoiseKind::BasisColored;
  nm.sigma_bar = sigma_bar;
  nm.dim = mu.dim();
  nm.basis_weights = xi;
  nm.delta_T = xi.size() > 0 ? xi.maxCoeff() : 0.0;
  double s2 = sigma_bar * sigma_bar;
  nm.expected_sq_norm = s2 * xi.sum();
  nm.xi_T = 2.0 * s2 * s2 * xi.squaredNorm();
  return nm;
}

NoiseModel make_truncated_white(const ObservationMeasure& mu, double sigma_bar,
                                int Tn) {
  require(Tn >= 1 && Tn <= mu.dim(), ErrorKind::Domain,
          "truncation length must lie in 1..dim");
  Eigen::VectorXd xi = Eigen::VectorXd::Zero(mu.dim());
  for (int k = 0; k < Tn; ++k) xi[k] = 1.0 / Tn;
  return make_basis_colored(mu, sigma_bar, xi);
}

Eigen::VectorXd sample_noise(const NoiseModel& nm, Rng& rng) {
  Eigen::VectorXd w(nm.dim);
  if (nm.kind == NoiseKind::GridWhite) {
    for (int j = 0; j < nm.dim; ++j) w[j] = nm.sigma_bar * rng.next_gauss();
  } else {
    for (int k = 0; k < nm.dim; ++k) {
      double g = rng.next_gauss();  // always draw: keeps streams aligned
      w[k] = nm.sigma_bar * std::sqrt(nm.basis_weights[k]) * g;
    }
  }
  return w;
}

NoiseSummary noise_summary(const NoiseModel& nm) {
  NoiseSummary s{};
  s.delta_T = nm.delta_T;
  s.xi_T = nm.xi_T;
  s.expected_sq_norm = nm.expected_sq_norm;
  // Gaussian fourth moment: Var + mean^2
  s.expected_fourth = nm.xi_T + nm.expected_sq_norm * nm.expected_sq_norm;
  return s;
}

}  // namespace offgrid
