#pragma once

#include <Eigen/Core>

#include "offgrid/measure.hpp"
#include "offgrid/rng.hpp"

namespace offgrid {

enum class NoiseKind { GridWhite, BasisColored };

/// Additive Gaussian noise on the observation space together with the
/// moments the tests need:
///   delta_T  = effective weight (grid weight, or sup of basis weights),
///   xi_T     = Var ||w||^2,
///   expected_sq_norm = E ||w||^2.
struct NoiseModel {
  NoiseKind kind;
  double sigma_bar = 0.0;
  double delta_T = 0.0;
  double xi_T = 0.0;
  double expected_sq_norm = 0.0;
  Eigen::VectorXd basis_weights;  // xi_k, BasisColored only
  int dim = 0;
};

/// i.i.d. N(0, sigma_bar^2) values at the grid nodes.
NoiseModel make_grid_white(const ObservationMeasure& mu, double sigma_bar);

/// w = sum_k sqrt(xi_k) G_k psi_k on a basis measure.
NoiseModel make_basis_colored(const ObservationMeasure& mu, double sigma_bar,
                              const Eigen::VectorXd& xi);

/// Basis noise with xi_k = 1/Tn on the first Tn coefficients, 0 beyond.
NoiseModel make_truncated_white(const ObservationMeasure& mu, double sigma_bar,
                                int Tn);

Eigen::VectorXd sample_noise(const NoiseModel& nm, Rng& rng);

struct NoiseSummary {
  double delta_T;
  double xi_T;
  double expected_sq_norm;
  double expected_fourth;  // E ||w||^4
};

NoiseSummary noise_summary(const NoiseModel& nm);

}  // namespace offgrid
