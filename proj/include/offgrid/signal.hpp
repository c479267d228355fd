#pragma once

#include <Eigen/Core>

#include "offgrid/dictionary.hpp"
#include "offgrid/noise.hpp"

namespace offgrid {

/// Sparse mixture: amplitudes beta_k on locations theta_k.
struct Mixture {
  Eigen::VectorXd beta;
  Eigen::VectorXd theta;

  int size() const { return static_cast<int>(beta.size()); }
  double l1() const { return beta.lpNorm<1>(); }
};

void validate_mixture(const FeatureFamily& fam, const Mixture& mix);

/// sum_k beta_k f(theta_k) in the observation space.
Eigen::VectorXd synthesize(const FeatureFamily& fam,
                           const ObservationMeasure& mu, const Mixture& mix);

/// Noisy observation; pass nm = nullptr for the noiseless signal.
Eigen::VectorXd observe(const FeatureFamily& fam, const ObservationMeasure& mu,
                        const Mixture& mix, const NoiseModel* nm, Rng* rng);

Eigen::MatrixXd gram_matrix(const FeatureFamily& fam,
                            const ObservationMeasure& mu,
                            const Eigen::VectorXd& thetas);

double gram_min_eigenvalue(const FeatureFamily& fam,
                           const ObservationMeasure& mu,
                           const Eigen::VectorXd& thetas);

}  // namespace offgrid
