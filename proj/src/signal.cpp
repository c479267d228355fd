#include "offgrid/signal.hpp"

#include <Eigen/Eigenvalues>
#include <string>

namespace offgrid {

void validate_mixture(const FeatureFamily& fam, const Mixture& mix) {
  require(mix.beta.size() == mix.theta.size(), ErrorKind::Structural,
          "mixture amplitude/location count mismatch");
  for (int k = 0; k < mix.size(); ++k) {
    double th = mix.theta[k];
    if (fam.domain == Domain::Torus) continue;  // wraps onto the circle
    require(th >= fam.theta_lo && th <= fam.theta_hi, ErrorKind::Domain,
            "mixture location " + std::to_string(th) +
                " outside the admissible window");
  }
}

Eigen::VectorXd synthesize(const FeatureFamily& fam,
                           const ObservationMeasure& mu, const Mixture& mix) {
  validate_mixture(fam, mix);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(mu.dim());
  for (int k = 0; k < mix.size(); ++k) {
    FeatureBundle b = normalized_feature(fam, mu, mix.theta[k], 0);
    out += mix.beta[k] * b.f;
  }
  return out;
}

Eigen::VectorXd observe(const FeatureFamily& fam, const ObservationMeasure& mu,
                        const Mixture& mix, const NoiseModel* nm, Rng* rng) {
  Eigen::VectorXd y = synthesize(fam, mu, mix);
  if (nm != nullptr && nm->sigma_bar > 0.0) {
    require(rng != nullptr, ErrorKind::Structural,
            "noisy observation needs a generator");
    y += sample_noise(*nm, *rng);
  }
  return y;
}

Eigen::MatrixXd gram_matrix(const FeatureFamily& fam,
                            const ObservationMeasure& mu,
                            const Eigen::VectorXd& thetas) {
  int s = static_cast<int>(thetas.size());
  std::vector<Eigen::VectorXd> feats(static_cast<size_t>(s));
  for (int k = 0; k < s; ++k) {
    feats[static_cast<size_t>(k)] = normalized_feature(fam, mu, thetas[k], 0).f;
  }
  Eigen::MatrixXd G(s, s);
  for (int k = 0; k < s; ++k) {
    for (int l = k; l < s; ++l) {
      G(k, l) = mu.dot(feats[static_cast<size_t>(k)],
                       feats[static_cast<size_t>(l)]);
      G(l, k) = G(k, l);
    }
  }
  return G;
}

double gram_min_eigenvalue(const FeatureFamily& fam,
                           const ObservationMeasure& mu,
                           const Eigen::VectorXd& thetas) {
  if (thetas.size() == 0) return 1.0;
  Eigen::MatrixXd G = gram_matrix(fam, mu, thetas);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
  return es.eigenvalues().minCoeff();
}

}  // namespace offgrid
