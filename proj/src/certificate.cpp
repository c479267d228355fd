#include "offgrid/certificate.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

namespace offgrid {

Certificate build_certificate(const FeatureFamily& fam,
                              const ObservationMeasure& mu,
                              const Eigen::VectorXd& anchors,
                              const Eigen::VectorXd& signs) {
  int s = static_cast<int>(anchors.size());
  require(s >= 1, ErrorKind::Domain, "certificate needs at least one anchor");
  require(signs.size() == s, ErrorKind::Structural,
          "anchor/sign count mismatch");
  for (int k = 0; k < s; ++k) {
    require(signs[k] == 1.0 || signs[k] == -1.0, ErrorKind::Domain,
            "anchor signs must be +1 or -1");
  }

  std::vector<CovariantBundle> bundles(static_cast<size_t>(s));
  for (int k = 0; k < s; ++k) {
    bundles[static_cast<size_t>(k)] = covariant_bundle(fam, mu, anchors[k], 1);
  }

  // Gram system of the 2s functions [f(theta_k); D1 f(theta_k)]
  Eigen::MatrixXd M(2 * s, 2 * s);
  for (int k = 0; k < s; ++k) {
    const auto& bk = bundles[static_cast<size_t>(k)];
    for (int l = 0; l < s; ++l) {
      const auto& bl = bundles[static_cast<size_t>(l)];
      M(k, l) = mu.dot(bk.D0, bl.D0);
      M(k, s + l) = mu.dot(bk.D0, bl.D1);
      M(s + k, l) = mu.dot(bk.D1, bl.D0);
      M(s + k, s + l) = mu.dot(bk.D1, bl.D1);
    }
  }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(2 * s);
  rhs.head(s) = signs;

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU |
                                               Eigen::ComputeThinV);
  double smax = svd.singularValues()(0);
  double smin = svd.singularValues()(2 * s - 1);
  double cond = smin > 0.0 ? smax / smin
                           : std::numeric_limits<double>::infinity();
  require(cond <= 1e12, ErrorKind::Structural,
          "anchor system is numerically singular; anchors too close");

  Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
  Eigen::VectorXd x = ldlt.solve(rhs);
  x += ldlt.solve(rhs - M * x);  // one refinement round

  Certificate cert;
  cert.anchors = anchors;
  cert.signs = signs;
  cert.alpha = x.head(s);
  cert.xi = x.tail(s);
  cert.cond = cond;
  cert.residual_inf = (M * x - rhs).cwiseAbs().maxCoeff();
  cert.p = Eigen::VectorXd::Zero(mu.dim());
  for (int k = 0; k < s; ++k) {
    cert.p += cert.alpha[k] * bundles[static_cast<size_t>(k)].D0;
    cert.p += cert.xi[k] * bundles[static_cast<size_t>(k)].D1;
  }
  return cert;
}

CertificateReport verify_certificate(const FeatureFamily& fam,
                                     const ObservationMeasure& mu,
                                     const MetricTable& metric,
                                     const Certificate& cert, double r) {
  require(r > 0.0, ErrorKind::Domain, "near-ball radius must be positive");
  int s = static_cast<int>(cert.anchors.size());
  CertificateReport rep;
  rep.near_radius = r;

  double step = fam.sigma / 20.0;
  double span = fam.theta_hi - fam.theta_lo;
  int n = std::max(2, static_cast<int>(std::ceil(span / step)));
  bool torus = fam.domain == Domain::Torus;
  int count = torus ? n : n + 1;

  double cn = std::numeric_limits<double>::infinity();
  double far_abs = 0.0;
  for (int i = 0; i < count; ++i) {
    double th = fam.theta_lo + span * i / n;
    double c = std::abs(mu.dot(normalized_feature(fam, mu, th, 0).f, cert.p));
    double dmin = std::numeric_limits<double>::infinity();
    for (int k = 0; k < s; ++k) {
      dmin = std::min(dmin, metric.distance(th, cert.anchors[k]));
    }
    if (dmin <= r) {
      if (dmin >= 0.05 * r) {
        cn = std::min(cn, (1.0 - c) / (dmin * dmin));
      }
    } else {
      far_abs = std::max(far_abs, c);
    }
  }
  // quadratic behaviour at the anchors themselves:
  // |<f(theta), p>| ~ 1 + v_k <f'', p> (theta - theta_k)^2 / 2 and
  // d^2 ~ g (theta - theta_k)^2
  for (int k = 0; k < s; ++k) {
    FeatureBundle b = normalized_feature(fam, mu, cert.anchors[k], 2);
    double g = mu.dot(b.d1, b.d1);
    double c2 = mu.dot(b.d2, cert.p);
    cn = std::min(cn, -cert.signs[k] * c2 / (2.0 * g));
  }

  rep.C_N = std::isfinite(cn) ? cn : 0.0;
  rep.far_max_abs = far_abs;
  rep.C_F = 1.0 - far_abs;
  rep.norm_over_sqrt_s = mu.norm(cert.p) / std::sqrt(static_cast<double>(s));
  rep.ok = rep.C_N > 0.0 && rep.C_F > 0.0;
  return rep;
}

}  // namespace offgrid
