#pragma once

#include <Eigen/Core>

#include "offgrid/dictionary.hpp"

namespace offgrid {

/// Dual interpolation function p = sum_k alpha_k f(theta_k)
/// + sum_k xi_k D1 f(theta_k) matching prescribed signs at anchors with
/// vanishing derivative there.
struct Certificate {
  Eigen::VectorXd anchors;
  Eigen::VectorXd signs;        // +1/-1 targets v_k
  Eigen::VectorXd alpha;
  Eigen::VectorXd xi;
  Eigen::VectorXd p;            // embedded dual vector
  double residual_inf = 0.0;    // max constraint violation of the solve
  double cond = 0.0;            // condition estimate of the anchor system
};

Certificate build_certificate(const FeatureFamily& fam,
                              const ObservationMeasure& mu,
                              const Eigen::VectorXd& anchors,
                              const Eigen::VectorXd& signs);

/// Scanned quality constants of a certificate:
///   near each anchor   |<f(theta), p>| <= 1 - C_N d(theta, anchor)^2,
///   far from anchors   |<f(theta), p>| <= 1 - C_F,
/// with C_N, C_F the largest empirical constants over a scan of step
/// <= sigma/20; norm_over_sqrt_s = ||p|| / sqrt(s).
struct CertificateReport {
  double C_N = 0.0;
  double C_F = 0.0;
  double norm_over_sqrt_s = 0.0;
  double near_radius = 0.0;  // metric ball radius used for the near region
  double far_max_abs = 0.0;  // sup |<f, p>| over the far region
  bool ok = false;           // C_N > 0 and C_F > 0
};

CertificateReport verify_certificate(const FeatureFamily& fam,
                                     const ObservationMeasure& mu,
                                     const MetricTable& metric,
                                     const Certificate& cert, double r);

}  // namespace offgrid
