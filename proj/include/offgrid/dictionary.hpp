#pragma once

#include <Eigen/Core>

#include "offgrid/measure.hpp"
#include "offgrid/proxfun.hpp"

namespace offgrid {

/// Translation family of unit-mass bump features at one scale. The feature
/// at location theta is h(theta - ., sigma), later normalized in the
/// observation space.
struct FeatureFamily {
  Preset preset;
  Domain domain;
  double sigma;     // width scale of the bump
  double theta_lo;  // admissible location window
  double theta_hi;
  int dirichlet_T = 0;  // odd bandwidth parameter 2 fc + 1 (Dirichlet only)

  /// d^order/dt^order h(t, sigma), order in {0,...,3}.
  double h(int order, double t) const;

  const ProxFunction& prox() const { return prox_function(preset); }

  double theta_len() const { return theta_hi - theta_lo; }
};

/// Gaussian bumps on the line, observed on [-b, b]; locations restricted to
/// the shrunk window [-(1-xi) b, (1-xi) b].
FeatureFamily make_gaussian_family(double sigma, double b, double xi);

/// Gaussian family under the slow-growth schedule: b = log T,
/// sigma = 1/sqrt(xi log T).
FeatureFamily make_gaussian_schedule(int T, double xi);

/// Periodic low-pass bumps on the torus: h(t) = sin(T pi t)/(sqrt(T) sin(pi t)),
/// sigma = 1/T, T odd >= 3; locations cover the whole circle.
FeatureFamily make_dirichlet_family(int T);

/// Normalized feature at theta with derivatives in theta up to max_order.
struct FeatureBundle {
  Eigen::VectorXd f;   // unit norm in the observation space
  Eigen::VectorXd d1;
  Eigen::VectorXd d2;
  Eigen::VectorXd d3;
  double raw_norm = 0.0;  // norm of the unnormalized feature
};

FeatureBundle normalized_feature(const FeatureFamily& fam,
                                 const ObservationMeasure& mu, double theta,
                                 int max_order = 3);

/// Covariant derivatives of the normalized feature:
/// D0 = f, D1 = g^{-1/2} f', D_i = D1 applied to D_{i-1}.
struct CovariantBundle {
  Eigen::VectorXd D0;
  Eigen::VectorXd D1;
  Eigen::VectorXd D2;
  Eigen::VectorXd D3;
  double g = 0.0;    // ||f'||^2
  double gp = 0.0;   // g'
  double gpp = 0.0;  // g''
};

CovariantBundle covariant_bundle(const FeatureFamily& fam,
                                 const ObservationMeasure& mu, double theta,
                                 int max_order = 3);

/// K^{[i,j]}(theta, theta_p) = <D_i(theta), D_j(theta_p)>, i, j in {0..3}.
double empirical_kernel(const FeatureFamily& fam, const ObservationMeasure& mu,
                        int i, int j, double theta, double theta_p);

/// Diagonal curvature h_K(theta) = K^{[3,3]}(theta, theta).
double kernel_curvature(const FeatureFamily& fam, const ObservationMeasure& mu,
                        double theta);

/// Metric density g(theta) = ||d/dtheta f(theta)||^2.
double g_of(const FeatureFamily& fam, const ObservationMeasure& mu,
            double theta);

/// Piecewise-linear table of the primitive of sqrt(g), supporting the
/// intrinsic distance |G(theta) - G(theta_p)| (geodesic on the torus).
class MetricTable {
 public:
  MetricTable() = default;
  MetricTable(Domain domain, double lo, double hi, std::vector<double> G);

  double primitive(double theta) const;  // G(theta), linear interpolation
  double distance(double theta, double theta_p) const;
  double total() const { return total_; }

 private:
  Domain domain_ = Domain::Line;
  double lo_ = 0.0, hi_ = 0.0, step_ = 0.0, total_ = 0.0;
  std::vector<double> G_;
};

/// Tabulates sqrt(g) at step sigma/50 (trapezoid rule) over the location
/// window (full circle on the torus).
MetricTable build_metric_table(const FeatureFamily& fam,
                               const ObservationMeasure& mu);

}  // namespace offgrid
