#pragma once

#include <vector>

#include "offgrid/signal.hpp"

namespace offgrid {

struct SolverConfig {
  double kappa = 0.0;               // l1 penalty level
  int max_features = 0;             // 0: max(8, 4 * expected_s)
  int expected_s = 2;
  double insertion_per_sigma = 8.0; // insertion scan density
  int max_outer = 0;                // 0: 2 * max_features + 4
  int beta_max_sweeps = 600;
  int local_max_iters = 500;
  double theta_tol = 1e-10;         // location step tolerance, sigma units
  double obj_tol = 1e-12;
  double merge_radius_factor = 0.01;  // merge atoms closer than sigma/100
  // widest pair distance, in sigma units, at which a collapse is still
  // attempted; the collapse is kept only when the objective does not grow
  double collapse_radius_factor = 0.25;
  double prune_tol = 1e-12;
};

/// kappa = c1 * sigma_bar * sqrt(delta_T * log(tau)).
double default_kappa(const NoiseModel& nm, double tau, double c1 = 2.0);

struct FitResult {
  Mixture estimate;                  // atoms sorted by location
  double objective = 0.0;            // 0.5 ||y - model||^2 + kappa ||beta||_1
  std::vector<double> objective_trace;
  bool converged = false;
  int outer_iters = 0;
  double max_corr_residual = 0.0;    // sup_theta |<f(theta), residual>|
  double stationarity_beta = 0.0;    // max_k |<f_k, res> - kappa sign(beta_k)|
  double stationarity_theta = 0.0;   // max_k |<f_k', res>| |beta_k|
  Eigen::VectorXd model;
  Eigen::VectorXd residual;
};

/// Sparse mixture estimate by greedy insertion over the continuum,
/// exact l1-penalized amplitude solves, and local refinement of locations.
FitResult fit(const FeatureFamily& fam, const ObservationMeasure& mu,
              const Eigen::VectorXd& y, const SolverConfig& cfg);

}  // namespace offgrid
