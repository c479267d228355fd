#pragma once

#include <string>
#include <vector>

#include "offgrid/dictionary.hpp"

namespace offgrid {

/// Sup-norm distance between the empirical kernel and its translation
///-invariant limit, split into the order <= 2 part (V1) and the diagonal
/// curvature part (V2).
struct ApproxReport {
  double C_T = 1.0;
  double V1 = 0.0;
  double V2 = 0.0;
  double V_T = 0.0;
  double grid_step = 0.0;
};

/// Metric equivalence constant: sup over the location window (step
/// sigma/20) of max(sqrt(g_prox/g), sqrt(g/g_prox)) with g_prox =
/// g_inf/sigma^2. Errors (Assumption kind) when g is nonpositive.
double compute_CT(const FeatureFamily& fam, const ObservationMeasure& mu);

/// Kernel approximation report. grid_step <= sigma/10 is the offset
/// resolution for the order <= 2 comparison (defaults to sigma/20); the
/// diagonal curvature scan runs at half that step. The quadratic sup over
/// location pairs is reduced to coarse anchors (denser near window edges,
/// where translation invariance degrades) against fine offsets up to
/// span = min(window length, 40 sigma).
ApproxReport compute_VT(const FeatureFamily& fam, const ObservationMeasure& mu,
                        double grid_step = 0.0);

/// Four-part operating-condition verdict with numeric margins.
struct AssumptionCheck {
  bool regularity = false;   // g > 0 over the scan grid
  bool f_properties = false; // eps(r/2) > 0 and nu(2r) > 0
  bool proximity = false;    // C_T <= 2, V_T <= H1, (s-1) V_T <= (1-eta) H2
  bool separation = false;   // pairwise gaps > sigma * Sigma(eta, r, s)
  bool ok = false;

  double g_min = 0.0;
  double eps_half = 0.0;
  double nu_2r = 0.0;
  double C_T = 0.0;
  double V_T = 0.0;
  double H1 = 0.0;
  double H2 = 0.0;
  double slack_v1 = 0.0;      // H1 - V_T
  double slack_v2 = 0.0;      // (1-eta) H2 - (s-1) V_T
  double min_gap = 0.0;       // smallest pairwise anchor distance
  double required_gap = 0.0;  // sigma * Sigma(eta, r, s)
  std::string failure;        // names the first failing part, empty when ok
};

AssumptionCheck check_assumption(const FeatureFamily& fam,
                                 const ObservationMeasure& mu, double eta,
                                 double r, int s,
                                 const std::vector<double>& anchors);

}  // namespace offgrid
