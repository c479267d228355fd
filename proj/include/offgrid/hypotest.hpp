#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "offgrid/certificate.hpp"
#include "offgrid/solver.hpp"

namespace offgrid {

/// Multiplicative constants of the decision thresholds. C0 and C3 are meant
/// to be calibrated empirically; the rest keep documented defaults.
struct TheoryConstants {
  double C0 = 2.0;  // prediction error over sqrt(s) kappa
  double C1 = 2.0;  // kappa tuning multiplier
  double C2 = 1.359140914229523;  // probability constant; c = max(2 C2, e)
  double C3 = 2.0;  // l1 error over s kappa
  double C4 = 2.0;  // support-test separation, kappa part
  double C5 = 2.0;  // support-test separation, threshold part

  double c_small() const {
    return std::max(2.0 * C2, 2.718281828459045235360287);
  }
  double C_big() const { return 2.0 * C0 * C1; }
};

struct Geometry {
  double theta_len;  // |Theta|, length of the admissible location window
  double sigma;      // dictionary scale

  static Geometry of(const FeatureFamily& fam) {
    return {fam.theta_len(), fam.sigma};
  }
};

/// Null description: reference mixture, plus anchor signs for the
/// support-style statistic (defaults to sign(beta)).
struct NullSpec {
  Mixture mixture;
  Eigen::VectorXd signs;

  Eigen::VectorXd effective_signs() const;
};

// --- statistics ------------------------------------------------------------

/// ||y - m0||^2 - E ||w||^2 with m0 the null model.
double stat_goodness(const ObservationMeasure& mu, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& null_model, const NoiseModel& nm);

/// ||m_hat - m0||^2 for a fitted model.
double stat_proximity(const ObservationMeasure& mu,
                      const Eigen::VectorXd& fitted_model,
                      const Eigen::VectorXd& null_model);

/// ||beta_hat||_1 - <y, p0> against the null certificate.
double stat_support(const ObservationMeasure& mu, const Eigen::VectorXd& y,
                    const FitResult& fitted, const Certificate& p0);

// --- thresholds and separation radii ---------------------------------------

double threshold_goodness(double rho);  // rho^2 / 2

/// Risk bound of the goodness statistic at threshold t against alternatives
/// at separation rho (clipped at 2): xi/t^2 + 4 xi/(rho^2-t)^2
/// + exp(-(rho^2-t)^2/(32 sigma_bar^2 delta rho^2)).
double risk_bound_goodness(double rho, double t, const NoiseModel& nm);

/// Spread-regime separation: max((40 xi/alpha)^{1/4},
/// 8 sigma_bar sqrt(2 delta log(2/alpha))).
double rho_quartic(double alpha, const NoiseModel& nm);

struct SparseThreshold {
  double rho;
  double t;
  double kappa;
};

/// Sparse-regime pair t = C0^2 max(s0,1) kappa^2,
/// rho = C0 sqrt(max(s,1)) kappa + sqrt(t).
SparseThreshold rho_sparse(double alpha, int s, int s0, double kappa,
                           const TheoryConstants& consts);

/// Closed-form sparse separation
/// C sigma_bar sqrt(max(s,s0,1) delta log(c |Theta| / (alpha sigma))).
double rho_sparse_closed(double alpha, int s, int s0, const NoiseModel& nm,
                         const Geometry& geom, const TheoryConstants& consts);

struct DetectionRadius {
  double value;
  double term_quartic;
  double term_sparse;
  bool quartic_binding;
};

/// Minimal separation of the combined test:
/// min((80 xi/alpha)^{1/4}, C sigma_bar sqrt(max(s,s0,1) delta
/// log(2 c |Theta|/(alpha sigma)))).
DetectionRadius rho_detection(double alpha, int s, int s0,
                              const NoiseModel& nm, const Geometry& geom,
                              const TheoryConstants& consts);

/// Support-test separation rho = C4 s kappa + C5 t for threshold t.
double rho_support(int s, double kappa, double t,
                   const TheoryConstants& consts);

// --- structured distance to the null support --------------------------------

/// Weighted squared-distance of a mixture to sign-matched anchor balls of
/// metric radius r plus the mass falling outside all matching balls.
/// Requires 2r below the smallest pairwise anchor distance.
double discrepancy(const MetricTable& metric, const Mixture& alt,
                   const NullSpec& null, double r);

// --- orchestration -----------------------------------------------------------

enum class TestKind { Goodness, Proximity, Support, Combined };

TestKind test_kind_from_string(const std::string& s);
std::string to_string(TestKind k);

struct TestOutcome {
  TestKind kind;
  double statistic = 0.0;
  double threshold = 0.0;
  bool reject = false;
  std::vector<TestOutcome> parts;  // Combined keeps its two sub-tests
};

struct TestParams {
  double alpha = 0.1;
  int s = 1;       // alternative sparsity bound
  int s0 = 0;      // null sparsity
  double kappa = 0.0;        // 0: derive from alpha via the tuning rule
  std::optional<double> threshold;  // explicit override
  TheoryConstants consts;
  SolverConfig solver;
};

/// Tuning rule kappa(alpha) = C1 sigma_bar sqrt(delta log(c |Theta| /
/// (alpha sigma))).
double kappa_for_level(double alpha, const NoiseModel& nm,
                       const Geometry& geom, const TheoryConstants& consts);

TestOutcome run_test(TestKind kind, const FeatureFamily& fam,
                     const ObservationMeasure& mu, const Eigen::VectorXd& y,
                     const NullSpec& null, const NoiseModel& nm,
                     const TestParams& params);

}  // namespace offgrid
