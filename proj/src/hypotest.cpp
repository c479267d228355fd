#include "offgrid/hypotest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace offgrid {

Eigen::VectorXd NullSpec::effective_signs() const {
  if (signs.size() == mixture.beta.size() && signs.size() > 0) return signs;
  Eigen::VectorXd s(mixture.beta.size());
  for (int k = 0; k < s.size(); ++k) {
    s[k] = mixture.beta[k] >= 0.0 ? 1.0 : -1.0;
  }
  return s;
}

double stat_goodness(const ObservationMeasure& mu, const Eigen::VectorXd& y,
                     const Eigen::VectorXd& null_model, const NoiseModel& nm) {
  Eigen::VectorXd d = y - null_model;
  return mu.dot(d, d) - nm.expected_sq_norm;
}

double stat_proximity(const ObservationMeasure& mu,
                      const Eigen::VectorXd& fitted_model,
                      const Eigen::VectorXd& null_model) {
  Eigen::VectorXd d = fitted_model - null_model;
  return mu.dot(d, d);
}

double stat_support(const ObservationMeasure& mu, const Eigen::VectorXd& y,
                    const FitResult& fitted, const Certificate& p0) {
  return fitted.estimate.l1() - mu.dot(y, p0.p);
}

double threshold_goodness(double rho) {
  require(rho > 0.0, ErrorKind::Domain, "separation must be positive");
  return 0.5 * rho * rho;
}

double risk_bound_goodness(double rho, double t, const NoiseModel& nm) {
  require(t > 0.0 && rho * rho > t, ErrorKind::Domain,
          "risk bound needs rho^2 > t > 0");
  double xi = nm.xi_T;
  double gap = rho * rho - t;
  double a = xi / (t * t);
  double b = 4.0 * xi / (gap * gap);
  double denom = 32.0 * nm.sigma_bar * nm.sigma_bar * nm.delta_T * rho * rho;
  double c = denom > 0.0 ? std::exp(-gap * gap / denom) : 0.0;
  return std::min(2.0, a + b + c);
}

double rho_quartic(double alpha, const NoiseModel& nm) {
  require(alpha > 0.0 && alpha < 1.0, ErrorKind::Domain,
          "level must lie in (0,1)");
  double a = std::pow(40.0 * nm.xi_T / alpha, 0.25);
  double b = 8.0 * nm.sigma_bar *
             std::sqrt(2.0 * nm.delta_T * std::log(2.0 / alpha));
  return std::max(a, b);
}

SparseThreshold rho_sparse(double alpha, int s, int s0, double kappa,
                           const TheoryConstants& consts) {
  require(alpha > 0.0 && alpha < 1.0, ErrorKind::Domain,
          "level must lie in (0,1)");
  require(s >= 0 && s0 >= 0, ErrorKind::Domain,
          "sparsity bounds must be >= 0");
  require(kappa > 0.0, ErrorKind::Domain, "kappa must be positive");
  SparseThreshold out;
  out.kappa = kappa;
  double sqrt_t = consts.C0 * std::sqrt(static_cast<double>(std::max(s0, 1))) *
                  kappa;
  out.t = sqrt_t * sqrt_t;
  out.rho = consts.C0 * std::sqrt(static_cast<double>(std::max(s, 1))) * kappa +
            sqrt_t;
  // the pair satisfies the threshold ordering by construction:
  // C0 sqrt(s0) kappa <= sqrt(t) < rho and sqrt(t) + C0 sqrt(s) kappa <= rho
  return out;
}

double kappa_for_level(double alpha, const NoiseModel& nm,
                       const Geometry& geom, const TheoryConstants& consts) {
  require(alpha > 0.0 && alpha < 1.0, ErrorKind::Domain,
          "level must lie in (0,1)");
  double tau = consts.c_small() * std::max(geom.theta_len, geom.sigma) /
               (alpha * geom.sigma);
  tau = std::max(tau, 2.718281828459045235360287);
  return consts.C1 * nm.sigma_bar * std::sqrt(nm.delta_T * std::log(tau));
}

double rho_sparse_closed(double alpha, int s, int s0, const NoiseModel& nm,
                         const Geometry& geom, const TheoryConstants& consts) {
  require(alpha > 0.0 && alpha < 1.0, ErrorKind::Domain,
          "level must lie in (0,1)");
  double m = static_cast<double>(std::max({s, s0, 1}));
  double arg = consts.c_small() * geom.theta_len / (alpha * geom.sigma);
  arg = std::max(arg, 2.718281828459045235360287);
  return consts.C_big() * nm.sigma_bar *
         std::sqrt(m * nm.delta_T * std::log(arg));
}

DetectionRadius rho_detection(double alpha, int s, int s0,
                              const NoiseModel& nm, const Geometry& geom,
                              const TheoryConstants& consts) {
  require(alpha > 0.0 && alpha < 1.0, ErrorKind::Domain,
          "level must lie in (0,1)");
  DetectionRadius out;
  out.term_quartic = std::pow(80.0 * nm.xi_T / alpha, 0.25);
  double m = static_cast<double>(std::max({s, s0, 1}));
  double arg = 2.0 * consts.c_small() * geom.theta_len / (alpha * geom.sigma);
  arg = std::max(arg, 2.718281828459045235360287);
  out.term_sparse = consts.C_big() * nm.sigma_bar *
                    std::sqrt(m * nm.delta_T * std::log(arg));
  out.quartic_binding = out.term_quartic <= out.term_sparse;
  out.value = std::min(out.term_quartic, out.term_sparse);
  return out;
}

double rho_support(int s, double kappa, double t,
                   const TheoryConstants& consts) {
  require(s >= 1 && kappa > 0.0 && t > 0.0, ErrorKind::Domain,
          "support separation needs s >= 1, kappa > 0, t > 0");
  return consts.C4 * s * kappa + consts.C5 * t;
}

double discrepancy(const MetricTable& metric, const Mixture& alt,
                   const NullSpec& null, double r) {
  require(r > 0.0, ErrorKind::Domain, "ball radius must be positive");
  const Mixture& m0 = null.mixture;
  Eigen::VectorXd v = null.effective_signs();
  for (int k = 0; k < m0.size(); ++k) {
    for (int l = k + 1; l < m0.size(); ++l) {
      double d = metric.distance(m0.theta[k], m0.theta[l]);
      require(2.0 * r < d, ErrorKind::Domain,
              "ball radius too large: anchor balls would overlap");
    }
  }
  double acc = 0.0;
  for (int l = 0; l < alt.size(); ++l) {
    double b = alt.beta[l];
    if (b == 0.0) continue;
    double sign = b > 0.0 ? 1.0 : -1.0;
    bool matched = false;
    for (int k = 0; k < m0.size() && !matched; ++k) {
      double d = metric.distance(alt.theta[l], m0.theta[k]);
      if (d <= r && sign == v[k]) {
        acc += std::abs(b) * d * d;
        matched = true;
      }
    }
    if (!matched) acc += std::abs(b);
  }
  return acc;
}

TestKind test_kind_from_string(const std::string& s) {
  if (s == "goodness" || s == "T1" || s == "t1") return TestKind::Goodness;
  if (s == "proximity" || s == "T2" || s == "t2") return TestKind::Proximity;
  if (s == "support" || s == "T3" || s == "t3") return TestKind::Support;
  if (s == "combined" || s == "max" || s == "MAX") return TestKind::Combined;
  fail(ErrorKind::Config, "unknown test kind '" + s + "'");
}

std::string to_string(TestKind k) {
  switch (k) {
    case TestKind::Goodness:
      return "goodness";
    case TestKind::Proximity:
      return "proximity";
    case TestKind::Support:
      return "support";
    default:
      return "combined";
  }
}

namespace {

TestOutcome run_goodness(const ObservationMeasure& mu, const Eigen::VectorXd& y,
                         const Eigen::VectorXd& m0, const NoiseModel& nm,
                         const TestParams& params) {
  TestOutcome out;
  out.kind = TestKind::Goodness;
  out.statistic = stat_goodness(mu, y, m0, nm);
  out.threshold = params.threshold
                      ? *params.threshold
                      : threshold_goodness(rho_quartic(params.alpha, nm));
  out.reject = std::abs(out.statistic) > out.threshold;
  return out;
}

TestOutcome run_proximity(const FeatureFamily& fam,
                          const ObservationMeasure& mu,
                          const Eigen::VectorXd& y, const Eigen::VectorXd& m0,
                          const NoiseModel& nm, const TestParams& params,
                          double alpha) {
  TestOutcome out;
  out.kind = TestKind::Proximity;
  SolverConfig sc = params.solver;
  double kappa = params.kappa > 0.0 ? params.kappa : sc.kappa;
  if (kappa <= 0.0) {
    kappa = kappa_for_level(alpha, nm, Geometry::of(fam), params.consts);
  }
  sc.kappa = kappa;
  FitResult fr = fit(fam, mu, y, sc);
  out.statistic = stat_proximity(mu, fr.model, m0);
  if (params.threshold) {
    out.threshold = *params.threshold;
  } else {
    out.threshold =
        rho_sparse(alpha, params.s, params.s0, kappa, params.consts).t;
  }
  out.reject = std::abs(out.statistic) > out.threshold;
  return out;
}

}  // namespace

TestOutcome run_test(TestKind kind, const FeatureFamily& fam,
                     const ObservationMeasure& mu, const Eigen::VectorXd& y,
                     const NullSpec& null, const NoiseModel& nm,
                     const TestParams& params) {
  Eigen::VectorXd m0 = synthesize(fam, mu, null.mixture);
  switch (kind) {
    case TestKind::Goodness:
      return run_goodness(mu, y, m0, nm, params);
    case TestKind::Proximity:
      return run_proximity(fam, mu, y, m0, nm, params, params.alpha);
    case TestKind::Support: {
      TestOutcome out;
      out.kind = TestKind::Support;
      require(null.mixture.size() > 0, ErrorKind::Domain,
              "support test needs a nonempty null support");
      Certificate p0 = build_certificate(fam, mu, null.mixture.theta,
                                         null.effective_signs());
      SolverConfig sc = params.solver;
      if (params.kappa > 0.0) sc.kappa = params.kappa;
      if (sc.kappa <= 0.0) {
        sc.kappa =
            kappa_for_level(params.alpha, nm, Geometry::of(fam), params.consts);
      }
      FitResult fr = fit(fam, mu, y, sc);
      out.statistic = stat_support(mu, y, fr, p0);
      require(params.threshold.has_value(), ErrorKind::Config,
              "support test needs an explicit threshold");
      out.threshold = *params.threshold;
      out.reject = std::abs(out.statistic) > out.threshold;
      return out;
    }
    case TestKind::Combined:
    default: {
      TestOutcome out;
      out.kind = TestKind::Combined;
      double half = 0.5 * params.alpha;
      TestParams p1 = params;
      p1.threshold.reset();
      p1.alpha = half;
      TestOutcome g = run_goodness(mu, y, m0, nm, p1);
      TestOutcome p = run_proximity(fam, mu, y, m0, nm, p1, half);
      out.reject = g.reject || p.reject;
      // report the more extreme normalized excess
      double eg = g.threshold > 0 ? std::abs(g.statistic) / g.threshold : 0.0;
      double ep = p.threshold > 0 ? std::abs(p.statistic) / p.threshold : 0.0;
      const TestOutcome& lead = eg >= ep ? g : p;
      out.statistic = lead.statistic;
      out.threshold = lead.threshold;
      out.parts.push_back(std::move(g));
      out.parts.push_back(std::move(p));
      return out;
    }
  }
}

}  // namespace offgrid
