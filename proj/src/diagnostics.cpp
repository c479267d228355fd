#include "offgrid/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "offgrid/proxfun.hpp"

namespace offgrid {

namespace {

std::vector<double> location_grid(const FeatureFamily& fam, double step) {
  std::vector<double> out;
  if (fam.domain == Domain::Torus) {
    int n = std::max(2, static_cast<int>(std::ceil(1.0 / step)));
    out.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) out.push_back(static_cast<double>(i) / n);
  } else {
    int n = std::max(1, static_cast<int>(std::ceil(fam.theta_len() / step)));
    out.reserve(static_cast<size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) {
      out.push_back(fam.theta_lo + fam.theta_len() * i / n);
    }
  }
  return out;
}

/// Anchor locations for the pair scan: dense near the window edges where
/// translation invariance degrades, sparse in the interior.
std::vector<double> coarse_anchors(const FeatureFamily& fam) {
  double s = fam.sigma;
  std::set<double> pts;
  if (fam.domain == Domain::Torus) {
    pts.insert(0.0);
    pts.insert(std::min(0.29 * s, 0.25));
  } else {
    double lo = fam.theta_lo, hi = fam.theta_hi;
    double len = fam.theta_len();
    const double offs[] = {0.0,     s / 8, s / 4, s / 2, 0.75 * s,
                           s,       1.5 * s, 2 * s, 3 * s, 4 * s};
    for (double o : offs) {
      if (o > 0.5 * len) continue;
      pts.insert(lo + o);
      pts.insert(hi - o);
    }
    pts.insert(lo + 0.5 * len);
    double interior = std::max(s, len / 16.0);
    for (double t = lo + 5 * s; t < hi - 5 * s; t += interior) pts.insert(t);
  }
  return {pts.begin(), pts.end()};
}

}  // namespace

double compute_CT(const FeatureFamily& fam, const ObservationMeasure& mu) {
  const double g_prox = fam.prox().g_inf() / (fam.sigma * fam.sigma);
  double worst = 1.0;
  for (double theta : location_grid(fam, fam.sigma / 20.0)) {
    double g = g_of(fam, mu, theta);
    require(g > 0.0, ErrorKind::Assumption,
            "metric density vanishes inside the location window");
    double ratio = g / g_prox;
    worst = std::max({worst, std::sqrt(ratio), std::sqrt(1.0 / ratio)});
  }
  return worst;
}

ApproxReport compute_VT(const FeatureFamily& fam, const ObservationMeasure& mu,
                        double grid_step) {
  const double sigma = fam.sigma;
  if (grid_step <= 0.0) grid_step = sigma / 20.0;
  require(grid_step <= sigma / 10.0 + 1e-15 * sigma, ErrorKind::Domain,
          "offset step must not exceed sigma/10");
  const ProxFunction& F = fam.prox();

  ApproxReport rep;
  rep.grid_step = grid_step;
  rep.C_T = compute_CT(fam, mu);

  const double len =
      fam.domain == Domain::Torus ? 1.0 : fam.theta_len();
  const double span = std::min(len, 40.0 * sigma);
  const int n_off = std::max(1, static_cast<int>(std::ceil(span / grid_step)));

  for (double theta : coarse_anchors(fam)) {
    CovariantBundle a = covariant_bundle(fam, mu, theta, 2);
    const Eigen::VectorXd* da[3] = {&a.D0, &a.D1, &a.D2};
    for (int dir = 0; dir < 2; ++dir) {
      if (fam.domain == Domain::Torus && dir == 1) break;
      double sgn = dir == 0 ? 1.0 : -1.0;
      for (int m = 0; m <= n_off; ++m) {
        double theta_p = theta + sgn * span * m / n_off;
        if (fam.domain == Domain::Line &&
            (theta_p < fam.theta_lo - 1e-12 ||
             theta_p > fam.theta_hi + 1e-12)) {
          break;
        }
        theta_p = std::clamp(theta_p, fam.theta_lo, fam.theta_hi);
        CovariantBundle b = covariant_bundle(fam, mu, theta_p, 2);
        const Eigen::VectorXd* db[3] = {&b.D0, &b.D1, &b.D2};
        for (int i = 0; i <= 2; ++i) {
          for (int j = 0; j <= 2; ++j) {
            double emp = mu.dot(*da[i], *db[j]);
            double lim = prox_kernel_derivative(F, i, j, theta, theta_p,
                                                sigma, fam.domain);
            rep.V1 = std::max(rep.V1, std::abs(emp - lim));
          }
        }
      }
    }
  }

  const double h_prox =
      prox_kernel_derivative(F, 3, 3, 0.0, 0.0, sigma, fam.domain);
  for (double theta : location_grid(fam, 0.5 * grid_step)) {
    double h = kernel_curvature(fam, mu, theta);
    rep.V2 = std::max(rep.V2, std::abs(h - h_prox));
  }

  rep.V_T = std::max(rep.V1, rep.V2);
  return rep;
}

AssumptionCheck check_assumption(const FeatureFamily& fam,
                                 const ObservationMeasure& mu, double eta,
                                 double r, int s,
                                 const std::vector<double>& anchors) {
  require(eta > 0.0 && eta < 1.0, ErrorKind::Domain,
          "eta must lie in (0,1)");
  require(s >= 1, ErrorKind::Domain, "sparsity must be >= 1");
  const ProxFunction& F = fam.prox();
  AssumptionCheck out;

  out.g_min = std::numeric_limits<double>::infinity();
  out.regularity = true;
  for (double theta : location_grid(fam, fam.sigma / 20.0)) {
    double g = g_of(fam, mu, theta);
    out.g_min = std::min(out.g_min, g);
    if (g <= 0.0) out.regularity = false;
  }

  out.eps_half = epsilon_of(F, 0.5 * r);
  out.nu_2r = nu_of(F, 2.0 * r);
  out.f_properties = out.eps_half > 0.0 && out.nu_2r > 0.0;

  if (out.regularity) {
    ApproxReport rep = compute_VT(fam, mu);
    out.C_T = rep.C_T;
    out.V_T = rep.V_T;
  }
  if (out.f_properties && out.regularity) {
    try {
      HinfBounds hb = h_infinity_bounds(F, r);
      out.H1 = hb.h1;
      out.H2 = hb.h2;
      out.slack_v1 = out.H1 - out.V_T;
      out.slack_v2 = (1.0 - eta) * out.H2 - (s - 1) * out.V_T;
      out.proximity =
          out.C_T <= 2.0 && out.slack_v1 >= 0.0 && out.slack_v2 >= 0.0;
    } catch (const Error&) {
      out.proximity = false;
    }
  }

  out.separation = true;
  out.min_gap = std::numeric_limits<double>::infinity();
  if (out.f_properties) {
    try {
      out.required_gap = fam.sigma * separation_requirement(F, eta, r, s);
    } catch (const Error&) {
      out.separation = false;
    }
  } else {
    out.separation = false;
  }
  for (size_t k = 0; k + 1 < anchors.size(); ++k) {
    for (size_t l = k + 1; l < anchors.size(); ++l) {
      double d = std::abs(displacement(fam.domain, anchors[k], anchors[l]));
      out.min_gap = std::min(out.min_gap, d);
    }
  }
  if (anchors.size() > 1 && out.min_gap <= out.required_gap) {
    out.separation = false;
  }

  out.ok = out.regularity && out.f_properties && out.proximity &&
           out.separation;
  if (!out.ok) {
    if (!out.regularity) {
      out.failure = "regularity: metric density nonpositive on the grid";
    } else if (!out.f_properties) {
      out.failure = "profile: eps(r/2) or nu(2r) nonpositive";
    } else if (!out.proximity) {
      out.failure = "proximity: kernel deviation exceeds the admissible gap";
    } else {
      out.failure = "separation: anchors closer than the required gap";
    }
  }
  return out;
}

}  // namespace offgrid
