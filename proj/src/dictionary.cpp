#include "offgrid/dictionary.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace offgrid {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;
constexpr double kTwoPi = 2.0 * kPi;

double gaussian_h(int order, double t, double s) {
  double amp = std::exp(-0.5 * t * t / (s * s)) /
               (std::pow(kPi, 0.25) * std::sqrt(s));
  double s2 = s * s;
  switch (order) {
    case 0:
      return amp;
    case 1:
      return -t / s2 * amp;
    case 2:
      return (t * t / (s2 * s2) - 1.0 / s2) * amp;
    case 3:
      return (3.0 * t / (s2 * s2) - t * t * t / (s2 * s2 * s2)) * amp;
    default:
      fail(ErrorKind::Domain, "bump derivative order must lie in 0..3");
  }
}

double dirichlet_h(int order, double t, int T) {
  // h(t) = (1 + 2 sum_k cos(2 pi k t)) / sqrt(T), k = 1..(T-1)/2, evaluated
  // through the quotient sin(pi T t)/sin(pi t); the cosine sum is kept near
  // the peak where the quotient derivatives lose digits to cancellation
  double rt = std::sqrt(static_cast<double>(T));
  if (std::abs(t) * (2 * T) < 1.0) {
    int fc = (T - 1) / 2;
    double acc = (order == 0) ? 1.0 : 0.0;
    for (int k = 1; k <= fc; ++k) {
      double w = kTwoPi * k;
      double ph = w * t;
      switch (order) {
        case 0:
          acc += 2.0 * std::cos(ph);
          break;
        case 1:
          acc += -2.0 * w * std::sin(ph);
          break;
        case 2:
          acc += -2.0 * w * w * std::cos(ph);
          break;
        case 3:
          acc += 2.0 * w * w * w * std::sin(ph);
          break;
        default:
          fail(ErrorKind::Domain, "bump derivative order must lie in 0..3");
      }
    }
    return acc / rt;
  }
  double u = kPi * t;
  double U = kPi * T * t;
  double su = std::sin(u);
  double S1 = std::sin(U) / su;  // the quotient itself
  double C1 = std::cos(U) / su;
  double c = std::cos(u) / su;
  double Td = T;
  switch (order) {
    case 0:
      return S1 / rt;
    case 1:
      return kPi * (Td * C1 - c * S1) / rt;
    case 2:
      return kPi * kPi *
             ((1.0 + 2.0 * c * c - Td * Td) * S1 - 2.0 * Td * c * C1) / rt;
    case 3:
      return kPi * kPi * kPi *
             (c * (3.0 * Td * Td - 5.0 - 6.0 * c * c) * S1 +
              Td * (3.0 + 6.0 * c * c - Td * Td) * C1) / rt;
    default:
      fail(ErrorKind::Domain, "bump derivative order must lie in 0..3");
  }
}

void check_compatible(const FeatureFamily& fam, const ObservationMeasure& mu) {
  require(fam.domain == mu.domain, ErrorKind::Structural,
          "feature family and observation measure live on different domains");
  if (mu.kind == MeasureKind::Basis) {
    require(fam.preset == Preset::Dirichlet, ErrorKind::Structural,
            "basis observation supports the low-pass family only");
    require((fam.dirichlet_T - 1) / 2 <= mu.fourier_fmax,
            ErrorKind::Structural,
            "basis bandwidth too small for the feature family");
  }
}

}  // namespace

double FeatureFamily::h(int order, double t) const {
  if (preset == Preset::Gaussian) return gaussian_h(order, t, sigma);
  return dirichlet_h(order, torus_wrap(t), dirichlet_T);
}

FeatureFamily make_gaussian_family(double sigma, double b, double xi) {
  require(sigma > 0.0, ErrorKind::Domain, "sigma must be positive");
  require(b > 0.0, ErrorKind::Domain, "observation half-width must be positive");
  require(xi > 0.0 && xi < 1.0, ErrorKind::Domain,
          "window shrinkage xi must lie in (0,1)");
  FeatureFamily fam;
  fam.preset = Preset::Gaussian;
  fam.domain = Domain::Line;
  fam.sigma = sigma;
  fam.theta_lo = -(1.0 - xi) * b;
  fam.theta_hi = (1.0 - xi) * b;
  return fam;
}

FeatureFamily make_gaussian_schedule(int T, double xi) {
  require(T >= 3, ErrorKind::Domain, "schedule needs T >= 3");
  double b = std::log(static_cast<double>(T));
  double sigma = 1.0 / std::sqrt(xi * b);
  return make_gaussian_family(sigma, b, xi);
}

FeatureFamily make_dirichlet_family(int T) {
  require(T >= 3 && T % 2 == 1, ErrorKind::Domain,
          "low-pass family needs odd T >= 3");
  FeatureFamily fam;
  fam.preset = Preset::Dirichlet;
  fam.domain = Domain::Torus;
  fam.sigma = 1.0 / T;
  fam.theta_lo = 0.0;
  fam.theta_hi = 1.0;
  fam.dirichlet_T = T;
  return fam;
}

FeatureBundle normalized_feature(const FeatureFamily& fam,
                                 const ObservationMeasure& mu, double theta,
                                 int max_order) {
  check_compatible(fam, mu);
  require(max_order >= 0 && max_order <= 3, ErrorKind::Domain,
          "feature derivative order must lie in 0..3");
  int n = mu.dim();
  std::vector<Eigen::VectorXd> v(static_cast<size_t>(max_order) + 1);

  if (mu.kind == MeasureKind::Grid) {
    for (int o = 0; o <= max_order; ++o) v[static_cast<size_t>(o)].resize(n);
    for (int idx = 0; idx < n; ++idx) {
      double t = theta - mu.nodes[idx];
      for (int o = 0; o <= max_order; ++o) {
        v[static_cast<size_t>(o)][idx] = fam.h(o, t);
      }
    }
  } else {
    // low-pass bump against the Fourier basis: exact coefficients
    int fc = (fam.dirichlet_T - 1) / 2;
    double rt = std::sqrt(static_cast<double>(fam.dirichlet_T));
    for (int o = 0; o <= max_order; ++o) {
      v[static_cast<size_t>(o)] = Eigen::VectorXd::Zero(n);
    }
    v[0][0] = 1.0 / rt;
    double r2 = std::sqrt(2.0) / rt;
    for (int k = 1; k <= fc; ++k) {
      double w = kTwoPi * k;
      double c = std::cos(w * theta), s = std::sin(w * theta);
      // order o multiplies by w^o and rotates the phase by o * pi/2
      double dc[4] = {c, -w * s, -w * w * c, w * w * w * s};
      double ds[4] = {s, w * c, -w * w * s, -w * w * w * c};
      for (int o = 0; o <= max_order; ++o) {
        v[static_cast<size_t>(o)][2 * k - 1] = r2 * dc[o];
        v[static_cast<size_t>(o)][2 * k] = r2 * ds[o];
      }
    }
  }

  FeatureBundle out;
  double nn = mu.norm(v[0]);
  require(nn > 1e-300, ErrorKind::Domain,
          "degenerate feature: zero norm at theta = " + std::to_string(theta));
  out.raw_norm = nn;
  out.f = v[0] / nn;
  if (max_order >= 1) {
    double np = mu.dot(v[1], v[0]) / nn;
    out.d1 = v[1] / nn - v[0] * (np / (nn * nn));
    if (max_order >= 2) {
      double npp = (mu.dot(v[2], v[0]) + mu.dot(v[1], v[1]) - np * np) / nn;
      out.d2 = v[2] / nn - v[1] * (2.0 * np / (nn * nn)) -
               v[0] * (npp / (nn * nn)) + v[0] * (2.0 * np * np / (nn * nn * nn));
      if (max_order >= 3) {
        double nppp =
            (mu.dot(v[3], v[0]) + 3.0 * mu.dot(v[2], v[1]) - 3.0 * np * npp) /
            nn;
        double n2 = nn * nn, n3 = n2 * nn, n4 = n3 * nn;
        out.d3 = v[3] / nn - v[2] * (3.0 * np / n2) - v[1] * (3.0 * npp / n2) +
                 v[1] * (6.0 * np * np / n3) - v[0] * (nppp / n2) +
                 v[0] * (6.0 * np * npp / n3) - v[0] * (6.0 * np * np * np / n4);
      }
    }
  }
  return out;
}

CovariantBundle covariant_bundle(const FeatureFamily& fam,
                                 const ObservationMeasure& mu, double theta,
                                 int max_order) {
  FeatureBundle b = normalized_feature(fam, mu, theta, max_order);
  CovariantBundle out;
  out.D0 = b.f;
  if (max_order < 1) return out;
  out.g = mu.dot(b.d1, b.d1);
  require(out.g > 0.0, ErrorKind::Assumption,
          "metric density vanishes at theta = " + std::to_string(theta));
  double rg = std::sqrt(out.g);
  out.D1 = b.d1 / rg;
  if (max_order < 2) return out;
  out.gp = 2.0 * mu.dot(b.d2, b.d1);
  double g2 = out.g * out.g;
  out.D2 = b.d2 / out.g - b.d1 * (out.gp / (2.0 * g2));
  if (max_order < 3) return out;
  out.gpp = 2.0 * mu.dot(b.d3, b.d1) + 2.0 * mu.dot(b.d2, b.d2);
  double g3 = g2 * out.g;
  out.D3 = (b.d3 / out.g - b.d2 * (1.5 * out.gp / g2) +
            b.d1 * (out.gp * out.gp / g3 - out.gpp / (2.0 * g2))) /
           rg;
  return out;
}

double empirical_kernel(const FeatureFamily& fam, const ObservationMeasure& mu,
                        int i, int j, double theta, double theta_p) {
  require(i >= 0 && i <= 3 && j >= 0 && j <= 3, ErrorKind::Domain,
          "kernel derivative orders must lie in 0..3");
  CovariantBundle a = covariant_bundle(fam, mu, theta, i);
  CovariantBundle b = covariant_bundle(fam, mu, theta_p, j);
  const Eigen::VectorXd* lhs[4] = {&a.D0, &a.D1, &a.D2, &a.D3};
  const Eigen::VectorXd* rhs[4] = {&b.D0, &b.D1, &b.D2, &b.D3};
  return mu.dot(*lhs[i], *rhs[j]);
}

double kernel_curvature(const FeatureFamily& fam, const ObservationMeasure& mu,
                        double theta) {
  CovariantBundle a = covariant_bundle(fam, mu, theta, 3);
  return mu.dot(a.D3, a.D3);
}

double g_of(const FeatureFamily& fam, const ObservationMeasure& mu,
            double theta) {
  FeatureBundle b = normalized_feature(fam, mu, theta, 1);
  return mu.dot(b.d1, b.d1);
}

MetricTable::MetricTable(Domain domain, double lo, double hi,
                         std::vector<double> G)
    : domain_(domain), lo_(lo), hi_(hi), G_(std::move(G)) {
  require(G_.size() >= 2, ErrorKind::Structural, "metric table too small");
  step_ = (hi_ - lo_) / (static_cast<double>(G_.size()) - 1.0);
  total_ = G_.back();
}

double MetricTable::primitive(double theta) const {
  double th = theta;
  if (domain_ == Domain::Torus) th = th - std::floor(th);
  require(th >= lo_ - 1e-12 && th <= hi_ + 1e-12, ErrorKind::Domain,
          "location outside the metric table window");
  double x = (th - lo_) / step_;
  auto last = static_cast<double>(G_.size()) - 1.0;
  x = std::min(std::max(x, 0.0), last);
  auto k = static_cast<size_t>(x);
  if (k >= G_.size() - 1) return G_.back();
  double frac = x - static_cast<double>(k);
  return G_[k] * (1.0 - frac) + G_[k + 1] * frac;
}

double MetricTable::distance(double theta, double theta_p) const {
  double d = std::abs(primitive(theta) - primitive(theta_p));
  if (domain_ == Domain::Torus) d = std::min(d, total_ - d);
  return d;
}

MetricTable build_metric_table(const FeatureFamily& fam,
                               const ObservationMeasure& mu) {
  double lo = fam.theta_lo, hi = fam.theta_hi;
  double step = fam.sigma / 50.0;
  auto count = static_cast<size_t>(std::ceil((hi - lo) / step)) + 1;
  step = (hi - lo) / (static_cast<double>(count) - 1.0);
  std::vector<double> root_g(count);
  for (size_t m = 0; m < count; ++m) {
    double theta = lo + step * static_cast<double>(m);
    root_g[m] = std::sqrt(g_of(fam, mu, theta));
  }
  std::vector<double> G(count);
  G[0] = 0.0;
  for (size_t m = 1; m < count; ++m) {
    G[m] = G[m - 1] + 0.5 * step * (root_g[m - 1] + root_g[m]);
  }
  return MetricTable(fam.domain, lo, hi, std::move(G));
}

}  // namespace offgrid
