#include "offgrid/proxfun.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

namespace offgrid {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

// ---------------------------------------------------------------------------
// Gaussian profile F(t) = exp(-t^2/4).
// F^(n)(t) = p_n(t) exp(-t^2/4) with p_0 = 1, p_{n+1} = p_n' - (t/2) p_n.

struct Poly {
  std::array<double, 8> c{};  // c[k] t^k
  double eval(double t) const {
    double acc = 0.0;
    for (int k = 7; k >= 0; --k) acc = acc * t + c[static_cast<size_t>(k)];
    return acc;
  }
};

const std::array<Poly, 7>& gauss_polys() {
  static const std::array<Poly, 7> polys = [] {
    std::array<Poly, 7> p{};
    p[0].c[0] = 1.0;
    for (int n = 0; n < 6; ++n) {
      Poly next{};
      for (int k = 0; k < 7; ++k) {
        double ck = p[static_cast<size_t>(n)].c[static_cast<size_t>(k)];
        if (ck == 0.0) continue;
        if (k >= 1) next.c[static_cast<size_t>(k - 1)] += ck * k;
        next.c[static_cast<size_t>(k + 1)] -= 0.5 * ck;
      }
      p[static_cast<size_t>(n + 1)] = next;
    }
    return p;
  }();
  return polys;
}

double gauss_deriv(int order, double t) {
  return gauss_polys()[static_cast<size_t>(order)].eval(t) *
         std::exp(-0.25 * t * t);
}

// ---------------------------------------------------------------------------
// Dirichlet limit profile F(t) = sin(pi t) / (pi t), F(0) = 1.
// With s(x) = sin(x)/x, F^(n)(t) = pi^n s^(n)(pi t).

double sinc_deriv_series(int n, double x) {
  // s^(n)(x) = sum_{m >= ceil(n/2)} (-1)^m x^{2m-n} (2m)!/((2m-n)!(2m+1)!)
  double acc = 0.0;
  double sign = 1.0;
  for (int m = 0; m <= 24; ++m) {
    if (2 * m >= n) {
      double coef = 1.0;
      for (int j = 0; j < n; ++j) coef *= static_cast<double>(2 * m - j);
      double fact = 1.0;  // (2m+1)!
      for (int j = 2; j <= 2 * m + 1; ++j) fact *= static_cast<double>(j);
      acc += sign * coef / fact * std::pow(x, 2 * m - n);
    }
    sign = -sign;
  }
  return acc;
}

double sinc_deriv_leibniz(int n, double x) {
  // d^n/dx^n [sin(x) x^{-1}] by Leibniz; sin^(k)(x) = sin(x + k pi/2).
  double acc = 0.0;
  double binom = 1.0;
  for (int k = 0; k <= n; ++k) {
    double fact = 1.0;
    for (int j = 2; j <= n - k; ++j) fact *= static_cast<double>(j);
    double parity = ((n - k) % 2 == 0) ? 1.0 : -1.0;
    acc += binom * std::sin(x + 0.5 * kPi * k) * parity * fact *
           std::pow(x, -(n - k + 1));
    binom = binom * (n - k) / (k + 1);
  }
  return acc;
}

double dirichlet_deriv(int order, double t) {
  double x = kPi * t;
  double s = (std::abs(x) < 2.0) ? sinc_deriv_series(order, x)
                                 : sinc_deriv_leibniz(order, x);
  return std::pow(kPi, order) * s;
}

double golden_max(const std::function<double(double)>& f, double a, double b) {
  const double gr = 0.6180339887498949;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int it = 0; it < 120 && (b - a) > 1e-14 * (1.0 + std::abs(a)); ++it) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = f(x1);
    }
  }
  return std::max(f1, f2);
}

}  // namespace

double torus_wrap(double u) {
  double w = u - std::floor(u);
  if (w >= 0.5) w -= 1.0;
  return w;
}

double displacement(Domain dom, double theta, double theta_p) {
  double u = theta - theta_p;
  return dom == Domain::Torus ? torus_wrap(u) : u;
}

ProxFunction::ProxFunction(Preset preset) : preset_(preset) {
  g_inf_ = -deriv(2, 0.0);
  build_envelopes();
}

double ProxFunction::deriv(int order, double t) const {
  require(order >= 0 && order <= 6, ErrorKind::Domain,
          "profile derivative order must lie in 0..6");
  return preset_ == Preset::Gaussian ? gauss_deriv(order, t)
                                     : dirichlet_deriv(order, t);
}

double ProxFunction::raw_abs(int i, double t) const {
  return std::abs(deriv(i, t));
}

void ProxFunction::build_envelopes() {
  const bool gaussian = preset_ == Preset::Gaussian;
  tail_start_ = gaussian ? 16.0 : 64.0;
  const double scan_end = tail_start_ + 2.0;
  const double step = 1.0 / 512.0;

  for (int i = 0; i <= 4; ++i) {
    // locate local maxima of |F^(i)| by scanning, then refine
    double sup = raw_abs(i, 0.0);
    std::vector<Peak> peaks;
    double prev2 = raw_abs(i, 0.0);
    double prev1 = raw_abs(i, step);
    sup = std::max(sup, prev1);
    for (double t = 2 * step; t <= scan_end; t += step) {
      double cur = raw_abs(i, t);
      sup = std::max(sup, cur);
      if (prev1 >= prev2 && prev1 >= cur) {
        auto f = [&](double x) { return raw_abs(i, x); };
        double refined = golden_max(f, t - 2 * step, t);
        sup = std::max(sup, refined);
        if (i <= 3) peaks.push_back({t - step, refined, 0.0});
      }
      prev2 = prev1;
      prev1 = cur;
    }
    if (i <= 4) sup_abs_[static_cast<size_t>(i)] = sup;
    if (i > 3) continue;

    // |F^(i)|(0) acts as the peak at the origin when it dominates nearby
    if (raw_abs(i, 0.0) >= raw_abs(i, step)) {
      peaks.insert(peaks.begin(), {0.0, raw_abs(i, 0.0), 0.0});
    }
    double run = 0.0;
    for (auto it = peaks.rbegin(); it != peaks.rend(); ++it) {
      run = std::max(run, it->value);
      it->suffix_max = run;
    }
    peaks_[static_cast<size_t>(i)] = std::move(peaks);

    if (gaussian) {
      tail_coef_[static_cast<size_t>(i)] = 0.0;  // monotone decay past peaks
    } else {
      // certified 1/r tail: sup_{x>=X} x |F^(i)(x)| <= pi^{i-1}(1 + 7/(pi X))
      double c = std::pow(kPi, i - 1) * (1.0 + 7.0 / (kPi * tail_start_));
      tail_coef_[static_cast<size_t>(i)] = c;
    }
  }
}

double ProxFunction::envelope(int i, double r) const {
  require(i >= 0 && i <= 3, ErrorKind::Domain,
          "envelope order must lie in 0..3");
  require(r >= 0.0, ErrorKind::Domain, "envelope radius must be nonnegative");
  const auto& peaks = peaks_[static_cast<size_t>(i)];
  double best = raw_abs(i, r);
  // first peak at or beyond r carries the max over all later ones
  auto it = std::lower_bound(
      peaks.begin(), peaks.end(), r,
      [](const Peak& p, double x) { return p.location < x; });
  if (it != peaks.end()) best = std::max(best, it->suffix_max);
  double c = tail_coef_[static_cast<size_t>(i)];
  if (c > 0.0) best = std::max(best, c / std::max(r, tail_start_));
  return best;
}

const ProxFunction& prox_function(Preset preset) {
  static const ProxFunction gauss(Preset::Gaussian);
  static const ProxFunction diri(Preset::Dirichlet);
  return preset == Preset::Gaussian ? gauss : diri;
}

ProxConstants prox_constants(const ProxFunction& F) {
  ProxConstants out{};
  out.g_inf = F.g_inf();
  for (int i = 0; i <= 4; ++i) {
    out.L[static_cast<size_t>(i)] =
        std::pow(F.g_inf(), -0.5 * i) * F.sup_abs_deriv(i);
  }
  out.L6 = std::abs(F.deriv(6, 0.0)) / std::pow(F.g_inf(), 3);
  return out;
}

double epsilon_of(const ProxFunction& F, double r) {
  require(r > 0.0, ErrorKind::Domain, "eps(r) requires r > 0");
  return 1.0 - F.envelope(0, r);
}

double nu_of(const ProxFunction& F, double r) {
  require(r > 0.0, ErrorKind::Domain, "nu(r) requires r > 0");
  int n = 2048;
  double sup = -std::numeric_limits<double>::infinity();
  int arg = 0;
  for (int k = 0; k <= n; ++k) {
    double v = F.deriv(2, r * k / n);
    if (v > sup) {
      sup = v;
      arg = k;
    }
  }
  double lo = r * std::max(0, arg - 1) / n;
  double hi = r * std::min(n, arg + 1) / n;
  auto f = [&](double x) { return F.deriv(2, x); };
  sup = std::max(sup, golden_max(f, lo, hi));
  return -sup / F.g_inf();
}

double delta_separation(const ProxFunction& F, double u, int s) {
  if (s <= 1) return 0.0;
  if (!(u > 0.0)) return std::numeric_limits<double>::infinity();
  auto holds = [&](double delta) {
    for (int i = 0; i <= 3; ++i) {
      double scale = std::pow(F.g_inf(), -0.5 * i);
      double acc = 0.0;
      for (int m = 1; m <= s - 1; ++m) {
        acc += scale * F.envelope(i, m * delta);
      }
      if (2.0 * acc > u) return false;
    }
    return true;
  };
  double hi = 1.0;
  while (!holds(hi)) {
    hi *= 2.0;
    require(hi < 1e12, ErrorKind::Domain,
            "separation radius did not converge (u too small)");
  }
  double lo = 0.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (holds(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
    if (hi - lo <= 1e-12 * hi) break;
  }
  return hi;
}

HinfBounds h_infinity_bounds(const ProxFunction& F, double r) {
  ProxConstants c = prox_constants(F);
  double r_cap = 0.99 / std::sqrt(2.0 * c.g_inf * c.L[2]);
  require(r > 0.0 && r < r_cap, ErrorKind::Domain,
          "interpolation radius r outside validity range (0, " +
              std::to_string(r_cap) + ")");
  double eps_half = epsilon_of(F, 0.5 * r);
  double nu_twice = nu_of(F, 2.0 * r);
  require(eps_half > 0.0, ErrorKind::Domain,
          "eps(r/2) <= 0: profile does not separate at this radius");
  require(nu_twice > 0.0, ErrorKind::Domain,
          "nu(2r) <= 0: profile curvature degenerates at this radius");
  HinfBounds out{};
  out.h1 = std::min({0.5, c.L[2], c.L[3], c.L[4], c.L6, nu_twice / 10.0,
                     eps_half / 10.0});
  out.h2 = std::min({1.0 / 6.0, 8.0 * eps_half / (10.0 * (5.0 + 2.0 * c.L[1])),
                     8.0 * nu_twice /
                         (9.0 * (2.0 * c.L[2] + 2.0 * c.L[3] + 4.0))});
  return out;
}

double separation_requirement(const ProxFunction& F, double eta, double r,
                              int s) {
  require(eta > 0.0 && eta < 1.0, ErrorKind::Domain,
          "eta must lie in (0,1)");
  require(s >= 1, ErrorKind::Domain, "s must be >= 1");
  HinfBounds h = h_infinity_bounds(F, r);
  double delta = delta_separation(F, eta * h.h2, s);
  return 4.0 * std::max(r / std::sqrt(F.g_inf()), 2.0 * delta);
}

double prox_kernel_derivative(const ProxFunction& F, int i, int j,
                              double theta, double theta_p, double sigma,
                              Domain dom) {
  require(i >= 0 && i <= 3 && j >= 0 && j <= 3, ErrorKind::Domain,
          "kernel derivative orders must lie in 0..3");
  require(sigma > 0.0, ErrorKind::Domain, "scale must be positive");
  double u = displacement(dom, theta, theta_p) / sigma;
  double sign = (j % 2 == 0) ? 1.0 : -1.0;
  return sign * std::pow(F.g_inf(), -0.5 * (i + j)) * F.deriv(i + j, u);
}

}  // namespace offgrid
