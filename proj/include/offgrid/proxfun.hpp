#pragma once

#include <array>
#include <memory>
#include <vector>

#include "offgrid/errors.hpp"

namespace offgrid {

enum class Preset { Gaussian, Dirichlet };

enum class Domain { Line, Torus };

/// Wrap a displacement to the canonical torus representative in [-1/2, 1/2).
double torus_wrap(double u);

/// Displacement theta - theta_p respecting the domain.
double displacement(Domain dom, double theta, double theta_p);

/// Limit correlation profile of a dictionary preset: F itself, its
/// derivatives up to order 6, and certified decay envelopes
///   envelope(i, r) >= sup_{|x| >= r} |F^(i)(x)|,  i in {0,1,2,3},
/// each nonincreasing in r.
class ProxFunction {
 public:
  explicit ProxFunction(Preset preset);

  Preset preset() const { return preset_; }
  double g_inf() const { return g_inf_; }

  /// F^(order)(t), order in {0,...,6}; odd orders carry the sign of t.
  double deriv(int order, double t) const;
  double operator()(double t) const { return deriv(0, t); }

  double envelope(int i, double r) const;

  /// sup over the real line of |F^(i)|, i in {0,...,4}.
  double sup_abs_deriv(int i) const { return sup_abs_[static_cast<size_t>(i)]; }

 private:
  struct Peak {
    double location;
    double value;       // |F^(i)| at the peak
    double suffix_max;  // max of value over this and all later peaks
  };

  double raw_abs(int i, double t) const;
  void build_envelopes();

  Preset preset_;
  double g_inf_ = 0.0;
  double tail_start_ = 0.0;                 // envelope switches to tail bound
  std::array<double, 4> tail_coef_{};       // envelope tail c_i / r
  std::array<std::vector<Peak>, 4> peaks_;  // local maxima of |F^(i)| sorted
  std::array<double, 5> sup_abs_{};
};

const ProxFunction& prox_function(Preset preset);

struct ProxConstants {
  double g_inf;
  std::array<double, 5> L;  // L_i = g_inf^{-i/2} sup|F^(i)|, i in 0..4
  double L6;                // g_inf^{-3} |F^(6)(0)|
};

ProxConstants prox_constants(const ProxFunction& F);

/// eps(r) = 1 - sup_{|x| >= r} |F(x)|.
double epsilon_of(const ProxFunction& F, double r);

/// nu(r) = -sup_{x in [0, r]} F''(x) / g_inf.
double nu_of(const ProxFunction& F, double r);

/// Certified separation radius: smallest delta such that for every
/// i in {0..3},  2 * sum_{m=1}^{s-1} g_inf^{-i/2} envelope(i, m delta) <= u.
/// Returns 0 for s <= 1 and +infinity for u <= 0.
double delta_separation(const ProxFunction& F, double u, int s);

struct HinfBounds {
  double h1;
  double h2;
};

/// Interpolation-regime bounds; errors (Domain kind) when r lies outside
/// (0, 0.99 / sqrt(2 g_inf L2)) or when eps(r/2) or nu(2r) is nonpositive.
HinfBounds h_infinity_bounds(const ProxFunction& F, double r);

/// Dimensionless minimal separation 4 * max(r g_inf^{-1/2},
/// 2 delta(eta * h2(r), s)); multiply by the dictionary scale for the
/// physical requirement.
double separation_requirement(const ProxFunction& F, double eta, double r,
                              int s);

/// Covariant derivative of the limit kernel:
///   (-1)^j g_inf^{-(i+j)/2} F^(i+j)(displacement / sigma),  i, j in {0..3}.
double prox_kernel_derivative(const ProxFunction& F, int i, int j,
                              double theta, double theta_p, double sigma,
                              Domain dom);

}  // namespace offgrid
