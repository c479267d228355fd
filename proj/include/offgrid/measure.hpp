#pragma once

#include <Eigen/Core>

#include "offgrid/errors.hpp"
#include "offgrid/proxfun.hpp"

namespace offgrid {

enum class MeasureKind { Grid, Basis };

/// Discretization of the observation space. Functions are held as vectors:
/// values at grid nodes (Grid) or coefficients on an orthonormal Fourier
/// basis over the torus (Basis). Inner products of sampled functions are
/// plain sums against the measure weights, so both kinds share one code path.
struct ObservationMeasure {
  MeasureKind kind;
  Domain domain;

  // Grid kind: strictly increasing nodes, common weight.
  Eigen::VectorXd nodes;
  double weight = 0.0;

  // Basis kind: real Fourier basis 1, sqrt(2)cos(2 pi k t), sqrt(2)sin(2 pi k t)
  // for k = 1..fmax; dimension 2*fmax + 1.
  int fourier_fmax = 0;

  int dim() const {
    return kind == MeasureKind::Grid ? static_cast<int>(nodes.size())
                                     : 2 * fourier_fmax + 1;
  }

  double dot(const Eigen::VectorXd& f, const Eigen::VectorXd& g) const {
    require(f.size() == g.size() && f.size() == dim(), ErrorKind::Structural,
            "inner product size mismatch");
    double s = f.dot(g);
    return kind == MeasureKind::Grid ? weight * s : s;
  }

  double norm(const Eigen::VectorXd& f) const { return std::sqrt(dot(f, f)); }
};

/// Regular grid on [a, b]: nodes a + j (b-a)/T for j = 1..T.
ObservationMeasure make_line_grid(double a, double b, int T);

/// Regular grid on the torus: nodes j / T for j = 0..T-1, weight 1/T.
ObservationMeasure make_torus_grid(int T);

/// Continuum observation on the torus through a truncated Fourier basis.
ObservationMeasure make_fourier_basis(int fmax);

}  // namespace offgrid
