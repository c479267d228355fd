#include "offgrid/measure.hpp"

namespace offgrid {

ObservationMeasure make_line_grid(double a, double b, int T) {
  require(b > a, ErrorKind::Domain, "grid endpoints must satisfy a < b");
  require(T >= 2, ErrorKind::Domain, "grid needs at least two nodes");
  ObservationMeasure mu;
  mu.kind = MeasureKind::Grid;
  mu.domain = Domain::Line;
  mu.weight = (b - a) / T;
  mu.nodes.resize(T);
  for (int j = 1; j <= T; ++j) mu.nodes[j - 1] = a + j * mu.weight;
  return mu;
}

ObservationMeasure make_torus_grid(int T) {
  require(T >= 2, ErrorKind::Domain, "grid needs at least two nodes");
  ObservationMeasure mu;
  mu.kind = MeasureKind::Grid;
  mu.domain = Domain::Torus;
  mu.weight = 1.0 / T;
  mu.nodes.resize(T);
  for (int j = 0; j < T; ++j) mu.nodes[j] = static_cast<double>(j) / T;
  return mu;
}

ObservationMeasure make_fourier_basis(int fmax) {
  require(fmax >= 1, ErrorKind::Domain, "basis needs fmax >= 1");
  ObservationMeasure mu;
  mu.kind = MeasureKind::Basis;
  mu.domain = Domain::Torus;
  mu.fourier_fmax = fmax;
  return mu;
}

}  // namespace offgrid
