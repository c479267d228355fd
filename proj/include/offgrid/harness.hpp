#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "offgrid/config.hpp"
#include "offgrid/diagnostics.hpp"
#include "offgrid/hypotest.hpp"

namespace offgrid {

/// How alternatives at a target separation are generated:
///   Amplitude       - scale a fixed off-null direction so the L2 distance
///                     to the null model is exactly rho;
///   OffSupportSpike - add one spike outside every anchor ball so that the
///                     support discrepancy equals rho.
enum class AltKind { Amplitude, OffSupportSpike };

struct Scenario {
  std::string id = "scenario";
  FeatureFamily fam;
  ObservationMeasure mu;
  NoiseModel noise;
  NullSpec null;

  AltKind alt_kind = AltKind::Amplitude;
  Mixture alt_direction;   // Amplitude mode: off-null direction
  // OffSupportSpike mode: spike location (NaN picks the farthest point)
  double alt_theta = std::numeric_limits<double>::quiet_NaN();

  TestKind test = TestKind::Goodness;
  TestParams params;
  double r = 0.3;    // metric ball radius for the support discrepancy
  double eta = 0.5;

  std::vector<double> rho_grid;
  int replicates = 100;
  uint64_t seed = 1;
  int threads = 1;
  std::string out_prefix = "scenario";
  uint64_t config_hash = 0;
};

/// Builds a scenario from a key=value config (documented schema:
/// dictionary.*, measure.*, noise.*, null.*, alt.*, test.*, solver.*,
/// constants.*, mc.*, out.*) and rejects unknown keys by name.
Scenario scenario_from_config(const Config& cfg);

/// Alternative mixture at target separation rho, exact by construction
/// (verified to 1%): L2(lambda) distance to the null model in Amplitude
/// mode, support discrepancy in OffSupportSpike mode.
Mixture make_alternative(const Scenario& sc, double rho);

struct RiskPoint {
  double rho = 0.0;
  int n = 0;
  double threshold = 0.0;
  double type1 = 0.0;
  double se1 = 0.0;
  double type2 = 0.0;
  double se2 = 0.0;
  double risk = 0.0;
  double bound = std::numeric_limits<double>::quiet_NaN();
  int failed0 = 0;
  int failed1 = 0;
};

struct RiskCurve {
  std::vector<RiskPoint> points;
  double kappa = 0.0;           // resolved penalty level, 0 if unused
  bool too_many_failures = false;  // > 1% failed replicates at some point
};

/// Per-rho empirical type I / type II errors over sc.replicates seeded
/// replicates under the null and the generated alternative. Deterministic
/// given sc.seed, independent of thread count. Goodness thresholds default
/// to rho^2/2 per grid point; the other kinds use one threshold for the
/// whole curve. The theoretical bound column is filled for the pure
/// goodness statistic.
RiskCurve run_risk_curve(const Scenario& sc);

struct SweepCell {
  int s = 1;
  int T = 0;
  double rho_empirical = 0.0;  // smallest grid rho with risk <= alpha
  double rho_min = 0.0;        // detection radius formula at alpha
  double term_quartic = 0.0;
  double term_sparse = 0.0;
  bool quartic_binding = false;
  double lambda_min = 0.0;     // Gram eigenvalue floor of the alt support
  double norm_ratio = 0.0;     // ||beta Phi|| / ||beta||_2 of the alternative
};

struct SweepSpec {
  std::vector<int> s_values{1, 2, 4, 8, 16};
  std::vector<int> T_values{128, 256};
  double alpha = 0.1;
  int replicates = 200;
  int rho_points = 6;
  uint64_t seed = 1;
  int threads = 1;
  TheoryConstants consts;
};

/// Signal-detection sweep on the circle: low-pass dictionary, unit noise
/// level on the T-point grid, empty null. For every (s, T) it reports the
/// smallest grid separation at which the combined test reaches total risk
/// <= alpha, next to the two closed-form radius terms.
std::vector<SweepCell> run_detection_sweep(const SweepSpec& spec);

struct CalibrationRecord {
  std::vector<int> s_values;
  std::vector<double> C0_by_s;
  std::vector<double> C3_by_s;
  double C0_cal = 0.0;  // pooled 99th percentile of pred error / (sqrt(s) kappa)
  double C3_cal = 0.0;  // pooled 99th percentile of l1 gap / (s kappa)
  double kappa = 0.0;
  int replicates = 0;
  uint64_t seed = 0;
  uint64_t scenario_hash = 0;
};

/// Empirical calibration of the prediction and l1 constants over solver
/// replicates at sparsities {1, 2, 4}, splitting sc.replicates across them.
CalibrationRecord calibrate_constants(const Scenario& sc);

// --- persistence -------------------------------------------------------------

/// Shortest round-trip decimal representation (17 significant digits).
std::string format_real(double v);

void write_risk_csv(const std::string& path, const RiskCurve& curve);
void write_sweep_csv(const std::string& path,
                     const std::vector<SweepCell>& cells);
void write_calibration_csv(const std::string& path,
                           const CalibrationRecord& rec);
void write_manifest(const std::string& path, const Scenario& sc,
                    const std::vector<std::string>& outputs);

struct SvgSeries {
  std::string name;
  std::string color;  // CSS color
  std::vector<std::pair<double, double>> pts;
};

/// Self-contained static line chart.
void write_svg_chart(const std::string& path, const std::string& title,
                     const std::string& xlabel, const std::string& ylabel,
                     const std::vector<SvgSeries>& series);

}  // namespace offgrid
