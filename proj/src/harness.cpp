#include "offgrid/harness.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <thread>

#include "json.hpp"
#include "offgrid/certificate.hpp"
#include "offgrid/solver.hpp"

namespace offgrid {

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr uint64_t kStreamNull = 101;
constexpr uint64_t kStreamAlt = 202;
constexpr uint64_t kStreamCalib = 300;

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
  threads = std::max(1, std::min(threads, n));
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex err_mutex;
  std::string first_error;
  auto worker = [&]() {
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= n) break;
      try {
        body(i);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (first_error.empty()) first_error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(threads));
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  require(first_error.empty(), ErrorKind::Structural,
          "worker failed: " + first_error);
}

double percentile99(std::vector<double> v) {
  require(!v.empty(), ErrorKind::Domain, "percentile of an empty sample");
  std::sort(v.begin(), v.end());
  size_t idx = static_cast<size_t>(
      std::ceil(0.99 * static_cast<double>(v.size())));
  if (idx > 0) --idx;
  if (idx >= v.size()) idx = v.size() - 1;
  return v[idx];
}

Mixture mixture_from_lists(const std::vector<double>& beta,
                           const std::vector<double>& theta,
                           const std::string& what) {
  require(beta.size() == theta.size(), ErrorKind::Config,
          what + ": beta and theta lists differ in length");
  Mixture m;
  m.beta = Eigen::Map<const Eigen::VectorXd>(beta.data(),
                                             static_cast<long>(beta.size()));
  m.theta = Eigen::Map<const Eigen::VectorXd>(theta.data(),
                                              static_cast<long>(theta.size()));
  return m;
}

/// Location maximizing the smallest flat distance to the null anchors.
double far_location(const Scenario& sc) {
  const Mixture& m0 = sc.null.mixture;
  double lo = sc.fam.theta_lo, hi = sc.fam.theta_hi;
  if (m0.size() == 0) return lo + 0.5 * (hi - lo);
  double best = lo, best_gap = -1.0;
  int n = std::max(64, static_cast<int>(std::ceil(
                            (hi - lo) / (sc.fam.sigma / 10.0))));
  int last = sc.fam.domain == Domain::Torus ? n - 1 : n;
  for (int i = 0; i <= last; ++i) {
    double theta = lo + (hi - lo) * i / n;
    double gap = std::numeric_limits<double>::infinity();
    for (int k = 0; k < m0.size(); ++k) {
      gap = std::min(gap,
                     std::abs(displacement(sc.fam.domain, theta, m0.theta[k])));
    }
    if (gap > best_gap) {
      best_gap = gap;
      best = theta;
    }
  }
  return best;
}

struct StatRec {
  double goodness = 0.0;
  double proximity = 0.0;
  double support = 0.0;
  bool ok = false;
};

/// Per-scenario evaluation context shared by all replicates.
class Engine {
 public:
  explicit Engine(const Scenario& sc) : sc_(sc) {
    m0_ = sc.null.mixture.size() > 0
              ? synthesize(sc.fam, sc.mu, sc.null.mixture)
              : Eigen::VectorXd::Zero(sc.mu.dim()).eval();
    need_fit_ = sc.test != TestKind::Goodness;
    double alpha_eff =
        sc.test == TestKind::Combined ? 0.5 * sc.params.alpha : sc.params.alpha;
    kappa_ = sc.params.kappa > 0.0 ? sc.params.kappa : sc.params.solver.kappa;
    if (need_fit_ && kappa_ <= 0.0) {
      kappa_ = kappa_for_level(alpha_eff, sc.noise, Geometry::of(sc.fam),
                               sc.params.consts);
    }
    solver_ = sc.params.solver;
    solver_.kappa = kappa_;
    if (solver_.expected_s < sc.null.mixture.size() + sc.params.s) {
      solver_.expected_s = sc.null.mixture.size() + sc.params.s;
    }
    if (sc.test == TestKind::Support) {
      require(sc.null.mixture.size() > 0, ErrorKind::Domain,
              "support test needs a nonempty null support");
      cert_ = build_certificate(sc.fam, sc.mu, sc.null.mixture.theta,
                                sc.null.effective_signs());
    }
  }

  double kappa() const { return kappa_; }
  const Eigen::VectorXd& null_model() const { return m0_; }

  StatRec eval(const Eigen::VectorXd& y) const {
    StatRec rec;
    rec.goodness = stat_goodness(sc_.mu, y, m0_, sc_.noise);
    if (need_fit_) {
      FitResult fr = fit(sc_.fam, sc_.mu, y, solver_);
      rec.proximity = stat_proximity(sc_.mu, fr.model, m0_);
      if (sc_.test == TestKind::Support) {
        rec.support = stat_support(sc_.mu, y, fr, cert_);
      }
    }
    rec.ok = true;
    return rec;
  }

  /// Fixed thresholds of the scenario's test; the goodness threshold is
  /// resolved per grid point instead when the kind is Goodness.
  void resolve_thresholds() {
    const TestParams& p = sc_.params;
    switch (sc_.test) {
      case TestKind::Goodness:
        break;
      case TestKind::Proximity:
        t_prox_ = p.threshold
                      ? *p.threshold
                      : rho_sparse(p.alpha, p.s, p.s0, kappa_, p.consts).t;
        break;
      case TestKind::Support:
        t_supp_ = p.threshold ? *p.threshold
                              : 2.0 * p.consts.C3 *
                                    std::max(p.s0, 1) * kappa_;
        break;
      case TestKind::Combined:
        t_good_ = threshold_goodness(rho_quartic(0.5 * p.alpha, sc_.noise));
        t_prox_ = rho_sparse(0.5 * p.alpha, p.s, p.s0, kappa_, p.consts).t;
        break;
    }
  }

  double point_threshold(double rho) const {
    const TestParams& p = sc_.params;
    switch (sc_.test) {
      case TestKind::Goodness:
        return p.threshold ? *p.threshold : threshold_goodness(rho);
      case TestKind::Proximity:
        return t_prox_;
      case TestKind::Support:
        return t_supp_;
      default:
        return t_prox_;
    }
  }

  bool rejects(const StatRec& rec, double point_thr) const {
    switch (sc_.test) {
      case TestKind::Goodness:
        return std::abs(rec.goodness) > point_thr;
      case TestKind::Proximity:
        return std::abs(rec.proximity) > point_thr;
      case TestKind::Support:
        return std::abs(rec.support) > point_thr;
      default:
        return std::abs(rec.goodness) > t_good_ ||
               std::abs(rec.proximity) > t_prox_;
    }
  }

 private:
  const Scenario& sc_;
  Eigen::VectorXd m0_;
  bool need_fit_ = false;
  double kappa_ = 0.0;
  SolverConfig solver_;
  Certificate cert_;
  double t_good_ = 0.0;
  double t_prox_ = 0.0;
  double t_supp_ = 0.0;
};

}  // namespace

Scenario scenario_from_config(const Config& cfg) {
  Scenario sc;
  sc.config_hash = cfg.fingerprint();
  sc.id = cfg.get_str("scenario.id", "scenario");

  std::string preset = cfg.get_str("dictionary.preset", "gaussian");
  if (preset == "gaussian") {
    double xi = cfg.get_real("dictionary.xi", 0.5);
    if (cfg.has("dictionary.sigma")) {
      double sigma = cfg.require_real("dictionary.sigma");
      double b = cfg.require_real("dictionary.b");
      sc.fam = make_gaussian_family(sigma, b, xi);
    } else {
      int T = cfg.get_int("dictionary.T", 256);
      sc.fam = make_gaussian_schedule(T, xi);
    }
    int grid_T = cfg.get_int("measure.T", cfg.get_int("dictionary.T", 256));
    std::string mk = cfg.get_str("measure.kind", "grid");
    require(mk == "grid", ErrorKind::Config,
            "gaussian dictionary requires measure.kind=grid");
    double b = cfg.has("dictionary.b") ? cfg.require_real("dictionary.b")
                                       : std::log(cfg.get_int("dictionary.T", 256));
    sc.mu = make_line_grid(-b, b, grid_T);
  } else if (preset == "dirichlet") {
    int T = cfg.get_int("dictionary.T", 63);
    sc.fam = make_dirichlet_family(T);
    std::string mk = cfg.get_str("measure.kind", "grid");
    if (mk == "grid") {
      sc.mu = make_torus_grid(cfg.get_int("measure.T", T));
    } else if (mk == "basis") {
      sc.mu = make_fourier_basis(cfg.get_int("measure.fmax", (T - 1) / 2));
    } else {
      fail(ErrorKind::Config, "unknown measure.kind '" + mk + "'");
    }
  } else {
    fail(ErrorKind::Config, "unknown dictionary.preset '" + preset + "'");
  }

  std::string nk = cfg.get_str("noise.kind", "grid-white");
  double sigma_bar = cfg.get_real("noise.sigma_bar", 1.0);
  if (nk == "grid-white") {
    sc.noise = make_grid_white(sc.mu, sigma_bar);
  } else if (nk == "truncated-white") {
    sc.noise = make_truncated_white(sc.mu, sigma_bar,
                                    cfg.get_int("noise.Tn", sc.mu.dim()));
  } else if (nk == "basis-colored") {
    std::vector<double> xi = cfg.get_reals("noise.xi", {});
    Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(
        xi.data(), static_cast<long>(xi.size()));
    sc.noise = make_basis_colored(sc.mu, sigma_bar, w);
  } else {
    fail(ErrorKind::Config, "unknown noise.kind '" + nk + "'");
  }

  sc.null.mixture = mixture_from_lists(cfg.get_reals("null.beta", {}),
                                       cfg.get_reals("null.theta", {}), "null");
  if (sc.null.mixture.size() > 0) {
    validate_mixture(sc.fam, sc.null.mixture);
  }
  std::vector<double> signs = cfg.get_reals("null.signs", {});
  if (!signs.empty()) {
    require(static_cast<int>(signs.size()) == sc.null.mixture.size(),
            ErrorKind::Config, "null.signs length mismatch");
    sc.null.signs = Eigen::Map<const Eigen::VectorXd>(
        signs.data(), static_cast<long>(signs.size()));
  }

  std::string ak = cfg.get_str("alt.kind", "amplitude");
  if (ak == "amplitude") {
    sc.alt_kind = AltKind::Amplitude;
  } else if (ak == "spike") {
    sc.alt_kind = AltKind::OffSupportSpike;
  } else {
    fail(ErrorKind::Config, "unknown alt.kind '" + ak + "'");
  }
  sc.alt_direction = mixture_from_lists(cfg.get_reals("alt.beta", {}),
                                        cfg.get_reals("alt.theta", {}), "alt");
  sc.alt_theta = cfg.get_real("alt.spike", std::numeric_limits<double>::quiet_NaN());

  sc.test = test_kind_from_string(cfg.get_str("test.kind", "goodness"));
  sc.params.alpha = cfg.get_real("test.alpha", 0.1);
  sc.params.s = cfg.get_int("test.s", 1);
  sc.params.s0 = cfg.get_int("test.s0", sc.null.mixture.size());
  sc.params.kappa = cfg.get_real("test.kappa", 0.0);
  if (cfg.has("test.threshold")) {
    sc.params.threshold = cfg.require_real("test.threshold");
  }
  sc.r = cfg.get_real("test.r", 0.3);
  sc.eta = cfg.get_real("test.eta", 0.5);

  SolverConfig& sv = sc.params.solver;
  sv.kappa = cfg.get_real("solver.kappa", sv.kappa);
  sv.max_features = cfg.get_int("solver.max_features", sv.max_features);
  sv.expected_s = cfg.get_int("solver.expected_s", sv.expected_s);
  sv.insertion_per_sigma =
      cfg.get_real("solver.insertion_per_sigma", sv.insertion_per_sigma);
  sv.max_outer = cfg.get_int("solver.max_outer", sv.max_outer);
  sv.beta_max_sweeps = cfg.get_int("solver.beta_max_sweeps", sv.beta_max_sweeps);
  sv.local_max_iters = cfg.get_int("solver.local_max_iters", sv.local_max_iters);
  sv.theta_tol = cfg.get_real("solver.theta_tol", sv.theta_tol);
  sv.obj_tol = cfg.get_real("solver.obj_tol", sv.obj_tol);
  sv.merge_radius_factor =
      cfg.get_real("solver.merge_radius_factor", sv.merge_radius_factor);
  sv.collapse_radius_factor =
      cfg.get_real("solver.collapse_radius_factor", sv.collapse_radius_factor);
  sv.prune_tol = cfg.get_real("solver.prune_tol", sv.prune_tol);

  TheoryConstants& tc = sc.params.consts;
  tc.C0 = cfg.get_real("constants.C0", tc.C0);
  tc.C1 = cfg.get_real("constants.C1", tc.C1);
  tc.C2 = cfg.get_real("constants.C2", tc.C2);
  tc.C3 = cfg.get_real("constants.C3", tc.C3);
  tc.C4 = cfg.get_real("constants.C4", tc.C4);
  tc.C5 = cfg.get_real("constants.C5", tc.C5);

  sc.rho_grid = cfg.get_reals("mc.rho_grid", {});
  for (size_t i = 0; i + 1 < sc.rho_grid.size(); ++i) {
    require(sc.rho_grid[i] < sc.rho_grid[i + 1], ErrorKind::Config,
            "mc.rho_grid must be increasing");
  }
  for (double rho : sc.rho_grid) {
    require(rho > 0.0, ErrorKind::Config, "mc.rho_grid must be positive");
  }
  sc.replicates = cfg.get_int("mc.replicates", 100);
  require(sc.replicates >= 1, ErrorKind::Config, "mc.replicates must be >= 1");
  sc.seed = static_cast<uint64_t>(cfg.get_real("mc.seed", 1.0));
  sc.threads = cfg.get_int("mc.threads", 1);
  sc.out_prefix = cfg.get_str("out.prefix", sc.id);

  cfg.reject_unknown();
  return sc;
}

Mixture make_alternative(const Scenario& sc, double rho) {
  require(rho > 0.0, ErrorKind::Domain, "target separation must be positive");
  const Mixture& m0 = sc.null.mixture;
  Mixture alt;
  if (sc.alt_kind == AltKind::Amplitude) {
    Mixture dir = sc.alt_direction;
    if (dir.size() == 0) {
      dir.beta = Eigen::VectorXd::Ones(1);
      dir.theta = Eigen::VectorXd::Constant(1, far_location(sc));
    }
    double q = sc.mu.norm(synthesize(sc.fam, sc.mu, dir));
    require(q > 0.0, ErrorKind::Domain,
            "alternative direction has zero norm");
    double c = rho / q;
    alt.beta = Eigen::VectorXd(m0.size() + dir.size());
    alt.theta = Eigen::VectorXd(m0.size() + dir.size());
    alt.beta << m0.beta, c * dir.beta;
    alt.theta << m0.theta, dir.theta;
    double got = sc.mu.norm(synthesize(sc.fam, sc.mu, alt) -
                            (m0.size() > 0
                                 ? synthesize(sc.fam, sc.mu, m0)
                                 : Eigen::VectorXd::Zero(sc.mu.dim()).eval()));
    require(std::abs(got - rho) <= 0.01 * rho, ErrorKind::Structural,
            "alternative misses the target separation");
  } else {
    double theta = std::isnan(sc.alt_theta) ? far_location(sc) : sc.alt_theta;
    MetricTable metric = build_metric_table(sc.fam, sc.mu);
    for (int k = 0; k < m0.size(); ++k) {
      require(metric.distance(theta, m0.theta[k]) > sc.r, ErrorKind::Domain,
              "spike location falls inside an anchor ball");
    }
    alt.beta = Eigen::VectorXd(m0.size() + 1);
    alt.theta = Eigen::VectorXd(m0.size() + 1);
    alt.beta << m0.beta, rho;
    alt.theta << m0.theta, theta;
    double got = discrepancy(metric, alt, sc.null, sc.r);
    require(std::abs(got - rho) <= 0.01 * rho, ErrorKind::Structural,
            "alternative misses the target support discrepancy");
  }
  return alt;
}

RiskCurve run_risk_curve(const Scenario& sc) {
  require(!sc.rho_grid.empty(), ErrorKind::Config,
          "risk curve needs a nonempty mc.rho_grid");
  Engine engine(sc);
  engine.resolve_thresholds();
  const int n = sc.replicates;

  RiskCurve curve;
  curve.kappa = engine.kappa();

  std::vector<StatRec> stats0(static_cast<size_t>(n));
  parallel_for(n, sc.threads, [&](int rep) {
    try {
      Rng rng = Rng::keyed(sc.seed, kStreamNull, static_cast<uint64_t>(rep));
      Eigen::VectorXd y = engine.null_model() + sample_noise(sc.noise, rng);
      stats0[static_cast<size_t>(rep)] = engine.eval(y);
    } catch (const Error&) {
      stats0[static_cast<size_t>(rep)].ok = false;
    }
  });

  for (double rho : sc.rho_grid) {
    Mixture alt = make_alternative(sc, rho);
    Eigen::VectorXd m1 = synthesize(sc.fam, sc.mu, alt);
    std::vector<StatRec> stats1(static_cast<size_t>(n));
    parallel_for(n, sc.threads, [&](int rep) {
      try {
        Rng rng = Rng::keyed(sc.seed, kStreamAlt, static_cast<uint64_t>(rep));
        Eigen::VectorXd y = m1 + sample_noise(sc.noise, rng);
        stats1[static_cast<size_t>(rep)] = engine.eval(y);
      } catch (const Error&) {
        stats1[static_cast<size_t>(rep)].ok = false;
      }
    });

    RiskPoint pt;
    pt.rho = rho;
    pt.n = n;
    pt.threshold = engine.point_threshold(rho);
    int ok0 = 0, rej0 = 0, ok1 = 0, acc1 = 0;
    for (const StatRec& r : stats0) {
      if (!r.ok) continue;
      ++ok0;
      if (engine.rejects(r, pt.threshold)) ++rej0;
    }
    for (const StatRec& r : stats1) {
      if (!r.ok) continue;
      ++ok1;
      if (!engine.rejects(r, pt.threshold)) ++acc1;
    }
    pt.failed0 = n - ok0;
    pt.failed1 = n - ok1;
    require(ok0 > 0 && ok1 > 0, ErrorKind::Structural,
            "all replicates failed");
    pt.type1 = static_cast<double>(rej0) / ok0;
    pt.type2 = static_cast<double>(acc1) / ok1;
    pt.se1 = std::sqrt(pt.type1 * (1.0 - pt.type1) / ok0);
    pt.se2 = std::sqrt(pt.type2 * (1.0 - pt.type2) / ok1);
    pt.risk = pt.type1 + pt.type2;
    if (sc.test == TestKind::Goodness && rho * rho > pt.threshold &&
        pt.threshold > 0.0) {
      pt.bound = risk_bound_goodness(rho, pt.threshold, sc.noise);
    }
    if (pt.failed0 + pt.failed1 > 0.01 * (2.0 * n)) {
      curve.too_many_failures = true;
    }
    curve.points.push_back(pt);
  }
  return curve;
}

std::vector<SweepCell> run_detection_sweep(const SweepSpec& spec) {
  require(spec.alpha > 0.0 && spec.alpha < 1.0, ErrorKind::Domain,
          "level must lie in (0,1)");
  require(spec.rho_points >= 2, ErrorKind::Domain,
          "sweep needs at least two separation points");
  std::vector<SweepCell> cells;
  for (int T : spec.T_values) {
    // the low-pass family needs an odd order; an even T keeps its grid size
    // and drops to the next odd order (the grid still integrates products of
    // features exactly)
    FeatureFamily fam = make_dirichlet_family(T % 2 == 0 ? T - 1 : T);
    ObservationMeasure mu = make_torus_grid(T);
    NoiseModel nm = make_grid_white(mu, 1.0);
    Geometry geom = Geometry::of(fam);
    double half = 0.5 * spec.alpha;
    double kap = kappa_for_level(half, nm, geom, spec.consts);
    double t1 = threshold_goodness(rho_quartic(half, nm));

    for (int s : spec.s_values) {
      SweepCell cell;
      cell.s = s;
      cell.T = T;
      DetectionRadius det = rho_detection(spec.alpha, s, 0, nm, geom,
                                          spec.consts);
      cell.rho_min = det.value;
      cell.term_quartic = det.term_quartic;
      cell.term_sparse = det.term_sparse;
      cell.quartic_binding = det.quartic_binding;
      double t2 = rho_sparse(half, s, 0, kap, spec.consts).t;

      Eigen::VectorXd thetas(s), u(s);
      for (int k = 0; k < s; ++k) {
        thetas[k] = (k + 0.5) / s;
        u[k] = k % 2 == 0 ? 1.0 : -1.0;
      }
      Eigen::MatrixXd gram = gram_matrix(fam, mu, thetas);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
      cell.lambda_min = eig.eigenvalues().minCoeff();
      double q = std::sqrt(u.dot(gram * u));
      cell.norm_ratio = q / std::sqrt(static_cast<double>(s));

      SolverConfig sv;
      sv.kappa = kap;
      sv.expected_s = s;
      uint64_t cell_stream = (static_cast<uint64_t>(T) << 24) ^
                             (static_cast<uint64_t>(s) << 4);

      auto combined_rejects = [&](const Eigen::VectorXd& y) {
        double g = mu.dot(y, y) - nm.expected_sq_norm;
        if (std::abs(g) > t1) return true;
        FitResult fr = fit(fam, mu, y, sv);
        double p = mu.dot(fr.model, fr.model);
        return p > t2;
      };

      const int n = spec.replicates;
      std::vector<uint8_t> rej0(static_cast<size_t>(n), 0);
      parallel_for(n, spec.threads, [&](int rep) {
        Rng rng = Rng::keyed(spec.seed, cell_stream ^ kStreamNull,
                             static_cast<uint64_t>(rep));
        Eigen::VectorXd y = sample_noise(nm, rng);
        rej0[static_cast<size_t>(rep)] = combined_rejects(y) ? 1 : 0;
      });
      double type1 = 0.0;
      for (uint8_t b : rej0) type1 += b;
      type1 /= n;

      cell.rho_empirical = std::numeric_limits<double>::quiet_NaN();
      for (int i = 0; i < spec.rho_points; ++i) {
        double frac = 0.35 + 0.65 * i / (spec.rho_points - 1);
        double rho = frac * cell.rho_min;
        Eigen::VectorXd beta = (rho / q) * u;
        Mixture alt;
        alt.beta = beta;
        alt.theta = thetas;
        Eigen::VectorXd m1 = synthesize(fam, mu, alt);
        std::vector<uint8_t> acc1(static_cast<size_t>(n), 0);
        parallel_for(n, spec.threads, [&](int rep) {
          Rng rng = Rng::keyed(spec.seed, cell_stream ^ kStreamAlt,
                               static_cast<uint64_t>(rep));
          Eigen::VectorXd y = m1 + sample_noise(nm, rng);
          acc1[static_cast<size_t>(rep)] = combined_rejects(y) ? 0 : 1;
        });
        double type2 = 0.0;
        for (uint8_t b : acc1) type2 += b;
        type2 /= n;
        if (type1 + type2 <= spec.alpha && std::isnan(cell.rho_empirical)) {
          cell.rho_empirical = rho;
        }
      }
      cells.push_back(cell);
    }
  }
  return cells;
}

CalibrationRecord calibrate_constants(const Scenario& sc) {
  CalibrationRecord rec;
  rec.s_values = {1, 2, 4};
  rec.seed = sc.seed;
  rec.scenario_hash = sc.config_hash;

  double kap = sc.params.kappa > 0.0 ? sc.params.kappa : sc.params.solver.kappa;
  if (kap <= 0.0) {
    kap = kappa_for_level(sc.params.alpha, sc.noise, Geometry::of(sc.fam),
                          sc.params.consts);
  }
  require(kap > 0.0, ErrorKind::Domain,
          "calibration needs a positive penalty level");
  rec.kappa = kap;

  int n_per = std::max(1, (sc.replicates + 2) / 3);
  rec.replicates = n_per * static_cast<int>(rec.s_values.size());

  std::vector<double> pooled0, pooled3;
  for (int s : rec.s_values) {
    Mixture truth;
    truth.beta = Eigen::VectorXd(s);
    truth.theta = Eigen::VectorXd(s);
    double lo = sc.fam.theta_lo, len = sc.fam.theta_len();
    for (int k = 0; k < s; ++k) {
      truth.theta[k] = sc.fam.domain == Domain::Torus
                           ? (k + 0.5) / s
                           : lo + len * (k + 1) / (s + 1);
      double mag = 20.0 * kap * (1.0 + 0.25 * k);
      truth.beta[k] = k % 2 == 0 ? mag : -mag;
    }
    Eigen::VectorXd m_star = synthesize(sc.fam, sc.mu, truth);

    SolverConfig sv = sc.params.solver;
    sv.kappa = kap;
    sv.expected_s = std::max(sv.expected_s, s);

    std::vector<double> r0(static_cast<size_t>(n_per));
    std::vector<double> r3(static_cast<size_t>(n_per));
    parallel_for(n_per, sc.threads, [&](int rep) {
      Rng rng = Rng::keyed(sc.seed, kStreamCalib + static_cast<uint64_t>(s),
                           static_cast<uint64_t>(rep));
      Eigen::VectorXd y = m_star + sample_noise(sc.noise, rng);
      FitResult fr = fit(sc.fam, sc.mu, y, sv);
      r0[static_cast<size_t>(rep)] =
          sc.mu.norm(fr.model - m_star) / (std::sqrt(double(s)) * kap);
      r3[static_cast<size_t>(rep)] =
          std::abs(fr.estimate.l1() - truth.l1()) / (s * kap);
    });
    rec.C0_by_s.push_back(percentile99(r0));
    rec.C3_by_s.push_back(percentile99(r3));
    pooled0.insert(pooled0.end(), r0.begin(), r0.end());
    pooled3.insert(pooled3.end(), r3.begin(), r3.end());
  }
  rec.C0_cal = percentile99(pooled0);
  rec.C3_cal = percentile99(pooled3);
  return rec;
}

// --- persistence -------------------------------------------------------------

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::ofstream open_output(const std::string& path) {
  std::filesystem::path p(path);
  std::error_code ec;
  if (p.has_parent_path()) {
    std::filesystem::create_directories(p.parent_path(), ec);
    require(!ec, ErrorKind::Io,
            "cannot create directory '" + p.parent_path().string() + "'");
  }
  std::ofstream out(path);
  require(out.good(), ErrorKind::Io, "cannot write '" + path + "'");
  return out;
}

}  // namespace

void write_risk_csv(const std::string& path, const RiskCurve& curve) {
  std::ofstream out = open_output(path);
  out << "rho,n,threshold,type1,se1,type2,se2,risk,bound,failed0,failed1\n";
  for (const RiskPoint& p : curve.points) {
    out << format_real(p.rho) << ',' << p.n << ',' << format_real(p.threshold)
        << ',' << format_real(p.type1) << ',' << format_real(p.se1) << ','
        << format_real(p.type2) << ',' << format_real(p.se2) << ','
        << format_real(p.risk) << ',' << format_real(p.bound) << ','
        << p.failed0 << ',' << p.failed1 << '\n';
  }
  require(out.good(), ErrorKind::Io, "write failed: '" + path + "'");
}

void write_sweep_csv(const std::string& path,
                     const std::vector<SweepCell>& cells) {
  std::ofstream out = open_output(path);
  out << "s,T,rho_empirical,rho_min,term_quartic,term_sparse,"
         "quartic_binding,lambda_min,norm_ratio\n";
  for (const SweepCell& c : cells) {
    out << c.s << ',' << c.T << ',' << format_real(c.rho_empirical) << ','
        << format_real(c.rho_min) << ',' << format_real(c.term_quartic) << ','
        << format_real(c.term_sparse) << ',' << (c.quartic_binding ? 1 : 0)
        << ',' << format_real(c.lambda_min) << ','
        << format_real(c.norm_ratio) << '\n';
  }
  require(out.good(), ErrorKind::Io, "write failed: '" + path + "'");
}

void write_calibration_csv(const std::string& path,
                           const CalibrationRecord& rec) {
  std::ofstream out = open_output(path);
  out << "s,n,C0,C3\n";
  int n_per = rec.replicates / std::max<int>(1, rec.s_values.size());
  for (size_t i = 0; i < rec.s_values.size(); ++i) {
    out << rec.s_values[i] << ',' << n_per << ','
        << format_real(rec.C0_by_s[i]) << ',' << format_real(rec.C3_by_s[i])
        << '\n';
  }
  out << "0," << rec.replicates << ',' << format_real(rec.C0_cal) << ','
      << format_real(rec.C3_cal) << '\n';
  require(out.good(), ErrorKind::Io, "write failed: '" + path + "'");
}

void write_manifest(const std::string& path, const Scenario& sc,
                    const std::vector<std::string>& outputs) {
  char stamp[32] = "";
  std::time_t now = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);

  char hash[20];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(sc.config_hash));

  nlohmann::json j;
  j["scenario"] = sc.id;
  j["hash"] = hash;
  j["seed"] = sc.seed;
  j["version"] = kVersion;
  j["timestamp"] = stamp;
  j["outputs"] = outputs;

  std::ofstream out = open_output(path);
  out << j.dump(2) << '\n';
  require(out.good(), ErrorKind::Io, "write failed: '" + path + "'");
}

namespace {

std::string svg_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

}  // namespace

void write_svg_chart(const std::string& path, const std::string& title,
                     const std::string& xlabel, const std::string& ylabel,
                     const std::vector<SvgSeries>& series) {
  const double W = 720, H = 480;
  const double ml = 72, mr = 24, mt = 42, mb = 56;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const SvgSeries& s : series) {
    for (auto [x, y] : s.pts) {
      if (std::isnan(x) || std::isnan(y)) continue;
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (!(xmin < xmax)) {
    xmin = std::isfinite(xmin) ? xmin - 1 : 0;
    xmax = xmin + 2;
  }
  if (!(ymin < ymax)) {
    ymin = std::isfinite(ymin) ? ymin - 1 : 0;
    ymax = ymin + 2;
  }
  double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;
  auto X = [&](double x) {
    return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr);
  };
  auto Y = [&](double y) {
    return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb);
  };

  std::ofstream out = open_output(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
      << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << ' ' << H
      << "\">\n";
  out << "<rect width=\"" << W << "\" height=\"" << H
      << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"15\">"
      << svg_escape(title) << "</text>\n";

  for (int i = 0; i <= 5; ++i) {
    double fx = xmin + (xmax - xmin) * i / 5;
    double fy = ymin + (ymax - ymin) * i / 5;
    out << "<line x1=\"" << X(fx) << "\" y1=\"" << Y(ymin) << "\" x2=\""
        << X(fx) << "\" y2=\"" << Y(ymax)
        << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    out << "<line x1=\"" << X(xmin) << "\" y1=\"" << Y(fy) << "\" x2=\""
        << X(xmax) << "\" y2=\"" << Y(fy)
        << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << X(fx) << "\" y=\"" << H - mb + 18
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << tick_label(fx) << "</text>\n";
    out << "<text x=\"" << ml - 8 << "\" y=\"" << Y(fy) + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
           "font-size=\"11\">"
        << tick_label(fy) << "</text>\n";
  }
  out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\""
      << W - ml - mr << "\" height=\"" << H - mt - mb
      << "\" fill=\"none\" stroke=\"#333333\"/>\n";
  out << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 14
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\">"
      << svg_escape(xlabel) << "</text>\n";
  out << "<text x=\"18\" y=\"" << (mt + H - mb) / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"13\" transform=\"rotate(-90 18 "
      << (mt + H - mb) / 2 << ")\">" << svg_escape(ylabel) << "</text>\n";

  double ly = mt + 16;
  for (const SvgSeries& s : series) {
    out << "<polyline fill=\"none\" stroke=\"" << s.color
        << "\" stroke-width=\"1.8\" points=\"";
    for (auto [x, y] : s.pts) {
      if (std::isnan(x) || std::isnan(y)) continue;
      out << X(x) << ',' << Y(y) << ' ';
    }
    out << "\"/>\n";
    out << "<line x1=\"" << W - mr - 130 << "\" y1=\"" << ly << "\" x2=\""
        << W - mr - 108 << "\" y2=\"" << ly << "\" stroke=\"" << s.color
        << "\" stroke-width=\"1.8\"/>\n";
    out << "<text x=\"" << W - mr - 102 << "\" y=\"" << ly + 4
        << "\" font-family=\"sans-serif\" font-size=\"11\">"
        << svg_escape(s.name) << "</text>\n";
    ly += 16;
  }
  out << "</svg>\n";
  require(out.good(), ErrorKind::Io, "write failed: '" + path + "'");
}

}  // namespace offgrid
