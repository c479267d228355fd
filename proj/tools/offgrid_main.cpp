// offgrid: estimate sparse mixtures of translated scaled features from noisy
// observations without discretizing the location parameter, test membership
// and goodness of fit at theoretical thresholds, and audit the kernel
// approximation the guarantees rely on.
//
// Verbs: simulate, estimate, certify, test, diagnose, sweep, calibrate,
// constants. Each reads a key=value config (--config) plus -D overrides and
// writes CSV files, a static SVG plot where a curve is meaningful, and a
// run manifest. Exit codes: 0 success, 2 config error, 3 numerical
// assumption violation, 4 I/O error.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "offgrid/certificate.hpp"
#include "offgrid/diagnostics.hpp"
#include "offgrid/harness.hpp"
#include "offgrid/solver.hpp"

namespace og = offgrid;

namespace {

struct Cli {
  std::string verb;
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  std::optional<uint64_t> seed;
  std::optional<int> threads;
};

og::Config load_config(const Cli& cli) {
  og::Config cfg;
  if (!cli.config_path.empty()) {
    cfg = og::Config::parse_file(cli.config_path);
  }
  for (const std::string& ov : cli.overrides) {
    auto eq = ov.find('=');
    og::require(eq != std::string::npos && eq > 0, og::ErrorKind::Config,
                "override '" + ov + "' is not of the form key=value");
    cfg.set(ov.substr(0, eq), ov.substr(eq + 1));
  }
  if (cli.seed) cfg.set("mc.seed", std::to_string(*cli.seed));
  if (cli.threads) cfg.set("mc.threads", std::to_string(*cli.threads));
  return cfg;
}

std::string out_path(const Cli& cli, const og::Scenario& sc,
                     const std::string& suffix) {
  return cli.out_dir + "/" + sc.out_prefix + suffix;
}

void print_table(const std::vector<std::pair<std::string, double>>& rows) {
  size_t w = 0;
  for (const auto& r : rows) w = std::max(w, r.first.size());
  for (const auto& r : rows) {
    std::printf("%-*s  %s\n", static_cast<int>(w), r.first.c_str(),
                og::format_real(r.second).c_str());
  }
}

void write_kv_csv(const std::string& path,
                  const std::vector<std::pair<std::string, double>>& rows) {
  std::string body = "name,value\n";
  for (const auto& r : rows) {
    body += r.first + "," + og::format_real(r.second) + "\n";
  }
  FILE* f = std::fopen(path.c_str(), "w");
  og::require(f != nullptr, og::ErrorKind::Io, "cannot write '" + path + "'");
  std::fputs(body.c_str(), f);
  std::fclose(f);
}

// --- verbs -------------------------------------------------------------------

int run_simulate(const Cli& cli) {
  og::Config cfg = load_config(cli);
  og::Scenario sc = og::scenario_from_config(cfg);
  og::Rng rng = og::Rng::keyed(sc.seed, 7, 0);
  Eigen::VectorXd m0 = sc.null.mixture.size() > 0
                           ? og::synthesize(sc.fam, sc.mu, sc.null.mixture)
                           : Eigen::VectorXd::Zero(sc.mu.dim()).eval();
  Eigen::VectorXd y = m0 + og::sample_noise(sc.noise, rng);

  std::string data_path = out_path(cli, sc, "_data.csv");
  std::string body = "index,node,weight,model,y\n";
  for (int j = 0; j < sc.mu.dim(); ++j) {
    double node = sc.mu.kind == og::MeasureKind::Grid ? sc.mu.nodes[j]
                                                      : static_cast<double>(j);
    body += std::to_string(j) + "," + og::format_real(node) + "," +
            og::format_real(sc.mu.kind == og::MeasureKind::Grid ? sc.mu.weight
                                                                : 1.0) +
            "," + og::format_real(m0[j]) + "," + og::format_real(y[j]) + "\n";
  }
  FILE* f = std::fopen(data_path.c_str(), "w");
  og::require(f != nullptr, og::ErrorKind::Io,
              "cannot write '" + data_path + "'");
  std::fputs(body.c_str(), f);
  std::fclose(f);

  og::write_manifest(out_path(cli, sc, "_manifest.json"), sc, {data_path});
  std::printf("wrote %s (%d samples)\n", data_path.c_str(), sc.mu.dim());
  return 0;
}

int run_estimate(const Cli& cli) {
  og::Config cfg = load_config(cli);
  og::Scenario sc = og::scenario_from_config(cfg);
  og::Rng rng = og::Rng::keyed(sc.seed, 7, 0);
  Eigen::VectorXd y = og::observe(sc.fam, sc.mu, sc.null.mixture, &sc.noise,
                                  &rng);

  og::SolverConfig sv = sc.params.solver;
  if (sv.kappa <= 0.0) {
    sv.kappa = sc.params.kappa > 0.0
                   ? sc.params.kappa
                   : og::default_kappa(sc.noise,
                                       sc.fam.theta_len() / sc.fam.sigma);
  }
  og::FitResult fr = og::fit(sc.fam, sc.mu, y, sv);

  std::string est_path = out_path(cli, sc, "_estimate.csv");
  std::string body = "k,beta,theta\n";
  for (int k = 0; k < fr.estimate.size(); ++k) {
    body += std::to_string(k) + "," + og::format_real(fr.estimate.beta[k]) +
            "," + og::format_real(fr.estimate.theta[k]) + "\n";
  }
  FILE* f = std::fopen(est_path.c_str(), "w");
  og::require(f != nullptr, og::ErrorKind::Io,
              "cannot write '" + est_path + "'");
  std::fputs(body.c_str(), f);
  std::fclose(f);

  std::string info_path = out_path(cli, sc, "_fitinfo.csv");
  write_kv_csv(info_path,
               {{"objective", fr.objective},
                {"kappa", sv.kappa},
                {"outer_iters", static_cast<double>(fr.outer_iters)},
                {"converged", fr.converged ? 1.0 : 0.0},
                {"max_corr_residual", fr.max_corr_residual},
                {"stationarity_beta", fr.stationarity_beta},
                {"stationarity_theta", fr.stationarity_theta},
                {"support_size", static_cast<double>(fr.estimate.size())}});

  std::vector<std::string> outputs = {est_path, info_path};
  if (sc.mu.kind == og::MeasureKind::Grid) {
    og::SvgSeries obs{"observed", "#888888", {}};
    og::SvgSeries mod{"fitted", "#c0392b", {}};
    for (int j = 0; j < sc.mu.dim(); ++j) {
      obs.pts.emplace_back(sc.mu.nodes[j], y[j]);
      mod.pts.emplace_back(sc.mu.nodes[j], fr.model[j]);
    }
    std::string svg_path = out_path(cli, sc, "_estimate.svg");
    og::write_svg_chart(svg_path, "observed data and fitted mixture", "t",
                        "value", {obs, mod});
    outputs.push_back(svg_path);
  }
  og::write_manifest(out_path(cli, sc, "_manifest.json"), sc, outputs);

  std::printf("support size %d, objective %s\n", fr.estimate.size(),
              og::format_real(fr.objective).c_str());
  for (int k = 0; k < fr.estimate.size(); ++k) {
    std::printf("  beta %s  theta %s\n",
                og::format_real(fr.estimate.beta[k]).c_str(),
                og::format_real(fr.estimate.theta[k]).c_str());
  }
  return 0;
}

int run_certify(const Cli& cli) {
  og::Config cfg = load_config(cli);
  og::Scenario sc = og::scenario_from_config(cfg);
  og::require(sc.null.mixture.size() > 0, og::ErrorKind::Config,
              "certify needs null.theta anchors");
  Eigen::VectorXd signs = sc.null.effective_signs();
  og::Certificate cert =
      og::build_certificate(sc.fam, sc.mu, sc.null.mixture.theta, signs);
  og::MetricTable metric = og::build_metric_table(sc.fam, sc.mu);
  og::CertificateReport rep =
      og::verify_certificate(sc.fam, sc.mu, metric, cert, sc.r);

  std::string cert_path = out_path(cli, sc, "_certificate.csv");
  std::string body = "k,theta,sign,alpha,xi\n";
  for (int k = 0; k < cert.anchors.size(); ++k) {
    body += std::to_string(k) + "," + og::format_real(cert.anchors[k]) + "," +
            og::format_real(cert.signs[k]) + "," +
            og::format_real(cert.alpha[k]) + "," +
            og::format_real(cert.xi[k]) + "\n";
  }
  FILE* f = std::fopen(cert_path.c_str(), "w");
  og::require(f != nullptr, og::ErrorKind::Io,
              "cannot write '" + cert_path + "'");
  std::fputs(body.c_str(), f);
  std::fclose(f);

  std::string rep_path = out_path(cli, sc, "_certreport.csv");
  write_kv_csv(rep_path, {{"residual_inf", cert.residual_inf},
                          {"cond", cert.cond},
                          {"C_N", rep.C_N},
                          {"C_F", rep.C_F},
                          {"norm_over_sqrt_s", rep.norm_over_sqrt_s},
                          {"near_radius", rep.near_radius},
                          {"far_max_abs", rep.far_max_abs},
                          {"ok", rep.ok ? 1.0 : 0.0}});

  og::SvgSeries scan{"corr", "#2255aa", {}};
  double lo = sc.fam.theta_lo, hi = sc.fam.theta_hi;
  int n = 600;
  int last = sc.fam.domain == og::Domain::Torus ? n - 1 : n;
  for (int i = 0; i <= last; ++i) {
    double theta = lo + (hi - lo) * i / n;
    og::FeatureBundle fb = og::normalized_feature(sc.fam, sc.mu, theta, 0);
    scan.pts.emplace_back(theta, sc.mu.dot(fb.f, cert.p));
  }
  std::string svg_path = out_path(cli, sc, "_certificate.svg");
  og::write_svg_chart(svg_path, "certificate correlation scan", "theta",
                      "corr", {scan});

  og::write_manifest(out_path(cli, sc, "_manifest.json"), sc,
                     {cert_path, rep_path, svg_path});
  std::printf("C_N %s  C_F %s  residual %s  %s\n",
              og::format_real(rep.C_N).c_str(),
              og::format_real(rep.C_F).c_str(),
              og::format_real(cert.residual_inf).c_str(),
              rep.ok ? "ok" : "NOT ok");
  return 0;
}

int run_test_verb(const Cli& cli) {
  og::Config cfg = load_config(cli);
  double rho = cfg.get_real("mc.rho", 0.0);  // single-shot separation
  og::Scenario sc = og::scenario_from_config(cfg);

  if (!sc.rho_grid.empty()) {
    og::RiskCurve curve = og::run_risk_curve(sc);
    std::string csv_path = out_path(cli, sc, "_risk.csv");
    og::write_risk_csv(csv_path, curve);

    og::SvgSeries risk{"risk", "#c0392b", {}};
    og::SvgSeries t1{"type1", "#2255aa", {}};
    og::SvgSeries t2{"type2", "#55aa55", {}};
    og::SvgSeries bound{"bound", "#888888", {}};
    for (const og::RiskPoint& p : curve.points) {
      risk.pts.emplace_back(p.rho, p.risk);
      t1.pts.emplace_back(p.rho, p.type1);
      t2.pts.emplace_back(p.rho, p.type2);
      bound.pts.emplace_back(p.rho, std::min(p.bound, 2.0));
    }
    std::string svg_path = out_path(cli, sc, "_risk.svg");
    og::write_svg_chart(svg_path, "empirical risk against separation", "rho",
                        "risk", {risk, t1, t2, bound});
    og::write_manifest(out_path(cli, sc, "_manifest.json"), sc,
                       {csv_path, svg_path});
    for (const og::RiskPoint& p : curve.points) {
      std::printf("rho %-10.4g type1 %-8.4g type2 %-8.4g risk %-8.4g\n",
                  p.rho, p.type1, p.type2, p.risk);
    }
    if (curve.too_many_failures) {
      std::printf("warning: more than 1%% of replicates failed\n");
    }
    return 0;
  }

  og::Rng rng = og::Rng::keyed(sc.seed, 7, 0);
  Eigen::VectorXd y;
  if (rho > 0.0) {
    og::Mixture alt = og::make_alternative(sc, rho);
    y = og::observe(sc.fam, sc.mu, alt, &sc.noise, &rng);
  } else {
    y = og::observe(sc.fam, sc.mu, sc.null.mixture, &sc.noise, &rng);
  }
  og::TestOutcome out =
      og::run_test(sc.test, sc.fam, sc.mu, y, sc.null, sc.noise, sc.params);

  std::string csv_path = out_path(cli, sc, "_test.csv");
  std::string body = "kind,statistic,threshold,reject\n";
  body += og::to_string(out.kind) + "," + og::format_real(out.statistic) +
          "," + og::format_real(out.threshold) + "," +
          (out.reject ? "1" : "0") + "\n";
  for (const og::TestOutcome& part : out.parts) {
    body += og::to_string(part.kind) + "," + og::format_real(part.statistic) +
            "," + og::format_real(part.threshold) + "," +
            (part.reject ? "1" : "0") + "\n";
  }
  FILE* f = std::fopen(csv_path.c_str(), "w");
  og::require(f != nullptr, og::ErrorKind::Io,
              "cannot write '" + csv_path + "'");
  std::fputs(body.c_str(), f);
  std::fclose(f);
  og::write_manifest(out_path(cli, sc, "_manifest.json"), sc, {csv_path});

  std::printf("%s: statistic %s threshold %s -> %s\n",
              og::to_string(out.kind).c_str(),
              og::format_real(out.statistic).c_str(),
              og::format_real(out.threshold).c_str(),
              out.reject ? "reject" : "accept");
  return 0;
}

int run_diagnose(const Cli& cli) {
  og::Config cfg = load_config(cli);
  og::Scenario sc = og::scenario_from_config(cfg);
  og::ApproxReport rep = og::compute_VT(sc.fam, sc.mu);
  std::vector<std::pair<std::string, double>> rows = {
      {"C_T", rep.C_T},
      {"V1", rep.V1},
      {"V2", rep.V2},
      {"V_T", rep.V_T},
      {"grid_step", rep.grid_step},
  };

  std::string verdict = "report-only";
  if (sc.null.mixture.size() > 0) {
    std::vector<double> anchors(
        sc.null.mixture.theta.data(),
        sc.null.mixture.theta.data() + sc.null.mixture.size());
    og::AssumptionCheck chk = og::check_assumption(
        sc.fam, sc.mu, sc.eta, sc.r, sc.null.mixture.size(), anchors);
    rows.insert(rows.end(), {{"g_min", chk.g_min},
                             {"eps_half", chk.eps_half},
                             {"nu_2r", chk.nu_2r},
                             {"H1", chk.H1},
                             {"H2", chk.H2},
                             {"slack_v1", chk.slack_v1},
                             {"slack_v2", chk.slack_v2},
                             {"min_gap", chk.min_gap},
                             {"required_gap", chk.required_gap},
                             {"ok", chk.ok ? 1.0 : 0.0}});
    verdict = chk.ok ? "assumptions hold" : "VIOLATED: " + chk.failure;
  }

  print_table(rows);
  std::printf("verdict: %s\n", verdict.c_str());

  std::string csv_path = out_path(cli, sc, "_diagnose.csv");
  write_kv_csv(csv_path, rows);

  // Kernel difference profile along a slice through the window center.
  double center = sc.fam.theta_lo + 0.5 * sc.fam.theta_len();
  double span = std::min(4.0 * sc.fam.sigma, 0.45 * sc.fam.theta_len());
  const og::ProxFunction& F = sc.fam.prox();
  std::vector<og::SvgSeries> series;
  const char* colors[3] = {"#2255aa", "#c0392b", "#55aa55"};
  for (int d = 0; d < 3; ++d) {
    og::SvgSeries s{"|K" + std::to_string(d) + std::to_string(d) + " diff|",
                    colors[d],
                    {}};
    for (int i = 0; i <= 200; ++i) {
      double u = span * i / 200;
      double emp = og::empirical_kernel(sc.fam, sc.mu, d, d, center + u,
                                        center);
      double prox = og::prox_kernel_derivative(F, d, d, center + u, center,
                                               sc.fam.sigma, sc.fam.domain);
      s.pts.emplace_back(u / sc.fam.sigma, std::abs(emp - prox));
    }
    series.push_back(std::move(s));
  }
  std::string svg_path = out_path(cli, sc, "_diagnose.svg");
  og::write_svg_chart(svg_path, "kernel difference profile",
                      "displacement / sigma", "abs difference", series);
  og::write_manifest(out_path(cli, sc, "_manifest.json"), sc,
                     {csv_path, svg_path});
  return 0;
}

int run_sweep(const Cli& cli) {
  og::Config cfg = load_config(cli);
  og::SweepSpec spec;
  {
    std::vector<double> sv = cfg.get_reals("sweep.s_values", {1, 2, 4, 8, 16});
    spec.s_values.clear();
    for (double v : sv) spec.s_values.push_back(static_cast<int>(v));
    std::vector<double> tv = cfg.get_reals("sweep.T_values", {128, 256});
    spec.T_values.clear();
    for (double v : tv) spec.T_values.push_back(static_cast<int>(v));
  }
  spec.alpha = cfg.get_real("test.alpha", 0.1);
  spec.replicates = cfg.get_int("mc.replicates", 200);
  spec.rho_points = cfg.get_int("mc.rho_points", 6);
  spec.seed = static_cast<uint64_t>(cfg.get_real("mc.seed", 1.0));
  spec.threads = cfg.get_int("mc.threads", 1);
  spec.consts.C0 = cfg.get_real("constants.C0", spec.consts.C0);
  spec.consts.C1 = cfg.get_real("constants.C1", spec.consts.C1);
  spec.consts.C2 = cfg.get_real("constants.C2", spec.consts.C2);
  spec.consts.C3 = cfg.get_real("constants.C3", spec.consts.C3);
  std::string prefix = cfg.get_str("out.prefix", "sweep");
  cfg.reject_unknown();

  std::vector<og::SweepCell> cells = og::run_detection_sweep(spec);
  std::string csv_path = cli.out_dir + "/" + prefix + "_sweep.csv";
  og::write_sweep_csv(csv_path, cells);

  std::vector<og::SvgSeries> series;
  const char* colors[4] = {"#2255aa", "#c0392b", "#55aa55", "#aa8822"};
  int ci = 0;
  for (int T : spec.T_values) {
    og::SvgSeries emp{"empirical T=" + std::to_string(T),
                      colors[ci++ % 4],
                      {}};
    og::SvgSeries thy{"formula T=" + std::to_string(T),
                      colors[ci++ % 4],
                      {}};
    for (const og::SweepCell& c : cells) {
      if (c.T != T) continue;
      emp.pts.emplace_back(c.s, c.rho_empirical);
      thy.pts.emplace_back(c.s, c.rho_min);
    }
    series.push_back(std::move(emp));
    series.push_back(std::move(thy));
  }
  std::string svg_path = cli.out_dir + "/" + prefix + "_sweep.svg";
  og::write_svg_chart(svg_path, "detection separation against sparsity", "s",
                      "rho", series);

  for (const og::SweepCell& c : cells) {
    std::printf(
        "s %-3d T %-5d empirical %-10.4g formula %-10.4g binding %s\n", c.s,
        c.T, c.rho_empirical, c.rho_min, c.quartic_binding ? "quartic" : "log");
  }
  std::printf("wrote %s\n", csv_path.c_str());
  return 0;
}

int run_calibrate(const Cli& cli) {
  og::Config cfg = load_config(cli);
  og::Scenario sc = og::scenario_from_config(cfg);
  og::CalibrationRecord rec = og::calibrate_constants(sc);
  std::string csv_path = out_path(cli, sc, "_calibration.csv");
  og::write_calibration_csv(csv_path, rec);
  og::write_manifest(out_path(cli, sc, "_manifest.json"), sc, {csv_path});
  std::printf("C0_cal %s  C3_cal %s  kappa %s  (n=%d)\n",
              og::format_real(rec.C0_cal).c_str(),
              og::format_real(rec.C3_cal).c_str(),
              og::format_real(rec.kappa).c_str(), rec.replicates);
  return 0;
}

int run_constants(const Cli& cli) {
  og::Config cfg = load_config(cli);
  std::string preset = cfg.get_str("dictionary.preset", "gaussian");
  og::FeatureFamily fam;
  if (preset == "gaussian") {
    fam = og::make_gaussian_schedule(cfg.get_int("dictionary.T", 256),
                                     cfg.get_real("dictionary.xi", 0.5));
  } else if (preset == "dirichlet") {
    fam = og::make_dirichlet_family(cfg.get_int("dictionary.T", 63));
  } else {
    og::fail(og::ErrorKind::Config, "unknown dictionary.preset '" + preset +
                                        "'");
  }
  double eta = cfg.get_real("test.eta", 0.5);
  double r = cfg.get_real("test.r", 0.3);
  int s = cfg.get_int("test.s", 2);
  std::string prefix = cfg.get_str("out.prefix", "constants");
  cfg.reject_unknown();

  const og::ProxFunction& F = fam.prox();
  og::ProxConstants pc = og::prox_constants(F);
  std::vector<std::pair<std::string, double>> rows;
  rows.emplace_back("g_inf", pc.g_inf);
  for (int i = 1; i <= 4; ++i) {
    rows.emplace_back("L" + std::to_string(i), pc.L[static_cast<size_t>(i)]);
  }
  rows.emplace_back("L6", pc.L6);
  rows.emplace_back("eps_r", og::epsilon_of(F, r));
  rows.emplace_back("eps_half_r", og::epsilon_of(F, 0.5 * r));
  rows.emplace_back("nu_2r", og::nu_of(F, 2.0 * r));
  og::HinfBounds hb = og::h_infinity_bounds(F, r);
  rows.emplace_back("H1", hb.h1);
  rows.emplace_back("H2", hb.h2);
  rows.emplace_back("Sigma", og::separation_requirement(F, eta, r, s));

  print_table(rows);
  write_kv_csv(cli.out_dir + "/" + prefix + "_constants.csv", rows);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "off-the-grid sparse mixture estimation, testing and diagnostics"};
  app.require_subcommand(1);

  Cli cli;
  const char* env_out = std::getenv("OFFGRID_OUT_DIR");
  cli.out_dir = env_out != nullptr && *env_out != '\0' ? env_out : ".";

  struct Verb {
    const char* name;
    const char* help;
    int (*fn)(const Cli&);
  };
  const Verb verbs[] = {
      {"simulate", "draw one observation of the configured mixture",
       run_simulate},
      {"estimate", "fit a mixture to a simulated observation", run_estimate},
      {"certify", "build and verify a dual certificate on the null support",
       run_certify},
      {"test", "run a membership or goodness test, or a Monte Carlo risk "
               "curve when mc.rho_grid is set",
       run_test_verb},
      {"diagnose", "kernel approximation quality and assumption audit",
       run_diagnose},
      {"sweep", "detection separation sweep over sparsity and grid size",
       run_sweep},
      {"calibrate", "calibrate prediction and l1 constants by Monte Carlo",
       run_calibrate},
      {"constants", "dump the preset's analytic constants", run_constants},
  };

  int (*selected)(const Cli&) = nullptr;
  for (const Verb& v : verbs) {
    CLI::App* sub = app.add_subcommand(v.name, v.help);
    sub->add_option("-c,--config", cli.config_path, "key=value config file");
    sub->add_option("-D,--define", cli.overrides,
                    "config override key=value (repeatable)");
    sub->add_option("-o,--out", cli.out_dir, "output directory");
    sub->add_option("--seed", cli.seed, "seed override");
    sub->add_option("--threads", cli.threads, "worker thread count");
    sub->callback([&selected, &v]() { selected = v.fn; });
  }

  CLI11_PARSE(app, argc, argv);

  try {
    std::error_code ec;
    std::filesystem::create_directories(cli.out_dir, ec);
    og::require(!ec, og::ErrorKind::Io,
                "cannot create output directory '" + cli.out_dir + "'");
    return selected(cli);
  } catch (const og::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    switch (e.kind()) {
      case og::ErrorKind::Config:
        return 2;
      case og::ErrorKind::Io:
        return 4;
      default:
        return 3;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
