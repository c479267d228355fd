#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "offgrid/certificate.hpp"
#include "offgrid/diagnostics.hpp"
#include "offgrid/harness.hpp"
#include "offgrid/solver.hpp"

namespace py = pybind11;
using namespace offgrid;

PYBIND11_MODULE(_core, m) {
  m.doc() =
      "sparse mixture estimation over continuous location parameters: "
      "solver, dual certificates, tests with theoretical thresholds and "
      "kernel approximation diagnostics";

  py::register_exception<Error>(m, "OffgridError");

  py::class_<FeatureFamily>(m, "FeatureFamily")
      .def_readonly("sigma", &FeatureFamily::sigma)
      .def_readonly("theta_lo", &FeatureFamily::theta_lo)
      .def_readonly("theta_hi", &FeatureFamily::theta_hi)
      .def("theta_len", &FeatureFamily::theta_len);
  m.def("gaussian_family", &make_gaussian_family, py::arg("sigma"),
        py::arg("b"), py::arg("xi") = 0.5);
  m.def("gaussian_schedule", &make_gaussian_schedule, py::arg("T"),
        py::arg("xi") = 0.5);
  m.def("dirichlet_family", &make_dirichlet_family, py::arg("T"));

  py::class_<ObservationMeasure>(m, "ObservationMeasure")
      .def_readonly("weight", &ObservationMeasure::weight)
      .def("dim", &ObservationMeasure::dim)
      .def("dot", &ObservationMeasure::dot)
      .def("norm", &ObservationMeasure::norm);
  m.def("line_grid", &make_line_grid, py::arg("a"), py::arg("b"),
        py::arg("T"));
  m.def("torus_grid", &make_torus_grid, py::arg("T"));
  m.def("fourier_basis", &make_fourier_basis, py::arg("fmax"));

  py::class_<NoiseModel>(m, "NoiseModel")
      .def_readonly("sigma_bar", &NoiseModel::sigma_bar)
      .def_readonly("delta_T", &NoiseModel::delta_T)
      .def_readonly("xi_T", &NoiseModel::xi_T)
      .def_readonly("expected_sq_norm", &NoiseModel::expected_sq_norm);
  m.def("grid_white", &make_grid_white, py::arg("mu"), py::arg("sigma_bar"));
  m.def("basis_colored", &make_basis_colored, py::arg("mu"),
        py::arg("sigma_bar"), py::arg("weights"));
  m.def("truncated_white", &make_truncated_white, py::arg("mu"),
        py::arg("sigma_bar"), py::arg("Tn"));

  py::class_<Rng>(m, "Rng")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def_static("keyed", &Rng::keyed, py::arg("seed"),
                                       py::arg("stream") = 0,
                                       py::arg("replicate") = 0);
  m.def("sample_noise", &sample_noise, py::arg("noise"), py::arg("rng"));

  py::class_<Mixture>(m, "Mixture")
      .def(py::init([](Eigen::VectorXd beta, Eigen::VectorXd theta) {
             Mixture mx;
             mx.beta = std::move(beta);
             mx.theta = std::move(theta);
             return mx;
           }),
           py::arg("beta"), py::arg("theta"))
      .def_readonly("beta", &Mixture::beta)
      .def_readonly("theta", &Mixture::theta)
      .def("l1", &Mixture::l1)
      .def("size", &Mixture::size);
  m.def("synthesize", &synthesize, py::arg("family"), py::arg("mu"),
        py::arg("mixture"));
  m.def(
      "observe",
      [](const FeatureFamily& fam, const ObservationMeasure& mu,
         const Mixture& mix, const NoiseModel& nm, Rng& rng) {
        return observe(fam, mu, mix, &nm, &rng);
      },
      py::arg("family"), py::arg("mu"), py::arg("mixture"), py::arg("noise"),
      py::arg("rng"));
  m.def("gram_matrix", &gram_matrix, py::arg("family"), py::arg("mu"),
        py::arg("thetas"));
  m.def("gram_min_eigenvalue", &gram_min_eigenvalue, py::arg("family"),
        py::arg("mu"), py::arg("thetas"));

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_readwrite("kappa", &SolverConfig::kappa)
      .def_readwrite("max_features", &SolverConfig::max_features)
      .def_readwrite("expected_s", &SolverConfig::expected_s)
      .def_readwrite("max_outer", &SolverConfig::max_outer);
  py::class_<FitResult>(m, "FitResult")
      .def_readonly("estimate", &FitResult::estimate)
      .def_readonly("objective", &FitResult::objective)
      .def_readonly("converged", &FitResult::converged)
      .def_readonly("outer_iters", &FitResult::outer_iters)
      .def_readonly("max_corr_residual", &FitResult::max_corr_residual)
      .def_readonly("model", &FitResult::model);
  m.def("fit", &fit, py::arg("family"), py::arg("mu"), py::arg("y"),
        py::arg("config"));
  m.def("default_kappa", &default_kappa, py::arg("noise"), py::arg("tau"),
        py::arg("c1") = 2.0);

  py::class_<Certificate>(m, "Certificate")
      .def_readonly("anchors", &Certificate::anchors)
      .def_readonly("signs", &Certificate::signs)
      .def_readonly("p", &Certificate::p)
      .def_readonly("residual_inf", &Certificate::residual_inf)
      .def_readonly("cond", &Certificate::cond);
  py::class_<CertificateReport>(m, "CertificateReport")
      .def_readonly("C_N", &CertificateReport::C_N)
      .def_readonly("C_F", &CertificateReport::C_F)
      .def_readonly("norm_over_sqrt_s", &CertificateReport::norm_over_sqrt_s)
      .def_readonly("ok", &CertificateReport::ok);
  m.def("build_certificate", &build_certificate, py::arg("family"),
        py::arg("mu"), py::arg("anchors"), py::arg("signs"));
  m.def(
      "verify_certificate",
      [](const FeatureFamily& fam, const ObservationMeasure& mu,
         const Certificate& cert, double r) {
        MetricTable metric = build_metric_table(fam, mu);
        return verify_certificate(fam, mu, metric, cert, r);
      },
      py::arg("family"), py::arg("mu"), py::arg("certificate"),
      py::arg("r") = 0.3);

  py::enum_<TestKind>(m, "TestKind")
      .value("Goodness", TestKind::Goodness)
      .value("Proximity", TestKind::Proximity)
      .value("Support", TestKind::Support)
      .value("Combined", TestKind::Combined);
  py::class_<TestOutcome>(m, "TestOutcome")
      .def_readonly("kind", &TestOutcome::kind)
      .def_readonly("statistic", &TestOutcome::statistic)
      .def_readonly("threshold", &TestOutcome::threshold)
      .def_readonly("reject", &TestOutcome::reject);
  m.def(
      "run_test",
      [](const std::string& kind, const FeatureFamily& fam,
         const ObservationMeasure& mu, const Eigen::VectorXd& y,
         const Mixture& null_mixture, const NoiseModel& nm, double alpha,
         int s, double kappa, std::optional<double> threshold) {
        NullSpec null;
        null.mixture = null_mixture;
        TestParams params;
        params.alpha = alpha;
        params.s = s;
        params.s0 = null_mixture.size();
        params.kappa = kappa;
        params.threshold = threshold;
        return run_test(test_kind_from_string(kind), fam, mu, y, null, nm,
                        params);
      },
      py::arg("kind"), py::arg("family"), py::arg("mu"), py::arg("y"),
      py::arg("null_mixture"), py::arg("noise"), py::arg("alpha") = 0.1,
      py::arg("s") = 1, py::arg("kappa") = 0.0,
      py::arg("threshold") = std::nullopt);

  m.def("threshold_goodness", &threshold_goodness, py::arg("rho"));
  m.def("risk_bound_goodness", &risk_bound_goodness, py::arg("rho"),
        py::arg("t"), py::arg("noise"));
  m.def(
      "rho_quartic",
      [](double alpha, const NoiseModel& nm) { return rho_quartic(alpha, nm); },
      py::arg("alpha"), py::arg("noise"));
  m.def(
      "kappa_for_level",
      [](double alpha, const NoiseModel& nm, const FeatureFamily& fam) {
        return kappa_for_level(alpha, nm, Geometry::of(fam),
                               TheoryConstants{});
      },
      py::arg("alpha"), py::arg("noise"), py::arg("family"));
  m.def(
      "rho_detection",
      [](double alpha, int s, int s0, const NoiseModel& nm,
         const FeatureFamily& fam) {
        DetectionRadius d =
            rho_detection(alpha, s, s0, nm, Geometry::of(fam),
                          TheoryConstants{});
        return py::make_tuple(d.value, d.term_quartic, d.term_sparse,
                              d.quartic_binding);
      },
      py::arg("alpha"), py::arg("s"), py::arg("s0"), py::arg("noise"),
      py::arg("family"));

  py::class_<ApproxReport>(m, "ApproxReport")
      .def_readonly("C_T", &ApproxReport::C_T)
      .def_readonly("V1", &ApproxReport::V1)
      .def_readonly("V2", &ApproxReport::V2)
      .def_readonly("V_T", &ApproxReport::V_T);
  m.def("compute_CT", &compute_CT, py::arg("family"), py::arg("mu"));
  m.def(
      "compute_VT",
      [](const FeatureFamily& fam, const ObservationMeasure& mu) {
        return compute_VT(fam, mu);
      },
      py::arg("family"), py::arg("mu"));
}
