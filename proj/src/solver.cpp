#include "offgrid/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace offgrid {

namespace {

double soft_threshold(double x, double k) {
  if (x > k) return x - k;
  if (x < -k) return x + k;
  return 0.0;
}

struct Atom {
  double theta;
  double beta;
  FeatureBundle bundle;  // orders 0..2
};

class Workspace {
 public:
  Workspace(const FeatureFamily& fam, const ObservationMeasure& mu,
            const Eigen::VectorXd& y, const SolverConfig& cfg)
      : fam_(fam), mu_(mu), y_(y), cfg_(cfg) {}

  const FeatureFamily& fam_;
  const ObservationMeasure& mu_;
  const Eigen::VectorXd& y_;
  const SolverConfig& cfg_;

  std::vector<Atom> atoms;
  Eigen::MatrixXd gram;   // <f_k, f_l>
  Eigen::VectorXd corr_y; // <f_k, y>

  int size() const { return static_cast<int>(atoms.size()); }

  double atom_distance(double a, double b) const {
    return std::abs(displacement(fam_.domain, a, b));
  }

  void rebuild_row(int k) {
    atoms[static_cast<size_t>(k)].bundle =
        normalized_feature(fam_, mu_, atoms[static_cast<size_t>(k)].theta, 2);
    for (int l = 0; l < size(); ++l) {
      double v = mu_.dot(atoms[static_cast<size_t>(k)].bundle.f,
                         atoms[static_cast<size_t>(l)].bundle.f);
      gram(k, l) = v;
      gram(l, k) = v;
    }
    gram(k, k) = 1.0;
    corr_y[k] = mu_.dot(atoms[static_cast<size_t>(k)].bundle.f, y_);
  }

  void insert(double theta) {
    Atom a;
    a.theta = theta;
    a.beta = 0.0;
    atoms.push_back(std::move(a));
    int s = size();
    Eigen::MatrixXd g2 = Eigen::MatrixXd::Zero(s, s);
    g2.topLeftCorner(s - 1, s - 1) = gram;
    gram.swap(g2);
    corr_y.conservativeResize(s);
    rebuild_row(s - 1);
  }

  void remove(int k) {
    int s = size();
    for (int i = k; i + 1 < s; ++i) {
      atoms[static_cast<size_t>(i)] = std::move(atoms[static_cast<size_t>(i + 1)]);
    }
    atoms.pop_back();
    Eigen::MatrixXd g2(s - 1, s - 1);
    Eigen::VectorXd c2(s - 1);
    for (int i = 0, ii = 0; i < s; ++i) {
      if (i == k) continue;
      c2[ii] = corr_y[i];
      for (int j = 0, jj = 0; j < s; ++j) {
        if (j == k) continue;
        g2(ii, jj) = gram(i, j);
        ++jj;
      }
      ++ii;
    }
    gram.swap(g2);
    corr_y.swap(c2);
  }

  Eigen::VectorXd beta_vec() const {
    Eigen::VectorXd b(size());
    for (int k = 0; k < size(); ++k) b[k] = atoms[static_cast<size_t>(k)].beta;
    return b;
  }

  void set_beta(const Eigen::VectorXd& b) {
    for (int k = 0; k < size(); ++k) atoms[static_cast<size_t>(k)].beta = b[k];
  }

  Eigen::VectorXd model() const {
    Eigen::VectorXd m = Eigen::VectorXd::Zero(mu_.dim());
    for (const auto& a : atoms) m += a.beta * a.bundle.f;
    return m;
  }

  double objective() const {
    Eigen::VectorXd r = y_ - model();
    double l1 = 0.0;
    for (const auto& a : atoms) l1 += std::abs(a.beta);
    return 0.5 * mu_.dot(r, r) + cfg_.kappa * l1;
  }

  /// Exact amplitude subproblem at fixed locations: cyclic coordinate
  /// descent with soft thresholding on the normal equations.
  void solve_beta() {
    int s = size();
    if (s == 0) return;
    Eigen::VectorXd b = beta_vec();
    for (int sweep = 0; sweep < cfg_.beta_max_sweeps; ++sweep) {
      double biggest = 0.0;
      for (int k = 0; k < s; ++k) {
        double rho = corr_y[k] - (gram.row(k).dot(b) - b[k]);
        double nb = soft_threshold(rho, cfg_.kappa);
        biggest = std::max(biggest, std::abs(nb - b[k]));
        b[k] = nb;
      }
      if (biggest <= 1e-14 * (1.0 + b.cwiseAbs().maxCoeff())) break;
    }
    set_beta(b);
  }

  /// Location polish for atom k: 1-d safeguarded Newton on the correlation
  /// of the atom-deleted residual, preserving the amplitude sign.
  void polish_theta(int k) {
    Atom& a = atoms[static_cast<size_t>(k)];
    if (a.beta == 0.0) return;
    double sgn = a.beta > 0.0 ? 1.0 : -1.0;
    Eigen::VectorXd r_k = y_ - model() + a.beta * a.bundle.f;
    double lo = a.theta - 0.5 * fam_.sigma;
    double hi = a.theta + 0.5 * fam_.sigma;
    if (fam_.domain == Domain::Line) {
      lo = std::max(lo, fam_.theta_lo);
      hi = std::min(hi, fam_.theta_hi);
    }
    double th = a.theta;
    double tol = cfg_.theta_tol * fam_.sigma;
    for (int it = 0; it < 60; ++it) {
      FeatureBundle bb = normalized_feature(fam_, mu_, th, 2);
      double c1 = mu_.dot(bb.d1, r_k);
      double c2 = mu_.dot(bb.d2, r_k);
      double step;
      if (sgn * c2 < 0.0) {
        step = -c1 / c2;  // Newton toward the local max of sgn * corr
      } else {
        double g = mu_.dot(bb.d1, bb.d1);
        step = sgn * c1 / std::max(g, 1e-300);
      }
      step = std::clamp(step, lo - th, hi - th);
      double limit = 0.2 * fam_.sigma;
      step = std::clamp(step, -limit, limit);
      th += step;
      if (std::abs(step) <= tol) break;
    }
    // accept only if the correlation did not deteriorate
    FeatureBundle nb = normalized_feature(fam_, mu_, th, 2);
    double c_new = sgn * mu_.dot(nb.f, r_k);
    double c_old = sgn * mu_.dot(a.bundle.f, r_k);
    if (c_new >= c_old - 1e-15 * (1.0 + std::abs(c_old))) {
      a.theta = th;
      a.bundle = std::move(nb);
      rebuild_row(k);
    }
  }

  /// Joint first-order refinement of all amplitudes and locations with
  /// backtracking; amplitude signs frozen for the sweep.
  void joint_refine() {
    int s = size();
    if (s == 0) return;
    double fval = objective();
    for (int it = 0; it < cfg_.local_max_iters; ++it) {
      Eigen::VectorXd r = y_ - model();
      Eigen::VectorXd gb(s), gt(s), signs(s), gnorm(s);
      for (int k = 0; k < s; ++k) {
        const Atom& a = atoms[static_cast<size_t>(k)];
        signs[k] = a.beta > 0.0 ? 1.0 : (a.beta < 0.0 ? -1.0 : 0.0);
        gb[k] = -mu_.dot(a.bundle.f, r) + cfg_.kappa * signs[k];
        gt[k] = -a.beta * mu_.dot(a.bundle.d1, r);
        gnorm[k] = std::max(mu_.dot(a.bundle.d1, a.bundle.d1), 1e-300);
      }
      double scale_sq = 0.0;
      for (int k = 0; k < s; ++k) {
        scale_sq += gb[k] * gb[k];
        scale_sq += gt[k] * gt[k] / gnorm[k];
      }
      if (scale_sq <= 1e-30 * (1.0 + fval)) break;

      std::vector<double> theta0(static_cast<size_t>(s));
      Eigen::VectorXd beta0 = beta_vec();
      for (int k = 0; k < s; ++k) theta0[static_cast<size_t>(k)] = atoms[static_cast<size_t>(k)].theta;

      double step = 1.0;
      bool improved = false;
      for (int bt = 0; bt < 40; ++bt) {
        for (int k = 0; k < s; ++k) {
          Atom& a = atoms[static_cast<size_t>(k)];
          double nb = beta0[k] - step * gb[k];
          if (signs[k] != 0.0 && nb * signs[k] < 0.0) nb = 0.0;
          a.beta = nb;
          double dth = -step * gt[k] / (gnorm[k] * std::max(beta0[k] * beta0[k], 1e-8));
          dth = std::clamp(dth, -0.2 * fam_.sigma, 0.2 * fam_.sigma);
          double th = theta0[static_cast<size_t>(k)] + dth;
          if (fam_.domain == Domain::Line) {
            th = std::clamp(th, fam_.theta_lo, fam_.theta_hi);
          }
          if (th != a.theta) {
            a.theta = th;
            a.bundle = normalized_feature(fam_, mu_, th, 2);
          }
        }
        for (int k = 0; k < s; ++k) rebuild_row(k);
        double fnew = objective();
        if (fnew <= fval - 1e-4 * step * scale_sq ||
            fnew <= fval - 1e-15 * (1.0 + std::abs(fval))) {
          fval = fnew;
          improved = true;
          break;
        }
        step *= 0.5;
      }
      if (!improved) {
        // restore and stop: gradient step cannot make progress
        for (int k = 0; k < s; ++k) {
          Atom& a = atoms[static_cast<size_t>(k)];
          a.beta = beta0[k];
          if (a.theta != theta0[static_cast<size_t>(k)]) {
            a.theta = theta0[static_cast<size_t>(k)];
            a.bundle = normalized_feature(fam_, mu_, a.theta, 2);
          }
        }
        for (int k = 0; k < s; ++k) rebuild_row(k);
        break;
      }
      if (std::abs(step * scale_sq) <= cfg_.obj_tol * (1.0 + std::abs(fval))) break;
    }
  }

  void prune() {
    for (int k = size() - 1; k >= 0; --k) {
      if (std::abs(atoms[static_cast<size_t>(k)].beta) < cfg_.prune_tol) {
        remove(k);
      }
    }
  }

  // collapse the closest pair within radius, if any
  bool merge_pass(double radius) {
    int bi = -1, bj = -1;
    double best = radius;
    for (int k = 0; k < size(); ++k) {
      for (int l = k + 1; l < size(); ++l) {
        double d = atom_distance(atoms[static_cast<size_t>(k)].theta,
                                 atoms[static_cast<size_t>(l)].theta);
        if (d <= best) {
          best = d;
          bi = k;
          bj = l;
        }
      }
    }
    if (bi < 0) return false;
    int keep = std::abs(atoms[static_cast<size_t>(bi)].beta) >=
                       std::abs(atoms[static_cast<size_t>(bj)].beta)
                   ? bi
                   : bj;
    int drop = keep == bi ? bj : bi;
    atoms[static_cast<size_t>(keep)].beta +=
        atoms[static_cast<size_t>(drop)].beta;
    remove(drop);
    return true;
  }

  struct Snapshot {
    std::vector<Atom> atoms;
    Eigen::MatrixXd gram;
    Eigen::VectorXd corr_y;
  };

  Snapshot save() const { return {atoms, gram, corr_y}; }

  void restore(Snapshot&& s) {
    atoms = std::move(s.atoms);
    gram = std::move(s.gram);
    corr_y = std::move(s.corr_y);
  }
};

struct ScanResult {
  double theta = 0.0;
  double corr = 0.0;  // |<f(theta), r>|
};

ScanResult scan_insertion(const Workspace& w, const Eigen::VectorXd& r) {
  const FeatureFamily& fam = w.fam_;
  double span = fam.theta_hi - fam.theta_lo;
  double step = fam.sigma / w.cfg_.insertion_per_sigma;
  int n = std::max(2, static_cast<int>(std::ceil(span / step)));
  bool torus = fam.domain == Domain::Torus;
  int count = torus ? n : n + 1;
  double best = -1.0;
  double best_theta = fam.theta_lo;
  for (int i = 0; i < count; ++i) {
    double th = fam.theta_lo + span * i / n;
    FeatureBundle b = normalized_feature(fam, w.mu_, th, 0);
    double c = std::abs(w.mu_.dot(b.f, r));
    if (c > best * (1.0 + 1e-12)) {
      best = c;
      best_theta = th;
    }
  }
  // golden-section refinement of |corr| around the best node
  double lo = best_theta - span / n;
  double hi = best_theta + span / n;
  if (!torus) {
    lo = std::max(lo, fam.theta_lo);
    hi = std::min(hi, fam.theta_hi);
  }
  auto val = [&](double th) {
    FeatureBundle b = normalized_feature(fam, w.mu_, th, 0);
    return std::abs(w.mu_.dot(b.f, r));
  };
  const double gr = 0.6180339887498949;
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = val(x1), f2 = val(x2);
  for (int it = 0; it < 90 && (hi - lo) > 1e-13 * fam.sigma; ++it) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = val(x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = val(x1);
    }
  }
  ScanResult out;
  double mid = 0.5 * (lo + hi);
  double fm = val(mid);
  out.theta = mid;
  out.corr = fm;
  if (f1 > fm && f1 >= f2) {
    out.theta = x1;
    out.corr = f1;
  } else if (f2 > fm) {
    out.theta = x2;
    out.corr = f2;
  }
  if (out.corr <= best) {
    out.theta = best_theta;
    out.corr = best;
  }
  if (torus) out.theta = out.theta - std::floor(out.theta);
  return out;
}

}  // namespace

double default_kappa(const NoiseModel& nm, double tau, double c1) {
  require(tau > 1.0, ErrorKind::Domain, "kappa rule needs tau > 1");
  require(c1 > 0.0, ErrorKind::Domain, "kappa rule needs c1 > 0");
  return c1 * nm.sigma_bar * std::sqrt(nm.delta_T * std::log(tau));
}

FitResult fit(const FeatureFamily& fam, const ObservationMeasure& mu,
              const Eigen::VectorXd& y, const SolverConfig& cfg) {
  require(cfg.kappa >= 0.0, ErrorKind::Domain, "kappa must be >= 0");
  require(y.size() == mu.dim(), ErrorKind::Structural,
          "observation size mismatch");
  SolverConfig c = cfg;
  if (c.max_features <= 0) c.max_features = std::max(8, 4 * c.expected_s);
  if (c.max_outer <= 0) c.max_outer = 2 * c.max_features + 4;

  Workspace w(fam, mu, y, c);
  FitResult out;
  double prev_obj = w.objective();
  out.objective_trace.push_back(prev_obj);

  bool saturated = false;
  for (int outer = 0; outer < c.max_outer; ++outer) {
    out.outer_iters = outer + 1;
    Eigen::VectorXd r = y - w.model();
    ScanResult sc = scan_insertion(w, r);
    bool inserted = false;
    if (sc.corr > c.kappa * (1.0 + 1e-12) && w.size() < c.max_features) {
      double min_dist = std::numeric_limits<double>::infinity();
      for (const auto& a : w.atoms) {
        min_dist = std::min(min_dist, w.atom_distance(a.theta, sc.theta));
      }
      if (min_dist > c.merge_radius_factor * fam.sigma) {
        w.insert(sc.theta);
        inserted = true;
      }
    }
    if (sc.corr > c.kappa * (1.0 + 1e-12) && w.size() >= c.max_features &&
        !inserted) {
      saturated = true;
    }

    w.solve_beta();
    w.joint_refine();
    for (int pass = 0; pass < 6; ++pass) {
      double before = w.objective();
      for (int k = 0; k < w.size(); ++k) w.polish_theta(k);
      w.solve_beta();
      double after = w.objective();
      if (before - after <= c.obj_tol * (1.0 + std::abs(before))) break;
    }
    w.prune();
    for (int guard = 0; guard < 2 * c.max_features; ++guard) {
      double before = w.objective();
      auto snap = w.save();
      // certain duplicates first, then wider pairs on objective parity
      if (!w.merge_pass(c.merge_radius_factor * fam.sigma) &&
          !w.merge_pass(c.collapse_radius_factor * fam.sigma)) {
        break;
      }
      w.solve_beta();
      for (int pass = 0; pass < 3; ++pass) {
        double mid = w.objective();
        for (int k = 0; k < w.size(); ++k) w.polish_theta(k);
        w.solve_beta();
        if (mid - w.objective() <= c.obj_tol * (1.0 + std::abs(mid))) break;
      }
      if (w.objective() > before + 1e-13 * (1.0 + std::abs(before))) {
        w.restore(std::move(snap));
        break;
      }
    }

    double obj = w.objective();
    out.objective_trace.push_back(obj);
    bool stalled = (prev_obj - obj) <= c.obj_tol * (1.0 + std::abs(prev_obj));
    prev_obj = obj;

    if (!inserted && stalled) {
      out.converged = !saturated;
      break;
    }
  }

  // order atoms by location for reproducible output
  std::vector<int> order(static_cast<size_t>(w.size()));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return w.atoms[static_cast<size_t>(a)].theta <
           w.atoms[static_cast<size_t>(b)].theta;
  });
  out.estimate.beta.resize(w.size());
  out.estimate.theta.resize(w.size());
  for (int i = 0; i < w.size(); ++i) {
    out.estimate.beta[i] = w.atoms[static_cast<size_t>(order[static_cast<size_t>(i)])].beta;
    out.estimate.theta[i] = w.atoms[static_cast<size_t>(order[static_cast<size_t>(i)])].theta;
  }

  out.model = w.model();
  out.residual = y - out.model;
  out.objective = w.objective();

  ScanResult final_scan = scan_insertion(w, out.residual);
  out.max_corr_residual = final_scan.corr;
  out.stationarity_beta = 0.0;
  out.stationarity_theta = 0.0;
  for (const auto& a : w.atoms) {
    if (a.beta == 0.0) continue;
    double sgn = a.beta > 0.0 ? 1.0 : -1.0;
    double cb = mu.dot(a.bundle.f, out.residual) - c.kappa * sgn;
    double ct = mu.dot(a.bundle.d1, out.residual) * a.beta;
    out.stationarity_beta = std::max(out.stationarity_beta, std::abs(cb));
    out.stationarity_theta = std::max(out.stationarity_theta, std::abs(ct));
  }
  return out;
}

}  // namespace offgrid
