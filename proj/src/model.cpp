#include "gdml/model.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace gdml {

double zeta_porous(double s) {
  const double p = std::max(s, 0.0);
  return p * p;
}

double gderiv_porous(double s) { return 2.0 * std::max(s, 0.0); }

double zeta_stefan(double s) {
  if (s < 0.0) return s;
  if (s <= 1.0) return 0.0;
  return s - 1.0;
}

double gderiv_stefan(double s) { return (s < 0.0 || s > 1.0) ? 1.0 : 0.0; }

Nonlinearity::Nonlinearity(NonlinearityKind kind, std::string name, ScalarFn eval,
                           ScalarFn gderiv, std::vector<double> kinks)
    : kind_(kind), name_(std::move(name)), eval_(std::move(eval)),
      gderiv_(std::move(gderiv)), kinks_(std::move(kinks)) {
  std::sort(kinks_.begin(), kinks_.end());
}

Nonlinearity Nonlinearity::identity() {
  return {NonlinearityKind::Identity, "id", [](double s) { return s; },
          [](double) { return 1.0; }, {}};
}

Nonlinearity Nonlinearity::porous_medium() {
  return {NonlinearityKind::PorousMedium, "porous", zeta_porous, gderiv_porous, {0.0}};
}

Nonlinearity Nonlinearity::stefan() {
  return {NonlinearityKind::Stefan, "stefan", zeta_stefan, gderiv_stefan, {0.0, 1.0}};
}

Nonlinearity Nonlinearity::custom(std::string name, ScalarFn eval, ScalarFn gderiv,
                                  std::vector<double> kinks) {
  return {NonlinearityKind::Custom, std::move(name), std::move(eval), std::move(gderiv),
          std::move(kinks)};
}

Nonlinearity Nonlinearity::from_name(const std::string& name) {
  if (name == "id" || name == "identity") return identity();
  if (name == "porous") return porous_medium();
  if (name == "stefan") return stefan();
  throw ConfigError("unknown nonlinearity '" + name + "' (expected id, porous or stefan)");
}

Nonlinearity Nonlinearity::regularized(double eps) const {
  auto f = eval_;
  auto df = gderiv_;
  return custom(name_ + "+eps", [f, eps](double s) { return f(s) + eps * s; },
                [df, eps](double s) { return df(s) + eps; }, kinks_);
}

Nonlinearity Nonlinearity::mollified(double tau) const {
  if (!(tau > 0.0)) throw ConfigError("mollification width must be positive");
  auto f = eval_;
  auto ks = kinks_;
  // 3-point Gauss-Legendre on each smooth piece of the window.
  auto value = [f, ks, tau](double s) {
    static const double x[3] = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
    static const double w[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    double lo = s - tau;
    double total = 0.0;
    auto piece = [&](double a, double b) {
      const double c = 0.5 * (a + b), r = 0.5 * (b - a);
      for (int q = 0; q < 3; ++q) total += w[q] * r * f(c + r * x[q]);
    };
    for (double k : ks)
      if (k > lo && k < s + tau) {
        piece(lo, k);
        lo = k;
      }
    piece(lo, s + tau);
    return total / (2.0 * tau);
  };
  // Shifted so that g(0) = 0 still holds.
  const double at0 = value(0.0);
  auto shifted = [value, at0](double s) { return value(s) - at0; };
  auto deriv = [f, tau](double s) { return (f(s + tau) - f(s - tau)) / (2.0 * tau); };
  std::vector<double> smooth_kinks;
  for (double k : kinks_) {
    smooth_kinks.push_back(k - tau);
    smooth_kinks.push_back(k + tau);
  }
  return custom(name_ + "~", shifted, deriv, smooth_kinks);
}

void Nonlinearity::validate(double lo, double hi, int samples) const {
  if (eval_(0.0) != 0.0) throw InvalidModel("nonlinearity '" + name_ + "' has g(0) != 0");
  double prev = eval_(lo);
  for (int i = 1; i < samples; ++i) {
    const double s = lo + (hi - lo) * i / (samples - 1);
    const double v = eval_(s);
    if (v < prev) throw InvalidModel("nonlinearity '" + name_ + "' is decreasing near s=" +
                                     std::to_string(s));
    if (gderiv_(s) < 0.0)
      throw InvalidModel("nonlinearity '" + name_ + "' has a negative derivative");
    prev = v;
  }
}

namespace {

// Sample grid used for the strict-monotonicity checks: dense near the origin
// and geometric further out, so plateaus of any reasonable size are caught.
std::vector<double> monotonicity_grid() {
  std::vector<double> grid;
  for (int i = -400; i <= 400; ++i) grid.push_back(0.01 * i);
  for (double s = 5.0; s < 1e6; s *= 1.5) {
    grid.push_back(s);
    grid.push_back(-s);
  }
  std::sort(grid.begin(), grid.end());
  return grid;
}

} // namespace

NonlinearModel::NonlinearModel(Nonlinearity beta, Nonlinearity zeta,
                               std::vector<Eigen::Matrix2d> lambda,
                               bool strict_monotone_check)
    : beta_(std::move(beta)), zeta_(std::move(zeta)), lambda_(std::move(lambda)) {
  beta_.validate();
  zeta_.validate();
  if (!lambda_.empty()) {
    lambda_min_ = std::numeric_limits<double>::infinity();
    lambda_max_ = 0.0;
    for (const auto& L : lambda_) {
      if ((L - L.transpose()).cwiseAbs().maxCoeff() > 1e-14 * (1.0 + L.cwiseAbs().maxCoeff()))
        throw InvalidModel("diffusion tensor is not symmetric");
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(L);
      lambda_min_ = std::min(lambda_min_, es.eigenvalues()(0));
      lambda_max_ = std::max(lambda_max_, es.eigenvalues()(1));
    }
    if (!(lambda_min_ > 0.0)) throw InvalidModel("diffusion tensor is not positive definite");
  }
  if (strict_monotone_check) {
    const auto grid = monotonicity_grid();
    double prev = beta_(grid.front()) + zeta_(grid.front());
    for (std::size_t i = 1; i < grid.size(); ++i) {
      const double v = beta_(grid[i]) + zeta_(grid[i]);
      if (!(v > prev)) throw InvalidModel("beta + zeta is not strictly increasing");
      prev = v;
    }
  }
}

Eigen::Matrix2d NonlinearModel::lambda(Index cell) const {
  if (lambda_.empty()) return Eigen::Matrix2d::Identity();
  return lambda_.at(static_cast<std::size_t>(cell));
}

NonlinearModel NonlinearModel::with_regularized_zeta(double eps) const {
  return NonlinearModel(beta_, zeta_.regularized(eps), lambda_, false);
}

NonlinearModel NonlinearModel::with_smoothed_zeta(double eps) const {
  return NonlinearModel(beta_, zeta_.mollified(eps).regularized(eps), lambda_, false);
}

TransformedModel::TransformedModel(const NonlinearModel& model) : model_(model) {
  const auto grid = monotonicity_grid();
  double prev = forward(grid.front());
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double v = forward(grid[i]);
    if (!(v > prev)) throw NonInvertible("beta + zeta is not strictly increasing");
    prev = v;
  }
  std::vector<double> s_kinks = model_.beta().kinks();
  const auto& zk = model_.zeta().kinks();
  s_kinks.insert(s_kinks.end(), zk.begin(), zk.end());
  for (double s : s_kinks) t_kinks_.push_back(forward(s));
  std::sort(t_kinks_.begin(), t_kinks_.end());
  t_kinks_.erase(std::unique(t_kinks_.begin(), t_kinks_.end()), t_kinks_.end());
}

double TransformedModel::forward(double u) const {
  return model_.beta()(u) + model_.zeta()(u);
}

double TransformedModel::inverse(double t) const {
  double lo = -1.0;
  double hi = 1.0;
  int guard = 0;
  while (forward(lo) > t) {
    lo *= 2.0;
    if (++guard > 1100) throw NonInvertible("cannot bracket (beta+zeta)^{-1}");
  }
  guard = 0;
  while (forward(hi) < t) {
    hi *= 2.0;
    if (++guard > 1100) throw NonInvertible("cannot bracket (beta+zeta)^{-1}");
  }
  // Bisect until the bracket collapses to adjacent doubles (well below 1e-12).
  for (int it = 0; it < 2100; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (forward(mid) < t)
      lo = mid;
    else
      hi = mid;
  }
  return forward(lo) == t ? lo : hi;
}

double TransformedModel::mu(double t) const { return model_.zeta()(inverse(t)); }

double TransformedModel::rho(double t) const { return t - mu(t); }

double TransformedModel::dmu(double t) const {
  const double s = inverse(t);
  const double dz = model_.zeta().gderiv(s);
  const double denom = model_.beta().gderiv(s) + dz;
  if (!(denom > 0.0)) throw NonInvertible("beta' + zeta' vanishes; mu' undefined");
  return dz / denom;
}

namespace {

double simpson(double a, double fa, double b, double fb, double fm) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double fa,
                        double b, double fb, double m, double fm, double whole, double tol,
                        int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpson(a, fa, m, fm, flm);
  const double right = simpson(m, fm, b, fb, frm);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return adaptive_simpson(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                          double tol) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fm = f(m);
  return adaptive_simpson(f, a, fa, b, fb, m, fm, simpson(a, fa, b, fb, fm), tol, 40);
}

} // namespace

double TransformedModel::nu(double t) const {
  if (t == 0.0) return 0.0;
  const double sign = t > 0.0 ? 1.0 : -1.0;
  const double lo = std::min(0.0, t);
  const double hi = std::max(0.0, t);
  std::vector<double> cuts{lo};
  for (double k : t_kinks_)
    if (k > lo && k < hi) cuts.push_back(k);
  cuts.push_back(hi);
  auto integrand = [this](double r) { return std::sqrt(std::max(dmu(r), 0.0)); };
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    // Open-ended evaluation: nudge the piece ends inward so the generalized
    // derivative is taken from the smooth side of each kink.
    const double a = cuts[i];
    const double b = cuts[i + 1];
    const double w = b - a;
    const double ea = a + 1e-14 * w;
    const double eb = b - 1e-14 * w;
    total += integrate_adaptive(integrand, ea, eb, 1e-13 * std::max(1.0, w));
  }
  return sign * total;
}

MuRhoNu mu_rho_nu(const NonlinearModel& model, double t) {
  TransformedModel tm(model);
  const double mu = tm.mu(t);
  return {mu, t - mu, tm.nu(t)};
}

} // namespace gdml
