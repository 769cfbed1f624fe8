#pragma once

#include "gdml/common.hpp"

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

namespace gdml {

enum class NonlinearityKind { Identity, PorousMedium, Stefan, Custom };

/// A continuous, non-decreasing scalar function with g(0) = 0, together with
/// one element of its generalized derivative and the list of points where it
/// is not smooth.
class Nonlinearity {
public:
  using ScalarFn = std::function<double(double)>;

  static Nonlinearity identity();
  /// s -> max(s, 0)^2
  static Nonlinearity porous_medium();
  /// s on (-inf,0), 0 on [0,1], s-1 on (1,inf)
  static Nonlinearity stefan();
  static Nonlinearity custom(std::string name, ScalarFn eval, ScalarFn gderiv,
                             std::vector<double> kinks);
  /// Parses the CLI names: id, porous, stefan.
  static Nonlinearity from_name(const std::string& name);

  double operator()(double s) const { return eval_(s); }
  double eval(double s) const { return eval_(s); }
  double gderiv(double s) const { return gderiv_(s); }

  NonlinearityKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  const std::vector<double>& kinks() const { return kinks_; }

  /// s -> g(s) + eps * s, used by the solver's continuation fallback.
  Nonlinearity regularized(double eps) const;

  /// Window average (1/2tau) int_{s-tau}^{s+tau} g; C^1 across the kinks of g.
  Nonlinearity mollified(double tau) const;

  /// Checks g(0) = 0 and monotonicity on a sample grid; throws InvalidModel.
  void validate(double lo = -10.0, double hi = 10.0, int samples = 2001) const;

private:
  Nonlinearity(NonlinearityKind kind, std::string name, ScalarFn eval,
               ScalarFn gderiv, std::vector<double> kinks);

  NonlinearityKind kind_;
  std::string name_;
  ScalarFn eval_;
  ScalarFn gderiv_;
  std::vector<double> kinks_;
};

double zeta_porous(double s);
double zeta_stefan(double s);
double gderiv_porous(double s);
/// Plateau convention: 0 on the closed interval [0, 1].
double gderiv_stefan(double s);

/// beta, zeta and the cell-wise constant diffusion tensor Lambda.
class NonlinearModel {
public:
  NonlinearModel(Nonlinearity beta, Nonlinearity zeta,
                 std::vector<Eigen::Matrix2d> lambda = {},
                 bool strict_monotone_check = true);

  const Nonlinearity& beta() const { return beta_; }
  const Nonlinearity& zeta() const { return zeta_; }

  /// Lambda on the given cell (identity when no field was supplied).
  Eigen::Matrix2d lambda(Index cell) const;
  bool lambda_is_identity() const { return lambda_.empty(); }
  double lambda_min() const { return lambda_min_; }
  double lambda_max() const { return lambda_max_; }

  /// A copy whose zeta is replaced by zeta + eps * Id.
  NonlinearModel with_regularized_zeta(double eps) const;
  /// A copy whose zeta is its mollification over width eps, plus eps * Id.
  NonlinearModel with_smoothed_zeta(double eps) const;

private:
  Nonlinearity beta_;
  Nonlinearity zeta_;
  std::vector<Eigen::Matrix2d> lambda_;
  double lambda_min_ = 1.0;
  double lambda_max_ = 1.0;
};

struct MuRhoNu {
  double mu;
  double rho;
  double nu;
};

/// Change of unknowns t = (beta+zeta)(u): mu(t) = zeta((beta+zeta)^{-1}(t)),
/// rho(t) = t - mu(t), nu(t) = int_0^t sqrt(mu'(r)) dr.
class TransformedModel {
public:
  explicit TransformedModel(const NonlinearModel& model);

  /// (beta+zeta)^{-1}(t) by monotone bisection; throws NonInvertible.
  double inverse(double t) const;
  double mu(double t) const;
  double rho(double t) const;
  double dmu(double t) const;
  double drho(double t) const { return 1.0 - dmu(t); }
  double nu(double t) const;
  double forward(double u) const;

  /// Values of t where mu and rho are not smooth (images of the kinks).
  const std::vector<double>& kinks() const { return t_kinks_; }

private:
  NonlinearModel model_;
  std::vector<double> t_kinks_;
};

MuRhoNu mu_rho_nu(const NonlinearModel& model, double t);

} // namespace gdml
