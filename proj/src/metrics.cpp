#include "gdml/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>

namespace gdml {

namespace {

const double kSqrt2 = std::sqrt(2.0);

bool cell_excluded(const GradientDiscretisation& gd, const TestCase& tc, Index c) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  if (gd.dim() == 1) {
    lo = gd.geometry(c).origin.x();
    hi = lo + gd.geometry(c).measure;
  } else {
    for (Index v : gd.mesh2d()->triangles()[c]) {
      const double s = tc.coordinate(gd.mesh2d()->vertices()[v]);
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
  }
  for (const auto& [a, b] : tc.exclusion_windows)
    if (hi > a && lo < b) return true;
  return false;
}

// Integrates fn(x, inside) over a convex polygon by fan triangulation.
template <class Fn>
double integrate_polygon(const std::vector<Point>& poly, const std::vector<QuadPoint>& qp, Fn&& fn) {
  double total = 0.0;
  Point centroid = Point::Zero();
  for (const auto& p : poly) centroid += p;
  centroid /= static_cast<double>(poly.size());
  for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
    const Point& a = poly[0];
    const Point e1 = poly[i] - a;
    const Point e2 = poly[i + 1] - a;
    const double jac = std::abs(e1.x() * e2.y() - e1.y() * e2.x());
    if (jac == 0.0) continue;
    for (const auto& q : qp) total += q.weight * jac * fn(a + q.ref.x() * e1 + q.ref.y() * e2, centroid);
  }
  return total;
}

} // namespace

std::vector<std::vector<Point>> split_triangle(const std::array<Point, 3>& tri,
                                               const std::vector<double>& s_values) {
  std::vector<std::vector<Point>> pieces{{tri[0], tri[1], tri[2]}};
  for (double s : s_values) {
    const double c = kSqrt2 * s;
    std::vector<std::vector<Point>> next;
    for (const auto& poly : pieces) {
      std::vector<Point> neg, pos;
      const std::size_t n = poly.size();
      for (std::size_t i = 0; i < n; ++i) {
        const Point& p = poly[i];
        const Point& q = poly[(i + 1) % n];
        const double fp = p.x() + p.y() - c;
        const double fq = q.x() + q.y() - c;
        if (fp <= 0.0) neg.push_back(p);
        if (fp >= 0.0) pos.push_back(p);
        if ((fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0)) {
          const Point x = p + (fp / (fp - fq)) * (q - p);
          neg.push_back(x);
          pos.push_back(x);
        }
      }
      if (neg.size() >= 3) next.push_back(std::move(neg));
      if (pos.size() >= 3) next.push_back(std::move(pos));
    }
    pieces = std::move(next);
  }
  return pieces;
}

ErrorReport compute_errors(const GradientDiscretisation& gd, const TestCase& tc,
                           const DiscreteSystem& sys, const SolveResult& result,
                           const ErrorOptions& options) {
  if (!result.converged) throw NotConverged("errors requested for a non-converged solve");
  if (result.u.size() != gd.num_dofs()) throw MismatchedSizes("solution size != Card(I)");
  ErrorReport rep;
  rep.card_i = gd.num_dofs();
  rep.h = gd.h();
  rep.excluded = options.exclude_singular;

  const auto& model = tc.model;
  const Vector z = zeta_of(result, sys, model);
  const Vector iz = gd.interpolate_nodal(tc.zeta_u);
  const Vector diff = iz - z;

  const bool two_d = gd.dim() == 2;
  const auto qp = two_d ? ErrorQuadrature::triangle(options.quadrature_degree).points()
                        : ErrorQuadrature::interval(options.quadrature_degree).points();
  // Reference grads at the cell quadrature points are the same on every cell.
  std::vector<Eigen::MatrixX2d> ref_grads;
  for (const auto& q : qp) ref_grads.push_back(gd.ref_grad(q.ref));

  double s_beta = 0.0, s_zpi = 0.0, s_gi = 0.0, s_g = 0.0;
  for (Index c = 0; c < gd.num_cells(); ++c) {
    if (options.exclude_singular && cell_excluded(gd, tc, c)) {
      ++rep.cells_dropped;
      continue;
    }
    const auto& geo = gd.geometry(c);
    const auto& dofs = gd.cell_dofs(c);
    const auto w = gd.cell_weights(c);
    for (std::size_t l = 0; l < dofs.size(); ++l) {
      if (w[l] == 0.0) continue;
      const Index i = dofs[l];
      const double ub = tc.u(gd.node(i), geo.centroid);
      const double e1 = model.beta()(ub) - model.beta()(result.u[i]);
      s_beta += w[l] * e1 * e1;
      s_zpi += w[l] * diff[i] * diff[i];
    }
    const Vector dloc = gd.local_values(diff, c);
    const double scale = geo.measure * (two_d ? 2.0 : 1.0);
    for (std::size_t k = 0; k < qp.size(); ++k) {
      const Point g = (ref_grads[k] * geo.Jinv).transpose() * dloc;
      s_gi += qp[k].weight * scale * g.squaredNorm();
    }
    // Exact gradient: split the cell at the case breakpoints first.
    auto integrand = [&](const Point& x, const Point& inside) {
      const Point gd_z = gd.grad_d(z, x, c);
      const Point ge = tc.grad_zeta_u(x, inside);
      return two_d ? (ge - gd_z).squaredNorm() : std::pow(ge.x() - gd_z.x(), 2);
    };
    if (two_d) {
      const auto& tri = gd.mesh2d()->triangles()[c];
      const auto& V = gd.mesh2d()->vertices();
      for (const auto& poly : split_triangle({V[tri[0]], V[tri[1]], V[tri[2]]}, tc.breakpoints))
        s_g += integrate_polygon(poly, qp, integrand);
    } else {
      const double a = geo.origin.x();
      const double b = a + geo.measure;
      std::vector<double> cuts{a};
      for (double s : tc.breakpoints)
        if (s > a && s < b) cuts.push_back(s);
      cuts.push_back(b);
      for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
        const double lo = cuts[p], len = cuts[p + 1] - cuts[p];
        const Point inside = point1d(lo + 0.5 * len);
        for (const auto& q : qp) s_g += q.weight * len * integrand(point1d(lo + q.ref.x() * len), inside);
      }
    }
  }
  rep.e_beta_pi = std::sqrt(s_beta);
  rep.e_zeta_pi = std::sqrt(s_zpi);
  rep.e_zeta_grad_interp = std::sqrt(s_gi);
  rep.e_zeta_grad = std::sqrt(s_g);
  return rep;
}

double term_d_defect(const GradientDiscretisation& gd, const TestCase& tc) {
  const Vector iz = gd.interpolate_nodal(tc.zeta_u);
  const auto qu = gd.q_d(tc.u);
  double worst = 0.0;
  for (Index c = 0; c < gd.num_cells(); ++c) {
    const auto w = gd.cell_weights(c);
    const auto& dofs = gd.cell_dofs(c);
    for (std::size_t l = 0; l < dofs.size(); ++l) {
      if (w[l] == 0.0) continue;
      worst = std::max(worst, std::abs(iz[dofs[l]] - tc.model.zeta()(qu[c][l])));
    }
  }
  return worst;
}

namespace {

RegressionFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double den = n * sxx - sx * sx;
  if (!(std::abs(den) > 0.0)) throw InsufficientData("regression abscissae are all equal");
  RegressionFit fit;
  fit.alpha = (n * sxy - sx * sy) / den;
  const double intercept = (sy - fit.alpha * sx) / n;
  fit.C = std::exp(intercept);
  const double mean = sy / n;
  double ss_tot = 0, ss_res = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    ss_tot += (y[i] - mean) * (y[i] - mean);
    const double r = y[i] - intercept - fit.alpha * x[i];
    ss_res += r * r;
  }
  fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  fit.points = static_cast<int>(x.size());
  return fit;
}

} // namespace

RegressionFit fit_rate(const std::vector<std::pair<double, double>>& card_and_error, int d) {
  std::vector<double> x, y;
  int dropped = 0;
  for (const auto& [card, err] : card_and_error) {
    if (!(err > 0.0) || !std::isfinite(err)) {
      ++dropped;
      continue;
    }
    x.push_back(-std::log(card) / d);
    y.push_back(std::log(err));
  }
  if (dropped > 0)
    std::cerr << "warning: fit_rate dropped " << dropped << " zero or non-finite error(s)\n";
  if (x.size() < 2) throw InsufficientData("need at least two positive errors to fit a rate");
  auto fit = least_squares(x, y);
  fit.dropped = dropped;
  return fit;
}

RegressionFit fit_ratio(const std::vector<double>& h, const std::vector<double>& ratio) {
  if (h.size() != ratio.size()) throw MismatchedSizes("fit_ratio: size mismatch");
  if (h.size() < 2) throw InsufficientData("need at least two ratios");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (!(ratio[i] > 0.0)) continue;
    x.push_back(std::log(h[i] / h.front()));
    y.push_back(std::log(ratio[i]));
  }
  if (x.size() < 2) throw InsufficientData("need at least two positive ratios");
  return least_squares(x, y);
}

} // namespace gdml
