#include "gdml/conforming.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

namespace gdml {

namespace {

struct Context {
  const Mesh1D& mesh;
  const TestCase& tc;
  TransformedModel tm;
  std::vector<QuadPoint> qp;
};

// Cell [a,b] split where the affine w_h crosses a kink of mu/rho and at data breakpoints.
std::vector<double> subcells(const Context& ctx, Index j, double wa, double wb) {
  const double a = ctx.mesh.left(j), b = ctx.mesh.right(j);
  std::vector<double> cuts{a, b};
  for (double k : ctx.tm.kinks())
    if ((wa - k) * (wb - k) < 0.0) cuts.push_back(a + (k - wa) / (wb - wa) * (b - a));
  for (double s : ctx.tc.breakpoints)
    if (s > a && s < b) cuts.push_back(s);
  std::sort(cuts.begin(), cuts.end());
  return cuts;
}

// Calls fn(x, weight, phi_left, phi_right, w_h(x), subcell midpoint) at the
// quadrature points of cell j.
template <class Fn>
void for_quadrature(const Context& ctx, const Vector& w, Index j, Fn&& fn) {
  const double a = ctx.mesh.left(j), h = ctx.mesh.length(j);
  const double wa = w[j], wb = w[j + 1];
  const auto cuts = subcells(ctx, j, wa, wb);
  for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
    const double lo = cuts[p], len = cuts[p + 1] - cuts[p];
    if (!(len > 0.0)) continue;
    for (const auto& q : ctx.qp) {
      const double x = lo + q.ref.x() * len;
      const double pr = (x - a) / h;
      fn(x, q.weight * len, 1.0 - pr, pr, wa + pr * (wb - wa), lo + 0.5 * len);
    }
  }
}

Vector load_vector(const Context& ctx) {
  const Index n = ctx.mesh.num_vertices();
  Vector F = Vector::Zero(n);
  const Vector zero = Vector::Zero(n);
  for (Index j = 0; j < ctx.mesh.num_cells(); ++j)
    for_quadrature(ctx, zero, j, [&](double x, double wq, double pl, double pr, double, double mid) {
      const double f = ctx.tc.f(point1d(x), point1d(mid));
      F[j] += wq * f * pl;
      F[j + 1] += wq * f * pr;
    });
  return F;
}

Vector residual(const Context& ctx, const Vector& w, const Vector& load) {
  const Index n = ctx.mesh.num_vertices();
  Vector R = -load;
  for (Index j = 0; j < ctx.mesh.num_cells(); ++j) {
    const double lam = ctx.tc.model.lambda(j)(0, 0);
    const double d = lam * (ctx.tm.mu(w[j + 1]) - ctx.tm.mu(w[j])) / ctx.mesh.length(j);
    R[j] -= d;
    R[j + 1] += d;
    for_quadrature(ctx, w, j, [&](double, double wq, double pl, double pr, double wx, double) {
      const double rho = ctx.tm.rho(wx);
      R[j] += wq * rho * pl;
      R[j + 1] += wq * rho * pr;
    });
  }
  R[0] = 0.0;
  R[n - 1] = 0.0;
  return R;
}

SparseMatrix jacobian(const Context& ctx, const Vector& w) {
  const Index n = ctx.mesh.num_vertices();
  std::vector<Eigen::Triplet<double>> trip;
  for (Index j = 0; j < ctx.mesh.num_cells(); ++j) {
    const double lam = ctx.tc.model.lambda(j)(0, 0);
    const double h = ctx.mesh.length(j);
    const double ma = lam * ctx.tm.dmu(w[j]) / h;
    const double mb = lam * ctx.tm.dmu(w[j + 1]) / h;
    Eigen::Matrix2d K;
    K << ma, -mb, -ma, mb;
    for_quadrature(ctx, w, j, [&](double, double wq, double pl, double pr, double wx, double) {
      const double dr = ctx.tm.drho(wx);
      K(0, 0) += wq * dr * pl * pl;
      K(0, 1) += wq * dr * pl * pr;
      K(1, 0) += wq * dr * pr * pl;
      K(1, 1) += wq * dr * pr * pr;
    });
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) {
        const Index row = j + r;
        if (row == 0 || row == n - 1) continue;
        trip.emplace_back(row, j + c, K(r, c));
      }
  }
  trip.emplace_back(0, 0, 1.0);
  trip.emplace_back(n - 1, n - 1, 1.0);
  SparseMatrix J(n, n);
  J.setFromTriplets(trip.begin(), trip.end());
  return J;
}

// Damped Newton from w. The Armijo test compares against the largest of the
// last few residuals: nodes sitting next to a kink of mu or rho flip sides
// from one step to the next, and a monotone line search stalls on them.
bool newton(const Context& ctx, Vector& w, const Vector& load, double tol, const SolverConfig& cfg,
            ConformingResult& res, double& r) {
  Vector R = residual(ctx, w, load);
  r = R.norm();
  std::deque<double> recent{r};
  for (int it = 0; it < cfg.max_iters && r > tol; ++it) {
    const Vector dx = linear_solve(jacobian(ctx, w), -R);
    const double ref = *std::max_element(recent.begin(), recent.end());
    double t = 1.0;
    Vector w_try, R_try;
    double r_try = 0.0;
    while (true) {
      w_try = w + t * dx;
      R_try = residual(ctx, w_try, load);
      r_try = R_try.norm();
      if (std::isfinite(r_try) && r_try * r_try <= ref * ref - 2.0 * cfg.armijo * t * r * r) break;
      // A tiny step is taken anyway; the window lets the next one recover.
      if (t < cfg.min_step && std::isfinite(r_try)) break;
      t *= cfg.backtrack;
      if (t < 1e-3 * cfg.min_step) return false;
    }
    w = std::move(w_try);
    R = std::move(R_try);
    r = r_try;
    ++res.iterations;
    res.residual_history.push_back(r);
    recent.push_back(r);
    if (static_cast<int>(recent.size()) > cfg.stagnation_window) recent.pop_front();
  }
  return r <= tol;
}

// w_h of `coarse` evaluated at the vertices of `fine`.
Vector prolong(const Mesh1D& coarse, const Vector& w, const Mesh1D& fine) {
  Vector out(fine.num_vertices());
  for (Index i = 0; i < fine.num_vertices(); ++i) {
    const double x = fine.vertices()[i];
    const Index c = coarse.locate(x);
    const double t = (x - coarse.left(c)) / coarse.length(c);
    out[i] = (1.0 - t) * w[c] + t * w[c + 1];
  }
  return out;
}

// Initial guess from the linear problem mu = rho = t/2.
Vector linear_guess(const Mesh1D& mesh, const TestCase& tc, const Vector& load, double w0, double w1) {
  const Index n = mesh.num_vertices();
  std::vector<Eigen::Triplet<double>> trip;
  for (Index j = 0; j < mesh.num_cells(); ++j) {
    const double h = mesh.length(j);
    const double lam = tc.model.lambda(j)(0, 0);
    Eigen::Matrix2d K;
    K << h / 6.0 + lam / h, h / 12.0 - lam / h, h / 12.0 - lam / h, h / 6.0 + lam / h;
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) {
        const Index row = j + r;
        if (row == 0 || row == n - 1) continue;
        trip.emplace_back(row, j + c, K(r, c));
      }
  }
  trip.emplace_back(0, 0, 1.0);
  trip.emplace_back(n - 1, n - 1, 1.0);
  SparseMatrix K(n, n);
  K.setFromTriplets(trip.begin(), trip.end());
  Vector rhs = load;
  rhs[0] = w0;
  rhs[n - 1] = w1;
  return linear_solve(K, rhs);
}

} // namespace

ConformingResult solve_conforming(const Mesh1D& mesh, const TestCase& tc, const SolverConfig& cfg) {
  if (tc.has_flux()) throw Unsupported("the conforming scheme assumes F = 0");
  if (tc.dim != 1) throw Unsupported("the conforming scheme is 1D only");
  cfg.validate();
  const TransformedModel tm(tc.model);
  const auto qp = ErrorQuadrature::interval(10).points();

  // Boundary values of w = (beta+zeta)(u).
  const Index last = mesh.num_cells() - 1;
  const Point mid0 = point1d(mesh.left(0) + 0.5 * mesh.length(0));
  const Point mid1 = point1d(mesh.left(last) + 0.5 * mesh.length(last));
  const double w0 = tm.forward(tc.u(point1d(mesh.vertices().front()), mid0));
  const double w1 = tm.forward(tc.u(point1d(mesh.vertices().back()), mid1));

  // Nested iteration: every other vertex down to about 16 cells, so that each
  // level starts with the free boundary within a cell or two of its place.
  std::vector<Mesh1D> levels{mesh};
  while (levels.back().num_cells() >= 32) {
    const auto& v = levels.back().vertices();
    std::vector<double> coarse;
    for (std::size_t i = 0; i < v.size(); i += 2) coarse.push_back(v[i]);
    if (coarse.back() != v.back()) coarse.push_back(v.back());
    levels.emplace_back(std::move(coarse));
  }
  std::reverse(levels.begin(), levels.end());

  ConformingResult res;
  Vector w;
  double r = 0.0;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const Mesh1D& m = levels[l];
    const Context ctx{m, tc, tm, qp};
    const Vector load = load_vector(ctx);
    w = l == 0 ? linear_guess(m, tc, load, w0, w1) : prolong(levels[l - 1], w, m);
    w[0] = w0;
    w[m.num_vertices() - 1] = w1;
    Vector inner = load;
    inner[0] = inner[m.num_vertices() - 1] = 0.0;
    const double tol = cfg.tol_abs + cfg.tol_rel * (1.0 + inner.norm());
    res.residual_history.clear();
    if (!newton(ctx, w, load, tol, cfg, res, r) && l + 1 == levels.size()) {
      std::ostringstream msg;
      msg << "conforming Newton did not reach the tolerance (residual " << r << ")";
      throw NoConvergence(msg.str());
    }
  }

  const Index n = mesh.num_vertices();
  const Context ctx{mesh, tc, tm, qp};
  res.w = w;
  res.final_residual = r;
  res.mu_w.resize(n);
  for (Index i = 0; i < n; ++i) res.mu_w[i] = ctx.tm.mu(w[i]);
  double energy = 0.0;
  for (Index j = 0; j < mesh.num_cells(); ++j) {
    const double slope = (w[j + 1] - w[j]) / mesh.length(j);
    for_quadrature(ctx, w, j, [&](double x, double wq, double, double, double wx, double mid) {
      energy += wq * (ctx.tm.rho(wx) * wx + ctx.tm.dmu(wx) * slope * slope -
                      tc.f(point1d(x), point1d(mid)) * wx);
    });
  }
  res.nu_energy = energy;
  return res;
}

ErrorReport conforming_errors(const Mesh1D& mesh, const TestCase& tc, const ConformingResult& r,
                              const ErrorOptions& options) {
  Context ctx{mesh, tc, TransformedModel(tc.model),
              ErrorQuadrature::interval(options.quadrature_degree).points()};
  ErrorReport rep;
  rep.card_i = mesh.num_vertices();
  rep.h = mesh.h();
  rep.excluded = options.exclude_singular;
  double sb = 0, sz = 0, sgi = 0, sg = 0;
  for (Index j = 0; j < mesh.num_cells(); ++j) {
    const double a = mesh.left(j), b = mesh.right(j), h = mesh.length(j);
    if (options.exclude_singular) {
      bool drop = false;
      for (const auto& [lo, hi] : tc.exclusion_windows) drop = drop || (b > lo && a < hi);
      if (drop) {
        ++rep.cells_dropped;
        continue;
      }
    }
    const Point mid = point1d(0.5 * (a + b));
    const double ia = tc.zeta_u(point1d(a), mid) - r.mu_w[j];
    const double ib = tc.zeta_u(point1d(b), mid) - r.mu_w[j + 1];
    sgi += (ib - ia) * (ib - ia) / h;
    const double slope = (r.w[j + 1] - r.w[j]) / h;
    for_quadrature(ctx, r.w, j, [&](double x, double wq, double, double, double wx, double m) {
      const Point p = point1d(x), in = point1d(m);
      const double u = tc.u(p, in);
      const double e1 = tc.model.beta()(u) - ctx.tm.rho(wx);
      const double e2 = tc.zeta_u(p, in) - ctx.tm.mu(wx);
      const double e3 = tc.grad_zeta_u(p, in).x() - ctx.tm.dmu(wx) * slope;
      sb += wq * e1 * e1;
      sz += wq * e2 * e2;
      sg += wq * e3 * e3;
    });
  }
  rep.e_beta_pi = std::sqrt(sb);
  rep.e_zeta_pi = std::sqrt(sz);
  rep.e_zeta_grad_interp = std::sqrt(sgi);
  rep.e_zeta_grad = std::sqrt(sg);
  return rep;
}

} // namespace gdml
