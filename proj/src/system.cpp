#include "gdml/system.hpp"

#include <algorithm>
#include <cmath>

namespace gdml {

Eigen::MatrixXd local_stiffness(const GradientDiscretisation& gd, const Eigen::Matrix2d& lambda,
                                Index cell) {
  static thread_local std::vector<QuadPoint> q1 = ErrorQuadrature::interval().points();
  static thread_local std::vector<QuadPoint> q2 = ErrorQuadrature::triangle().points();
  const auto& qp = gd.dim() == 1 ? q1 : q2;
  const double scale = gd.geometry(cell).measure * (gd.dim() == 1 ? 1.0 : 2.0);
  const Index n = gd.num_local();
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
  for (const auto& q : qp) {
    const Eigen::MatrixX2d G = gd.phys_grad(cell, q.ref);
    K += (q.weight * scale) * G * lambda * G.transpose();
  }
  return K;
}

namespace {

// Value and derivative of the local basis at the cell end xi (1D).
void end_traces(const GradientDiscretisation& gd, Index cell, double xi, Vector& val, Vector& der) {
  val = gd.ref_basis(point1d(xi));
  der = gd.phys_grad(cell, point1d(xi)).col(0);
}

void add_dg_faces(const GradientDiscretisation& gd, const NonlinearModel& model,
                  std::vector<Eigen::Triplet<double>>& trip) {
  const double k = gd.degree();
  const double sigma = model.lambda_max() * k * k / gd.penalty();
  for (const auto& face : gd.dg_faces()) {
    // Per side: dofs, jump coefficients ([v] = v_left - v_right) and
    // average-flux coefficients ({Lambda v'}).
    std::vector<Index> dofs;
    std::vector<double> jump, avg;
    const bool interior = face.ghost < 0;
    auto add_cell = [&](Index cell, double xi, double sign) {
      Vector val, der;
      end_traces(gd, cell, xi, val, der);
      const double lam = model.lambda(cell)(0, 0);
      const double w = interior ? 0.5 : 1.0;
      const auto& cd = gd.cell_dofs(cell);
      for (std::size_t l = 0; l < cd.size(); ++l) {
        dofs.push_back(cd[l]);
        jump.push_back(sign * val[static_cast<Index>(l)]);
        avg.push_back(w * lam * der[static_cast<Index>(l)]);
      }
    };
    if (face.left_cell >= 0) {
      add_cell(face.left_cell, 1.0, 1.0);
    } else {
      dofs.push_back(face.ghost);
      jump.push_back(1.0);
      avg.push_back(0.0);
    }
    if (face.right_cell >= 0) {
      add_cell(face.right_cell, 0.0, -1.0);
    } else {
      dofs.push_back(face.ghost);
      jump.push_back(-1.0);
      avg.push_back(0.0);
    }
    const double pen = sigma / face.h;
    for (std::size_t i = 0; i < dofs.size(); ++i)
      for (std::size_t j = 0; j < dofs.size(); ++j) {
        const double v = -avg[j] * jump[i] - avg[i] * jump[j] + pen * jump[i] * jump[j];
        if (v != 0.0) trip.emplace_back(dofs[i], dofs[j], v);
      }
  }
}

// Sub-intervals of [a,b] cut at the flux pieces, with the piece value.
template <class Fn>
void for_flux_pieces(double a, double b, const std::vector<FluxPiece>& flux, Fn&& fn) {
  for (const auto& p : flux) {
    const double lo = std::max(a, p.a);
    const double hi = std::min(b, p.b);
    if (hi > lo && p.value != 0.0) fn(lo, hi, p.value);
  }
}

// F one-sided at x; 0 outside the pieces.
double flux_at(const std::vector<FluxPiece>& flux, double x, bool from_left) {
  for (const auto& p : flux)
    if (from_left ? (p.a < x && x <= p.b) : (p.a <= x && x < p.b)) return p.value;
  return 0.0;
}

// DG only: the face part {F}[v] of -int F . grad_D v.
void add_flux_faces(const GradientDiscretisation& gd, const std::vector<FluxPiece>& flux,
                    Vector& b) {
  for (const auto& face : gd.dg_faces()) {
    double f = 0.0;
    if (face.left_cell >= 0 && face.right_cell >= 0)
      f = 0.5 * (flux_at(flux, face.x, true) + flux_at(flux, face.x, false));
    else
      f = flux_at(flux, face.x, face.left_cell >= 0);
    if (f == 0.0) continue;
    auto add = [&](Index cell, double xi, double sign) {
      const Vector val = gd.ref_basis(point1d(xi));
      const auto& cd = gd.cell_dofs(cell);
      for (std::size_t l = 0; l < cd.size(); ++l) b[cd[l]] += sign * f * val[static_cast<Index>(l)];
    };
    if (face.left_cell >= 0) add(face.left_cell, 1.0, 1.0);
    if (face.right_cell >= 0) add(face.right_cell, 0.0, -1.0);
  }
}

} // namespace

Vector flux_load_exact(const GradientDiscretisation& gd, const std::vector<FluxPiece>& flux) {
  if (gd.dim() != 1) throw Unsupported("piecewise constant F is a 1D feature");
  Vector b = Vector::Zero(gd.num_dofs());
  for (Index c = 0; c < gd.num_cells(); ++c) {
    const auto& g = gd.geometry(c);
    const double a = g.origin.x();
    const double e = a + g.measure;
    const auto& dofs = gd.cell_dofs(c);
    for_flux_pieces(a, e, flux, [&](double lo, double hi, double value) {
      // -int_lo^hi F phi' = -F (phi(hi) - phi(lo))
      const Vector d = gd.ref_basis(gd.to_reference(c, point1d(hi))) -
                       gd.ref_basis(gd.to_reference(c, point1d(lo)));
      for (std::size_t l = 0; l < dofs.size(); ++l) b[dofs[l]] -= value * d[static_cast<Index>(l)];
    });
  }
  add_flux_faces(gd, flux, b);
  return b;
}

Vector flux_load_quadrature(const GradientDiscretisation& gd, const std::vector<FluxPiece>& flux) {
  if (gd.dim() != 1) throw Unsupported("piecewise constant F is a 1D feature");
  const auto qp = ErrorQuadrature::interval(14).points();
  Vector b = Vector::Zero(gd.num_dofs());
  for (Index c = 0; c < gd.num_cells(); ++c) {
    const auto& g = gd.geometry(c);
    const double a = g.origin.x();
    const double e = a + g.measure;
    const auto& dofs = gd.cell_dofs(c);
    for_flux_pieces(a, e, flux, [&](double lo, double hi, double value) {
      for (const auto& q : qp) {
        const Point x = point1d(lo + q.ref.x() * (hi - lo));
        const Vector d = gd.phys_grad(c, gd.to_reference(c, x)).col(0);
        for (std::size_t l = 0; l < dofs.size(); ++l)
          b[dofs[l]] -= q.weight * (hi - lo) * value * d[static_cast<Index>(l)];
      }
    });
  }
  add_flux_faces(gd, flux, b);
  return b;
}

DiscreteSystem assemble(const GradientDiscretisation& gd, const NonlinearModel& model,
                        const SourceData& source, const CellField& boundary_u) {
  DiscreteSystem sys;
  const Index n = gd.num_dofs();
  sys.M = gd.node_weights();

  std::vector<Eigen::Triplet<double>> trip;
  for (Index c = 0; c < gd.num_cells(); ++c) {
    const Eigen::MatrixXd K = local_stiffness(gd, model.lambda(c), c);
    const auto& dofs = gd.cell_dofs(c);
    for (std::size_t i = 0; i < dofs.size(); ++i)
      for (std::size_t j = 0; j < dofs.size(); ++j) {
        const double v = K(static_cast<Index>(i), static_cast<Index>(j));
        if (v != 0.0) trip.emplace_back(dofs[i], dofs[j], v);
      }
  }
  if (gd.kind() == GDKind::DG) add_dg_faces(gd, model, trip);
  sys.A.resize(n, n);
  sys.A.setFromTriplets(trip.begin(), trip.end());
  sys.A.makeCompressed();

  sys.b = Vector::Zero(n);
  if (source.f) {
    const auto qf = gd.q_d(source.f);
    for (Index c = 0; c < gd.num_cells(); ++c) {
      const auto w = gd.cell_weights(c);
      const auto& dofs = gd.cell_dofs(c);
      for (std::size_t l = 0; l < dofs.size(); ++l) {
        if (w[l] == 0.0) continue;
        const double fv = qf[c][l];
        if (!std::isfinite(fv))
          throw EvaluationError("f is not finite at node " + std::to_string(dofs[l]));
        sys.b[dofs[l]] += w[l] * fv;
      }
    }
  }
  if (!source.flux_1d.empty()) sys.b += flux_load_exact(gd, source.flux_1d);
  if (source.flux_field) {
    const auto qp = gd.dim() == 1 ? ErrorQuadrature::interval().points()
                                  : ErrorQuadrature::triangle().points();
    for (Index c = 0; c < gd.num_cells(); ++c) {
      const auto& g = gd.geometry(c);
      const double scale = g.measure * (gd.dim() == 1 ? 1.0 : 2.0);
      const auto& dofs = gd.cell_dofs(c);
      for (const auto& q : qp) {
        const Point F = source.flux_field(gd.to_physical(c, q.ref), g.centroid);
        const Vector d = gd.phys_grad(c, q.ref) * F;
        for (std::size_t l = 0; l < dofs.size(); ++l)
          sys.b[dofs[l]] -= q.weight * scale * d[static_cast<Index>(l)];
      }
    }
  }

  sys.constrained.assign(static_cast<std::size_t>(n), false);
  sys.prescribed = Vector::Zero(n);
  for (Index i : gd.boundary_indices()) {
    sys.constrained[i] = true;
    sys.prescribed[i] = boundary_u(gd.node(i), gd.geometry(gd.cell_of_node(i)).centroid);
  }
  sys.hybrid.assign(static_cast<std::size_t>(n), false);
  sys.free_pos.assign(static_cast<std::size_t>(n), -1);
  for (Index i = 0; i < n; ++i) {
    if (sys.constrained[i]) continue;
    sys.free_pos[i] = static_cast<Index>(sys.free_dofs.size());
    sys.free_dofs.push_back(i);
    sys.hybrid[i] = sys.M[i] == 0.0;
  }
  std::vector<Eigen::Triplet<double>> tf;
  for (Index k = 0; k < sys.A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(sys.A, k); it; ++it) {
      const Index r = sys.free_pos[it.row()];
      const Index cc = sys.free_pos[it.col()];
      if (r >= 0 && cc >= 0) tf.emplace_back(r, cc, it.value());
    }
  for (Index k = 0; k < sys.num_free(); ++k) tf.emplace_back(k, k, 0.0);
  sys.A_ff.resize(sys.num_free(), sys.num_free());
  sys.A_ff.setFromTriplets(tf.begin(), tf.end());
  sys.A_ff.makeCompressed();
  return sys;
}

DiscreteSystem assemble(const GradientDiscretisation& gd, const TestCase& tc) {
  SourceData src;
  src.f = tc.f;
  src.flux_1d = tc.flux;
  return assemble(gd, tc.model, src, tc.u);
}

Vector DiscreteSystem::zeta_values(const NonlinearModel& model, const Vector& x) const {
  Vector z(x.size());
  for (Index i = 0; i < x.size(); ++i) z[i] = hybrid[i] ? x[i] : model.zeta()(x[i]);
  return z;
}

Vector DiscreteSystem::residual(const NonlinearModel& model, const Vector& x) const {
  // (A z)_i is evaluated as sum_j A_ij (z_j - z_i): every row of A sums to
  // zero in exact arithmetic, and this form keeps that property under
  // rounding. Otherwise the O(eps/h) row-sum defect acts as a spurious
  // reaction term and pollutes the solution by O(eps/h^2).
  const Vector z = zeta_values(model, x);
  std::vector<long double> acc(static_cast<std::size_t>(size()), 0.0L);
  for (Index j = 0; j < A.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(A, j); it; ++it)
      if (it.row() != j)
        acc[it.row()] += static_cast<long double>(it.value()) * (z[j] - z[it.row()]);
  Vector g(num_free());
  for (Index k = 0; k < num_free(); ++k) {
    const Index i = free_dofs[k];
    long double gi = acc[i] - b[i];
    if (!hybrid[i]) gi += static_cast<long double>(M[i]) * model.beta()(x[i]);
    g[k] = static_cast<double>(gi);
  }
  return g;
}

Vector DiscreteSystem::residual_full(const NonlinearModel& model, const Vector& x) const {
  const Vector g = residual(model, x);
  Vector full = Vector::Zero(size());
  for (Index k = 0; k < num_free(); ++k) full[free_dofs[k]] = g[k];
  return full;
}

SparseMatrix DiscreteSystem::jacobian(const NonlinearModel& model, const Vector& x) const {
  // A_ff carries an explicit diagonal, so the pattern never changes between calls.
  SparseMatrix J = A_ff;
  for (Index k = 0; k < J.outerSize(); ++k) {
    const Index i = free_dofs[k];
    const double d = hybrid[i] ? 1.0 : model.zeta().gderiv(x[i]);
    for (SparseMatrix::InnerIterator it(J, k); it; ++it) {
      it.valueRef() *= d;
      if (it.row() == k && !hybrid[i]) it.valueRef() += M[i] * model.beta().gderiv(x[i]);
    }
  }
  return J;
}

Vector DiscreteSystem::effective_load(const NonlinearModel& model) const {
  Vector zc = Vector::Zero(size());
  for (Index i = 0; i < size(); ++i)
    if (constrained[i]) zc[i] = model.zeta()(prescribed[i]);
  const Vector Azc = A * zc;
  Vector r(num_free());
  for (Index k = 0; k < num_free(); ++k) r[k] = b[free_dofs[k]] - Azc[free_dofs[k]];
  return r;
}

Vector DiscreteSystem::expand(const Vector& xf) const {
  Vector x = prescribed;
  for (Index k = 0; k < num_free(); ++k) x[free_dofs[k]] = xf[k];
  return x;
}

Vector DiscreteSystem::restrict_free(const Vector& x) const {
  Vector xf(num_free());
  for (Index k = 0; k < num_free(); ++k) xf[k] = x[free_dofs[k]];
  return xf;
}

EnergyCheck DiscreteSystem::energy_identity_check(const NonlinearModel& model,
                                                  const Vector& x) const {
  const Vector z = zeta_values(model, x);
  const Vector Az = A * z;
  double lhs = 0.0, rhs = 0.0;
  for (Index i : free_dofs) {
    if (!hybrid[i]) lhs += M[i] * model.beta()(x[i]) * z[i];
    lhs += Az[i] * z[i];
    rhs += b[i] * z[i];
  }
  return {lhs, rhs, std::abs(lhs - rhs)};
}

} // namespace gdml
