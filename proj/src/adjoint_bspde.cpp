#include "planecontrol/adjoint_bspde.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "planecontrol/csv.hpp"
#include "planecontrol/plane_calculus.hpp"
#include "planecontrol/series_special.hpp"

namespace planecontrol {

ConvergenceError::ConvergenceError(const std::string& what, double last_residual,
                                   std::vector<double> history)
    : std::runtime_error(what + " (last residual " + csv_number(last_residual) + ")"),
      last_residual_(last_residual),
      history_(std::move(history)) {}

namespace {

double upper_time_sum_at(const Field2D& f, int h, NodeIndex z) {
  double s = 0.0;
  for (int i = z.i; i < h; ++i) {
    for (int j = 0; j < z.j; ++j) s += f(i, j);
  }
  return s * f.grid().cell_area();
}

double sup_diff(const Field2D& a, const Field2D& b) {
  return (a.values() - b.values()).cwiseAbs().maxCoeff();
}

// A(zeta') = coefficient(zeta', y', u) with y' frozen at y or read off the state.
Field2D induced_field(const ControlProblem& problem, const ControlProblem::Coefficient& coef,
                      const HamiltonianArgs& args) {
  if (!args.L) throw std::invalid_argument("Hamiltonian needs an L field");
  const GridSpec& g = args.L->grid();
  const bool use_state = problem.star_coupling == StarCoupling::kStateField;
  if (use_state && !args.state) throw std::invalid_argument("Hamiltonian needs the state field");
  Field2D out(g, Placement::kNode);
  for (int i = 0; i < out.rows(); ++i) {
    for (int j = 0; j < out.cols(); ++j) {
      const double y = use_state ? (*args.state)(i, j) : args.y;
      out(i, j) = coef(g.node(i, j), y, args.u);
    }
  }
  return out;
}

}  // namespace

double star_at(const Field2D& h, const Field2D& k, double horizon_t, NodeIndex z) {
  require_compatible(h, k);
  const int hor = h.grid().time_index(horizon_t);
  return h(z) * upper_time_sum_at(k, hor, z) + k(z) * upper_time_sum_at(h, hor, z);
}

double hamiltonian_eval(const ControlProblem& problem, const HamiltonianArgs& args) {
  const Point z = args.L ? args.L->grid().node(args.z) : Point{};
  const Field2D A = induced_field(problem, problem.alpha, args);
  return problem.cost(z, args.y, args.u) + args.p * problem.alpha(z, args.y, args.u) +
         args.q * problem.beta(z, args.y, args.u) + star_at(*args.L, A, args.horizon_t, args.z);
}

double dH_du(const ControlProblem& problem, const HamiltonianArgs& args) {
  if (!problem.alpha_u || !problem.beta_u || !problem.cost_u) {
    throw std::invalid_argument("problem lacks control derivatives");
  }
  const Point z = args.L ? args.L->grid().node(args.z) : Point{};
  const Field2D Au = induced_field(problem, problem.alpha_u, args);
  const double v = problem.cost_u(z, args.y, args.u) + args.p * problem.alpha_u(z, args.y, args.u) +
                   args.q * problem.beta_u(z, args.y, args.u) +
                   star_at(*args.L, Au, args.horizon_t, args.z);
  if (!std::isfinite(v)) throw std::domain_error("singular derivative");
  return v;
}

LSolve solve_L(const Field2D& source, const Field2D& weight, double horizon_t, double tol,
               int max_iter, const Field2D* initial) {
  require_compatible(source, weight);
  LSolve out{initial ? *initial : Field2D(source.grid(), Placement::kNode), 0, 0.0};
  std::vector<double> history;
  for (int it = 1; it <= max_iter; ++it) {
    Field2D next = star(out.L, weight, horizon_t);
    next.values() += source.values();
    out.residual = sup_diff(next, out.L);
    out.L = std::move(next);
    out.iterations = it;
    history.push_back(out.residual);
    if (!std::isfinite(out.residual)) break;
    if (out.residual < tol) return out;
  }
  throw ConvergenceError("L fixed point did not converge", out.residual, std::move(history));
}

LSolve solve_L_fixed_point(const Field2D& p, const Field2D& q, double alpha0, double beta0,
                           double horizon_t, double tol, int max_iter) {
  require_compatible(p, q);
  Field2D source(p.grid(), Placement::kNode);
  source.values() = -(alpha0 * p.values() + beta0 * q.values());
  const Field2D weight = Field2D::constant(p.grid(), -alpha0);
  return solve_L(source, weight, horizon_t, tol, max_iter);
}

Field2D backward_region_integral(const Field2D& g) {
  const GridSpec& grid = g.grid();
  const int nt = grid.n_t();
  const int nx = grid.n_x();
  // prefix(i, j) = sum_{i' < i, j' < j} g(i'+1, j'+1)
  Eigen::MatrixXd prefix = Eigen::MatrixXd::Zero(nt + 1, nx + 1);
  for (int i = 1; i <= nt; ++i) {
    for (int j = 1; j <= nx; ++j) {
      prefix(i, j) = prefix(i - 1, j) + prefix(i, j - 1) - prefix(i - 1, j - 1) + g(i, j);
    }
  }
  Field2D out(grid, Placement::kNode);
  out.values() = (prefix(nt, nx) - prefix.array()).matrix() * grid.cell_area();
  return out;
}

AdjointResiduals adjoint_residuals(const Field2D& a, double xi, double horizon_t,
                                   const Field2D& p, const Field2D& L) {
  Field2D neg_a(a.grid(), Placement::kNode);
  neg_a.values() = -a.values();
  Field2D l_rhs = star(L, neg_a, horizon_t);
  l_rhs.values() -= a.values().cwiseProduct(p.values());
  Field2D p_rhs = backward_region_integral(L);
  p_rhs.values() = (xi - p_rhs.values().array()).matrix();
  return {sup_diff(p, p_rhs), sup_diff(L, l_rhs)};
}

AdjointSolution solve_adjoint_linear(const Field2D& a, double xi, double horizon_t, double tol,
                                     int max_sweeps, const AdjointSolution* initial) {
  const GridSpec& g = a.grid();
  AdjointSolution sol{Field2D(g, Placement::kNode, xi), Field2D(g, Placement::kNode),
                      Field2D(g, Placement::kNode), 0, 0.0};
  if (initial) {
    sol.p = initial->p;
    sol.L = initial->L;
  }
  Field2D neg_a(g, Placement::kNode);
  neg_a.values() = -a.values();
  std::vector<double> history;
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    Field2D source(g, Placement::kNode);
    source.values() = -a.values().cwiseProduct(sol.p.values());
    sol.L = solve_L(source, neg_a, horizon_t, 0.01 * tol, 500, &sol.L).L;
    Field2D p_next = backward_region_integral(sol.L);
    p_next.values() = (xi - p_next.values().array()).matrix();
    sol.p = std::move(p_next);
    const AdjointResiduals r = adjoint_residuals(a, xi, horizon_t, sol.p, sol.L);
    sol.final_residual = std::max(r.p_equation, r.L_equation);
    sol.picard_iterations = sweep;
    history.push_back(sol.final_residual);
    if (!std::isfinite(sol.final_residual)) break;
    if (sol.final_residual < tol) return sol;
  }
  throw ConvergenceError("adjoint sweeps did not converge", sol.final_residual, std::move(history));
}

AdjointSolution solve_adjoint_deterministic(const GridSpec& grid, double alpha0, double /*beta0*/,
                                            double terminal_value, double tol) {
  // With deterministic data the ansatz q = 0 holds, so beta0 drops out.
  return solve_adjoint_linear(Field2D::constant(grid, alpha0), terminal_value, grid.T(), tol);
}

bool zaidi_nualart_radius(double K1, double K2, Point z0) {
  const double area = z0.t * z0.x;
  const double limit = std::sqrt(find_r0());
  return K1 * area < limit && K2 * area < limit;
}

void write_adjoint_csv(std::ostream& out, const AdjointSolution& s) {
  const GridSpec& g = s.p.grid();
  out << "t,x,p,q,L\n";
  for (int i = 0; i <= g.n_t(); ++i) {
    for (int j = 0; j <= g.n_x(); ++j) {
      out << csv_number(g.t(i)) << ',' << csv_number(g.x(j)) << ',' << csv_number(s.p(i, j)) << ','
          << csv_number(s.q(i, j)) << ',' << csv_number(s.L(i, j)) << '\n';
    }
  }
}

}  // namespace planecontrol
