#include "planecontrol/control_solvers.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "planecontrol/plane_calculus.hpp"
#include "planecontrol/series_special.hpp"

namespace planecontrol {

namespace {

std::string node_name(int i, int j) {
  return "(" + std::to_string(i) + "," + std::to_string(j) + ")";
}

McEstimate estimate_or_value(const std::vector<double>& v) {
  if (v.size() == 1) return {v.front(), 0.0};
  return summarize(v);
}

}  // namespace

// ---------------------------------------------------------------------------
// LQ

void LQSpec::validate() const {
  if (!(T > 0.0 && T < 1.0)) throw std::domain_error("LQ closed form needs 0 < T < 1");
  if (!(X > 0.0)) throw std::domain_error("LQ needs X > 0");
  if (!(theta > 0.0)) throw std::domain_error("LQ needs theta > 0");
}

double lq_lambda_closed_form(const LQSpec& spec, double t, double x) {
  spec.validate();
  return 1.0 / ((1.0 - spec.T + t) * (1.0 / spec.theta + spec.X - x));
}

double lq_lambda_separable(const LQSpec& spec, double t, double x) {
  spec.validate();
  const auto phi1 = [](double s) { return 1.0 / (1.0 - s); };
  const double theta = spec.theta;
  const auto phi2 = [theta](double s) { return 1.0 / (1.0 / theta + s); };
  return phi1(spec.T - t) * phi2(spec.X - x);
}

double lq_riccati_residual(const LQSpec& spec, double t, double x, double h, bool separable) {
  const auto lam = [&](double s, double a) {
    return separable ? lq_lambda_separable(spec, s, a) : lq_lambda_closed_form(spec, s, a);
  };
  const double mixed =
      (lam(t + h, x + h) - lam(t + h, x - h) - lam(t - h, x + h) + lam(t - h, x - h)) / (4.0 * h * h);
  const double l = lam(t, x);
  return mixed + l * l;
}

double lq_condition_value(double T, double X, double theta) {
  if (!(T > 0.0 && T < 1.0)) throw std::domain_error("condition needs 0 < T < 1");
  if (!(X >= 0.0)) throw std::domain_error("condition needs X >= 0");
  if (!(theta > 0.0)) throw std::domain_error("condition needs theta > 0");
  const double s = std::log1p(X * theta);
  return (1.0 - T) * (1.0 + X * theta) * series_f(-std::log1p(-T) * s).value;
}

double lq_find_X(double T, double theta, double tol) {
  const auto g = [&](double X) { return lq_condition_value(T, X, theta) - 1.0; };
  double lo = 0.0;
  double hi = 1.0;
  while (g(hi) <= 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6) throw std::runtime_error("no root of the LQ condition below X = 1e6");
  }
  double mid = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    mid = 0.5 * (lo + hi);
    const double v = g(mid);
    if (std::abs(v) <= tol || hi - lo <= 4e-16 * hi) break;
    if (v < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return mid;
}

Field2D lq_lambda_field(const LQSpec& spec, const GridSpec& grid) {
  return Field2D::from_function(grid, Placement::kNode, [&](Point z) {
    return lq_lambda_closed_form(spec, z.t, z.x);
  });
}

ControlProblem make_lq_problem(const LQSpec& spec) {
  spec.validate();
  ControlProblem p;
  const double beta = spec.beta;
  const double theta = spec.theta;
  p.alpha = [](Point, double, double u) { return u; };
  p.beta = [beta](Point, double, double) { return beta; };
  p.cost = [](Point, double, double u) { return -0.5 * u * u; };
  p.terminal = [theta](double y) { return -0.5 * theta * y * y; };
  p.alpha_y = [](Point, double, double) { return 0.0; };
  p.alpha_u = [](Point, double, double) { return 1.0; };
  p.beta_y = [](Point, double, double) { return 0.0; };
  p.beta_u = [](Point, double, double) { return 0.0; };
  p.cost_y = [](Point, double, double) { return 0.0; };
  p.cost_u = [](Point, double, double u) { return -u; };
  p.terminal_y = [theta](double y) { return -theta * y; };
  p.T = spec.T;
  p.X = spec.X;
  p.y0 = spec.y0;
  return p;
}

Control lq_feedback(const LQSpec& spec, const GridSpec& grid, double sign) {
  const Field2D lambda = lq_lambda_field(spec, grid);
  return [lambda, sign](NodeIndex n, double y) { return sign * lambda(n) * y; };
}

LQReport lq_solve_and_verify(const LQSpec& spec, const GridSpec& grid, int n_paths,
                             SeedSpec seed) {
  spec.validate();
  if (n_paths < 2) throw std::invalid_argument("LQ verification needs at least two paths");
  const ControlProblem problem = make_lq_problem(spec);
  const Field2D lambda = lq_lambda_field(spec, grid);
  LQReport r;
  r.lambda_00 = lambda(0, 0);
  r.integral_lambda = -std::log1p(-spec.T) * std::log1p(spec.X * spec.theta);
  const Field2D m = solve_mean_volterra(lambda, spec.y0);
  r.boundary_deterministic = spec.theta * m(grid.n_t(), grid.n_x()) / spec.y0;
  r.boundary_series = spec.theta * series_f(r.integral_lambda).value;

  const Control plus = lq_feedback(spec, grid, 1.0);
  const Control minus = lq_feedback(spec, grid, -1.0);
  r.open_loop_optimum = -spec.theta * spec.y0 / (1.0 + spec.theta * spec.T * spec.X);
  const double c = r.open_loop_optimum;
  const Control constant = [c](NodeIndex, double) { return c; };

  std::vector<double> boundary(n_paths), j_plus(n_paths), j_minus(n_paths), j_const(n_paths);
  for (int k = 0; k < n_paths; ++k) {
    const SheetPath sheet = sample_sheet(grid, seed, k);
    const PathSolution sol = solve_forward(problem, plus, sheet);
    boundary[k] = spec.theta * sol.Y(grid.n_t(), grid.n_x()) / spec.y0;
    j_plus[k] = path_J(problem, sol);
    j_minus[k] = path_J(problem, solve_forward(problem, minus, sheet));
    j_const[k] = path_J(problem, solve_forward(problem, constant, sheet));
  }
  r.boundary_noisy = summarize(boundary);
  r.J_feedback = summarize(j_plus);
  r.J_negative_feedback = summarize(j_minus);
  r.J_open_loop_optimum = summarize(j_const);
  return r;
}

// ---------------------------------------------------------------------------
// Harvesting

void HarvestSpec::validate() const {
  if (!(y0 > 0.0)) throw std::domain_error("harvesting needs Y(0,0) > 0");
  if (!(T > 0.0) || !(X > 0.0)) throw std::domain_error("harvesting needs positive horizons");
}

ControlProblem make_harvest_problem(const HarvestSpec& spec) {
  spec.validate();
  ControlProblem p;
  const double a0 = spec.alpha0;
  const double b0 = spec.beta0;
  const double theta = spec.theta;
  p.alpha = [a0](Point, double y, double u) { return a0 * y - u; };
  p.beta = [b0](Point, double y, double) { return b0 * y; };
  p.cost = [](Point, double, double u) { return std::log(u * u); };
  p.terminal = [theta](double y) { return theta * y; };
  p.alpha_y = [a0](Point, double, double) { return a0; };
  p.alpha_u = [](Point, double, double) { return -1.0; };
  p.beta_y = [b0](Point, double, double) { return b0; };
  p.beta_u = [](Point, double, double) { return 0.0; };
  p.cost_y = [](Point, double, double) { return 0.0; };
  p.cost_u = [](Point, double, double u) { return 2.0 / u; };
  p.terminal_y = [theta](double) { return theta; };
  p.T = spec.T;
  p.X = spec.X;
  p.y0 = spec.y0;
  p.u_min = 0.0;
  return p;
}

HarvestSolution harvest_solve(const HarvestSpec& spec, const GridSpec& grid, double tol) {
  spec.validate();
  AdjointSolution adj = solve_adjoint_deterministic(grid, spec.alpha0, spec.beta0, spec.theta, tol);
  const Field2D upper_L = upper_time_integral(adj.L, grid.T());
  Field2D ls1(grid, Placement::kNode);
  Field2D u(grid, Placement::kNode);
  for (int i = 0; i <= grid.n_t(); ++i) {
    for (int j = 0; j <= grid.n_x(); ++j) {
      ls1(i, j) = grid.x(j) * (grid.T() - grid.t(i)) * adj.L(i, j) + upper_L(i, j);
      const double denom = adj.p(i, j) + ls1(i, j);
      if (denom == 0.0 || !std::isfinite(denom)) {
        throw std::domain_error("p + (L*1) vanishes at node " + node_name(i, j));
      }
      u(i, j) = 2.0 / denom;
    }
  }
  return {std::move(u), std::move(adj), std::move(ls1)};
}

// ---------------------------------------------------------------------------
// Learning rate

void MLSpec::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::domain_error("damping must lie in (0, 1]");
  if (!(T > 0.0) || !(X > 0.0)) throw std::domain_error("learning-rate problem needs positive horizons");
  if (!(theta >= 0.0)) throw std::domain_error("learning-rate problem needs theta >= 0");
  if (max_sweeps < 1) throw std::domain_error("need at least one sweep");
}

ControlProblem make_ml_problem(const MLSpec& spec) {
  spec.validate();
  ControlProblem p;
  const double b0 = spec.beta0;
  const double theta = spec.theta;
  p.alpha = [](Point, double y, double u) { return -u * y; };
  p.beta = [b0](Point, double, double) { return b0; };
  p.cost = [](Point, double, double u) { return -u * u; };
  p.terminal = [theta](double y) { return -theta * y * y; };
  p.alpha_y = [](Point, double, double u) { return -u; };
  p.alpha_u = [](Point, double y, double) { return -y; };
  p.beta_y = [](Point, double, double) { return 0.0; };
  p.beta_u = [](Point, double, double) { return 0.0; };
  p.cost_y = [](Point, double, double) { return 0.0; };
  p.cost_u = [](Point, double, double u) { return -2.0 * u; };
  p.terminal_y = [theta](double y) { return -2.0 * theta * y; };
  p.star_coupling = StarCoupling::kStateField;
  p.T = spec.T;
  p.X = spec.X;
  p.y0 = spec.y0;
  return p;
}

Field2D ml_control_target(const Field2D& Y, const Field2D& p, const Field2D& L, double horizon_t) {
  Field2D out = star(L, Y, horizon_t);
  out.values() = -0.5 * (Y.values().cwiseProduct(p.values()) + out.values());
  return out;
}

MLResult ml_forward_backward_sweep(const MLSpec& spec, const GridSpec& grid,
                                   const SheetPath* sheet) {
  const ControlProblem problem = make_ml_problem(spec);
  const SheetPath noise = sheet ? *sheet : zero_sheet(grid);
  if (!noise.grid().same_as(grid)) throw std::invalid_argument("sheet grid differs from grid");
  const int nt = grid.n_t();
  const int nx = grid.n_x();
  Field2D u(grid, Placement::kNode);
  std::vector<double> history;
  std::optional<AdjointSolution> warm;
  for (int sweep = 1; sweep <= spec.max_sweeps; ++sweep) {
    const PathSolution path = solve_forward(problem, u, noise);
    Field2D a(grid, Placement::kNode);
    a.values() = -u.values();
    const double xi = problem.terminal_y(path.Y(nt, nx));
    AdjointSolution adj = solve_adjoint_linear(a, xi, grid.T(), 1e-11, 500, warm ? &*warm : nullptr);
    const Field2D target = ml_control_target(path.Y, adj.p, adj.L, grid.T());
    const double residual =
        (target.values() - u.values()).topLeftCorner(nt, nx).cwiseAbs().maxCoeff();
    if (residual < spec.tol) {
      MLResult r{path.Y, adj.p, adj.L, u, sweep, history, history.empty() ? 0.0 : history.back(),
                 residual, 0.0, 0.0};
      const AdjointResiduals ar = adjoint_residuals(a, xi, grid.T(), adj.p, adj.L);
      r.p_residual = ar.p_equation;
      r.L_residual = ar.L_equation;
      return r;
    }
    if (!std::isfinite(residual)) break;
    u.values() += spec.gamma * (target.values() - u.values());
    history.push_back(spec.gamma * residual);
    warm = std::move(adj);
  }
  throw ConvergenceError("forward-backward sweep did not converge",
                         history.empty() ? 0.0 : history.back(), history);
}

// ---------------------------------------------------------------------------
// Perturbation probes

PerturbationTable perturbation_dominance(const ControlProblem& problem, const GridSpec& grid,
                                         const Control& u_hat,
                                         const std::vector<Field2D>& directions,
                                         const std::vector<std::string>& names,
                                         const PerturbationConfig& config) {
  if (directions.size() != names.size()) throw std::invalid_argument("one name per direction");
  if (!config.deterministic && config.n_paths < 2) {
    throw std::invalid_argument("perturbation estimates need at least two paths");
  }
  // Controls: base, every (direction, eps) cell, then +-step per direction.
  std::vector<Control> controls{u_hat};
  for (std::size_t d = 0; d < directions.size(); ++d) {
    for (double eps : config.epsilons) controls.push_back(perturbed(u_hat, directions[d], eps));
  }
  for (std::size_t d = 0; d < directions.size(); ++d) {
    controls.push_back(perturbed(u_hat, directions[d], config.derivative_step));
    controls.push_back(perturbed(u_hat, directions[d], -config.derivative_step));
  }
  const int n = config.deterministic ? 1 : config.n_paths;
  std::vector<std::vector<double>> J(controls.size(), std::vector<double>(n));
  for (int k = 0; k < n; ++k) {
    const SheetPath sheet = config.deterministic ? zero_sheet(grid) : sample_sheet(grid, config.seed, k);
    for (std::size_t c = 0; c < controls.size(); ++c) {
      J[c][k] = path_J(problem, solve_forward(problem, controls[c], sheet));
    }
  }
  const auto paired = [&](std::size_t a, std::size_t b, double scale) {
    std::vector<double> d(n);
    for (int k = 0; k < n; ++k) d[k] = (J[a][k] - J[b][k]) * scale;
    return estimate_or_value(d);
  };
  PerturbationTable table;
  table.direction_names = names;
  table.base = estimate_or_value(J[0]);
  std::size_t c = 1;
  for (std::size_t d = 0; d < directions.size(); ++d) {
    for (double eps : config.epsilons) {
      table.cells.push_back({d, eps, estimate_or_value(J[c]), paired(c, 0, 1.0)});
      ++c;
    }
  }
  for (std::size_t d = 0; d < directions.size(); ++d) {
    table.derivatives.push_back(paired(c, c + 1, 0.5 / config.derivative_step));
    c += 2;
  }
  return table;
}

}  // namespace planecontrol
