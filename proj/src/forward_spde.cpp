#include "planecontrol/forward_spde.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include "planecontrol/csv.hpp"

namespace planecontrol {

void ControlProblem::validate() const {
  if (!alpha || !beta || !cost || !terminal) {
    throw std::invalid_argument("control problem is missing a coefficient");
  }
  if (!(T > 0.0) || !(X > 0.0)) throw std::invalid_argument("horizons must be positive");
  if (!(u_min <= u_max)) throw std::invalid_argument("control bounds are inverted");
}

Control open_loop(const Field2D& u) {
  if (u.placement() != Placement::kNode) throw std::invalid_argument("controls are node fields");
  return [u](NodeIndex n, double) { return u(n); };
}

Control perturbed(Control base, const Field2D& direction, double eps) {
  if (direction.placement() != Placement::kNode) {
    throw std::invalid_argument("directions are node fields");
  }
  return [base = std::move(base), direction, eps](NodeIndex n, double y) {
    return base(n, y) + eps * direction(n);
  };
}

BlowUpError::BlowUpError(int i, int j)
    : std::runtime_error("blow-up at node (" + std::to_string(i) + "," + std::to_string(j) + ")"),
      node_{i, j} {}

namespace {

double admissible(const ControlProblem& problem, double u, int i, int j) {
  if (!(u >= problem.u_min && u <= problem.u_max)) {
    throw std::domain_error("control outside admissible set at node (" + std::to_string(i) + "," +
                            std::to_string(j) + ")");
  }
  return u;
}

void check_grid(const ControlProblem& problem, const GridSpec& grid) {
  if (std::abs(grid.T() - problem.T) > 1e-12 * problem.T ||
      std::abs(grid.X() - problem.X) > 1e-12 * problem.X) {
    throw std::invalid_argument("grid horizons differ from the problem horizons");
  }
}

}  // namespace

PathSolution solve_forward(const ControlProblem& problem, const Control& u,
                           const SheetPath& sheet) {
  problem.validate();
  const GridSpec& g = sheet.grid();
  check_grid(problem, g);
  PathSolution sol{Field2D(g, Placement::kNode, problem.y0), Field2D(g, Placement::kNode)};
  Field2D& Y = sol.Y;
  const double dA = g.cell_area();
  for (int i = 0; i < g.n_t(); ++i) {
    for (int j = 0; j < g.n_x(); ++j) {
      const Point z = g.node(i, j);
      const double y = Y(i, j);
      const double uc = admissible(problem, u({i, j}, y), i, j);
      sol.u(i, j) = uc;
      const double next = Y(i + 1, j) + Y(i, j + 1) - y + problem.alpha(z, y, uc) * dA +
                          problem.beta(z, y, uc) * sheet.increment(i, j);
      if (!std::isfinite(next)) throw BlowUpError(i + 1, j + 1);
      Y(i + 1, j + 1) = next;
    }
  }
  for (int i = 0; i <= g.n_t(); ++i) sol.u(i, g.n_x()) = u({i, g.n_x()}, Y(i, g.n_x()));
  for (int j = 0; j < g.n_x(); ++j) sol.u(g.n_t(), j) = u({g.n_t(), j}, Y(g.n_t(), j));
  return sol;
}

PathSolution solve_forward(const ControlProblem& problem, const Field2D& u,
                           const SheetPath& sheet) {
  if (!u.grid().same_as(sheet.grid())) throw std::invalid_argument("control and sheet grids differ");
  return solve_forward(problem, open_loop(u), sheet);
}

Field2D solve_mean_volterra(const Field2D& lambda, double y0) {
  if (lambda.placement() != Placement::kNode) throw std::invalid_argument("lambda must be a node field");
  const GridSpec& g = lambda.grid();
  Field2D m(g, Placement::kNode, y0);
  const double dA = g.cell_area();
  for (int i = 0; i < g.n_t(); ++i) {
    for (int j = 0; j < g.n_x(); ++j) {
      const double next = m(i + 1, j) + m(i, j + 1) - m(i, j) + lambda(i, j) * m(i, j) * dA;
      if (!std::isfinite(next)) throw BlowUpError(i + 1, j + 1);
      m(i + 1, j + 1) = next;
    }
  }
  return m;
}

double path_J(const ControlProblem& problem, const PathSolution& solution) {
  const GridSpec& g = solution.Y.grid();
  double running = 0.0;
  for (int i = 0; i < g.n_t(); ++i) {
    for (int j = 0; j < g.n_x(); ++j) {
      running += problem.cost(g.node(i, j), solution.Y(i, j), solution.u(i, j));
    }
  }
  return running * g.cell_area() + problem.terminal(solution.Y(g.n_t(), g.n_x()));
}

std::vector<double> sample_J(const ControlProblem& problem, const GridSpec& grid, const Control& u,
                             int n_paths, SeedSpec seed) {
  if (n_paths < 1) throw std::invalid_argument("need at least one path");
  std::vector<double> out(n_paths);
  for (int k = 0; k < n_paths; ++k) {
    out[k] = path_J(problem, solve_forward(problem, u, sample_sheet(grid, seed, k)));
  }
  return out;
}

McEstimate estimate_J(const ControlProblem& problem, const GridSpec& grid, const Control& u,
                      int n_paths, SeedSpec seed) {
  if (n_paths < 2) throw std::invalid_argument("estimate needs at least two paths");
  const std::vector<double> values = sample_J(problem, grid, u, n_paths, seed);
  return summarize(values);
}

double deterministic_J(const ControlProblem& problem, const GridSpec& grid, const Control& u) {
  return path_J(problem, solve_forward(problem, u, zero_sheet(grid)));
}

NegativityEstimate negativity_experiment(double alpha0, double beta0, double y0,
                                         const GridSpec& grid, int n_paths, SeedSpec seed) {
  if (n_paths < 2) throw std::invalid_argument("estimate needs at least two paths");
  ControlProblem problem;
  problem.alpha = [alpha0](Point, double y, double) { return alpha0 * y; };
  problem.beta = [beta0](Point, double y, double) { return beta0 * y; };
  problem.cost = [](Point, double, double) { return 0.0; };
  problem.terminal = [](double) { return 0.0; };
  problem.T = grid.T();
  problem.X = grid.X();
  problem.y0 = y0;
  const Control none = [](NodeIndex, double) { return 0.0; };
  int negative = 0;
  for (int k = 0; k < n_paths; ++k) {
    const PathSolution sol = solve_forward(problem, none, sample_sheet(grid, seed, k));
    if (sol.Y.values().minCoeff() < 0.0) ++negative;
  }
  NegativityEstimate out;
  out.n_paths = n_paths;
  out.probability = static_cast<double>(negative) / n_paths;
  out.std_error = std::sqrt(out.probability * (1.0 - out.probability) / n_paths);
  return out;
}

void write_path_csv(std::ostream& out, const PathSolution& solution) {
  write_field_csv(out, solution.Y, "Y");
}

void write_mc_summary_csv(std::ostream& out, const std::vector<McSummaryRow>& rows) {
  out << "experiment,n_paths,mean,stderr,seed\n";
  for (const McSummaryRow& r : rows) {
    out << r.experiment << ',' << r.n_paths << ',' << csv_number(r.estimate.mean) << ','
        << csv_number(r.estimate.std_error) << ',' << r.seed << '\n';
  }
}

}  // namespace planecontrol
