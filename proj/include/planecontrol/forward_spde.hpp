#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "planecontrol/grid.hpp"
#include "planecontrol/plane_calculus.hpp"

namespace planecontrol {

/// How the star term of the Hamiltonian sees the state away from z: either
/// the value y at z is held fixed over the whole integration region, or the
/// solved state field Y(zeta') is used there.
enum class StarCoupling { kFrozenState, kStateField };

/// Controlled hyperbolic SPDE
///   Y(z) = y0 + int_{R_z} alpha(zeta, Y, u) dzeta + int_{R_z} beta(zeta, Y, u) B(dzeta)
/// with performance E[int cost(zeta, Y, u) dzeta + terminal(Y(T, X))].
/// The partial-derivative callbacks are optional for forward simulation and
/// required by the Hamiltonian machinery.
struct ControlProblem {
  using Coefficient = std::function<double(Point, double y, double u)>;
  using Terminal = std::function<double(double y)>;

  Coefficient alpha;
  Coefficient beta;
  Coefficient cost;
  Terminal terminal;
  double T = 1.0;
  double X = 1.0;
  double y0 = 0.0;
  double u_min = -std::numeric_limits<double>::infinity();
  double u_max = std::numeric_limits<double>::infinity();

  Coefficient alpha_y;
  Coefficient alpha_u;
  Coefficient beta_y;
  Coefficient beta_u;
  Coefficient cost_y;
  Coefficient cost_u;
  Terminal terminal_y;
  StarCoupling star_coupling = StarCoupling::kFrozenState;

  /// Throws std::invalid_argument for missing coefficients or bad horizons.
  void validate() const;
};

/// Control evaluated at a node from the state there (predictable feedback).
/// Open-loop controls ignore the state.
using Control = std::function<double(NodeIndex, double y)>;

/// Wraps a node field as an open-loop control.
Control open_loop(const Field2D& u);

/// base(n, y) + eps * direction(n).
Control perturbed(Control base, const Field2D& direction, double eps);

struct PathSolution {
  Field2D Y;
  /// Control values actually applied (evaluated at every node after the sweep).
  Field2D u;
};

/// Raised when the forward scheme produces a non-finite value.
class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(int i, int j);
  NodeIndex node() const { return node_; }

 private:
  NodeIndex node_;
};

/// Explicit lower-left Euler sweep in increasing (i, j):
///   Y(i+1,j+1) = Y(i+1,j) + Y(i,j+1) - Y(i,j) + alpha dt dx + beta dB(i,j)
/// with coefficients and the control taken at node (i, j).
PathSolution solve_forward(const ControlProblem& problem, const Control& u, const SheetPath& sheet);
PathSolution solve_forward(const ControlProblem& problem, const Field2D& u, const SheetPath& sheet);

/// Deterministic 2D Volterra equation m = y0 + int_{R_z} lambda m, same sweep.
Field2D solve_mean_volterra(const Field2D& lambda, double y0);

/// Realized performance of one path: sum of cost at lower-left nodes times
/// dt dx plus terminal(Y(T, X)).
double path_J(const ControlProblem& problem, const PathSolution& solution);

/// Per-path performance values for paths 0..n_paths-1 of `seed`.
std::vector<double> sample_J(const ControlProblem& problem, const GridSpec& grid, const Control& u,
                             int n_paths, SeedSpec seed);

/// Monte Carlo estimate of the performance from the origin.
McEstimate estimate_J(const ControlProblem& problem, const GridSpec& grid, const Control& u,
                      int n_paths, SeedSpec seed);

/// Noise-free performance (sheet identically zero).
double deterministic_J(const ControlProblem& problem, const GridSpec& grid, const Control& u);

struct NegativityEstimate {
  double probability = 0.0;
  double std_error = 0.0;
  int n_paths = 0;
};

/// Fraction of paths of Y = y0 + int alpha0 Y + int beta0 Y dB whose minimum
/// node value is negative, with its binomial standard error.
NegativityEstimate negativity_experiment(double alpha0, double beta0, double y0,
                                         const GridSpec& grid, int n_paths, SeedSpec seed);

/// `t,x,Y` rows of a path solution.
void write_path_csv(std::ostream& out, const PathSolution& solution);

struct McSummaryRow {
  std::string experiment;
  int n_paths = 0;
  McEstimate estimate;
  std::uint64_t seed = 0;
};

/// `experiment,n_paths,mean,stderr,seed` table.
void write_mc_summary_csv(std::ostream& out, const std::vector<McSummaryRow>& rows);

}  // namespace planecontrol
