#pragma once

#include <optional>
#include <string>
#include <vector>

#include "planecontrol/adjoint_bspde.hpp"
#include "planecontrol/forward_spde.hpp"
#include "planecontrol/grid.hpp"

namespace planecontrol {

// ---------------------------------------------------------------------------
// Linear-quadratic problem: dY = u dz + beta B(dz), J = -1/2 E[int u^2 + theta Y(T,X)^2].

struct LQSpec {
  double T = 0.5;
  double X = 1.0;
  double theta = 1.0;
  double beta = 0.0;
  double y0 = 1.0;

  /// Throws std::domain_error unless 0 < T < 1, X > 0 and theta > 0.
  void validate() const;
};

/// lambda(t,x) = 1 / ((1 - T + t)(1/theta + X - x)).
double lq_lambda_closed_form(const LQSpec& spec, double t, double x);

/// The same function written as phi1(T - t) phi2(X - x), phi1(s) = 1/(1 - s),
/// phi2(s) = 1/(1/theta + s).
double lq_lambda_separable(const LQSpec& spec, double t, double x);

/// Central mixed difference of lambda plus lambda^2 at (t, x).
double lq_riccati_residual(const LQSpec& spec, double t, double x, double h,
                           bool separable = false);

/// (1 - T)(1 + X theta) f(-log(1 - T) log(1 + X theta)).
double lq_condition_value(double T, double X, double theta);

/// X with lq_condition_value(T, X, theta) = 1, by bisection on an expanding
/// bracket; std::runtime_error when no bracket exists below X = 1e6.
double lq_find_X(double T, double theta, double tol = 1e-12);

/// Closed-form lambda sampled on the nodes of `grid`.
Field2D lq_lambda_field(const LQSpec& spec, const GridSpec& grid);

ControlProblem make_lq_problem(const LQSpec& spec);

/// Feedback u = sign * lambda(z) Y(z).
Control lq_feedback(const LQSpec& spec, const GridSpec& grid, double sign = 1.0);

struct LQReport {
  double lambda_00 = 0.0;
  double integral_lambda = 0.0;
  /// theta m(T,X) / y0 from the noise-free Volterra sweep.
  double boundary_deterministic = 0.0;
  /// theta f(integral of lambda), the continuum value of the same quantity.
  double boundary_series = 0.0;
  /// theta E[Y(T,X)] / y0 under u = lambda Y with noise.
  McEstimate boundary_noisy;
  McEstimate J_feedback;
  McEstimate J_negative_feedback;
  /// Constant control -theta y0 / (1 + theta T X), the best deterministic one.
  double open_loop_optimum = 0.0;
  McEstimate J_open_loop_optimum;
};

LQReport lq_solve_and_verify(const LQSpec& spec, const GridSpec& grid, int n_paths, SeedSpec seed);

// ---------------------------------------------------------------------------
// Harvesting: dY = (alpha0 Y - u) dz + beta0 Y B(dz), J = E[int ln(u^2) + theta Y(T,X)].

struct HarvestSpec {
  double alpha0 = 0.0;
  double beta0 = 0.0;
  double theta = 1.0;
  double T = 1.0;
  double X = 1.0;
  double y0 = 1.0;

  void validate() const;
};

ControlProblem make_harvest_problem(const HarvestSpec& spec);

struct HarvestSolution {
  Field2D u_star;
  AdjointSolution adjoint;
  /// (L*1)(z) = x (T - t) L(z) + int_0^x int_t^T L.
  Field2D L_star_one;
};

/// Solves the deterministic adjoint and forms u* = 2 / (p + (L*1)). Throws
/// std::domain_error naming the node where p + (L*1) vanishes.
HarvestSolution harvest_solve(const HarvestSpec& spec, const GridSpec& grid, double tol = 1e-9);

// ---------------------------------------------------------------------------
// Learning-rate problem: dY = -u Y dz + beta0 B(dz), J = -E[int u^2 + theta Y(T,X)^2].

struct MLSpec {
  double beta0 = 0.0;
  double theta = 1.0;
  double T = 1.0;
  double X = 1.0;
  double y0 = 1.0;
  double gamma = 0.5;
  int max_sweeps = 200;
  double tol = 1e-6;

  void validate() const;
};

ControlProblem make_ml_problem(const MLSpec& spec);

struct MLResult {
  Field2D Y;
  Field2D p;
  Field2D L;
  Field2D u;
  int sweeps = 0;
  /// sup |u_{k+1} - u_k| over control nodes for every applied update.
  std::vector<double> update_history;
  double last_update = 0.0;
  /// Residuals at the returned iterate, over control nodes for u.
  double u_residual = 0.0;
  double p_residual = 0.0;
  double L_residual = 0.0;
};

/// u* = -1/2 (Y p + (L*Y)), the zero of the Hamiltonian's u-derivative.
Field2D ml_control_target(const Field2D& Y, const Field2D& p, const Field2D& L, double horizon_t);

/// Damped forward-backward sweep. Without a sheet the state is noise free.
/// Stops when the control residual on nodes with t < T and x < X drops below
/// spec.tol; ConvergenceError with the update history otherwise.
MLResult ml_forward_backward_sweep(const MLSpec& spec, const GridSpec& grid,
                                   const SheetPath* sheet = nullptr);

// ---------------------------------------------------------------------------
// First-order optimality probes.

struct PerturbationConfig {
  std::vector<double> epsilons{0.1, -0.1, 0.5, -0.5};
  int n_paths = 10000;
  SeedSpec seed{};
  /// Evaluate once on the zero sheet (standard errors are then zero).
  bool deterministic = false;
  /// Step of the central difference for dJ/d eps at 0.
  double derivative_step = 1e-4;
};

struct PerturbationCell {
  std::size_t direction = 0;
  double eps = 0.0;
  McEstimate J;
  /// J(perturbed) - J(base), paired over common paths.
  McEstimate gain;
};

struct PerturbationTable {
  McEstimate base;
  std::vector<std::string> direction_names;
  std::vector<PerturbationCell> cells;
  /// Central-difference dJ/d eps at 0, one per direction.
  std::vector<McEstimate> derivatives;
};

PerturbationTable perturbation_dominance(const ControlProblem& problem, const GridSpec& grid,
                                         const Control& u_hat,
                                         const std::vector<Field2D>& directions,
                                         const std::vector<std::string>& names,
                                         const PerturbationConfig& config);

}  // namespace planecontrol
