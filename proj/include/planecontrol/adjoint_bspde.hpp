#pragma once

#include <iosfwd>
#include <stdexcept>
#include <vector>

#include "planecontrol/forward_spde.hpp"
#include "planecontrol/grid.hpp"

namespace planecontrol {

/// Raised when an iterative solve stops before reaching its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double last_residual, std::vector<double> history = {});
  double last_residual() const { return last_residual_; }
  const std::vector<double>& history() const { return history_; }

 private:
  double last_residual_;
  std::vector<double> history_;
};

/// (h*k) at a single node, same quadrature as star().
double star_at(const Field2D& h, const Field2D& k, double horizon_t, NodeIndex z);

/// Everything the Hamiltonian needs at one node z.
struct HamiltonianArgs {
  NodeIndex z;
  double y = 0.0;
  double u = 0.0;
  double p = 0.0;
  double q = 0.0;
  const Field2D* L = nullptr;
  /// Solved state field; required when the problem uses StarCoupling::kStateField.
  const Field2D* state = nullptr;
  double horizon_t = 0.0;
};

/// H = f + p alpha + q beta + (L * A)(z), where A(zeta') = alpha(zeta', y', u)
/// and y' is y (frozen) or the state field at zeta'.
double hamiltonian_eval(const ControlProblem& problem, const HamiltonianArgs& args);

/// dH/du = f_u + p alpha_u + q beta_u + (L * A_u)(z), the star term carrying
/// the control at z only. Throws std::domain_error("singular derivative") on
/// a non-finite result.
double dH_du(const ControlProblem& problem, const HamiltonianArgs& args);

struct LSolve {
  Field2D L;
  int iterations = 0;
  double residual = 0.0;
};

/// Picard iteration for L = source + star(L, weight) from L = 0, stopping on
/// a sup-norm update below `tol`; ConvergenceError after `max_iter`.
LSolve solve_L(const Field2D& source, const Field2D& weight, double horizon_t, double tol = 1e-10,
               int max_iter = 500, const Field2D* initial = nullptr);

/// L = -[alpha0 p + beta0 q + alpha0 (L * 1)] for constant linear drift.
LSolve solve_L_fixed_point(const Field2D& p, const Field2D& q, double alpha0, double beta0,
                           double horizon_t, double tol = 1e-10, int max_iter = 500);

/// G(z) = sum over cells outside R_z of g(upper-right corner) dt dx.
Field2D backward_region_integral(const Field2D& g);

struct AdjointSolution {
  Field2D p;
  Field2D q;
  Field2D L;
  int picard_iterations = 0;
  double final_residual = 0.0;
};

/// Deterministic adjoint for a state-linear drift with y-derivative `a`
/// (node field) and q = r = 0:
///   L = -a p + star(L, -a),   p(z) = xi - int_{R_Z \ R_z} L,
/// i.e. p(z) = xi + int_{R_Z \ R_z} (a p + (L * a)). Alternates the two
/// equations until both residuals fall below `tol`.
AdjointSolution solve_adjoint_linear(const Field2D& a, double xi, double horizon_t,
                                     double tol = 1e-9, int max_sweeps = 500,
                                     const AdjointSolution* initial = nullptr);

/// Constant-coefficient case alpha = alpha0 y + ..., terminal derivative theta.
AdjointSolution solve_adjoint_deterministic(const GridSpec& grid, double alpha0, double beta0,
                                            double terminal_value, double tol = 1e-9);

/// Sup-norm residuals of the two adjoint equations for a given (p, L).
struct AdjointResiduals {
  double p_equation = 0.0;
  double L_equation = 0.0;
};
AdjointResiduals adjoint_residuals(const Field2D& a, double xi, double horizon_t,
                                   const Field2D& p, const Field2D& L);

/// K1 |z0| < sqrt(r0) and K2 |z0| < sqrt(r0), with |z0| the area t0 x0.
bool zaidi_nualart_radius(double K1, double K2, Point z0);

/// `t,x,p,q,L` rows.
void write_adjoint_csv(std::ostream& out, const AdjointSolution& solution);

}  // namespace planecontrol
