#pragma once

#include <functional>
#include <span>

#include <Eigen/Dense>

#include "planecontrol/grid.hpp"

namespace planecontrol {

/// Monte Carlo mean with its standard error.
struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
};

/// Sample mean and standard error of `values` (needs at least two entries).
McEstimate summarize(std::span<const double> values);

/// Closed rectangle [t0,t1] x [x0,x1] whose corners are grid nodes.
struct Rect {
  double t0 = 0.0;
  double x0 = 0.0;
  double t1 = 0.0;
  double x1 = 0.0;

  /// R_z = [0,t] x [0,x].
  static Rect origin_to(Point z) { return {0.0, 0.0, z.t, z.x}; }
};

/// Cell index range [i0,i1) x [j0,j1) covered by a rectangle.
struct CellRange {
  int i0 = 0;
  int j0 = 0;
  int i1 = 0;
  int j1 = 0;
};

/// Throws std::invalid_argument when the corners are off-grid or out of order.
CellRange align(const GridSpec& grid, const Rect& rect);

/// 1 iff a.t <= b.t and a.x >= b.x.
int incomparable_indicator(Point a, Point b);

/// Componentwise maximum.
Point join(Point a, Point b);

/// Kernel psi(c, c') over ordered pairs of grid cells, cell c = (i, j) stored
/// at flat index i * n_x + j. Entries must vanish unless the lower-left corner
/// of c is incomparable to that of c'. The diagonal c = c' carries no mass.
class Kernel2x2 {
 public:
  /// Throws std::invalid_argument("kernel violates incomparability support")
  /// when an off-support entry is nonzero.
  Kernel2x2(const GridSpec& grid, Eigen::MatrixXd values);

  /// Samples psi at cell corners; entries outside the support are set to 0.
  static Kernel2x2 from_function(const GridSpec& grid,
                                 const std::function<double(Point, Point)>& psi);

  static bool in_support(const GridSpec& grid, int c, int c_prime);

  const GridSpec& grid() const { return grid_; }
  const Eigen::MatrixXd& values() const { return values_; }

 private:
  GridSpec grid_;
  Eigen::MatrixXd values_;
};

/// Rectangle-rule integral using the lower-left value of every cell.
double lebesgue_integral_2d(const Field2D& field, const Rect& rect);

/// Sum over cells in `rect` of integrand(lower-left) * dB(cell).
double ito_integral_first(const Field2D& integrand, const SheetPath& sheet, const Rect& rect);

/// Sum over ordered incomparable cell pairs of psi(c, c') dB_c dB_c'.
double ito_integral_second(const Kernel2x2& kernel, const SheetPath& sheet);

/// U(F)(t_i, x_j) = sum over cells with t_i <= s < horizon, a < x_j of
/// F(lower-left) * dt * dx. Rows at or beyond the horizon are zero.
Field2D upper_time_integral(const Field2D& field, double horizon_t);

/// (h*k)(t,x) = h(t,x) U(k)(t,x) + k(t,x) U(h)(t,x) with horizon `horizon_t`.
Field2D star(const Field2D& h, const Field2D& k, double horizon_t);

/// Right-hand side of the second-moment identity for one state:
/// Y(0)^2 + E[int_{R_z} (2 Y alpha + beta^2)] + E[int_{R_z} (alpha*alpha)],
/// the star horizon being the time coordinate of z. Ensembles are aligned
/// path by path.
McEstimate ibp_second_moment_rhs(std::span<const Field2D> Y, std::span<const Field2D> alpha,
                                 std::span<const Field2D> beta, Point z);

}  // namespace planecontrol
