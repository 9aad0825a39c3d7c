#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace planecontrol {

/// A point z = (t, x) of the time-space plane.
struct Point {
  double t = 0.0;
  double x = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

/// Integer coordinates of a grid node: t_i = i*dt, x_j = j*dx.
struct NodeIndex {
  int i = 0;
  int j = 0;

  friend bool operator==(const NodeIndex&, const NodeIndex&) = default;
};

/// Uniform discretization of [0,T] x [0,X] into n_t x n_x cells.
class GridSpec {
 public:
  /// Throws std::invalid_argument unless T, X > 0 and n_t, n_x >= 1.
  GridSpec(double T, double X, int n_t, int n_x);

  double T() const { return T_; }
  double X() const { return X_; }
  int n_t() const { return n_t_; }
  int n_x() const { return n_x_; }
  double dt() const { return T_ / n_t_; }
  double dx() const { return X_ / n_x_; }
  double cell_area() const { return dt() * dx(); }
  int num_cells() const { return n_t_ * n_x_; }

  double t(int i) const;
  double x(int j) const;
  Point node(NodeIndex n) const { return {t(n.i), x(n.j)}; }
  Point node(int i, int j) const { return {t(i), x(j)}; }

  /// Index of the grid time equal to `t` (relative tolerance 1e-9 of dt).
  /// Throws std::invalid_argument("node not on grid") otherwise.
  int time_index(double t) const;
  int space_index(double x) const;
  NodeIndex locate(Point p) const { return {time_index(p.t), space_index(p.x)}; }

  bool same_as(const GridSpec& other) const;

 private:
  double T_;
  double X_;
  int n_t_;
  int n_x_;
};

/// Where the values of a Field2D live: on the (n_t+1) x (n_x+1) nodes, or on
/// the n_t x n_x cells (indexed by their lower-left node).
enum class Placement { kNode, kCell };

/// Real-valued function sampled on a grid.
class Field2D {
 public:
  Field2D(const GridSpec& grid, Placement placement, double fill = 0.0);
  Field2D(const GridSpec& grid, Placement placement, Eigen::MatrixXd values);

  static Field2D from_function(const GridSpec& grid, Placement placement,
                               const std::function<double(Point)>& f);
  static Field2D constant(const GridSpec& grid, double value) {
    return Field2D(grid, Placement::kNode, value);
  }

  const GridSpec& grid() const { return grid_; }
  Placement placement() const { return placement_; }
  int rows() const { return static_cast<int>(values_.rows()); }
  int cols() const { return static_cast<int>(values_.cols()); }

  double operator()(int i, int j) const { return values_(i, j); }
  double& operator()(int i, int j) { return values_(i, j); }
  double operator()(NodeIndex n) const { return values_(n.i, n.j); }
  double& operator()(NodeIndex n) { return values_(n.i, n.j); }

  /// Value used for cell (i, j): the cell value, or the lower-left node.
  double cell_value(int i, int j) const { return values_(i, j); }

  const Eigen::MatrixXd& values() const { return values_; }
  Eigen::MatrixXd& values() { return values_; }

  /// Largest |value| over all entries.
  double sup_norm() const { return values_.cwiseAbs().maxCoeff(); }

 private:
  GridSpec grid_;
  Placement placement_;
  Eigen::MatrixXd values_;
};

/// Throws std::invalid_argument when the fields do not share grid and placement.
void require_compatible(const Field2D& a, const Field2D& b);

/// Reproducible randomness: path k draws from a substream keyed by
/// (master_seed, k), so paths are independent of generation order.
struct SeedSpec {
  std::uint64_t master_seed = 0;
};

/// One Brownian-sheet realization on a grid.
class SheetPath {
 public:
  SheetPath(const GridSpec& grid, Eigen::MatrixXd cell_increments);

  const GridSpec& grid() const { return grid_; }
  /// dB over cell (i, j), i < n_t, j < n_x.
  double increment(int i, int j) const { return increments_(i, j); }
  /// B(t_i, x_j); zero on both axes.
  double value(int i, int j) const { return nodes_(i, j); }
  double value(NodeIndex n) const { return nodes_(n.i, n.j); }

  const Eigen::MatrixXd& cell_increments() const { return increments_; }
  const Eigen::MatrixXd& node_values() const { return nodes_; }

 private:
  GridSpec grid_;
  Eigen::MatrixXd increments_;
  Eigen::MatrixXd nodes_;
};

/// Samples path `path_index`: i.i.d. N(0, dt*dx) cell increments, node values
/// their cumulative 2D sums.
SheetPath sample_sheet(const GridSpec& grid, SeedSpec seed, std::uint64_t path_index);

/// A sheet with all increments zero (noise-free runs).
SheetPath zero_sheet(const GridSpec& grid);

struct CovarianceEstimate {
  double covariance = 0.0;
  double std_error = 0.0;
};

/// Sample covariance of B(a) and B(b) across paths, with its standard error.
/// Throws std::invalid_argument for off-grid points or fewer than 2 paths.
CovarianceEstimate empirical_covariance(std::span<const SheetPath> paths, Point a, Point b);

/// CSV dump with header `t,x,B`, row-major in t then x.
void write_sheet_csv(std::ostream& out, const SheetPath& path);

}  // namespace planecontrol
