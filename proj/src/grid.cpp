#include "planecontrol/grid.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>

#include "planecontrol/csv.hpp"

namespace planecontrol {

namespace {

int snap_index(double value, double step, int n) {
  const double r = value / step;
  const double k = std::round(r);
  if (!std::isfinite(r) || std::abs(r - k) > 1e-9 * std::max(1.0, std::abs(k)) || k < 0 ||
      k > n) {
    throw std::invalid_argument("node not on grid");
  }
  return static_cast<int>(k);
}

}  // namespace

GridSpec::GridSpec(double T, double X, int n_t, int n_x) : T_(T), X_(X), n_t_(n_t), n_x_(n_x) {
  if (!(T > 0.0) || !(X > 0.0) || !std::isfinite(T) || !std::isfinite(X)) {
    throw std::invalid_argument("grid horizons must be positive and finite");
  }
  if (n_t < 1 || n_x < 1) {
    throw std::invalid_argument("grid needs at least one cell in each direction");
  }
}

double GridSpec::t(int i) const {
  if (i < 0 || i > n_t_) throw std::out_of_range("time index outside grid");
  return i == n_t_ ? T_ : i * dt();
}

double GridSpec::x(int j) const {
  if (j < 0 || j > n_x_) throw std::out_of_range("space index outside grid");
  return j == n_x_ ? X_ : j * dx();
}

int GridSpec::time_index(double t) const { return snap_index(t, dt(), n_t_); }

int GridSpec::space_index(double x) const { return snap_index(x, dx(), n_x_); }

bool GridSpec::same_as(const GridSpec& other) const {
  return T_ == other.T_ && X_ == other.X_ && n_t_ == other.n_t_ && n_x_ == other.n_x_;
}

Field2D::Field2D(const GridSpec& grid, Placement placement, double fill)
    : grid_(grid), placement_(placement) {
  const int extra = placement == Placement::kNode ? 1 : 0;
  values_ = Eigen::MatrixXd::Constant(grid.n_t() + extra, grid.n_x() + extra, fill);
}

Field2D::Field2D(const GridSpec& grid, Placement placement, Eigen::MatrixXd values)
    : grid_(grid), placement_(placement), values_(std::move(values)) {
  const int extra = placement == Placement::kNode ? 1 : 0;
  if (values_.rows() != grid.n_t() + extra || values_.cols() != grid.n_x() + extra) {
    throw std::invalid_argument("field dimensions do not match grid and placement");
  }
}

Field2D Field2D::from_function(const GridSpec& grid, Placement placement,
                               const std::function<double(Point)>& f) {
  Field2D out(grid, placement);
  for (int i = 0; i < out.rows(); ++i) {
    for (int j = 0; j < out.cols(); ++j) out(i, j) = f(grid.node(i, j));
  }
  return out;
}

void require_compatible(const Field2D& a, const Field2D& b) {
  if (!a.grid().same_as(b.grid()) || a.placement() != b.placement()) {
    throw std::invalid_argument("fields live on different grids or placements");
  }
}

SheetPath::SheetPath(const GridSpec& grid, Eigen::MatrixXd cell_increments)
    : grid_(grid), increments_(std::move(cell_increments)) {
  if (increments_.rows() != grid.n_t() || increments_.cols() != grid.n_x()) {
    throw std::invalid_argument("increment matrix does not match grid");
  }
  nodes_ = Eigen::MatrixXd::Zero(grid.n_t() + 1, grid.n_x() + 1);
  for (int i = 0; i < grid.n_t(); ++i) {
    for (int j = 0; j < grid.n_x(); ++j) {
      nodes_(i + 1, j + 1) = nodes_(i + 1, j) + nodes_(i, j + 1) - nodes_(i, j) + increments_(i, j);
    }
  }
}

SheetPath sample_sheet(const GridSpec& grid, SeedSpec seed, std::uint64_t path_index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed.master_seed),
                    static_cast<std::uint32_t>(seed.master_seed >> 32),
                    static_cast<std::uint32_t>(path_index),
                    static_cast<std::uint32_t>(path_index >> 32)};
  std::mt19937_64 engine(seq);
  std::normal_distribution<double> normal(0.0, std::sqrt(grid.cell_area()));
  Eigen::MatrixXd inc(grid.n_t(), grid.n_x());
  for (int i = 0; i < grid.n_t(); ++i) {
    for (int j = 0; j < grid.n_x(); ++j) inc(i, j) = normal(engine);
  }
  return SheetPath(grid, std::move(inc));
}

SheetPath zero_sheet(const GridSpec& grid) {
  return SheetPath(grid, Eigen::MatrixXd::Zero(grid.n_t(), grid.n_x()));
}

CovarianceEstimate empirical_covariance(std::span<const SheetPath> paths, Point a, Point b) {
  if (paths.size() < 2) throw std::invalid_argument("covariance needs at least two paths");
  const GridSpec& grid = paths.front().grid();
  const NodeIndex na = grid.locate(a);
  const NodeIndex nb = grid.locate(b);
  const double n = static_cast<double>(paths.size());
  double mean_a = 0.0;
  double mean_b = 0.0;
  for (const SheetPath& p : paths) {
    if (!p.grid().same_as(grid)) throw std::invalid_argument("paths use different grids");
    mean_a += p.value(na);
    mean_b += p.value(nb);
  }
  mean_a /= n;
  mean_b /= n;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (const SheetPath& p : paths) {
    const double prod = (p.value(na) - mean_a) * (p.value(nb) - mean_b);
    sum += prod;
    sum_sq += prod * prod;
  }
  CovarianceEstimate out;
  out.covariance = sum / (n - 1.0);
  const double mean_prod = sum / n;
  const double var_prod = std::max(0.0, (sum_sq / n - mean_prod * mean_prod) * n / (n - 1.0));
  out.std_error = std::sqrt(var_prod / n);
  return out;
}

void write_sheet_csv(std::ostream& out, const SheetPath& path) {
  const GridSpec& g = path.grid();
  out << "t,x,B\n";
  for (int i = 0; i <= g.n_t(); ++i) {
    for (int j = 0; j <= g.n_x(); ++j) {
      out << csv_number(g.t(i)) << ',' << csv_number(g.x(j)) << ',' << csv_number(path.value(i, j))
          << '\n';
    }
  }
}

}  // namespace planecontrol
