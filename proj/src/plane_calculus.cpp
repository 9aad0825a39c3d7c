#include "planecontrol/plane_calculus.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace planecontrol {

McEstimate summarize(std::span<const double> values) {
  if (values.size() < 2) throw std::invalid_argument("estimate needs at least two samples");
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

CellRange align(const GridSpec& grid, const Rect& rect) {
  if (rect.t0 > rect.t1 || rect.x0 > rect.x1) {
    throw std::invalid_argument("rectangle corners out of order");
  }
  CellRange r;
  r.i0 = grid.time_index(rect.t0);
  r.i1 = grid.time_index(rect.t1);
  r.j0 = grid.space_index(rect.x0);
  r.j1 = grid.space_index(rect.x1);
  return r;
}

int incomparable_indicator(Point a, Point b) { return (a.t <= b.t && a.x >= b.x) ? 1 : 0; }

Point join(Point a, Point b) { return {std::max(a.t, b.t), std::max(a.x, b.x)}; }

bool Kernel2x2::in_support(const GridSpec& grid, int c, int c_prime) {
  if (c == c_prime) return false;
  const int i = c / grid.n_x();
  const int j = c % grid.n_x();
  const int ip = c_prime / grid.n_x();
  const int jp = c_prime % grid.n_x();
  return i <= ip && j >= jp;
}

Kernel2x2::Kernel2x2(const GridSpec& grid, Eigen::MatrixXd values)
    : grid_(grid), values_(std::move(values)) {
  const int n = grid.num_cells();
  if (values_.rows() != n || values_.cols() != n) {
    throw std::invalid_argument("kernel dimensions do not match grid");
  }
  for (int c = 0; c < n; ++c) {
    for (int cp = 0; cp < n; ++cp) {
      if (values_(c, cp) != 0.0 && !in_support(grid, c, cp)) {
        throw std::invalid_argument("kernel violates incomparability support");
      }
    }
  }
}

Kernel2x2 Kernel2x2::from_function(const GridSpec& grid,
                                   const std::function<double(Point, Point)>& psi) {
  const int n = grid.num_cells();
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(n, n);
  for (int c = 0; c < n; ++c) {
    const Point zc = grid.node(c / grid.n_x(), c % grid.n_x());
    for (int cp = 0; cp < n; ++cp) {
      if (in_support(grid, c, cp)) v(c, cp) = psi(zc, grid.node(cp / grid.n_x(), cp % grid.n_x()));
    }
  }
  return Kernel2x2(grid, std::move(v));
}

double lebesgue_integral_2d(const Field2D& field, const Rect& rect) {
  const CellRange r = align(field.grid(), rect);
  double sum = 0.0;
  for (int i = r.i0; i < r.i1; ++i) {
    for (int j = r.j0; j < r.j1; ++j) sum += field.cell_value(i, j);
  }
  return sum * field.grid().cell_area();
}

double ito_integral_first(const Field2D& integrand, const SheetPath& sheet, const Rect& rect) {
  if (!integrand.grid().same_as(sheet.grid())) {
    throw std::invalid_argument("integrand and sheet use different grids");
  }
  const CellRange r = align(sheet.grid(), rect);
  double sum = 0.0;
  for (int i = r.i0; i < r.i1; ++i) {
    for (int j = r.j0; j < r.j1; ++j) sum += integrand.cell_value(i, j) * sheet.increment(i, j);
  }
  return sum;
}

double ito_integral_second(const Kernel2x2& kernel, const SheetPath& sheet) {
  const GridSpec& g = sheet.grid();
  if (!kernel.grid().same_as(g)) throw std::invalid_argument("kernel and sheet use different grids");
  Eigen::VectorXd db(g.num_cells());
  for (int i = 0; i < g.n_t(); ++i) {
    for (int j = 0; j < g.n_x(); ++j) db(i * g.n_x() + j) = sheet.increment(i, j);
  }
  return db.dot(kernel.values() * db);
}

Field2D upper_time_integral(const Field2D& field, double horizon_t) {
  const GridSpec& g = field.grid();
  if (field.placement() != Placement::kNode) {
    throw std::invalid_argument("upper time integral expects a node field");
  }
  const int h = g.time_index(horizon_t);
  // col[i][j] = sum_{j' < j} F(i, j'); the result is a suffix sum of col in i.
  Field2D out(g, Placement::kNode);
  Eigen::VectorXd running = Eigen::VectorXd::Zero(g.n_x() + 1);
  for (int i = h - 1; i >= 0; --i) {
    double row = 0.0;
    for (int j = 1; j <= g.n_x(); ++j) {
      row += field(i, j - 1);
      running(j) += row;
    }
    for (int j = 0; j <= g.n_x(); ++j) out(i, j) = running(j) * g.cell_area();
  }
  return out;
}

Field2D star(const Field2D& h, const Field2D& k, double horizon_t) {
  require_compatible(h, k);
  const Field2D uh = upper_time_integral(h, horizon_t);
  const Field2D uk = upper_time_integral(k, horizon_t);
  Field2D out(h.grid(), Placement::kNode);
  out.values() = h.values().cwiseProduct(uk.values()) + k.values().cwiseProduct(uh.values());
  return out;
}

McEstimate ibp_second_moment_rhs(std::span<const Field2D> Y, std::span<const Field2D> alpha,
                                 std::span<const Field2D> beta, Point z) {
  if (Y.size() != alpha.size() || Y.size() != beta.size()) {
    throw std::invalid_argument("ensemble sizes differ");
  }
  if (Y.empty()) throw std::invalid_argument("empty ensemble");
  const Rect rect = Rect::origin_to(z);
  std::vector<double> samples(Y.size());
  for (std::size_t k = 0; k < Y.size(); ++k) {
    require_compatible(Y[k], alpha[k]);
    require_compatible(Y[k], beta[k]);
    Field2D integrand(Y[k].grid(), Placement::kNode);
    integrand.values() = 2.0 * Y[k].values().cwiseProduct(alpha[k].values()) +
                         beta[k].values().cwiseProduct(beta[k].values());
    const Field2D aa = star(alpha[k], alpha[k], z.t);
    samples[k] = Y[k](0, 0) * Y[k](0, 0) + lebesgue_integral_2d(integrand, rect) +
                 lebesgue_integral_2d(aa, rect);
  }
  if (samples.size() == 1) return {samples[0], 0.0};
  return summarize(samples);
}

}  // namespace planecontrol
