#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "planecontrol/grid.hpp"

using namespace planecontrol;

namespace {

std::vector<SheetPath> ensemble(const GridSpec& g, int n, std::uint64_t seed) {
  std::vector<SheetPath> out;
  out.reserve(n);
  for (int k = 0; k < n; ++k) out.push_back(sample_sheet(g, {seed}, k));
  return out;
}

}  // namespace

TEST_CASE("grid steps reproduce the horizons") {
  const GridSpec g(0.7, 1.3, 17, 23);
  CHECK(std::abs(g.dt() * g.n_t() - g.T()) <= 1e-12 * g.T());
  CHECK(std::abs(g.dx() * g.n_x() - g.X()) <= 1e-12 * g.X());
  for (int i = 0; i < g.n_t(); ++i) CHECK(g.t(i) < g.t(i + 1));
  for (int j = 0; j < g.n_x(); ++j) CHECK(g.x(j) < g.x(j + 1));
  CHECK(g.t(g.n_t()) == g.T());
  CHECK(g.x(g.n_x()) == g.X());
}

TEST_CASE("invalid grids are rejected") {
  CHECK_THROWS_AS(GridSpec(1.0, 1.0, 0, 4), std::invalid_argument);
  CHECK_THROWS_AS(GridSpec(1.0, 1.0, 4, 0), std::invalid_argument);
  CHECK_THROWS_AS(GridSpec(0.0, 1.0, 4, 4), std::invalid_argument);
  CHECK_THROWS_AS(GridSpec(1.0, -1.0, 4, 4), std::invalid_argument);
}

TEST_CASE("node lookup accepts grid points only") {
  const GridSpec g(1.0, 1.0, 4, 8);
  CHECK(g.locate({0.5, 0.375}) == NodeIndex{2, 3});
  CHECK_THROWS_WITH_AS(g.locate({0.3, 0.5}), "node not on grid", std::invalid_argument);
  CHECK_THROWS_AS(g.locate({1.25, 0.5}), std::invalid_argument);
}

TEST_CASE("field dimensions follow the placement tag") {
  const GridSpec g(1.0, 2.0, 3, 5);
  const Field2D nodes(g, Placement::kNode);
  const Field2D cells(g, Placement::kCell);
  CHECK(nodes.rows() == 4);
  CHECK(nodes.cols() == 6);
  CHECK(cells.rows() == 3);
  CHECK(cells.cols() == 5);
  CHECK_THROWS_AS(Field2D(g, Placement::kNode, Eigen::MatrixXd::Zero(3, 5)),
                  std::invalid_argument);
  const Field2D f = Field2D::from_function(g, Placement::kNode, [](Point z) { return z.t + 10 * z.x; });
  CHECK(f(2, 3) == doctest::Approx(g.t(2) + 10 * g.x(3)));
}

TEST_CASE("sheet vanishes on both axes and satisfies the rectangle identity") {
  const GridSpec g(1.0, 2.0, 7, 9);
  const SheetPath p = sample_sheet(g, {42}, 3);
  for (int j = 0; j <= g.n_x(); ++j) CHECK(p.value(0, j) == 0.0);
  for (int i = 0; i <= g.n_t(); ++i) CHECK(p.value(i, 0) == 0.0);
  double worst = 0.0;
  for (int i1 = 0; i1 <= g.n_t(); ++i1) {
    for (int i2 = i1; i2 <= g.n_t(); ++i2) {
      for (int j1 = 0; j1 <= g.n_x(); ++j1) {
        for (int j2 = j1; j2 <= g.n_x(); ++j2) {
          double s = 0.0;
          for (int i = i1; i < i2; ++i) {
            for (int j = j1; j < j2; ++j) s += p.increment(i, j);
          }
          const double lhs = p.value(i2, j2) - p.value(i1, j2) - p.value(i2, j1) + p.value(i1, j1);
          worst = std::max(worst, std::abs(lhs - s));
        }
      }
    }
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("substreams are reproducible and independent of generation order") {
  const GridSpec g(1.0, 1.0, 5, 5);
  const SheetPath a3 = sample_sheet(g, {7}, 3);
  const SheetPath a5 = sample_sheet(g, {7}, 5);
  const SheetPath b5 = sample_sheet(g, {7}, 5);
  const SheetPath b3 = sample_sheet(g, {7}, 3);
  CHECK(a3.cell_increments() == b3.cell_increments());
  CHECK(a5.cell_increments() == b5.cell_increments());
  CHECK(a3.cell_increments() != a5.cell_increments());
  CHECK(sample_sheet(g, {8}, 3).cell_increments() != a3.cell_increments());
  // Seeds differing only in the high word must give different streams.
  CHECK(sample_sheet(g, {7ull | (1ull << 40)}, 3).cell_increments() != a3.cell_increments());
}

TEST_CASE("single-cell sheet has unit variance at the far corner") {
  const GridSpec g(1.0, 1.0, 1, 1);
  const auto paths = ensemble(g, 10000, 11);
  const CovarianceEstimate c = empirical_covariance(paths, {1, 1}, {1, 1});
  CHECK(std::abs(c.covariance - 1.0) <= 5.0 * c.std_error);
}

TEST_CASE("empirical covariance matches min(s,t) min(a,x)") {
  const GridSpec g(1.0, 1.0, 4, 4);
  const auto paths = ensemble(g, 10000, 2024);
  struct Case {
    Point a, b;
    double expect;
  };
  for (const Case& c : {Case{{1, 1}, {1, 1}, 1.0}, Case{{0.5, 1}, {1, 1}, 0.5},
                        Case{{0.5, 0.5}, {0.25, 1}, 0.125}}) {
    const CovarianceEstimate e = empirical_covariance(paths, c.a, c.b);
    CHECK(std::abs(e.covariance - c.expect) <= 5.0 * e.std_error);
  }
}

TEST_CASE("node variances and disjoint-cell correlations") {
  const GridSpec g(1.0, 1.0, 4, 4);
  const int N = 10000;
  const auto paths = ensemble(g, N, 99);
  for (int i = 1; i <= g.n_t(); ++i) {
    for (int j = 1; j <= g.n_x(); ++j) {
      const Point z = g.node(i, j);
      const double var = z.t * z.x;
      const CovarianceEstimate e = empirical_covariance(paths, z, z);
      CHECK(std::abs(e.covariance - var) <= 5.0 * std::sqrt(2.0 / N) * var);
    }
  }
  // Correlation between increments of cells (0,0) and (2,3).
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (const SheetPath& p : paths) {
    const double x = p.increment(0, 0);
    const double y = p.increment(2, 3);
    sxy += x * y;
    sxx += x * x;
    syy += y * y;
  }
  CHECK(std::abs(sxy / std::sqrt(sxx * syy)) <= 5.0 / std::sqrt(N));
}

TEST_CASE("covariance input validation") {
  const GridSpec g(1.0, 1.0, 4, 4);
  const auto paths = ensemble(g, 3, 1);
  CHECK_THROWS_WITH_AS(empirical_covariance(paths, {0.3, 1}, {1, 1}), "node not on grid",
                       std::invalid_argument);
  CHECK_THROWS_AS(empirical_covariance(std::span<const SheetPath>(paths).first(1), {1, 1}, {1, 1}),
                  std::invalid_argument);
}

TEST_CASE("sheet csv lists every node") {
  const GridSpec g(1.0, 1.0, 2, 3);
  std::ostringstream out;
  write_sheet_csv(out, sample_sheet(g, {1}, 0));
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,x,B");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 3 * 4);
}
