#include "planecontrol/series_special.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "planecontrol/csv.hpp"

namespace planecontrol {

namespace {

constexpr double kSeriesGuard = 700.0;
constexpr int kMaxSeriesTerms = 400;

SeriesEval bessel_type_series(double y) {
  SeriesEval out;
  double term = 1.0;
  double partial = 0.0;
  for (int n = 0; n < kMaxSeriesTerms; ++n) {
    partial += term;
    const double next = term * y / ((n + 1.0) * (n + 1.0));
    out.terms_used = n + 1;
    out.truncation_bound = std::abs(next);
    if (std::abs(next) < 1e-16 * std::abs(partial) || next == 0.0) break;
    term = next;
  }
  out.value = partial;
  return out;
}

}  // namespace

SeriesEval series_f(double y) {
  if (!(std::abs(y) <= kSeriesGuard)) throw std::range_error("series argument beyond |y| <= 700");
  return bessel_type_series(y);
}

SeriesEval series_f0(double t) {
  if (!(t >= 0.0)) throw std::domain_error("f0 needs a nonnegative argument");
  if (t > kSeriesGuard) throw std::range_error("series argument beyond |y| <= 700");
  return bessel_type_series(-t);
}

RootBracket bracket_r0(double abs_tol) {
  RootBracket b{1.0, 2.0};
  double f_lo = series_f0(b.lo).value;
  while (b.hi - b.lo > abs_tol) {
    const double mid = 0.5 * (b.lo + b.hi);
    const double f_mid = series_f0(mid).value;
    if (f_mid == 0.0) return {mid, mid};
    if ((f_mid > 0.0) == (f_lo > 0.0)) {
      b.lo = mid;
      f_lo = f_mid;
    } else {
      b.hi = mid;
    }
  }
  return b;
}

double find_r0() { return bracket_r0().root(); }

double f0_asymptotic(double y) {
  if (!(y <= -10.0)) throw std::domain_error("asymptotic form needs y <= -10");
  const double r = std::sqrt(-y);
  return std::cos(2.0 * r - std::numbers::pi / 4.0) / std::sqrt(std::numbers::pi * r);
}

double hermite_poly(int n, double x) {
  if (n < 0 || n > 200) throw std::out_of_range("Hermite degree must lie in [0, 200]");
  if (n == 0) return 1.0;
  double prev = 1.0;
  double cur = x;
  for (int k = 1; k < n; ++k) {
    const double next = x * cur - k * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

double hermite_function(int n, double x) {
  if (n < 1 || n > 50) throw std::out_of_range("Hermite function index must lie in [1, 50]");
  // psi_k has polynomial degree k; xi_n = psi_{n-1}.
  double prev = 0.0;
  double cur = std::exp(-0.5 * x * x) / std::sqrt(std::sqrt(std::numbers::pi));
  for (int k = 0; k < n - 1; ++k) {
    const double next = std::sqrt(2.0 / (k + 1.0)) * x * cur - std::sqrt(k / (k + 1.0)) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

double mu1(double s, double a) { return hermite_function(1, s) * hermite_function(1, a); }

double hermite_function1_integral(double a, double b) {
  const double scale = std::sqrt(std::sqrt(std::numbers::pi)) / std::numbers::sqrt2;
  return scale * (std::erf(b / std::numbers::sqrt2) - std::erf(a / std::numbers::sqrt2));
}

double eta(const Rect& rect, const Field2D& beta0) {
  const GridSpec& g = beta0.grid();
  const CellRange r = align(g, rect);
  std::vector<double> wx(g.n_x());
  for (int j = r.j0; j < r.j1; ++j) wx[j] = hermite_function1_integral(g.x(j), g.x(j + 1));
  double sum = 0.0;
  for (int i = r.i0; i < r.i1; ++i) {
    const double wt = hermite_function1_integral(g.t(i), g.t(i + 1));
    for (int j = r.j0; j < r.j1; ++j) sum += beta0.cell_value(i, j) * wt * wx[j];
  }
  return sum;
}

double b_function(double u1, double eta, double y0) {
  double coef = 1.0;  // eta^n / (n!)^2
  double h_prev = 0.0;
  double h_cur = 1.0;
  double sum = 0.0;
  double running_max = 0.0;
  int small_in_a_row = 0;
  for (int n = 0; n <= 150; ++n) {
    const double term = ((n % 2 == 0) ? 1.0 : -1.0) * coef * h_cur;
    if (!std::isfinite(term) || std::abs(term) > 1e12) {
      throw std::runtime_error("series truncation unreliable");
    }
    sum += term;
    running_max = std::max(running_max, std::abs(term));
    small_in_a_row = std::abs(term) < 1e-14 * running_max ? small_in_a_row + 1 : 0;
    if (small_in_a_row == 2) return y0 * sum;
    const double h_next = u1 * h_cur - n * h_prev;
    h_prev = h_cur;
    h_cur = h_next;
    coef *= eta / ((n + 1.0) * (n + 1.0));
  }
  throw std::runtime_error("series truncation unreliable");
}

PositivityProbe positivity_probe(double eta_value, double y0, double u_min, double u_max,
                                 int n_points) {
  if (n_points < 2) throw std::invalid_argument("probe needs at least two points");
  if (!(u_max > u_min)) throw std::invalid_argument("probe window is empty");
  PositivityProbe probe;
  probe.eta = eta_value;
  probe.y0 = y0;
  probe.u_grid.resize(n_points);
  probe.b_values.resize(n_points);
  for (int k = 0; k < n_points; ++k) {
    probe.u_grid[k] = u_min + k * (u_max - u_min) / n_points;
    probe.b_values[k] = b_function(probe.u_grid[k], eta_value, y0);
  }
  const auto it = std::min_element(probe.b_values.begin(), probe.b_values.end());
  probe.min_value = *it;
  probe.argmin = probe.u_grid[it - probe.b_values.begin()];
  return probe;
}

void write_probe_csv(std::ostream& out, const PositivityProbe& probe) {
  out << "u1,b\n";
  for (std::size_t k = 0; k < probe.u_grid.size(); ++k) {
    out << csv_number(probe.u_grid[k]) << ',' << csv_number(probe.b_values[k]) << '\n';
  }
}

}  // namespace planecontrol
