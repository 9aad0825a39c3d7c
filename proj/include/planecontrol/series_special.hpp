#pragma once

#include <iosfwd>
#include <vector>

#include "planecontrol/grid.hpp"
#include "planecontrol/plane_calculus.hpp"

namespace planecontrol {

/// Value of a truncated power series plus what the truncation left out.
struct SeriesEval {
  double value = 0.0;
  int terms_used = 0;
  /// Magnitude of the first omitted term.
  double truncation_bound = 0.0;
};

/// f(y) = sum_n y^n / (n!)^2 for |y| <= 700; std::range_error beyond.
SeriesEval series_f(double y);

/// f0(t) = sum_j (-1)^j t^j / (j!)^2 = f(-t) for t >= 0; std::domain_error
/// for negative t. Its zeros t* satisfy 2 sqrt(t*) = zero of Bessel J0.
SeriesEval series_f0(double t);

/// Sign-change bracket [lo, hi] of the first zero of f0 found by bisection
/// on [1, 2].
struct RootBracket {
  double lo = 0.0;
  double hi = 0.0;
  double root() const { return 0.5 * (lo + hi); }
};
RootBracket bracket_r0(double abs_tol = 1e-10);

/// First nonnegative zero r0 of f0 (about 1.4458).
double find_r0();

/// Large-negative-argument form (pi sqrt|y|)^(-1/2) cos(2 sqrt|y| - pi/4) of
/// f(y); std::domain_error for y > -10.
double f0_asymptotic(double y);

/// Probabilists' Hermite polynomial h_n(x), 0 <= n <= 200.
double hermite_poly(int n, double x);

/// Orthonormal Hermite function xi_n(x), 1 <= n <= 50, with
/// xi_1(x) = pi^(-1/4) exp(-x^2/2) and xi_n of polynomial degree n - 1.
double hermite_function(int n, double x);

/// First tensor basis element mu_1(s, a) = xi_1(s) xi_1(a).
double mu1(double s, double a);

/// Integral of xi_1 over [a, b] (closed form via erf).
double hermite_function1_integral(double a, double b);

/// eta = integral over `rect` of beta0 * mu1, with beta0 taken at each cell's
/// lower-left node and mu1 integrated exactly over the cell.
double eta(const Rect& rect, const Field2D& beta0);

/// b(u1) = y0 sum_n eta^n (-1)^n h_n(u1) / (n!)^2. Throws
/// std::runtime_error("series truncation unreliable") when terms exceed 1e12
/// or the series has not settled after 150 terms.
double b_function(double u1, double eta, double y0);

struct PositivityProbe {
  double eta = 0.0;
  double y0 = 0.0;
  std::vector<double> u_grid;
  std::vector<double> b_values;
  double min_value = 0.0;
  double argmin = 0.0;
};

/// Evaluates b on u_k = u_min + k (u_max - u_min) / n_points, k < n_points.
/// The half-open grid keeps every coarse point when n_points doubles.
PositivityProbe positivity_probe(double eta, double y0, double u_min, double u_max, int n_points);

/// CSV with header `u1,b`.
void write_probe_csv(std::ostream& out, const PositivityProbe& probe);

}  // namespace planecontrol
