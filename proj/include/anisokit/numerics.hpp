#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace anisokit {

inline constexpr double pi = std::numbers::pi;

// Volume of the unit ball in R^n.
double unit_ball_volume(int n);

std::vector<double> log_space(double lo, double hi, std::size_t count);
// Log-spaced grid with a fixed density per decade (both endpoints included).
std::vector<double> log_grid(double lo, double hi, double per_decade);

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
};

// Adaptive Gauss-Kronrod (7/15) on a finite or semi-infinite interval.
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double rel_tol = 1e-10, unsigned max_depth = 30);

// Double-exponential rule, robust to integrable endpoint singularities.
QuadResult integrate_singular(const std::function<double(double)>& f, double a,
                              double b, double rel_tol = 1e-10);

// Root of an increasing function g on [lo, hi] with g(lo) <= 0 <= g(hi).
double solve_increasing(const std::function<double(double)>& g, double lo,
                        double hi, int bits = 52);

// Smallest x in (0, hi] with f(x) >= y for nondecreasing f; bracket grows
// geometrically from `start`. Stops when the relative width is below rel.
double generalized_inverse(const std::function<double(double)>& f, double y,
                           double hi, double rel = 1e-12, double start = 1.0);

struct LinearFit {
  std::vector<double> coef;
  double rms = 0.0;
};

// Least squares y ~ sum_k coef_k * X[k]; X holds one column per regressor.
LinearFit least_squares(const std::vector<std::vector<double>>& columns,
                        const std::vector<double>& y);

// Slope of log f against log t over [lo, hi] on `samples` log-spaced points.
double loglog_slope(const std::function<double(double)>& f, double lo,
                    double hi, int samples = 64);

// Integral of c*t^s between a and b for the power through (a,fa), (b,fb).
double power_segment_integral(double a, double fa, double b, double fb);

}  // namespace anisokit
