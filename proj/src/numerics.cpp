#include "anisokit/numerics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>
#include <cstdint>
#include <limits>

#include "anisokit/error.hpp"

namespace anisokit {

double unit_ball_volume(int n) {
  return std::pow(pi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
}

std::vector<double> log_space(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0) || !(hi > lo) || count < 2)
    throw Error(ErrorKind::invalid_input, "log_space needs 0 < lo < hi and count >= 2");
  std::vector<double> out(count);
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < count; ++i)
    out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::vector<double> log_grid(double lo, double hi, double per_decade) {
  const double decades = std::log10(hi / lo);
  const auto count = static_cast<std::size_t>(std::ceil(decades * per_decade)) + 1;
  return log_space(lo, hi, std::max<std::size_t>(count, 2));
}

QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double rel_tol, unsigned max_depth) {
  QuadResult r;
  if (a == b) return r;
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  if (std::isfinite(a) && std::isfinite(b)) {
    // Boost 1.74 compares the unscaled local error against a scaled tolerance, so
    // short intervals recurse to max_depth; integrate on [-1, 1] instead.
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    auto g = [&](double u) { return f(mid + half * u); };
    r.value = half * GK::integrate(g, -1.0, 1.0, max_depth, rel_tol, &r.error);
    r.error *= std::abs(half);
    return r;
  }
  r.value = GK::integrate(f, a, b, max_depth, rel_tol, &r.error);
  return r;
}

QuadResult integrate_singular(const std::function<double(double)>& f, double a,
                              double b, double rel_tol) {
  QuadResult r;
  if (a == b) return r;
  boost::math::quadrature::tanh_sinh<double> rule;
  r.value = rule.integrate(f, a, b, rel_tol, &r.error);
  return r;
}

double solve_increasing(const std::function<double(double)>& g, double lo,
                        double hi, int bits) {
  double glo = g(lo), ghi = g(hi);
  if (glo >= 0.0) return lo;
  if (ghi <= 0.0) return hi;
  std::uintmax_t iters = 200;
  auto r = boost::math::tools::toms748_solve(
      g, lo, hi, glo, ghi, boost::math::tools::eps_tolerance<double>(bits), iters);
  return 0.5 * (r.first + r.second);
}

double generalized_inverse(const std::function<double(double)>& f, double y,
                           double hi, double rel, double start) {
  if (y <= 0.0) return 0.0;
  double b = std::min(start, hi);
  double a = 0.0;
  while (f(b) < y) {
    if (b >= hi) throw RangeError("value above the attainable range", 0.0, f(hi));
    a = b;
    b = std::min(2.0 * b, hi);
  }
  if (a == 0.0) {
    // shrink towards zero until the lower end is strictly below the target
    a = 0.5 * b;
    while (a > std::numeric_limits<double>::min() && f(a) >= y) {
      b = a;
      a *= 0.5;
    }
    if (f(a) >= y) return a;
  }
  // invariant: f(a) < y <= f(b)
  for (int it = 0; it < 2000 && (b - a) > rel * b; ++it) {
    const double m = 0.5 * (a + b);
    if (m <= a || m >= b) break;
    if (f(m) >= y)
      b = m;
    else
      a = m;
  }
  return b;
}

LinearFit least_squares(const std::vector<std::vector<double>>& columns,
                        const std::vector<double>& y) {
  const auto m = static_cast<Eigen::Index>(y.size());
  const auto k = static_cast<Eigen::Index>(columns.size());
  if (m < k || k == 0) throw Error(ErrorKind::invalid_input, "least_squares: too few samples");
  Eigen::MatrixXd X(m, k);
  Eigen::VectorXd Y(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    Y(i) = y[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < k; ++j)
      X(i, j) = columns[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
  }
  Eigen::VectorXd c = X.colPivHouseholderQr().solve(Y);
  LinearFit out;
  out.coef.assign(c.data(), c.data() + k);
  out.rms = std::sqrt((X * c - Y).squaredNorm() / static_cast<double>(m));
  return out;
}

double loglog_slope(const std::function<double(double)>& f, double lo,
                    double hi, int samples) {
  auto t = log_space(lo, hi, static_cast<std::size_t>(samples));
  std::vector<double> one(t.size(), 1.0), lt(t.size()), ly(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    lt[i] = std::log(t[i]);
    ly[i] = std::log(f(t[i]));
  }
  return least_squares({one, lt}, ly).coef[1];
}

double power_segment_integral(double a, double fa, double b, double fb) {
  if (b <= a) return 0.0;
  if (!(fa > 0.0) || !(fb > 0.0) || a <= 0.0) return 0.5 * (fa + fb) * (b - a);
  const double lr = std::log(b / a);
  const double s = std::log(fb / fa) / lr;
  const double e = (s + 1.0) * lr;
  if (std::abs(e) < 1e-12) return fa * a * lr;
  return fa * a * std::expm1(e) / (s + 1.0);
}

}  // namespace anisokit
