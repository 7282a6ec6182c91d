#include "anisokit/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <deque>
#include <istream>
#include <mutex>
#include <ostream>
#include <random>
#include <sstream>

#include "anisokit/numerics.hpp"

namespace anisokit {

namespace {

constexpr double grad_floor = 1e-12;

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Neumaier compensated sum.
struct CompensatedSum {
  double sum = 0.0, comp = 0.0;
  void add(double x) {
    const double t = sum + x;
    comp += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

double sup_norm(std::span<const double> a) {
  double s = 0.0;
  for (double x : a) s = std::max(s, std::abs(x));
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// GridField

GridField::GridField(int N) : n_(N), v_(static_cast<std::size_t>(N) * N, 0.0) {
  if (N < 3) throw Error(ErrorKind::invalid_input, "grid needs at least 3 nodes per side");
}

GridField GridField::from_function(int N, const std::function<double(double, double)>& f) {
  GridField g(N);
  for (int j = 1; j < N - 1; ++j)
    for (int i = 1; i < N - 1; ++i) {
      const double v = f(g.x(i), g.x(j));
      if (!std::isfinite(v))
        throw Error(ErrorKind::invalid_input, "grid field: non-finite value at node (" + std::to_string(i) + "," +
                                                  std::to_string(j) + ")");
      g(i, j) = v;
    }
  return g;
}

GridField GridField::from_values(int N, std::vector<double> values) {
  GridField g(N);
  if (values.size() != g.v_.size()) throw Error(ErrorKind::invalid_input, "grid field: expected N*N values");
  g.v_ = std::move(values);
  for (int j = 0; j < N; ++j)
    for (int i = 0; i < N; ++i) {
      const double v = g(i, j);
      if (!std::isfinite(v)) throw Error(ErrorKind::invalid_input, "grid field: non-finite value");
      if (!g.interior(i, j) && v != 0.0) throw Error(ErrorKind::invalid_input, "grid field: nonzero boundary value");
    }
  return g;
}

double GridField::l1() const {
  double s = 0.0;
  for (double x : v_) s += std::abs(x);
  return s * cell_measure();
}

double GridField::sup() const { return sup_norm(v_); }

std::vector<double> GridField::node_measures() const {
  std::vector<double> m(v_.size());
  const double c = cell_measure();
  for (int j = 0; j < n_; ++j)
    for (int i = 0; i < n_; ++i) {
      const double wx = (i == 0 || i == n_ - 1) ? 0.5 : 1.0;
      const double wy = (j == 0 || j == n_ - 1) ? 0.5 : 1.0;
      m[i + n_ * j] = c * wx * wy;
    }
  return m;
}

void GridField::write_csv(std::ostream& os) const {
  os.precision(17);
  os << "y\\x";
  for (int i = 0; i < n_; ++i) os << ',' << x(i);
  os << '\n';
  for (int j = 0; j < n_; ++j) {
    os << x(j);
    for (int i = 0; i < n_; ++i) os << ',' << (*this)(i, j);
    os << '\n';
  }
}

GridField GridField::read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorKind::io, "grid csv: missing header");
  const int N = static_cast<int>(std::count(line.begin(), line.end(), ','));
  if (N < 3) throw Error(ErrorKind::io, "grid csv: header needs at least 3 columns");
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(N) * N);
  int rows = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');  // y
    int cols = 0;
    while (std::getline(ss, cell, ',')) {
      try {
        v.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw Error(ErrorKind::io, "grid csv: bad number '" + cell + "'");
      }
      ++cols;
    }
    if (cols != N) throw Error(ErrorKind::io, "grid csv: row " + std::to_string(rows) + " has wrong length");
    ++rows;
  }
  if (rows != N) throw Error(ErrorKind::io, "grid csv: expected " + std::to_string(N) + " rows");
  return from_values(N, std::move(v));
}

RearrangedFunction rearrange(const GridField& u) { return rearrange(u.values(), u.node_measures()); }

// ---------------------------------------------------------------------------
// Operator

void OperatorSpec::validate(int N) const {
  if (phi.dim() != 2) throw Error(ErrorKind::invalid_input, "grid solver: Phi must be two-dimensional");
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw Error(ErrorKind::invalid_input, "regularization: need 0 <= eps < 1");
  if (!(q > phi.dim())) throw Error(ErrorKind::invalid_input, "regularization: need q > n");
  for (const auto& t : phi.terms())
    if (t.fn && !t.fn.convexity_certified())
      throw Error(ErrorKind::non_convex, "grid solver: term " + t.fn.id() + " is not certified convex");
  const auto inv = check_invariants(phi);
  if (!inv.convex) throw Error(ErrorKind::non_convex, "grid solver: Phi not convex on the probe range: " + inv.detail);
  if (!inv.zero_at_origin || !inv.even)
    throw Error(ErrorKind::invalid_input, "grid solver: Phi must be even and vanish at 0: " + inv.detail);
  if (N > 0 && coefficient) {
    const double h = 1.0 / (N - 1);
    for (int j = 0; j < N; ++j)
      for (int i = 0; i < N; ++i)
        if (!(coefficient(i * h, j * h) >= 1.0))
          throw Error(ErrorKind::invalid_input, "grid solver: coefficient b must be >= 1 at every node");
  }
}

double OperatorSpec::potential(std::span<const double> xi) const {
  double v = phi(xi);
  if (epsilon > 0.0) v += epsilon * std::pow(std::sqrt(dot(xi, xi)), q) / q;
  return v;
}

void OperatorSpec::flux(double x, double y, std::span<const double> xi, std::span<double> out) const {
  phi.gradient(xi, out);
  const double bb = b(x, y);
  for (auto& o : out) o *= bb;
  if (epsilon > 0.0) {
    const double r = std::max(std::sqrt(dot(xi, xi)), grad_floor);
    const double d = epsilon * std::pow(r, q - 2.0);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += d * xi[i];
  }
}

OperatorSpec regularized(const OperatorSpec& base, double epsilon, double q) {
  OperatorSpec s = base;
  s.epsilon = epsilon;
  s.q = q;
  return s;
}

// ---------------------------------------------------------------------------
// Discrete energy

DiscreteEnergy::DiscreteEnergy(OperatorSpec spec, int N) : spec_(std::move(spec)), n_(N), h_(1.0 / (N - 1)) {
  if (N < 3) throw Error(ErrorKind::invalid_input, "grid needs at least 3 nodes per side");
  const int m = N - 1;
  b_.resize(static_cast<std::size_t>(m) * m);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) {
      const double b = spec_.b((i + 0.5) * h_, (j + 0.5) * h_);
      if (!(b >= 1.0)) throw Error(ErrorKind::invalid_input, "grid solver: coefficient b must be >= 1");
      b_[i + m * j] = b;
    }
}

std::array<double, 2> DiscreteEnergy::cell_gradient(std::span<const double> u, int i, int j) const {
  const double c = u[i + n_ * j];
  return {(u[i + 1 + n_ * j] - c) / h_, (u[i + n_ * (j + 1)] - c) / h_};
}

namespace {

// Cell energy density b Phi(g) + eps A(|g|).
double cell_density(const OperatorSpec& s, double b, const std::array<double, 2>& g) {
  double v = b * s.phi(g);
  if (s.epsilon > 0.0) v += s.epsilon * std::pow(std::hypot(g[0], g[1]), s.q) / s.q;
  return v;
}

// b grad Phi(g) + eps A'(|g|) g / |g|, with the coefficient already sampled on the cell.
std::array<double, 2> cell_flux(const OperatorSpec& s, double b, const std::array<double, 2>& g) {
  std::array<double, 2> a{};
  s.phi.gradient(g, a);
  a[0] *= b;
  a[1] *= b;
  if (s.epsilon > 0.0) {
    const double d = s.epsilon * std::pow(std::max(std::hypot(g[0], g[1]), grad_floor), s.q - 2.0);
    a[0] += d * g[0];
    a[1] += d * g[1];
  }
  return a;
}

}  // namespace

double DiscreteEnergy::value(std::span<const double> u, std::span<const double> f) const {
  const int m = n_ - 1;
  const int cells = m * m;
  double e = 0.0;
#pragma omp parallel for reduction(+ : e) schedule(static)
  for (int c = 0; c < cells; ++c) {
    const int i = c % m, j = c / m;
    e += cell_density(spec_, b_[c], cell_gradient(u, i, j));
  }
  double src = 0.0;
  const int nodes = n_ * n_;
#pragma omp parallel for reduction(+ : src) schedule(static)
  for (int k = 0; k < nodes; ++k) src += f[k] * u[k];
  return (e - src) * h_ * h_;
}

double DiscreteEnergy::value_serial(std::span<const double> u, std::span<const double> f) const {
  const int m = n_ - 1;
  double e = 0.0;
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) e += cell_density(spec_, b_[i + m * j], cell_gradient(u, i, j));
  double src = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) src += f[k] * u[k];
  return (e - src) * h_ * h_;
}

double DiscreteEnergy::difference(std::span<const double> un, std::span<const double> u,
                                  std::span<const double> f) const {
  const int m = n_ - 1;
  const int cells = m * m;
  const int nodes = n_ * n_;
  CompensatedSum total;
#pragma omp parallel
  {
    CompensatedSum part;
#pragma omp for schedule(static) nowait
    for (int c = 0; c < cells; ++c) {
      const int i = c % m, j = c / m;
      part.add(cell_density(spec_, b_[c], cell_gradient(un, i, j)) - cell_density(spec_, b_[c], cell_gradient(u, i, j)));
    }
#pragma omp for schedule(static) nowait
    for (int k = 0; k < nodes; ++k) part.add(-f[k] * (un[k] - u[k]));
#pragma omp critical
    {
      total.add(part.sum);
      total.add(part.comp);
    }
  }
  return total.value() * h_ * h_;
}

double DiscreteEnergy::difference_serial(std::span<const double> un, std::span<const double> u,
                                         std::span<const double> f) const {
  const int m = n_ - 1;
  CompensatedSum total;
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) {
      const double b = b_[i + m * j];
      total.add(cell_density(spec_, b, cell_gradient(un, i, j)) - cell_density(spec_, b, cell_gradient(u, i, j)));
    }
  for (std::size_t k = 0; k < u.size(); ++k) total.add(-f[k] * (un[k] - u[k]));
  return total.value() * h_ * h_;
}

void DiscreteEnergy::gradient(std::span<const double> u, std::span<const double> f, std::span<double> grad) const {
  const int m = n_ - 1;
  const int cells = m * m;
  std::vector<double> ax(cells), ay(cells);
#pragma omp parallel for schedule(static)
  for (int c = 0; c < cells; ++c) {
    const auto a = cell_flux(spec_, b_[c], cell_gradient(u, c % m, c / m));
    ax[c] = a[0];
    ay[c] = a[1];
  }
  const int N = n_;
  const double h = h_;
#pragma omp parallel for schedule(static)
  for (int j = 0; j < N; ++j)
    for (int i = 0; i < N; ++i) {
      const int k = i + N * j;
      if (i == 0 || j == 0 || i == N - 1 || j == N - 1) {
        grad[k] = 0.0;
        continue;
      }
      // node is the left end of cell (i,j), the right end of (i-1,j) and the top of (i,j-1)
      const double div = ax[(i - 1) + m * j] + ay[i + m * (j - 1)] - ax[i + m * j] - ay[i + m * j];
      grad[k] = h * div - f[k] * h * h;
    }
}

void DiscreteEnergy::gradient_serial(std::span<const double> u, std::span<const double> f,
                                     std::span<double> grad) const {
  const int m = n_ - 1;
  std::fill(grad.begin(), grad.end(), 0.0);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) {
      const auto a = cell_flux(spec_, b_[i + m * j], cell_gradient(u, i, j));
      grad[i + n_ * j] -= h_ * (a[0] + a[1]);
      grad[i + 1 + n_ * j] += h_ * a[0];
      grad[i + n_ * (j + 1)] += h_ * a[1];
    }
  for (int j = 0; j < n_; ++j)
    for (int i = 0; i < n_; ++i) {
      const int k = i + n_ * j;
      if (i == 0 || j == 0 || i == n_ - 1 || j == n_ - 1)
        grad[k] = 0.0;
      else
        grad[k] -= f[k] * h_ * h_;
    }
}

// ---------------------------------------------------------------------------
// Preconditioner

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct LaplacePreconditioner::Impl {
  int N = 0, M = 0;
  double* buf = nullptr;
  fftw_plan plan = nullptr;
  std::vector<double> scale;
};

LaplacePreconditioner::LaplacePreconditioner(int N) : impl_(std::make_unique<Impl>()) {
  if (N < 3) throw Error(ErrorKind::invalid_input, "preconditioner: N >= 3 required");
  auto& d = *impl_;
  d.N = N;
  d.M = N - 2;
  const int M = d.M;
  d.buf = fftw_alloc_real(static_cast<std::size_t>(M) * M);
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    d.plan = fftw_plan_r2r_2d(M, M, d.buf, d.buf, FFTW_RODFT00, FFTW_RODFT00, FFTW_ESTIMATE);
  }
  // eigenvalues of h^2 (-Laplacian) are 4 (sin^2 + sin^2); RODFT00 twice scales by (2(M+1))^2
  std::vector<double> s2(M);
  for (int k = 0; k < M; ++k) {
    const double s = std::sin(0.5 * pi * (k + 1) / (M + 1));
    s2[k] = s * s;
  }
  const double norm = 4.0 * (M + 1.0) * (M + 1.0);
  d.scale.resize(static_cast<std::size_t>(M) * M);
  for (int b = 0; b < M; ++b)
    for (int a = 0; a < M; ++a) d.scale[a + M * b] = 1.0 / (4.0 * (s2[a] + s2[b]) * norm);
}

LaplacePreconditioner::~LaplacePreconditioner() {
  if (!impl_) return;
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (impl_->plan) fftw_destroy_plan(impl_->plan);
  if (impl_->buf) fftw_free(impl_->buf);
}

void LaplacePreconditioner::apply(std::span<const double> r, std::span<double> z) const {
  auto& d = *impl_;
  const int N = d.N, M = d.M;
  for (int j = 1; j <= M; ++j)
    for (int i = 1; i <= M; ++i) d.buf[(i - 1) + M * (j - 1)] = r[i + N * j];
  fftw_execute(d.plan);
  for (std::size_t k = 0; k < d.scale.size(); ++k) d.buf[k] *= d.scale[k];
  fftw_execute(d.plan);
  std::fill(z.begin(), z.end(), 0.0);
  for (int j = 1; j <= M; ++j)
    for (int i = 1; i <= M; ++i) z[i + N * j] = d.buf[(i - 1) + M * (j - 1)];
}

// ---------------------------------------------------------------------------
// Solver

nlohmann::json GridSolution::to_json() const {
  return {{"N", u.size()},
          {"energy", energy},
          {"residual", residual},
          {"tolerance", tolerance},
          {"iterations", iterations},
          {"energy_monotone", energy_monotone},
          {"method", method},
          {"sup", u.sup()}};
}

GridSolution solve(const OperatorSpec& spec, const GridField& f, const SolveOptions& opt) {
  const int N = f.size();
  if (N < 3) throw Error(ErrorKind::invalid_input, "grid solver: empty data field");
  spec.validate(N);
  const DiscreteEnergy E(spec, N);
  const LaplacePreconditioner P(N);
  const std::size_t nn = static_cast<std::size_t>(N) * N;
  const std::span<const double> fv = f.values();

  auto value = [&](std::span<const double> u) { return opt.parallel ? E.value(u, fv) : E.value_serial(u, fv); };
  auto change = [&](std::span<const double> a, std::span<const double> b) {
    return opt.parallel ? E.difference(a, b, fv) : E.difference_serial(a, b, fv);
  };
  auto gradient = [&](std::span<const double> u, std::span<double> g) {
    if (opt.parallel)
      E.gradient(u, fv, g);
    else
      E.gradient_serial(u, fv, g);
  };

  GridSolution out;
  out.method = "bb";
  out.tolerance = opt.tol_factor * f.l1();
  std::vector<double> u(nn, 0.0);
  if (opt.initial) {
    if (opt.initial->size() != N) throw Error(ErrorKind::invalid_input, "grid solver: initial guess size mismatch");
    u = opt.initial->values();
  }
  std::vector<double> g(nn), z(nn), d(nn), un(nn), gn(nn), zn(nn);
  double J = value(u);
  gradient(u, g);
  double res = sup_norm(g);
  out.energy_history.push_back(J);

  auto finish = [&](int iters) {
    out.u = GridField::from_values(N, u);
    out.energy = value(u);
    out.residual = res;
    out.iterations = iters;
    return out;
  };
  if (res <= out.tolerance) return finish(0);

  P.apply(g, z);
  double alpha = 1.0;
  bool lbfgs = false;
  std::deque<std::vector<double>> S, Y;
  std::deque<double> rho;

  auto lbfgs_direction = [&]() {
    std::vector<double> qv = g;
    std::vector<double> a(S.size());
    for (int i = static_cast<int>(S.size()) - 1; i >= 0; --i) {
      a[i] = rho[i] * dot(S[i], qv);
      for (std::size_t k = 0; k < nn; ++k) qv[k] -= a[i] * Y[i][k];
    }
    std::vector<double> r(nn);
    P.apply(qv, r);
    if (!S.empty()) {
      std::vector<double> py(nn);
      P.apply(Y.back(), py);
      const double gamma = dot(S.back(), Y.back()) / dot(Y.back(), py);
      for (auto& x : r) x *= gamma;
    }
    for (std::size_t i = 0; i < S.size(); ++i) {
      const double beta = rho[i] * dot(Y[i], r);
      for (std::size_t k = 0; k < nn; ++k) r[k] += S[i][k] * (a[i] - beta);
    }
    for (std::size_t k = 0; k < nn; ++k) d[k] = -r[k];
  };

  for (int it = 1; it <= opt.max_iterations; ++it) {
    if (lbfgs) {
      lbfgs_direction();
    } else {
      for (std::size_t k = 0; k < nn; ++k) d[k] = -z[k];
    }
    double gd = dot(g, d);
    if (!(gd < 0.0)) {
      S.clear();
      Y.clear();
      rho.clear();
      for (std::size_t k = 0; k < nn; ++k) d[k] = -z[k];
      gd = dot(g, d);
    }
    double step = lbfgs ? 1.0 : alpha;
    bool accepted = false;
    double dJ = 0.0;
    for (int bt = 0; bt < 60; ++bt) {
      for (std::size_t k = 0; k < nn; ++k) un[k] = u[k] + step * d[k];
      dJ = change(un, u);
      if (dJ <= 1e-4 * step * gd) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (!lbfgs) {
        lbfgs = true;
        out.method = "bb+lbfgs";
        S.clear();
        Y.clear();
        rho.clear();
        continue;
      }
      out.u = GridField::from_values(N, u);
      std::ostringstream os;
      os << "grid solver: line search failed after " << it << " iterations; residual " << res << " (tolerance "
         << out.tolerance << ")";
      throw ConvergenceError(os.str(), res, it);
    }
    gradient(un, gn);
    double sy = 0.0, zg = 0.0;
    for (std::size_t k = 0; k < nn; ++k) {
      const double s = un[k] - u[k];
      sy += s * (gn[k] - g[k]);
      zg += z[k] * g[k];
    }
    if (lbfgs) {
      if (sy > 0.0) {
        std::vector<double> s(nn), y(nn);
        for (std::size_t k = 0; k < nn; ++k) {
          s[k] = un[k] - u[k];
          y[k] = gn[k] - g[k];
        }
        S.push_back(std::move(s));
        Y.push_back(std::move(y));
        rho.push_back(1.0 / sy);
        if (static_cast<int>(S.size()) > opt.lbfgs_memory) {
          S.pop_front();
          Y.pop_front();
          rho.pop_front();
        }
      }
    } else {
      // BB step in the preconditioner metric: s = -step z, M s = -step g
      alpha = sy > 0.0 ? step * step * zg / sy : 1.0;
      alpha = std::clamp(alpha, 1e-8, 1e8);
    }
    // J is tracked through the accurate differences; a direct evaluation cannot resolve the last steps
    if (dJ > 0.0) out.energy_monotone = false;
    u.swap(un);
    g.swap(gn);
    J += dJ;
    res = sup_norm(g);
    P.apply(g, z);
    out.energy_history.push_back(J);
    if (opt.log)
      *opt.log << nlohmann::json{{"iter", it}, {"energy", J}, {"residual", res}, {"step", step}, {"lbfgs", lbfgs}}.dump()
               << '\n';
    if (res <= out.tolerance) return finish(it);
  }
  std::ostringstream os;
  os << "grid solver: no convergence within " << opt.max_iterations << " iterations; residual " << res
     << " (tolerance " << out.tolerance << ")";
  throw ConvergenceError(os.str(), res, opt.max_iterations);
}

// ---------------------------------------------------------------------------
// Cell diagnostics

std::vector<double> cell_map(const GridField& u, const std::function<double(std::span<const double>)>& fn) {
  const int N = u.size(), m = N - 1;
  const double h = u.h();
  std::vector<double> out(static_cast<std::size_t>(m) * m);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i) {
      const std::array<double, 2> g{(u(i + 1, j) - u(i, j)) / h, (u(i, j + 1) - u(i, j)) / h};
      out[i + m * j] = fn(g);
    }
  return out;
}

std::vector<double> cell_stencil_max(const GridField& u) {
  const int m = u.size() - 1;
  std::vector<double> out(static_cast<std::size_t>(m) * m);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i)
      out[i + m * j] = std::max({std::abs(u(i, j)), std::abs(u(i + 1, j)), std::abs(u(i, j + 1))});
  return out;
}

LadderCheck truncation_energy(const OperatorSpec& spec, const GridField& u, const GridField& f,
                              std::vector<double> ladder) {
  const auto level = cell_stencil_max(u);
  const auto energy = cell_map(u, [&spec](std::span<const double> g) { return spec.potential(g); });
  const std::vector<double> measures(level.size(), u.cell_measure());
  return truncation_energy_check(level, energy, measures, f.l1(), std::move(ladder));
}

// ---------------------------------------------------------------------------
// Approximable solutions

GridField mollified_mass(const PointMass& mu, int N, double w) {
  if (!(w > 0.0) || !(mu.mass >= 0.0)) throw Error(ErrorKind::invalid_input, "point mass: need w > 0, mass >= 0");
  auto tent = [&](double x, double y) {
    return std::max(0.0, 1.0 - std::abs(x - mu.x) / w) * std::max(0.0, 1.0 - std::abs(y - mu.y) / w);
  };
  GridField f = GridField::from_function(N, tent);
  double s = 0.0;
  for (double v : f.values()) s += v;
  if (!(s > 0.0)) throw Error(ErrorKind::invalid_input, "point mass: tent misses every interior node");
  const double c = mu.mass / (s * f.cell_measure());
  for (auto& v : f.data()) v *= c;
  return f;
}

GridField truncated(const GridField& f, double k) {
  if (!(k > 0.0)) throw Error(ErrorKind::invalid_input, "truncation level must be positive");
  GridField out = f;
  for (auto& v : out.data()) v = std::clamp(v, -k, k);
  return out;
}

nlohmann::json ApproximableSequence::to_json() const {
  nlohmann::json steps_j = nlohmann::json::array();
  for (const auto& s : steps)
    steps_j.push_back({{"k", s.k},
                       {"next_k", s.next_k},
                       {"sup_diff", s.sup_diff},
                       {"deviation_measure", s.deviation_measure},
                       {"gradient_deviation_measure", s.gradient_deviation_measure}});
  nlohmann::json sols = nlohmann::json::array();
  for (const auto& s : solutions) sols.push_back(s.to_json());
  return {{"ladder", ladder},
          {"data_l1", data_l1},
          {"solves", sols},
          {"steps", steps_j},
          {"deviation_monotone", deviation_monotone}};
}

namespace {

ApproximableSequence run_sequence(const OperatorSpec& spec, const std::vector<double>& ladder,
                                  const std::function<GridField(double)>& data, const SequenceOptions& opt) {
  if (ladder.empty()) throw Error(ErrorKind::invalid_input, "approximable sequence: empty ladder");
  ApproximableSequence out;
  out.ladder = ladder;
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    const GridField fk = data(ladder[i]);
    SolveOptions so = opt.solve;
    if (opt.warm_start && !out.solutions.empty()) so.initial = &out.solutions.back().u;
    const std::string where = "approximable sequence step " + std::to_string(i) + " (k=" + std::to_string(ladder[i]) + "): ";
    try {
      out.solutions.push_back(solve(spec, fk, so));
    } catch (const ConvergenceError& e) {
      throw ConvergenceError(where + e.what(), e.residual(), e.iterations());
    } catch (const Error& e) {
      throw Error(e.kind(), where + e.what());
    }
    out.data_l1.push_back(fk.l1());
  }
  for (std::size_t i = 0; i + 1 < ladder.size(); ++i) {
    const GridField& a = out.solutions[i].u;
    const GridField& b = out.solutions[i + 1].u;
    SequenceStep st;
    st.k = ladder[i];
    st.next_k = ladder[i + 1];
    const auto w = a.node_measures();
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double dv = std::abs(a.values()[k] - b.values()[k]);
      st.sup_diff = std::max(st.sup_diff, dv);
      if (dv > opt.tau) st.deviation_measure += w[k];
    }
    const int N = a.size(), m = N - 1;
    const double h = a.h();
    for (int j = 0; j < m; ++j)
      for (int ii = 0; ii < m; ++ii) {
        const double dx = ((a(ii + 1, j) - a(ii, j)) - (b(ii + 1, j) - b(ii, j))) / h;
        const double dy = ((a(ii, j + 1) - a(ii, j)) - (b(ii, j + 1) - b(ii, j))) / h;
        if (std::hypot(dx, dy) > opt.grad_tau) st.gradient_deviation_measure += h * h;
      }
    if (!out.steps.empty() && st.deviation_measure > out.steps.back().deviation_measure) out.deviation_monotone = false;
    out.steps.push_back(st);
  }
  return out;
}

}  // namespace

ApproximableSequence approximable_sequence(const OperatorSpec& spec, const GridField& f,
                                           const std::vector<double>& ladder, const SequenceOptions& opt) {
  return run_sequence(spec, ladder, [&f](double k) { return truncated(f, k); }, opt);
}

ApproximableSequence approximable_sequence(const OperatorSpec& spec, const PointMass& mu, int N,
                                           const std::vector<double>& ladder, const SequenceOptions& opt) {
  const double h = 1.0 / (N - 1);
  return run_sequence(
      spec, ladder, [&](double k) { return mollified_mass(mu, N, std::max(2.0 * h, 0.25 / k)); }, opt);
}

// ---------------------------------------------------------------------------
// Assumption audit

nlohmann::json AuditReport::to_json() const {
  return {{"monotone", monotone},
          {"coercive", coercive},
          {"growth", growth},
          {"pass", pass()},
          {"c_phi", c_phi},
          {"c_phi_best", c_phi_best},
          {"h_measured", h_measured},
          {"equal_pairs_skipped", equal_pairs_skipped},
          {"findings", findings}};
}

AuditReport assumption_audit(const OperatorSpec& spec, const AuditOptions& opt) {
  const int n = spec.phi.dim();
  if (n > 3) throw Error(ErrorKind::invalid_input, "assumption audit: n <= 3 required");
  AuditReport rep;
  rep.c_phi = spec.c_phi;
  const AnisotropicFunction pot =
      spec.epsilon > 0.0
          ? AnisotropicFunction::custom(n, spec.phi.id() + "+eps*A",
                                        [spec](std::span<const double> xi) { return spec.potential(xi); })
          : spec.phi;

  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> lmag(std::log(opt.lo), std::log(opt.hi));
  auto sample_vec = [&]() {
    std::vector<double> v(n);
    double r = 0.0;
    for (auto& x : v) {
      x = gauss(rng);
      r += x * x;
    }
    const double mag = std::exp(lmag(rng)) / std::sqrt(r);
    for (auto& x : v) x *= mag;
    return v;
  };
  auto describe = [](const std::vector<double>& v) {
    std::ostringstream os;
    os.precision(4);
    os << '(';
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    os << ')';
    return os.str();
  };

  std::vector<double> a(n), b(n);
  for (int s = 0; s < opt.samples; ++s) {
    const double x = unit(rng), y = unit(rng);
    const auto xi = sample_vec();
    // the first pair probes xi = eta, which the strict inequality excludes
    const auto eta = s == 0 ? xi : sample_vec();
    spec.flux(x, y, xi, a);
    spec.flux(x, y, eta, b);
    if (xi == eta) {
      ++rep.equal_pairs_skipped;
    } else {
      double m = 0.0;
      for (int i = 0; i < n; ++i) m += (a[i] - b[i]) * (xi[i] - eta[i]);
      if (!(m > 0.0) && rep.monotone) {
        rep.monotone = false;
        rep.findings.push_back("monotonicity fails at xi=" + describe(xi) + " eta=" + describe(eta));
      }
    }
    const double ax = dot(a, xi), px = pot(xi);
    if (ax < px * (1.0 - 1e-12) && rep.coercive) {
      rep.coercive = false;
      rep.findings.push_back("coercivity fails at xi=" + describe(xi));
    }
  }

  rep.c_phi_best = inf;
  for (int s = 0; s < opt.growth_samples; ++s) {
    const double x = unit(rng), y = unit(rng);
    const auto xi = sample_vec();
    spec.flux(x, y, xi, a);
    const double px = pot(xi);
    const double hx = spec.h_profile ? spec.h_profile(x, y) : 0.0;
    auto conj_at = [&](double c) {
      std::vector<double> eta(n);
      for (int i = 0; i < n; ++i) eta[i] = c * a[i];
      return vector_conjugate(pot, eta);
    };
    const double lhs = conj_at(spec.c_phi);
    rep.h_measured = std::max(rep.h_measured, lhs - px);
    if (lhs > (px + hx) * (1.0 + 1e-9) + 1e-300 && rep.growth) {
      rep.growth = false;
      rep.findings.push_back("growth fails at xi=" + describe(xi));
    }
    // largest c with conj(c a) <= Phi: bisection in log c
    double lo = std::log(1e-4), hi = std::log(1e2);
    if (conj_at(std::exp(lo)) > px) {
      rep.c_phi_best = 0.0;
      continue;
    }
    if (conj_at(std::exp(hi)) <= px) {
      rep.c_phi_best = std::min(rep.c_phi_best, std::exp(hi));
      continue;
    }
    for (int k = 0; k < 30; ++k) {
      const double mid = 0.5 * (lo + hi);
      (conj_at(std::exp(mid)) <= px ? lo : hi) = mid;
    }
    rep.c_phi_best = std::min(rep.c_phi_best, std::exp(lo));
  }
  if (!std::isfinite(rep.c_phi_best)) rep.c_phi_best = 0.0;
  return rep;
}

// ---------------------------------------------------------------------------
// Regularization

nlohmann::json RegularizationReport::to_json() const {
  return {{"epsilon", epsilon}, {"sup_diff", sup_diff}, {"monotone", monotone}};
}

RegularizationReport regularization_consistency(const OperatorSpec& spec, const GridField& f,
                                                const std::vector<double>& eps_ladder, const SolveOptions& opt) {
  const auto base = solve(regularized(spec, 0.0, spec.q), f, opt);
  RegularizationReport rep;
  for (double eps : eps_ladder) {
    SolveOptions so = opt;
    so.initial = &base.u;
    const auto sol = solve(regularized(spec, eps, spec.q), f, so);
    double d = 0.0;
    for (std::size_t k = 0; k < f.values().size(); ++k)
      d = std::max(d, std::abs(sol.u.values()[k] - base.u.values()[k]));
    if (!rep.sup_diff.empty() && d > rep.sup_diff.back()) rep.monotone = false;
    rep.epsilon.push_back(eps);
    rep.sup_diff.push_back(d);
  }
  return rep;
}

}  // namespace anisokit
