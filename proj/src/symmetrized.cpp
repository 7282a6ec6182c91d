#include "anisokit/symmetrized.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "anisokit/error.hpp"
#include "anisokit/numerics.hpp"

namespace anisokit {

// ---------------------------------------------------------------------------
// Radial solution

struct RadialSolution::Data {
  int n = 2;
  double measure = 0.0, radius = 0.0, omega = 0.0, c = 0.0;
  std::vector<double> r, v, g;
  MonotoneFunction psi;
  RearrangedFunction f;

  double arg(double s) const { return s > 0.0 ? std::pow(s, 1.0 / n) * f.maximal(s) / c : 0.0; }
};

namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

}  // namespace

RadialSolution solve_radial(const MonotoneFunction& psi, const RearrangedFunction& f, int n, const RadialOptions& opt) {
  if (n < 2) throw Error(ErrorKind::invalid_input, "dimension must be >= 2");
  if (opt.nodes < 3) throw Error(ErrorKind::invalid_input, "radial solver: need at least 3 nodes");
  auto d = std::make_shared<RadialSolution::Data>();
  d->n = n;
  d->measure = f.measure();
  d->omega = unit_ball_volume(n);
  d->c = n * std::pow(d->omega, 1.0 / n);
  d->radius = std::pow(d->measure / d->omega, 1.0 / n);
  d->psi = psi;
  d->f = f;
  const int m = opt.nodes;
  d->r.resize(m);
  for (int j = 0; j < m; ++j) d->r[j] = d->radius * std::sin(0.5 * pi * j / (m - 1));
  d->r.back() = d->radius;

  std::vector<double> s(m);
  double max_arg = 0.0;
  for (int j = 0; j < m; ++j) {
    s[j] = d->omega * std::pow(d->r[j], n);
    max_arg = std::max(max_arg, d->arg(s[j]));
  }
  max_arg = std::max(max_arg, f.values().front() * std::pow(s[1], 1.0 / n) / d->c);
  const double inv_np = (n - 1.0) / n;
  const auto& data = *d;
  auto integrand = [&data, inv_np](double x) {
    return x > 0.0 ? data.psi.inverse(data.arg(x)) / (data.c * std::pow(x, inv_np)) : 0.0;
  };
  const auto& fb = f.breakpoints();
  d->v.assign(m, 0.0);
  d->g.assign(m, 0.0);
  try {
    for (int j = m - 2; j >= 0; --j) {
      // split at the breakpoints of f, where f** has kinks
      double piece = 0.0, a = s[j];
      auto it = std::upper_bound(fb.begin(), fb.end(), s[j]);
      for (; it != fb.end() && *it < s[j + 1]; ++it) {
        piece += a == 0.0 ? integrate_singular(integrand, a, *it, opt.rel_tol).value
                          : integrate(integrand, a, *it, opt.rel_tol).value;
        a = *it;
      }
      piece += a == 0.0 ? integrate_singular(integrand, a, s[j + 1], opt.rel_tol).value
                        : integrate(integrand, a, s[j + 1], opt.rel_tol).value;
      d->v[j] = d->v[j + 1] + piece;
    }
    for (int j = 0; j < m; ++j) d->g[j] = psi.inverse(d->arg(s[j]));
  } catch (const RangeError& e) {
    throw RangeError("radial solver: Psi_diamond^{-1} cannot be evaluated; largest argument " + fmt(max_arg) + " (" +
                         e.what() + ")",
                     e.lo(), e.hi());
  }
  RadialSolution out;
  out.d_ = std::move(d);
  return out;
}

int RadialSolution::n() const { return d_->n; }
double RadialSolution::measure() const { return d_->measure; }
double RadialSolution::radius() const { return d_->radius; }
const std::vector<double>& RadialSolution::r() const { return d_->r; }
const std::vector<double>& RadialSolution::v() const { return d_->v; }
const std::vector<double>& RadialSolution::g() const { return d_->g; }
double RadialSolution::linf() const { return d_->v.front(); }

double RadialSolution::value_at(double x) const {
  const auto& r = d_->r;
  if (x <= 0.0) return d_->v.front();
  if (x >= r.back()) return 0.0;
  const auto j = static_cast<std::size_t>(std::upper_bound(r.begin(), r.end(), x) - r.begin()) - 1;
  const double h = r[j + 1] - r[j], t = (x - r[j]) / h;
  const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
  const double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
  return h00 * d_->v[j] - h10 * h * d_->g[j] + h01 * d_->v[j + 1] - h11 * h * d_->g[j + 1];
}

double RadialSolution::gradient_at(double x) const {
  if (x <= 0.0 || x > d_->radius) return 0.0;
  return d_->psi.inverse(d_->arg(d_->omega * std::pow(x, d_->n)));
}

double RadialSolution::symmetral(double s) const {
  if (s <= 0.0) return linf();
  return value_at(std::pow(s / d_->omega, 1.0 / d_->n));
}

void RadialSolution::write_csv(std::ostream& os) const {
  os << "r,v,g\n";
  os.precision(17);
  for (std::size_t j = 0; j < d_->r.size(); ++j) os << d_->r[j] << ',' << d_->v[j] << ',' << d_->g[j] << '\n';
}

nlohmann::json RadialSolution::to_json() const {
  return {{"n", d_->n}, {"measure", d_->measure}, {"radius", d_->radius}, {"nodes", d_->r.size()}, {"linf", linf()}};
}

TailIntegral linf_bound(const RearrangedFunction& f, const MonotoneFunction& psi, int n) {
  return boundedness_criterion(f, psi, n);
}

// ---------------------------------------------------------------------------
// A-priori estimates

nlohmann::json BoundCheck::to_json() const { return {{"bound", bound}, {"measured", measured}, {"pass", pass}}; }

BoundCheck gradient_l1_bound(const std::vector<double>& theta, const std::vector<double>& measures,
                             double omega_measure, double f_l1, int n) {
  if (theta.size() != measures.size()) throw Error(ErrorKind::invalid_input, "gradient bound: size mismatch");
  BoundCheck out;
  out.bound = 2.0 * std::pow(unit_ball_volume(n), -1.0 / n) * std::pow(omega_measure, 1.0 / n) * f_l1;
  for (std::size_t i = 0; i < theta.size(); ++i) out.measured += theta[i] * measures[i];
  out.pass = out.measured <= out.bound * (1.0 + 1e-12);
  return out;
}

nlohmann::json LadderCheck::to_json() const {
  return {{"ladder", ladder}, {"bound", bound}, {"measured", measured}, {"pass", pass}, {"calibrated", calibrated}};
}

namespace {

std::vector<double> default_ladder(double top, double bottom_ratio = 1e-3) {
  if (!(top > 0.0)) return {};
  return log_space(bottom_ratio * top, 0.999 * top, 20);
}

}  // namespace

LadderCheck truncation_energy_check(const std::vector<double>& u, const std::vector<double>& phi_grad,
                                    const std::vector<double>& measures, double f_l1, std::vector<double> ladder) {
  if (u.size() != phi_grad.size() || u.size() != measures.size())
    throw Error(ErrorKind::invalid_input, "truncation energy check: size mismatch");
  double top = 0.0;
  for (double x : u) top = std::max(top, std::abs(x));
  if (ladder.empty()) ladder = log_space(1e-3 * std::max(top, 1e-300), top, 20);
  // energies sorted by |u| so each ladder point is a prefix sum
  std::vector<std::size_t> idx(u.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return std::abs(u[a]) < std::abs(u[b]); });
  LadderCheck out;
  out.ladder = ladder;
  std::sort(out.ladder.begin(), out.ladder.end());
  std::size_t k = 0;
  double acc = 0.0;
  for (double t : out.ladder) {
    while (k < idx.size() && std::abs(u[idx[k]]) < t) {
      acc += phi_grad[idx[k]] * measures[idx[k]];
      ++k;
    }
    out.measured.push_back(acc);
    out.bound.push_back(2.0 * t * f_l1);
    if (acc > out.bound.back() * (1.0 + 1e-12)) out.pass = false;
    // smallest factor c with lhs <= c t ||f||_1
    if (t > 0.0 && f_l1 > 0.0) out.calibrated = std::max(out.calibrated, acc / (t * f_l1));
  }
  return out;
}

LevelSetBoundU::LevelSetBoundU(const EmbeddingProfile& profile, double K, double t0, double kappa2,
                               double omega_measure)
    : profile_(profile), K_(K), t0_(t0), kappa2_(kappa2) {
  if (!(K > 0.0) || !(kappa2 > 0.0)) throw Error(ErrorKind::invalid_input, "level-set bound: need K, kappa2 > 0");
  if (profile.modification_applied()) {
    // the modified function satisfies the energy hypothesis with K + |Omega| for t > max(t0, 1)
    if (!(omega_measure > 0.0))
      throw Error(ErrorKind::invalid_input, "level-set bound: |Omega| needed for the near-zero modified branch");
    K_ = K + omega_measure;
    t0_ = std::max(t0, 1.0);
  }
}

double LevelSetBoundU::operator()(double t) const {
  const int n = profile_.n();
  const double np = profile_.n_prime();
  return K_ * t / profile_.phi_n()(kappa2_ * std::pow(t, 1.0 / np) * std::pow(K_, -1.0 / n));
}

LadderCheck LevelSetBoundU::check(const RearrangedFunction& u, std::vector<double> ladder) const {
  if (ladder.empty()) ladder = default_ladder(u.values().front());
  LadderCheck out;
  const int n = profile_.n();
  const double np = profile_.n_prime();
  out.calibrated = inf;
  for (double t : ladder) {
    if (!(t > t0_)) continue;
    const double mu = u.measure_at_least(t);
    out.ladder.push_back(t);
    out.measured.push_back(mu);
    out.bound.push_back((*this)(t));
    if (mu > out.bound.back() * (1.0 + 1e-12)) out.pass = false;
    // the bound holds at t iff kappa2 <= Phi_n^{-1}(K t / mu) / (t^{1/n'} K^{-1/n})
    if (mu > 0.0)
      out.calibrated = std::min(out.calibrated, profile_.phi_n().inverse(K_ * t / mu) /
                                                    (std::pow(t, 1.0 / np) * std::pow(K_, -1.0 / n)));
  }
  return out;
}

LevelSetBoundGrad::LevelSetBoundGrad(const EmbeddingProfile& profile, double c1, double s0)
    : profile_(profile), c1_(c1), s0_(s0) {
  if (!(c1 > 0.0)) throw Error(ErrorKind::invalid_input, "level-set bound: need c1 > 0");
}

double LevelSetBoundGrad::operator()(double s) const {
  return c1_ * std::pow(profile_.phi_n().inverse(s), profile_.n_prime()) / s;
}

double LevelSetBoundGrad::proof_constant(double K, double kappa2, int n) {
  return 2.0 * std::pow(K / kappa2, n / (n - 1.0));
}

LadderCheck LevelSetBoundGrad::check(const RearrangedFunction& w, std::vector<double> ladder) const {
  if (ladder.empty()) ladder = default_ladder(w.values().front());
  LadderCheck out;
  for (double s : ladder) {
    if (!(s > s0_)) continue;
    const double mu = w.distribution(s);
    out.ladder.push_back(s);
    out.measured.push_back(mu);
    out.bound.push_back((*this)(s));
    if (mu > out.bound.back() * (1.0 + 1e-12)) out.pass = false;
    out.calibrated = std::max(out.calibrated, mu * s / std::pow(profile_.phi_n().inverse(s), profile_.n_prime()));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Marcinkiewicz quasinorm

nlohmann::json MarcinkiewiczResult::to_json() const {
  nlohmann::json j;
  if (finite)
    j["value"] = value;
  else
    j["value"] = "inf";
  j["finite"] = finite;
  j["growth"] = growth;
  return j;
}

MarcinkiewiczResult marcinkiewicz_quasinorm(const RearrangedFunction& u, const MonotoneFunction& varrho) {
  // u*(s) <= varrho^{-1}(lambda / s) iff lambda >= s varrho(u*(s)); on a step the supremum sits at
  // the right end, so lambda* = max_j s_j varrho(v_j)
  MarcinkiewiczResult out;
  const auto& s = u.breakpoints();
  const auto& v = u.values();
  const double s1 = s[1];
  double near = 0.0, far = 0.0;
  for (std::size_t j = 0; j < v.size(); ++j) {
    const double lam = s[j + 1] * varrho(v[j]);
    if (!std::isfinite(lam)) {
      out.value = inf;
      out.finite = false;
      return out;
    }
    out.value = std::max(out.value, lam);
    if (s[j + 1] >= 10.0 * s1 && s[j + 1] < 100.0 * s1) near = std::max(near, lam);
    if (s[j + 1] >= 100.0 * s1 && s[j + 1] < 1000.0 * s1) far = std::max(far, lam);
  }
  if (1000.0 * s1 < u.measure() && far > 0.0) {
    out.growth = near / far;
    // s varrho(u*(s)) still growing towards 0 faster than s^{-0.02}: no lambda works
    if (out.growth > std::pow(10.0, 0.02)) {
      out.value = inf;
      out.finite = false;
    }
  }
  return out;
}

}  // namespace anisokit
