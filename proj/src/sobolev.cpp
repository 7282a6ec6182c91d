#include "anisokit/sobolev.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

#include "anisokit/error.hpp"
#include "anisokit/numerics.hpp"

namespace anisokit {

const char* to_string(Dichotomy d) { return d == Dichotomy::divergent ? "divergent" : "convergent"; }

nlohmann::json DichotomyReport::to_json() const {
  return {{"verdict", to_string(verdict)},
          {"level", level},
          {"integrand_exponent", exponent},
          {"growth_exponent", sigma},
          {"spread", spread},
          {"borderline", borderline},
          {"window", {window.lo, window.hi}},
          {"level_exponents", level_exponents}};
}

namespace {

Domain trusted_range(const YoungFunction& a) {
  if (a.form() == Form::sampled) return {a.abscissae().front(), a.abscissae().back()};
  const Domain d = a.domain();
  return {d.lo, std::min(d.hi, a.limit())};
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> one(x.size(), 1.0);
  return least_squares({one, x}, y).coef[1];
}

}  // namespace

DichotomyReport classify_integral(const YoungFunction& phi, int n, Domain window, double margin) {
  if (n < 2) throw Error(ErrorKind::invalid_input, "dimension must be >= 2");
  DichotomyReport rep;
  const bool explicit_window = window.hi > window.lo && window.lo > 0.0;
  if (!explicit_window) {
    const Domain r = trusted_range(phi);
    window = {std::max(r.lo, r.hi / 100.0), r.hi};
  }
  if (window.hi < 1e6 * (1.0 - 1e-12))
    throw Error(ErrorKind::inconclusive, "trusted range must reach 1e6 to decide the dichotomy");
  rep.window = window;
  const double m = n - 1.0;
  const auto ts = log_space(window.lo, window.hi, 65);
  std::vector<double> lt, lphi;
  for (double t : ts) {
    lt.push_back(std::log(t));
    lphi.push_back(std::log(phi(t)));
  }
  // windowed exponents over eight sub-windows give the spread and the clear-cut verdicts
  double smin = inf, smax = -inf;
  for (int k = 0; k < 8; ++k) {
    std::vector<double> x(lt.begin() + 8 * k, lt.begin() + 8 * k + 9);
    std::vector<double> y(lphi.begin() + 8 * k, lphi.begin() + 8 * k + 9);
    const double s = fit_slope(x, y);
    smin = std::min(smin, s);
    smax = std::max(smax, s);
  }
  rep.spread = smax - smin;
  rep.sigma = fit_slope(lt, lphi);
  const double emax = (1.0 - smin) / m, emin = (1.0 - smax) / m;
  rep.level_exponents.push_back((1.0 - rep.sigma) / m);
  // log corrections shift windowed power exponents by about a/log t, so only clear cases
  // are settled on the power scale alone
  constexpr double clear = 0.25;
  if (emax < -1.0 - clear) {
    rep.verdict = Dichotomy::convergent;
    rep.exponent = emax;
    return rep;
  }
  if (emin > -1.0 + clear) {
    rep.verdict = Dichotomy::divergent;
    rep.exponent = emin;
    return rep;
  }
  if (rep.spread > 0.1) {
    throw Error(ErrorKind::inconclusive, "local growth exponent oscillates: spread " + std::to_string(rep.spread) +
                                             " over [" + std::to_string(window.lo) + ", " +
                                             std::to_string(window.hi) + "]");
  }
  // log g = c + e0 x + e1 log x + e2 log log x with x = log t. Level k fixes the exponents
  // below k at the critical value -1 and reads e_k from {1, k-th column, 1/x}; the 1/x column
  // absorbs log(c + t)-type offsets. Joint fits are hopeless: the columns are nearly collinear.
  // Log corrections need many decades, so analytic input (exact up to its limit) is fitted up
  // to 1e100 unless the caller fixed the window.
  Domain lw = window;
  if (!explicit_window && phi.form() == Form::analytic)
    lw.hi = std::max(window.hi, std::min(1e100, 1e-3 * phi.limit()));
  rep.window = lw;
  const auto lts = log_space(lw.lo, lw.hi, 257);
  std::vector<std::vector<double>> cols(3);
  std::vector<double> x(lts.size()), y(lts.size());
  for (std::size_t i = 0; i < lts.size(); ++i) {
    x[i] = std::log(lts[i]);
    cols[0].push_back(x[i]);
    cols[1].push_back(std::log(x[i]));
    cols[2].push_back(std::log(std::log(x[i])));
    y[i] = (x[i] - std::log(phi(lts[i]))) / m;
  }
  rep.level_exponents.clear();
  for (int level = 0; level <= 2; ++level) {
    std::vector<std::vector<double>> use{std::vector<double>(x.size(), 1.0), cols[level]};
    if (level >= 1) {
      use.emplace_back();
      for (double v : x) use.back().push_back(1.0 / v);
    }
    const double e = least_squares(use, y).coef[1];
    rep.level_exponents.push_back(e);
    rep.level = level;
    rep.exponent = e;
    if (e >= -1.0 + margin) {
      rep.verdict = Dichotomy::divergent;
      return rep;
    }
    if (e <= -1.0 - margin) {
      rep.verdict = Dichotomy::convergent;
      return rep;
    }
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += cols[level][i];
  }
  rep.borderline = true;
  rep.verdict = rep.exponent >= -1.0 ? Dichotomy::divergent : Dichotomy::convergent;
  return rep;
}

NearZeroReport near_zero_behaviour(const YoungFunction& phi, int n) {
  const Domain r = trusted_range(phi);
  const double lo = r.lo, hi = std::min(r.hi, 100.0 * r.lo);
  NearZeroReport rep;
  rep.exponent = loglog_slope([&](double t) { return phi(t); }, lo, hi, 16);
  // borderline growth counts as divergent: the modification is harmless there
  rep.converges = (1.0 - rep.exponent) / (n - 1.0) > -1.0 + 0.02;
  return rep;
}

ScalarModification modify_near_zero(const YoungFunction& phi, int n, double knee, bool force) {
  ScalarModification out;
  out.before = near_zero_behaviour(phi, n);
  out.knee = knee;
  if (out.before.converges && !force) {
    out.function = phi;
    return out;
  }
  out.applied = true;
  const double at = phi(knee);
  if (!(at > 0.0)) throw Error(ErrorKind::invalid_input, "Phi_circ vanishes at the knee");
  const std::string id = "linearized(" + phi.id() + ")";
  if (phi.form() == Form::sampled) {
    std::vector<double> t, v;
    const auto& pt = phi.abscissae();
    const auto& pv = phi.values();
    const double t0 = std::min(pt.front(), 1e-3 * knee);
    t.push_back(t0);
    v.push_back(at * t0 / knee);
    t.push_back(knee);
    v.push_back(at);
    for (std::size_t i = 0; i < pt.size(); ++i)
      if (pt[i] > knee) {
        t.push_back(pt[i]);
        v.push_back(pv[i]);
      }
    out.function = YoungFunction::sampled(id, std::move(t), std::move(v));
    return out;
  }
  AnalyticDef d;
  d.id = id;
  d.value = [phi, knee, at](double t) { return t <= knee ? at * t / knee : phi(t); };
  d.derivative = [phi, knee, at](double t) { return t <= knee ? at / knee : phi.derivative(t); };
  d.inverse = [phi, knee, at](double y) { return y <= at ? y * knee / at : phi.inverse(y); };
  d.limit = phi.limit();
  d.hint = phi.domain();
  out.function = YoungFunction::analytic(std::move(d));
  return out;
}

AnisotropicModification modify_near_zero(const AnisotropicFunction& phi, bool force) {
  AnisotropicModification out;
  const int n = phi.dim();
  const double m1 = sublevel_measure(phi, 1e-6).value, m2 = sublevel_measure(phi, 1e-4).value;
  // |{Phi <= t}| ~ t^{n/sigma} near zero
  out.exponent_at_zero = n * std::log(1e2) / std::log(m2 / m1);
  const bool converges = (1.0 - out.exponent_at_zero) / (n - 1.0) > -1.0 + 0.02;
  if (converges && !force) {
    out.function = phi;
    return out;
  }
  out.applied = true;
  auto xi = [phi, n](std::span<const double> x) {
    double r = 0.0;
    for (double v : x) r += v * v;
    r = std::sqrt(r);
    if (r == 0.0) return 0.0;
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) w[i] = x[i] / r;
    return r / ray_radius(phi, w, 1.0);
  };
  out.xi = AnisotropicFunction::custom(n, "homogeneous(" + phi.id() + ")", xi);
  out.function = AnisotropicFunction::custom(n, "modified(" + phi.id() + ")", [phi, xi](std::span<const double> x) {
    const double v = phi(x);
    return v > 1.0 ? v : xi(x);
  });
  out.function.box_radius = phi.box_radius;
  out.xi.box_radius = phi.box_radius;
  return out;
}

std::vector<double> isotonic_fit(const std::vector<double>& y, const std::vector<double>& w) {
  std::vector<double> val, wt;
  std::vector<std::size_t> len;
  for (std::size_t i = 0; i < y.size(); ++i) {
    val.push_back(y[i]);
    wt.push_back(w[i]);
    len.push_back(1);
    while (val.size() >= 2 && val[val.size() - 2] > val.back()) {
      const std::size_t k = val.size() - 1;
      const double ww = wt[k - 1] + wt[k];
      val[k - 1] = (val[k - 1] * wt[k - 1] + val[k] * wt[k]) / ww;
      wt[k - 1] = ww;
      len[k - 1] += len[k];
      val.pop_back();
      wt.pop_back();
      len.pop_back();
    }
  }
  std::vector<double> out;
  for (std::size_t k = 0; k < val.size(); ++k) out.insert(out.end(), len[k], val[k]);
  return out;
}

// ---------------------------------------------------------------------------

YoungFunction hat_phi_circ(const YoungFunction& phi, int n, Domain range, double per_decade) {
  if (n < 2) throw Error(ErrorKind::invalid_input, "dimension must be >= 2");
  const double m = n - 1.0, np = n / m;
  std::vector<double> r, d;
  if (phi.form() == Form::sampled) {
    // chord slopes at geometric midpoints, made nondecreasing
    const auto& t = phi.abscissae();
    const auto& v = phi.values();
    std::vector<double> slope, w;
    for (std::size_t i = 0; i + 1 < t.size(); ++i) {
      if (t[i] < range.lo || t[i + 1] > range.hi) continue;
      r.push_back(std::sqrt(t[i] * t[i + 1]));
      slope.push_back((v[i + 1] - v[i]) / (t[i + 1] - t[i]));
      w.push_back(std::log(t[i + 1] / t[i]));
    }
    d = isotonic_fit(slope, w);
  } else {
    r = log_grid(range.lo, range.hi, per_decade);
    for (double x : r) d.push_back(phi.derivative(x));
  }
  const std::size_t k = r.size();
  if (k < 4) throw Error(ErrorKind::invalid_input, "range too narrow for the optimal target function");
  for (double x : d)
    if (!(x > 0.0)) throw Error(ErrorKind::invalid_input, "derivative of Phi_circ must be positive on the range");

  // J(r) = int_0^r phi^{-1/(n-1)}, with a power-law head below r_0
  std::vector<double> j(k);
  {
    const double g0 = std::pow(d[0], -1.0 / m), g1 = std::pow(d[1], -1.0 / m);
    const double e = std::log(g1 / g0) / std::log(r[1] / r[0]);
    if (!(e > -1.0)) throw Error(ErrorKind::refused, "inner integral diverges at zero; modify Phi_circ near zero first");
    j[0] = g0 * r[0] / (e + 1.0);
    for (std::size_t i = 1; i < k; ++i)
      j[i] = j[i - 1] + power_segment_integral(r[i - 1], std::pow(d[i - 1], -1.0 / m), r[i], std::pow(d[i], -1.0 / m));
  }
  // G(r) = int_r^inf J^{-n} phi^{-n'}, with a power-law tail above r_k
  std::vector<double> g(k), outer(k);
  for (std::size_t i = 0; i < k; ++i) outer[i] = std::pow(j[i], -static_cast<double>(n)) * std::pow(d[i], -np);
  {
    const double e = std::log(outer[k - 1] / outer[k - 2]) / std::log(r[k - 1] / r[k - 2]);
    if (!(e < -1.0))
      throw Error(ErrorKind::non_convergence, "outer integral diverges under the extrapolated tail (exponent " +
                                                  std::to_string(e) + "); Phi_circ grows too slowly");
    g[k - 1] = -outer[k - 1] * r[k - 1] / (e + 1.0);
    for (std::size_t i = k - 1; i-- > 0;)
      g[i] = g[i + 1] + power_segment_integral(r[i], outer[i], r[i + 1], outer[i + 1]);
  }
  // nodes of hat phi: abscissa G^{1/(1-n)}, value phi(r)
  std::vector<double> y(k), big(k);
  for (std::size_t i = 0; i < k; ++i) y[i] = std::pow(g[i], 1.0 / (1.0 - n));
  const double a = std::log(d[1] / d[0]) / std::log(y[1] / y[0]);
  big[0] = d[0] * y[0] / (a + 1.0);
  for (std::size_t i = 1; i < k; ++i) big[i] = big[i - 1] + power_segment_integral(y[i - 1], d[i - 1], y[i], d[i]);
  // drop nodes where rounding makes the abscissae collide
  std::vector<double> ty, tv;
  for (std::size_t i = 0; i < k; ++i)
    if (ty.empty() || y[i] > ty.back() * (1.0 + 1e-14)) {
      ty.push_back(y[i]);
      tv.push_back(big[i]);
    }
  return YoungFunction::sampled("hat(" + phi.id() + ")", std::move(ty), std::move(tv));
}

// ---------------------------------------------------------------------------

struct EmbeddingProfile::Data {
  int n = 2;
  double m = 1.0;  // n - 1
  YoungFunction phi, original, phi_n, hat;
  MonotoneFunction vartheta, varrho;
  DichotomyReport dich;
  bool modified = false;
  Domain range;
  double kappa2 = 1.0;
  bool sampled_segments = false;
  double head_exponent = 0.0, tail_exponent = 0.0;
  std::vector<double> tau, k, cum;  // nodes, integrand, cumulative integral from 0

  double kernel(double t) const { return std::pow(t / phi(t), 1.0 / m); }

  double partial(std::size_t i, double t) const {
    if (t <= tau[i]) return 0.0;
    if (sampled_segments) return power_segment_integral(tau[i], k[i], t, kernel(t));
    return integrate([this](double x) { return kernel(x); }, tau[i], t, 1e-12, 8).value;
  }

  double integral(double t) const {
    if (t <= 0.0) return 0.0;
    if (t <= tau.front()) return cum.front() * std::pow(t / tau.front(), head_exponent + 1.0);
    if (t >= tau.back()) {
      const double e1 = tail_exponent + 1.0;
      const double base = k.back() * tau.back();
      const double extra = std::abs(e1) < 1e-12 ? base * std::log(t / tau.back())
                                                 : base / e1 * (std::pow(t / tau.back(), e1) - 1.0);
      return cum.back() + extra;
    }
    const auto i = static_cast<std::size_t>(std::upper_bound(tau.begin(), tau.end(), t) - tau.begin()) - 1;
    return cum[i] + partial(i, t);
  }

  double H(double t) const { return std::pow(integral(t), m / n); }

  double H_inverse(double s) const {
    if (s <= 0.0) return 0.0;
    double target = std::pow(s, static_cast<double>(n) / m);
    if (target <= cum.front()) return tau.front() * std::pow(target / cum.front(), 1.0 / (head_exponent + 1.0));
    // H^{-1}(H(top)) may overshoot the last node by roundoff
    if (target > cum.back() * (1.0 + 1e-12))
      throw RangeError("Sobolev conjugate: argument beyond the trusted range", 0.0, std::pow(cum.back(), m / n));
    target = std::min(target, cum.back());
    const auto j = static_cast<std::size_t>(std::lower_bound(cum.begin(), cum.end(), target) - cum.begin());
    const std::size_t i = j - 1;
    const double want = target - cum[i];
    auto g = [&](double x) { return partial(i, std::exp(x)) - want; };
    return std::exp(solve_increasing(g, std::log(tau[i]), std::log(tau[j]), 52));
  }
};

EmbeddingProfile EmbeddingProfile::build(const YoungFunction& phi_circ, int n, const ProfileOptions& opt) {
  if (n < 2) throw Error(ErrorKind::invalid_input, "dimension must be >= 2");
  auto d = std::make_shared<Data>();
  d->n = n;
  d->m = n - 1.0;
  d->original = phi_circ;
  d->kappa2 = opt.kappa2;
  Domain range = trusted_range(phi_circ);
  if (opt.t_lo > 0.0) range.lo = opt.t_lo;
  if (opt.t_hi > 0.0) range.hi = opt.t_hi;
  if (!(range.hi > range.lo)) throw Error(ErrorKind::invalid_input, "empty range for the embedding profile");
  d->range = range;

  d->dich = opt.t_hi > 0.0 ? classify_integral(phi_circ, n, {std::max(range.lo, range.hi / 100.0), range.hi})
                           : classify_integral(phi_circ, n);
  if (d->dich.verdict == Dichotomy::convergent)
    throw Error(ErrorKind::refused, "convergent dichotomy: the Sobolev conjugate is infinite for large arguments; "
                                    "use the L-infinity branch");

  d->phi = phi_circ;
  if (opt.auto_modify) {
    auto mod = modify_near_zero(phi_circ, n, opt.knee, opt.force_modify);
    d->phi = mod.function;
    d->modified = mod.applied;
  }
  if (!near_zero_behaviour(d->phi, n).converges && !d->modified) {
    // modification disabled but needed: only the local exponent on the range can tell
    throw Error(ErrorKind::refused, "near-zero integral diverges; enable the near-zero modification");
  }
  if (d->modified) range.lo = std::min(range.lo, 1e-3 * opt.knee);
  d->range = range;

  // nodes: the sample abscissae for sampled input (exact power-law segments), else a log grid
  if (d->phi.form() == Form::sampled) {
    d->sampled_segments = true;
    for (double t : d->phi.abscissae())
      if (t >= range.lo * (1 - 1e-12) && t <= range.hi * (1 + 1e-12)) d->tau.push_back(t);
  } else {
    d->tau = log_grid(range.lo, range.hi, opt.per_decade);
  }
  if (d->tau.size() < 3) throw Error(ErrorKind::invalid_input, "too few nodes in the profile range");
  const std::size_t nk = d->tau.size();
  for (double t : d->tau) d->k.push_back(d->kernel(t));
  d->head_exponent = (1.0 - d->phi.local_exponent(d->tau.front() * (1 + 1e-9))) / d->m;
  if (d->sampled_segments) d->head_exponent = std::log(d->k[1] / d->k[0]) / std::log(d->tau[1] / d->tau[0]);
  if (!(d->head_exponent > -1.0)) throw Error(ErrorKind::refused, "near-zero integral diverges");
  d->tail_exponent = std::log(d->k[nk - 1] / d->k[nk - 2]) / std::log(d->tau[nk - 1] / d->tau[nk - 2]);
  d->cum.resize(nk);
  d->cum[0] = d->k[0] * d->tau[0] / (d->head_exponent + 1.0);
  for (std::size_t i = 1; i < nk; ++i) d->cum[i] = d->cum[i - 1] + d->partial(i - 1, d->tau[i]);

  const std::shared_ptr<const Data> cd = d;
  const double np = n / d->m;
  const double s_hi = cd->H(range.hi);
  AnalyticDef pn;
  pn.id = "sobolev(" + phi_circ.id() + ",n=" + std::to_string(n) + ")";
  pn.value = [cd](double s) { return s <= 0.0 ? 0.0 : cd->phi(cd->H_inverse(s)); };
  pn.derivative = [cd](double s) {
    if (s <= 0.0) return 0.0;
    const double x = cd->H_inverse(s);
    const double dh = cd->m / cd->n * std::pow(cd->integral(x), -1.0 / cd->n) * cd->kernel(x);
    return cd->phi.derivative(x) / dh;
  };
  pn.inverse = [cd](double y) { return y <= 0.0 ? 0.0 : cd->H(cd->phi.inverse(y)); };
  pn.limit = s_hi;
  pn.hint = {cd->H(range.lo), s_hi};
  d->phi_n = YoungFunction::analytic(std::move(pn));

  const auto phin = d->phi_n;
  d->vartheta = MonotoneFunction::with_bisection_inverse(
      "vartheta", [phin, np](double t) { return t <= 0.0 ? 0.0 : phin(std::pow(t, 1.0 / np)) / t; },
      {0.0, std::pow(s_hi, np)});
  d->varrho = MonotoneFunction::with_bisection_inverse(
      "varrho", [phin, np](double t) { return t <= 0.0 ? 0.0 : t / std::pow(phin.inverse(t), np); },
      {0.0, d->phi(range.hi)});

  if (opt.with_hat) d->hat = anisokit::hat_phi_circ(d->phi, n, range, opt.per_decade);
  EmbeddingProfile out;
  out.d_ = std::move(d);
  return out;
}

int EmbeddingProfile::n() const { return d_->n; }
double EmbeddingProfile::n_prime() const { return d_->n / d_->m; }
const YoungFunction& EmbeddingProfile::phi_circ() const { return d_->phi; }
const YoungFunction& EmbeddingProfile::original() const { return d_->original; }
bool EmbeddingProfile::modification_applied() const { return d_->modified; }
const DichotomyReport& EmbeddingProfile::dichotomy() const { return d_->dich; }
Domain EmbeddingProfile::range() const { return d_->range; }
double EmbeddingProfile::kappa2() const { return d_->kappa2; }
double EmbeddingProfile::H(double t) const { return d_->H(t); }
double EmbeddingProfile::H_inverse(double s) const { return d_->H_inverse(s); }
const YoungFunction& EmbeddingProfile::phi_n() const { return d_->phi_n; }
const MonotoneFunction& EmbeddingProfile::vartheta() const { return d_->vartheta; }
const MonotoneFunction& EmbeddingProfile::varrho() const { return d_->varrho; }
const YoungFunction& EmbeddingProfile::hat_phi_circ() const { return d_->hat; }

void EmbeddingProfile::write_csv(std::ostream& os, double per_decade) const {
  os << "t,H(t),sobolev_conjugate(t),optimal_target(t),vartheta(t),varrho(t)\n";
  auto cell = [](auto&& f) -> std::string {
    try {
      const double v = f();
      if (!std::isfinite(v)) return "";
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      return buf;
    } catch (const Error&) {
      return "";
    }
  };
  for (double t : log_grid(d_->range.lo, d_->range.hi, per_decade)) {
    os << cell([&] { return t; }) << ',' << cell([&] { return H(t); }) << ','
       << cell([&] { return d_->phi_n(t); }) << ','
       << (d_->hat ? cell([&] { return d_->hat(t); }) : std::string()) << ','
       << cell([&] { return d_->vartheta(t); }) << ',' << cell([&] { return d_->varrho(t); }) << '\n';
  }
}

nlohmann::json EmbeddingProfile::report() const {
  return {{"n", d_->n},
          {"phi_circ", d_->original.id()},
          {"dichotomy", d_->dich.to_json()},
          {"modification_applied", d_->modified},
          {"range", {d_->range.lo, d_->range.hi}},
          {"kappa2", d_->kappa2},
          {"sobolev_conjugate_limit", d_->phi_n.limit()}};
}

}  // namespace anisokit
