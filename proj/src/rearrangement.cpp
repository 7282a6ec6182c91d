#include "anisokit/rearrangement.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "anisokit/error.hpp"
#include "anisokit/numerics.hpp"
#include "anisokit/sobolev.hpp"

namespace anisokit {

// ---------------------------------------------------------------------------
// RearrangedFunction

RearrangedFunction::RearrangedFunction(std::vector<double> breakpoints, std::vector<double> values)
    : s_(std::move(breakpoints)), v_(std::move(values)) {
  if (v_.empty() || s_.size() != v_.size() + 1)
    throw Error(ErrorKind::invalid_input, "rearranged function: need m values and m+1 breakpoints");
  if (s_[0] != 0.0) throw Error(ErrorKind::invalid_input, "rearranged function: first breakpoint must be 0");
  for (std::size_t j = 1; j < s_.size(); ++j)
    if (!(s_[j] > s_[j - 1]) || !std::isfinite(s_[j]))
      throw Error(ErrorKind::invalid_input, "rearranged function: breakpoints must increase");
  for (std::size_t j = 0; j < v_.size(); ++j) {
    if (!(v_[j] >= 0.0) || !std::isfinite(v_[j]))
      throw Error(ErrorKind::invalid_input, "rearranged function: values must be finite and >= 0");
    if (j > 0 && v_[j] > v_[j - 1])
      throw Error(ErrorKind::invalid_input, "rearranged function: values must be nonincreasing");
  }
  cum_.resize(s_.size());
  cum_[0] = 0.0;
  for (std::size_t j = 0; j < v_.size(); ++j) cum_[j + 1] = cum_[j] + v_[j] * (s_[j + 1] - s_[j]);
}

RearrangedFunction RearrangedFunction::constant(double c, double measure) {
  if (!(measure > 0.0)) throw Error(ErrorKind::invalid_input, "rearranged function: measure must be positive");
  return RearrangedFunction({0.0, measure}, {std::abs(c)});
}

namespace {

std::size_t cell_of(const std::vector<double>& s, double x) {
  const auto it = std::upper_bound(s.begin(), s.end(), x);
  return static_cast<std::size_t>(it - s.begin()) - 1;
}

}  // namespace

double RearrangedFunction::operator()(double s) const {
  if (s < 0.0 || s >= measure()) return 0.0;
  return v_[cell_of(s_, s)];
}

double RearrangedFunction::integral(double s) const {
  if (s <= 0.0) return 0.0;
  if (s >= measure()) return cum_.back();
  const std::size_t j = cell_of(s_, s);
  return cum_[j] + v_[j] * (s - s_[j]);
}

double RearrangedFunction::maximal(double s) const {
  if (!(s > 0.0)) return v_.empty() ? 0.0 : v_[0];
  return integral(s) / s;
}

double RearrangedFunction::distribution(double t) const {
  // values are nonincreasing: the set {u* > t} is an initial segment
  const auto k = static_cast<std::size_t>(
      std::partition_point(v_.begin(), v_.end(), [t](double v) { return v > t; }) - v_.begin());
  return s_[k];
}

double RearrangedFunction::measure_at_least(double t) const {
  const auto k = static_cast<std::size_t>(
      std::partition_point(v_.begin(), v_.end(), [t](double v) { return v >= t; }) - v_.begin());
  return s_[k];
}

RearrangedFunction RearrangedFunction::scaled(double c) const {
  std::vector<double> v(v_);
  for (double& x : v) x *= std::abs(c);
  return RearrangedFunction(s_, std::move(v));
}

RearrangedFunction rearrange(const std::vector<double>& values, const std::vector<double>& measures) {
  if (values.size() != measures.size())
    throw Error(ErrorKind::invalid_input, "rearrange: values and measures differ in length");
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(measures[i] >= 0.0) || !std::isfinite(measures[i]))
      throw Error(ErrorKind::invalid_input, "rearrange: negative or non-finite cell measure");
    if (!std::isfinite(values[i])) throw Error(ErrorKind::invalid_input, "rearrange: non-finite value");
    if (measures[i] > 0.0) idx.push_back(i);
  }
  if (idx.empty()) throw Error(ErrorKind::invalid_input, "rearrange: total measure is zero");
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return std::abs(values[a]) > std::abs(values[b]); });
  std::vector<double> s{0.0}, v;
  double acc = 0.0;
  for (std::size_t i : idx) {
    const double x = std::abs(values[i]);
    acc += measures[i];
    if (!v.empty() && v.back() == x) {
      s.back() = acc;
    } else {
      v.push_back(x);
      s.push_back(acc);
    }
  }
  return RearrangedFunction(std::move(s), std::move(v));
}

RearrangedFunction maximal_rearrangement(const RearrangedFunction& u, int per_step) {
  const auto& s = u.breakpoints();
  const auto& v = u.values();
  std::vector<double> bs{0.0, s[1]}, bv{v[0]};
  for (std::size_t j = 1; j < v.size(); ++j) {
    const double a = s[j], b = s[j + 1];
    // u** = v + (C - v a)/s on [a, b)
    const double k = u.integral(a) - v[j] * a;
    const int pieces = b / a > 1.05 ? std::max(1, per_step) : 1;
    double x0 = a;
    for (int q = 1; q <= pieces; ++q) {
      const double x1 = q == pieces ? b : a * std::pow(b / a, static_cast<double>(q) / pieces);
      const double avg = v[j] + k * std::log(x1 / x0) / (x1 - x0);
      bs.push_back(x1);
      bv.push_back(std::min(avg, bv.back()));
      x0 = x1;
    }
  }
  return RearrangedFunction(std::move(bs), std::move(bv));
}

double product_integral(const RearrangedFunction& u, const RearrangedFunction& v) {
  const double top = std::min(u.measure(), v.measure());
  std::vector<double> cuts;
  for (double x : u.breakpoints())
    if (x < top) cuts.push_back(x);
  for (double x : v.breakpoints())
    if (x < top) cuts.push_back(x);
  cuts.push_back(top);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  double sum = 0.0;
  for (std::size_t i = 1; i < cuts.size(); ++i) {
    const double mid = 0.5 * (cuts[i - 1] + cuts[i]);
    sum += u(mid) * v(mid) * (cuts[i] - cuts[i - 1]);
  }
  return sum;
}

void write_csv(std::ostream& os, const RearrangedFunction& u) {
  os << "s,value\n";
  os.precision(17);
  for (std::size_t j = 0; j < u.size(); ++j) os << u.breakpoints()[j + 1] << ',' << u.values()[j] << '\n';
}

RearrangedFunction read_rearranged_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorKind::io, "rearranged csv: empty input");
  std::vector<double> s{0.0}, v;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double a = 0.0, b = 0.0;
    if (!(row >> a >> b)) throw Error(ErrorKind::io, "rearranged csv: malformed row '" + line + "'");
    s.push_back(a);
    v.push_back(b);
  }
  return RearrangedFunction(std::move(s), std::move(v));
}

// ---------------------------------------------------------------------------
// Data realized on log breakpoints

DataProfile power_data(double c, double a, double measure) {
  if (!(c >= 0.0) || !(measure > 0.0)) throw Error(ErrorKind::invalid_input, "power data: need c >= 0, measure > 0");
  DataProfile f;
  std::ostringstream id;
  id << c << "*s^-" << a;
  f.id = id.str();
  f.value = [c, a](double s) { return c * std::pow(s, -a); };
  f.primitive = [c, a](double s) { return a < 1.0 ? c * std::pow(s, 1.0 - a) / (1.0 - a) : inf; };
  f.measure = measure;
  return f;
}

RearrangedFunction realize(const DataProfile& f, std::size_t cells, double s_min_ratio) {
  if (cells < 2) throw Error(ErrorKind::invalid_input, "realize: need at least two cells");
  const double top = f.measure;
  std::vector<double> s{0.0};
  for (double x : log_space(s_min_ratio * top, top, cells)) s.push_back(x);
  std::vector<double> v(s.size() - 1);
  // fixed 8-point Gauss rule in log s: cells are narrow and the datum is smooth away from 0
  auto cell_mass = [&f](double a, double b) {
    using G8 = boost::math::quadrature::gauss<double, 8>;
    const double ya = std::log(a), yb = std::log(b), mid = 0.5 * (ya + yb), half = 0.5 * (yb - ya);
    double sum = 0.0;
    for (std::size_t i = 0; i < G8::abscissa().size(); ++i)
      for (double sign : {-1.0, 1.0}) {
        const double x = std::exp(mid + sign * half * G8::abscissa()[i]);
        sum += G8::weights()[i] * half * x * f.value(x);
      }
    return sum;
  };
  for (std::size_t j = 1; j < v.size(); ++j) {
    const double a = s[j], b = s[j + 1];
    double mass = f.primitive ? f.primitive(b) - f.primitive(a) : NAN;
    if (!std::isfinite(mass)) mass = cell_mass(a, b);
    v[j] = mass / (b - a);
  }
  const double s1 = s[1];
  double head = f.primitive ? f.primitive(s1) : integrate_singular(f.value, 0.0, s1, 1e-10).value;
  // a non-integrable datum keeps a finite first step; the divergence probe sees the growth
  v[0] = std::isfinite(head) && head > 0.0 ? head / s1 : f.value(0.5 * s1);
  for (std::size_t j = v.size() - 1; j > 0; --j) v[j - 1] = std::max(v[j - 1], v[j]);
  return RearrangedFunction(std::move(s), std::move(v));
}

// ---------------------------------------------------------------------------
// Quadrature over step data

namespace {

// Nodes (s_k, w_k) with u(s_k) for u = u* or u**: Gauss-Legendre in log s per step; the first
// step (0, s_1) is split geometrically down to s_1 * 2^-110.
struct Nodes {
  std::vector<double> s, w, g;
  double s1 = 0.0, top = 0.0;
};

void add_log_gauss(Nodes& nd, double a, double b, bool fine, const std::function<double(double)>& g) {
  using G8 = boost::math::quadrature::gauss<double, 8>;
  const double ya = std::log(a), yb = std::log(b);
  const double mid = 0.5 * (ya + yb), half = 0.5 * (yb - ya);
  auto push = [&](double y, double w) {
    const double x = std::exp(y);
    nd.s.push_back(x);
    nd.w.push_back(w * half * x);
    nd.g.push_back(g(x));
  };
  if (!fine) {
    const double off = half / std::sqrt(3.0);
    push(mid - off, 1.0);
    push(mid + off, 1.0);
    return;
  }
  const auto& x = G8::abscissa();
  const auto& w = G8::weights();
  for (std::size_t i = 0; i < x.size(); ++i) {
    push(mid - half * x[i], w[i]);
    push(mid + half * x[i], w[i]);
  }
}

Nodes build_nodes(const RearrangedFunction& u, Variant variant, bool s_dependent) {
  Nodes nd;
  const auto& s = u.breakpoints();
  const auto& v = u.values();
  nd.s1 = s[1];
  nd.top = u.measure();
  if (!s_dependent && variant == Variant::star) {
    for (std::size_t j = 0; j < v.size(); ++j) {
      nd.s.push_back(0.5 * (s[j] + s[j + 1]));
      nd.w.push_back(s[j + 1] - s[j]);
      nd.g.push_back(v[j]);
    }
    return nd;
  }
  const double v0 = v[0];
  for (int k = 109; k >= 0; --k)
    add_log_gauss(nd, std::ldexp(s[1], -k - 1), std::ldexp(s[1], -k), true, [v0](double) { return v0; });
  for (std::size_t j = 1; j < v.size(); ++j) {
    const double a = s[j], b = s[j + 1];
    std::function<double(double)> g;
    if (variant == Variant::star) {
      const double c = v[j];
      g = [c](double) { return c; };
    } else {
      const double c = v[j], k = u.integral(a) - v[j] * a;
      g = [c, k](double x) { return c + k / x; };
    }
    if (b / a < 1.05) {
      add_log_gauss(nd, a, b, false, g);
      continue;
    }
    const int pieces = static_cast<int>(std::ceil(std::log2(b / a)));
    double x0 = a;
    for (int q = 1; q <= pieces; ++q) {
      const double x1 = q == pieces ? b : a * std::pow(b / a, static_cast<double>(q) / pieces);
      add_log_gauss(nd, x0, x1, true, g);
      x0 = x1;
    }
  }
  return nd;
}

TailIntegral sum_with_probe(const Nodes& nd, const std::function<double(double, double)>& f) {
  TailIntegral out;
  const double m1 = 10.0 * nd.s1, m2 = 100.0 * nd.s1, m3 = 1000.0 * nd.s1;
  double total = 0.0, above1 = 0.0, above2 = 0.0, above3 = 0.0;
  for (std::size_t k = 0; k < nd.s.size(); ++k) {
    const double term = nd.w[k] * f(nd.s[k], nd.g[k]);
    if (std::isnan(term) || term == inf) {
      out.value = inf;
      out.finite = false;
      return out;
    }
    total += term;
    if (nd.s[k] >= m1) above1 += term;
    if (nd.s[k] >= m2) above2 += term;
    if (nd.s[k] >= m3) above3 += term;
  }
  out.value = total;
  if (m3 < nd.top) {
    const double near = above1 - above2, far = above2 - above3;
    out.increment_ratio = far > 0.0 ? near / far : 0.0;
    out.growth = above3 > 0.0 ? above1 / above3 : 0.0;
    const bool flat = far > 0.0 && out.increment_ratio >= std::pow(10.0, -0.02);
    if (out.growth > 10.0 || flat) {
      out.finite = false;
      out.value = inf;
    }
  }
  return out;
}

NormResult norm_by_bisection(const std::function<TailIntegral(double)>& modular, bool zero) {
  NormResult out;
  if (zero) return out;
  auto ok = [&](double lam) {
    const auto m = modular(lam);
    return m.finite && m.value <= 1.0;
  };
  double lo = 1.0, hi = 1.0;
  if (ok(1.0)) {
    lo = 0.25;
    while (ok(lo)) {
      hi = lo;
      lo *= 0.25;
      if (lo < 1e-300) {
        out.value = hi;
        return out;
      }
    }
  } else {
    hi = 4.0;
    while (!ok(hi)) {
      lo = hi;
      hi *= 4.0;
      if (hi > 1e300) {
        const auto last = modular(hi);
        if (!last.finite) {
          out.value = inf;
          out.finite = false;
          return out;
        }
        throw RangeError("luxemburg norm: modular stays above 1 (last value " + std::to_string(last.value) +
                             ") on the lambda bracket",
                         1e-300, 1e300);
      }
    }
  }
  while (hi / lo - 1.0 > 1e-15) {
    const double mid = std::sqrt(lo * hi);
    if (mid <= lo || mid >= hi) break;
    (ok(mid) ? hi : lo) = mid;
  }
  out.value = hi;
  return out;
}

bool all_zero(const RearrangedFunction& u) { return u.values().front() == 0.0; }

// f** needs f in L^1: the realized step datum is always summable, so probe its integral near 0
TailIntegral datum_integral(const RearrangedFunction& f) {
  return sum_with_probe(build_nodes(f, Variant::star, false), [](double, double g) { return g; });
}

}  // namespace

nlohmann::json TailIntegral::to_json() const {
  nlohmann::json j;
  if (finite)
    j["value"] = value;
  else
    j["value"] = "inf";
  j["finite"] = finite;
  j["increment_ratio"] = increment_ratio;
  j["growth"] = growth;
  return j;
}

NormResult luxemburg_norm(const YoungFunction& a, const RearrangedFunction& u) {
  return orlicz_lorentz_norm(a, inf, u, Variant::star);
}

NormResult orlicz_lorentz_norm(const YoungFunction& a, double r, const RearrangedFunction& u, Variant variant) {
  if (r == 0.0) throw Error(ErrorKind::invalid_input, "Orlicz-Lorentz norm: r must be nonzero");
  const double gamma = std::isinf(r) ? 0.0 : 1.0 / r;
  const Nodes nd = build_nodes(u, variant, gamma != 0.0);
  std::vector<double> h(nd.s.size());
  for (std::size_t k = 0; k < h.size(); ++k) h[k] = (gamma == 0.0 ? 1.0 : std::pow(nd.s[k], gamma)) * nd.g[k];
  Nodes hn = nd;
  hn.g = h;
  auto modular = [&](double lam) {
    return sum_with_probe(hn, [&a, lam](double, double x) { return a(x / lam); });
  };
  return norm_by_bisection(modular, all_zero(u));
}

// ---------------------------------------------------------------------------
// Admissibility and boundedness

namespace {

AdmissibilityReport admissibility_with(const RearrangedFunction& f, const YoungFunction& conj, int n,
                                       std::vector<double> lambdas) {
  AdmissibilityReport rep;
  if (lambdas.empty()) {
    lambdas = log_space(1e-2, 1e2, 8);
    std::reverse(lambdas.begin(), lambdas.end());
  }
  rep.lambdas = lambdas;
  if (!datum_integral(f).finite) {
    rep.admissible = false;
    rep.failing_lambda = lambdas.front();
    rep.verdict = "inadmissible: datum not integrable";
    return rep;
  }
  const Nodes nd = build_nodes(f, Variant::double_star, true);
  const double inv_n = 1.0 / n;
  for (double lam : lambdas) {
    const auto m = sum_with_probe(
        nd, [&conj, inv_n, lam](double s, double g) { return conj(std::pow(s, inv_n) * g / lam); });
    rep.modulars.push_back(m);
    if (!m.finite && rep.admissible) {
      rep.admissible = false;
      rep.failing_lambda = lam;
    }
  }
  if (rep.admissible) {
    rep.verdict = "admissible on the ladder";
  } else {
    std::ostringstream os;
    os << "inadmissible at lambda=" << rep.failing_lambda;
    rep.verdict = os.str();
  }
  return rep;
}

}  // namespace

nlohmann::json AdmissibilityReport::to_json() const {
  nlohmann::json j;
  j["admissible"] = admissible;
  j["convergent_dichotomy"] = convergent_dichotomy;
  j["verdict"] = verdict;
  j["lambdas"] = lambdas;
  j["modulars"] = nlohmann::json::array();
  for (const auto& m : modulars) j["modulars"].push_back(m.to_json());
  if (!admissible) j["failing_lambda"] = failing_lambda;
  return j;
}

AdmissibilityReport data_admissibility(const RearrangedFunction& f, const EmbeddingProfile& profile,
                                       std::vector<double> lambdas) {
  return admissibility_with(f, profile.original().conjugate(), profile.n(), std::move(lambdas));
}

AdmissibilityReport data_admissibility(const RearrangedFunction& f, const YoungFunction& phi_circ, int n,
                                       std::vector<double> lambdas) {
  if (classify_integral(phi_circ, n).verdict == Dichotomy::convergent) {
    AdmissibilityReport rep;
    rep.convergent_dichotomy = true;
    rep.admissible = datum_integral(f).finite;
    rep.verdict = rep.admissible ? "any integrable datum is admissible (convergent dichotomy)"
                                 : "inadmissible: datum not integrable";
    return rep;
  }
  return admissibility_with(f, phi_circ.conjugate(), n, std::move(lambdas));
}

TailIntegral boundedness_criterion(const RearrangedFunction& f, const MonotoneFunction& psi_diamond, int n) {
  if (n < 2) throw Error(ErrorKind::invalid_input, "dimension must be >= 2");
  if (all_zero(f)) return {};
  const auto mass = datum_integral(f);
  if (!mass.finite) return mass;
  const double c = n * std::pow(unit_ball_volume(n), 1.0 / n);
  const double inv_n = 1.0 / n, inv_np = (n - 1.0) / n;
  const Nodes nd = build_nodes(f, Variant::double_star, true);
  auto out = sum_with_probe(nd, [&](double s, double g) {
    return std::pow(s, -inv_np) * psi_diamond.inverse(std::pow(s, inv_n) * g / c);
  });
  if (out.finite) out.value /= c;
  return out;
}

}  // namespace anisokit
