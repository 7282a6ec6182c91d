#include "anisokit/examples.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "anisokit/error.hpp"
#include "anisokit/numerics.hpp"

namespace anisokit {

namespace {

using nlohmann::json;

constexpr double same_tol = 1e-9;  // p_bar = n and alpha_bar = n - 1 up to rounding

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

bool equal(double a, double b) { return std::abs(a - b) <= same_tol * std::max(1.0, std::abs(b)); }

[[noreturn]] void violated(const std::string& id, const std::string& hypothesis, const std::string& values) {
  throw Error(ErrorKind::invalid_input, id + ": hypothesis '" + hypothesis + "' violated (" + values + ")");
}

void require_finite(const std::string& id, std::initializer_list<double> xs) {
  for (double x : xs)
    if (!std::isfinite(x)) throw Error(ErrorKind::invalid_input, id + ": parameters must be finite");
}

// p > 1 with any alpha, or p = 1 with alpha > 0
void check_power_log(const std::string& id, const std::string& p_name, double p, const std::string& a_name,
                     double alpha) {
  require_finite(id, {p, alpha});
  if (p > 1.0 || (p == 1.0 && alpha > 0.0)) return;
  violated(id, "either " + p_name + " > 1 and " + a_name + " real, or " + p_name + " = 1 and " + a_name + " > 0",
           p_name + "=" + fmt(p) + ", " + a_name + "=" + fmt(alpha));
}

std::vector<double> numbers(const json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorKind::invalid_input, std::string("missing parameter '") + key + "'");
  const auto& v = j.at(key);
  if (v.is_number()) return {v.get<double>()};
  if (v.is_array()) {
    std::vector<double> out;
    for (const auto& x : v) {
      if (!x.is_number()) throw Error(ErrorKind::invalid_input, std::string("parameter '") + key + "' must be numeric");
      out.push_back(x.get<double>());
    }
    return out;
  }
  throw Error(ErrorKind::invalid_input, std::string("parameter '") + key + "' must be a number or an array");
}

double scalar(const json& j, const char* key) {
  const auto v = numbers(j, key);
  if (v.size() != 1) throw Error(ErrorKind::invalid_input, std::string("parameter '") + key + "' must be a scalar");
  return v.front();
}

double scalar_or(const json& j, const char* key, double fallback) { return j.contains(key) ? scalar(j, key) : fallback; }

int dimension(const json& j) {
  const double n = scalar(j, "n");
  if (n != std::floor(n) || n < 2.0) throw Error(ErrorKind::invalid_input, "n must be an integer >= 2");
  return static_cast<int>(n);
}

void check_dimension(const std::string& id, int n) {
  if (n < 2) violated(id, "n >= 2", "n=" + std::to_string(n));
}

std::string term_spec(const ExampleTerm& t, double c) {
  if (t.exp_beta > 0.0) return "exp_power:beta=" + fmt(t.exp_beta);
  if (t.alpha == 0.0) return "power:p=" + fmt(t.p) + ",scale=1";
  return "power_log:p=" + fmt(t.p) + ",alpha=" + fmt(t.alpha) + ",shift=" + fmt(c) + ",scale=1";
}

// ---------------------------------------------------------------------------
// Regression in iterated-log coordinates

struct Window {
  double lo = 0.0, hi = 0.0;
};

// Below this the log log coordinate is too close to 0 to carry an exponent.
constexpr double min_window_start = 1e2;

Window top_window(double hi, double decades) { return {hi * std::pow(10.0, -decades), hi}; }

// Coefficients of log f on [1, log t, log log t] after removing loglog * log log log t.
std::array<double, 2> power_log_fit(const std::function<double(double)>& f, Window w, double loglog = 0.0) {
  std::vector<double> one, l, ll, y;
  for (double t : log_space(w.lo, w.hi, 97)) {
    const double L = std::log(t);
    one.push_back(1.0);
    l.push_back(L);
    ll.push_back(std::log(L));
    y.push_back(std::log(f(t)) - loglog * std::log(std::log(L)));
  }
  const auto fit = least_squares({one, l, ll}, y);
  return {fit.coef[1], fit.coef[2]};
}

double slope_against(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> one(x.size(), 1.0);
  return least_squares({one, x}, y).coef[1];
}

// Exponents of g = dI/dlog x with I = H^{n'} the inner integral of the profile: e1 against log x,
// then e2 of g log x against log log x. Derivatives drop the additive constants of I that an
// iterated-log fit of I itself cannot separate on a double-precision range.
std::array<double, 2> kernel_exponents(const EmbeddingProfile& prof, Window w) {
  const double np = prof.n_prime();
  const double d = 1e-3;
  auto I = [&](double x) { return std::pow(prof.H(x), np); };
  std::vector<double> lL, lL2, lg, lgL;
  for (double x : log_space(w.lo, w.hi * std::exp(-d), 97)) {
    const double g = (I(x * std::exp(d)) - I(x * std::exp(-d))) / (2.0 * d);
    const double L = std::log(x);
    lL.push_back(std::log(L));
    lL2.push_back(std::log(std::log(L)));
    lg.push_back(std::log(g));
    lgL.push_back(std::log(g * L));
  }
  return {slope_against(lL, lg), slope_against(lL2, lgL)};
}

ExponentCheck make_check(const Asymptotic& e, std::string quantity, double expected, double measured,
                         const VerifyOptions& opt, Window w) {
  ExponentCheck c;
  c.variable = e.variable;
  c.function = e.function;
  c.quantity = std::move(quantity);
  c.expected = expected;
  c.measured = measured;
  c.window = {w.lo, w.hi};
  // exp(exp(t^g)) is read off the log log exponent of the inner integral: log-class tolerance
  const bool power_class = c.quantity == "power" || (c.quantity == "exp_inner" && e.exp_level == 1);
  if (power_class && expected != 0.0) {
    c.relative = true;
    c.tolerance = opt.power_tol;
    c.pass = std::abs(measured - expected) <= opt.power_tol * std::abs(expected);
  } else {
    c.tolerance = power_class ? opt.power_tol : opt.log_tol;
    c.pass = std::abs(measured - expected) <= c.tolerance;
  }
  return c;
}

double trusted_top(const YoungFunction& phi_circ, const VerifyOptions& opt) {
  if (phi_circ.form() == Form::sampled) return phi_circ.abscissae().back();
  return std::min(phi_circ.limit(), opt.analytic_top);
}

void finalize(VerificationReport& rep) {
  if (rep.status == VerifyStatus::inconclusive) return;
  bool ok = rep.measured_regime == rep.expected_regime;
  if (!ok)
    rep.notes.push_back(std::string("regime mismatch: expected ") + to_string(rep.expected_regime) + ", measured " +
                        to_string(rep.measured_regime));
  for (const auto& c : rep.checks) ok = ok && c.pass;
  rep.status = ok ? VerifyStatus::pass : VerifyStatus::fail;
}

// Fits Phi_circ and runs the dichotomy; returns false when the window is too short.
bool check_phi_circ(const ExampleRecord& rec, const Regularity& expected, const YoungFunction& circ, double top,
                    const VerifyOptions& opt, VerificationReport& rep, double& fitted_power) {
  const Window w = top_window(top, opt.decades);
  if (w.lo < min_window_start || top < 1e6) {
    rep.status = VerifyStatus::inconclusive;
    rep.notes.push_back("trusted range of Phi_circ ends at " + fmt(top) + ": need " + fmt(opt.decades) +
                        " decades above " + fmt(min_window_start) + " and a top of at least 1e6");
    return false;
  }
  const auto& e = expected.entries.front();
  const auto fit = power_log_fit([&](double t) { return circ(t); }, w);
  rep.checks.push_back(make_check(e, "power", e.power, fit[0], opt, w));
  rep.checks.push_back(make_check(e, "log", e.log, fit[1], opt, w));
  fitted_power = fit[0];
  rep.dichotomy = classify_integral(circ, rec.n(), {std::max(w.lo, top / 100.0), top});
  return true;
}

VerificationReport verify_profile(const ExampleRecord& rec, const EmbeddingProfile& prof, const VerifyOptions& opt,
                                  VerificationReport rep, double fitted_power) {
  const auto expected = expected_regularity(rec);
  const int n = rec.n();
  const double np = prof.n_prime();
  const double x_hi = prof.range().hi;
  const Window xw = top_window(x_hi, opt.decades);
  const auto ke = kernel_exponents(prof, xw);

  if (fitted_power < n * (1.0 - opt.power_tol))
    rep.measured_regime = Regime::subcritical;
  else
    rep.measured_regime = ke[0] + 1.0 > opt.log_tol ? Regime::exp : Regime::double_exp;

  const double s_hi = prof.phi_n().limit();
  const double level_hi = prof.phi_circ()(x_hi);
  for (const auto& e : expected.entries) {
    if (e.function == "phi_circ") continue;
    if (e.function == "sobolev_conjugate") {
      const Window w = top_window(s_hi, opt.decades);
      const auto fit = power_log_fit([&](double s) { return prof.phi_n()(s); }, w);
      rep.checks.push_back(make_check(e, "power", e.power, fit[0], opt, w));
      rep.checks.push_back(make_check(e, "log", e.log, fit[1], opt, w));
    } else if (e.function == "vartheta" && e.exp_level == 0) {
      const Window w = top_window(std::pow(s_hi, np), opt.decades);
      const auto fit = power_log_fit([&](double t) { return prof.vartheta()(t); }, w);
      rep.checks.push_back(make_check(e, "power", e.power, fit[0], opt, w));
      rep.checks.push_back(make_check(e, "log", e.log, fit[1], opt, w));
    } else if (e.function == "vartheta") {
      // exp(t^g) for u means I ~ (log x)^{1/g}; exp(exp(t^g)) means I ~ (log log x)^{1/g}
      if (e.exp_level == 2) {
        Asymptotic k = e;
        k.function = "integral_kernel";
        rep.checks.push_back(make_check(k, "log", -1.0, ke[0], opt, xw));
      }
      const double inner = e.exp_level == 1 ? 1.0 / (1.0 + ke[0]) : 1.0 / (1.0 + ke[1]);
      rep.checks.push_back(make_check(e, "exp_inner", e.power, inner, opt, xw));
    } else if (e.function == "varrho") {
      const auto a = rec.term_function(static_cast<std::size_t>(std::max(e.term, 0)));
      const double t_top = a.inverse(level_hi) * (1.0 - 1e-9);
      const Window w = top_window(t_top, opt.decades);
      if (w.lo < min_window_start) {
        rep.status = VerifyStatus::inconclusive;
        rep.notes.push_back("varrho window for " + e.variable + " starts below " + fmt(min_window_start));
        return rep;
      }
      // the log log factor of varrho is 1/I in the double-exponential case
      const double loglog = e.loglog != 0.0 ? -(1.0 + ke[1]) : 0.0;
      const auto fit = power_log_fit([&](double t) { return prof.varrho()(a(t)); }, w, loglog);
      rep.checks.push_back(make_check(e, "power", e.power, fit[0], opt, w));
      rep.checks.push_back(make_check(e, "log", e.log, fit[1], opt, w));
      if (e.loglog != 0.0) rep.checks.push_back(make_check(e, "loglog", e.loglog, loglog, opt, xw));
    }
  }
  rep.status = VerifyStatus::fail;
  finalize(rep);
  return rep;
}

ProfileOptions profile_options(const YoungFunction& circ, double top) {
  ProfileOptions po;
  po.with_hat = false;
  if (circ.form() != Form::sampled) po.t_hi = top;
  return po;
}

}  // namespace

const char* to_string(Regime r) {
  switch (r) {
    case Regime::subcritical: return "subcritical";
    case Regime::exp: return "exp";
    case Regime::double_exp: return "double_exp";
    case Regime::convergent: return "convergent";
  }
  return "unknown";
}

const char* to_string(VerifyStatus s) {
  switch (s) {
    case VerifyStatus::pass: return "pass";
    case VerifyStatus::fail: return "fail";
    case VerifyStatus::inconclusive: return "inconclusive";
  }
  return "unknown";
}

json Asymptotic::to_json() const {
  json j{{"variable", variable}, {"function", function}, {"exp_level", exp_level}, {"power", power}};
  if (exp_level == 0) {
    j["log"] = log;
    j["loglog"] = loglog;
  }
  if (term >= 0) j["term"] = term;
  return j;
}

// ---------------------------------------------------------------------------
// Records

ExampleRecord ExampleRecord::plap(double p, int n) {
  require_finite("plap", {p});
  if (!(p > 1.0)) violated("plap", "1 < p < infinity", "p=" + fmt(p));
  check_dimension("plap", n);
  ExampleRecord r;
  r.id_ = "plap";
  r.n_ = n;
  r.params_ = {{"p", p}, {"n", n}};
  r.terms_.push_back({"grad u", {}, p, 0.0, 0.0});
  r.finish();
  return r;
}

ExampleRecord ExampleRecord::iso_zyg(double p, double alpha, int n) {
  check_power_log("iso_zyg", "p", p, "alpha", alpha);
  check_dimension("iso_zyg", n);
  ExampleRecord r;
  r.id_ = "iso_zyg";
  r.n_ = n;
  r.params_ = {{"p", p}, {"alpha", alpha}, {"n", n}};
  r.terms_.push_back({"grad u", {}, p, alpha, 0.0});
  r.finish();
  return r;
}

ExampleRecord ExampleRecord::aniso_plap(std::vector<double> p) {
  const int n = static_cast<int>(p.size());
  check_dimension("aniso_plap", n);
  ExampleRecord r;
  r.id_ = "aniso_plap";
  r.n_ = n;
  r.params_ = {{"p", p}, {"n", n}};
  for (int i = 0; i < n; ++i) {
    require_finite("aniso_plap", {p[i]});
    if (!(p[i] > 1.0)) violated("aniso_plap", "p_i > 1 for every i", "p_" + std::to_string(i + 1) + "=" + fmt(p[i]));
    std::vector<double> c(n, 0.0);
    c[i] = 1.0;
    r.terms_.push_back({"u_x" + std::to_string(i + 1), c, p[i], 0.0, 0.0});
  }
  r.finish();
  return r;
}

ExampleRecord ExampleRecord::aniso_zyg(std::vector<double> p, std::vector<double> alpha) {
  const int n = static_cast<int>(p.size());
  check_dimension("aniso_zyg", n);
  if (alpha.size() != p.size())
    throw Error(ErrorKind::invalid_input, "aniso_zyg: p and alpha need one entry per coordinate");
  ExampleRecord r;
  r.id_ = "aniso_zyg";
  r.n_ = n;
  r.params_ = {{"p", p}, {"alpha", alpha}, {"n", n}};
  for (int i = 0; i < n; ++i) {
    const std::string k = std::to_string(i + 1);
    check_power_log("aniso_zyg", "p_" + k, p[i], "alpha_" + k, alpha[i]);
    std::vector<double> c(n, 0.0);
    c[i] = 1.0;
    r.terms_.push_back({"u_x" + k, c, p[i], alpha[i], 0.0});
  }
  r.finish();
  return r;
}

ExampleRecord ExampleRecord::aniso_trud(double p, double q, double alpha, double c) {
  require_finite("aniso_trud", {p, q, alpha, c});
  if (!(p > 1.0)) violated("aniso_trud", "p > 1", "p=" + fmt(p));
  check_power_log("aniso_trud", "q", q, "alpha", alpha);
  ExampleRecord r;
  r.id_ = "aniso_trud";
  r.n_ = 2;
  r.c_ = c;
  r.params_ = {{"p", p}, {"q", q}, {"alpha", alpha}, {"n", 2}};
  r.terms_.push_back({"u_x1 - u_x2", {1.0, -1.0}, p, 0.0, 0.0});
  r.terms_.push_back({"u_x1", {1.0, 0.0}, q, alpha, 0.0});
  r.finish();
  return r;
}

ExampleRecord ExampleRecord::aniso_new(double p, double beta) {
  require_finite("aniso_new", {p, beta});
  if (!(p > 1.0 && beta > 1.0)) violated("aniso_new", "p > 1 and beta > 1", "p=" + fmt(p) + ", beta=" + fmt(beta));
  ExampleRecord r;
  r.id_ = "aniso_new";
  r.n_ = 2;
  r.params_ = {{"p", p}, {"beta", beta}, {"n", 2}};
  r.terms_.push_back({"u_x1 + 3 u_x2", {1.0, 3.0}, p, 0.0, 0.0});
  r.terms_.push_back({"2 u_x1 - u_x2", {2.0, -1.0}, 0.0, 0.0, beta});
  r.finish();
  return r;
}

const std::vector<std::string>& ExampleRecord::ids() {
  static const std::vector<std::string> all{"plap", "iso_zyg", "aniso_plap", "aniso_zyg", "aniso_trud", "aniso_new"};
  return all;
}

ExampleRecord ExampleRecord::from_json(const std::string& id, const json& j) {
  if (!j.is_object()) throw Error(ErrorKind::invalid_input, "example parameters must be a JSON object");
  if (id == "plap") return plap(scalar(j, "p"), dimension(j));
  if (id == "iso_zyg") return iso_zyg(scalar(j, "p"), scalar_or(j, "alpha", 0.0), dimension(j));
  if (id == "aniso_plap" || id == "aniso_zyg") {
    const auto p = numbers(j, "p");
    if (j.contains("n") && dimension(j) != static_cast<int>(p.size()))
      throw Error(ErrorKind::invalid_input, id + ": n must equal the number of exponents");
    if (id == "aniso_plap") return aniso_plap(p);
    auto alpha = j.contains("alpha") ? numbers(j, "alpha") : std::vector<double>(p.size(), 0.0);
    return aniso_zyg(p, alpha);
  }
  if (id == "aniso_trud")
    return aniso_trud(scalar(j, "p"), scalar(j, "q"), scalar(j, "alpha"), scalar_or(j, "c", 0.0));
  if (id == "aniso_new") return aniso_new(scalar(j, "p"), scalar(j, "beta"));
  throw Error(ErrorKind::invalid_input, "unknown example id '" + id + "'");
}

void ExampleRecord::finish() {
  // harmonic mean of the exponents; an exponential term counts as infinite p with alpha/p = -1/beta
  double inv = 0.0, ratio = 0.0;
  const bool radial = terms_.size() == 1 && terms_.front().coeffs.empty();
  if (radial) {
    p_bar_ = terms_.front().p;
    alpha_bar_ = terms_.front().alpha;
  } else {
    for (const auto& t : terms_) {
      if (t.exp_beta > 0.0) {
        ratio -= 1.0 / t.exp_beta;
      } else {
        inv += 1.0 / t.p;
        ratio += t.alpha / t.p;
      }
    }
    p_bar_ = n_ / inv;
    alpha_bar_ = p_bar_ / n_ * ratio;
  }
  // log(c + t) with c large enough that every logarithmic term is convex
  if (!(c_ > 0.0)) c_ = std::exp(2.0);
  for (int k = 0; k < 64; ++k) {
    bool convex = true;
    for (std::size_t i = 0; i < terms_.size(); ++i) convex = convex && term_function(i).convexity_certified();
    if (convex) {
      params_["c"] = c_;
      return;
    }
    c_ *= std::numbers::e;
  }
  throw Error(ErrorKind::non_convex, id_ + ": no shift c in log(c + t) makes the terms convex");
}

YoungFunction ExampleRecord::term_function(std::size_t k) const {
  if (k >= terms_.size()) throw Error(ErrorKind::invalid_input, "term index out of range");
  return YoungFunction::catalog(term_spec(terms_[k], c_));
}

AnisotropicFunction ExampleRecord::phi() const {
  if (terms_.size() == 1 && terms_.front().coeffs.empty()) return AnisotropicFunction::radial(n_, term_function(0));
  std::vector<YoungFunction> fns;
  std::vector<std::vector<double>> coeffs;
  bool split = true;
  for (std::size_t k = 0; k < terms_.size(); ++k) {
    fns.push_back(term_function(k));
    coeffs.push_back(terms_[k].coeffs);
    for (std::size_t i = 0; i < terms_[k].coeffs.size(); ++i)
      split = split && terms_[k].coeffs[i] == (i == k ? 1.0 : 0.0);
  }
  if (split && static_cast<int>(terms_.size()) == n_) return AnisotropicFunction::split(fns);
  return AnisotropicFunction::linear_combination(fns, coeffs);
}

json ExampleRecord::to_json() const {
  json terms = json::array();
  for (const auto& t : terms_) {
    json tj{{"variable", t.variable}, {"function", term_spec(t, c_)}};
    if (!t.coeffs.empty()) tj["coeffs"] = t.coeffs;
    terms.push_back(tj);
  }
  return {{"id", id_}, {"n", n_}, {"parameters", params_}, {"p_bar", p_bar_}, {"alpha_bar", alpha_bar_},
          {"terms", terms}};
}

// ---------------------------------------------------------------------------
// Expected regularity

json Regularity::to_json() const {
  json e = json::array();
  for (const auto& a : entries) e.push_back(a.to_json());
  return {{"regime", to_string(regime)}, {"entries", e}, {"notes", notes}};
}

Regularity expected_regularity(const ExampleRecord& rec) {
  Regularity out;
  const double n = rec.n(), P = rec.p_bar(), B = rec.alpha_bar();
  if (equal(P, n)) {
    if (equal(B, n - 1.0))
      out.regime = Regime::double_exp;
    else
      out.regime = B < n - 1.0 ? Regime::exp : Regime::convergent;
  } else {
    out.regime = P < n ? Regime::subcritical : Regime::convergent;
  }

  out.entries.push_back({"Phi", "phi_circ", 0, P, B, 0.0, -1});
  const bool radial = rec.terms().size() == 1 && rec.terms().front().coeffs.empty();
  auto add_terms = [&](auto&& exponents) {
    for (std::size_t k = 0; k < rec.terms().size(); ++k) {
      const auto& t = rec.terms()[k];
      Asymptotic a{t.variable, "varrho", 0, 0.0, 0.0, 0.0, radial ? -1 : static_cast<int>(k)};
      exponents(t, a);
      out.entries.push_back(a);
    }
  };
  switch (out.regime) {
    case Regime::subcritical: {
      out.entries.push_back({"u", "sobolev_conjugate", 0, n * P / (n - P), n * B / (n - P), 0.0, -1});
      out.entries.push_back({"u", "vartheta", 0, n * (P - 1.0) / (n - P), n * B / (n - P), 0.0, -1});
      const double g = n * (P - 1.0) / (P * (n - 1.0));
      add_terms([&](const ExampleTerm& t, Asymptotic& a) {
        a.power = t.p * g;
        a.log = t.alpha * g + n * B / (P * (n - 1.0));
      });
      break;
    }
    case Regime::exp:
      out.entries.push_back({"u", "vartheta", 1, (n - 1.0) / (n - 1.0 - B), 0.0, 0.0, -1});
      add_terms([&](const ExampleTerm& t, Asymptotic& a) {
        a.power = t.p;
        a.log = t.alpha + B / (n - 1.0) - 1.0;
      });
      break;
    case Regime::double_exp:
      out.entries.push_back({"u", "vartheta", 2, 1.0, 0.0, 0.0, -1});
      add_terms([&](const ExampleTerm& t, Asymptotic& a) {
        a.power = t.p;
        a.log = t.alpha;
        a.loglog = -1.0;
      });
      break;
    case Regime::convergent:
      out.notes.push_back("the inner integral converges: u is bounded and weak solutions exist for all L1 data");
      break;
  }
  if (rec.id() == "aniso_new") out.notes.push_back("p_bar = 2p > n = 2 for every admissible p");
  return out;
}

// ---------------------------------------------------------------------------
// Verification

json ExponentCheck::to_json() const {
  return {{"variable", variable}, {"function", function}, {"quantity", quantity}, {"expected", expected},
          {"measured", measured}, {"tolerance", tolerance}, {"relative", relative}, {"pass", pass},
          {"window", {window.lo, window.hi}}};
}

json VerificationReport::to_json() const {
  json c = json::array();
  for (const auto& x : checks) c.push_back(x.to_json());
  return {{"id", id},
          {"status", to_string(status)},
          {"expected_regime", to_string(expected_regime)},
          {"measured_regime", to_string(measured_regime)},
          {"dichotomy", dichotomy.to_json()},
          {"checks", c},
          {"notes", notes}};
}

YoungFunction computed_phi_circ(const ExampleRecord& rec, const VerifyOptions& opt) {
  const auto phi = rec.phi();
  if (phi.kind() == AnisotropicFunction::Kind::radial) return phi.terms().front().fn;
  PhiCircOptions po;
  po.level_lo = opt.level_lo;
  po.level_hi = opt.level_hi;
  // slow terms make the sublevel measure overflow before the level does
  while (po.level_hi > 1e10 * po.level_lo) {
    const double m = sublevel_measure(phi, po.level_hi, po.measure).value;
    if (std::isfinite(m) && m < 1e300) break;
    po.level_hi *= 1e-10;
  }
  po.levels = static_cast<std::size_t>(std::ceil(std::log10(opt.level_hi / opt.level_lo) * opt.levels_per_decade)) + 1;
  return phi_circ(phi, po).phi_circ;
}

VerificationReport verify_asymptotics(const ExampleRecord& rec, const YoungFunction& circ, const VerifyOptions& opt) {
  const auto expected = expected_regularity(rec);
  VerificationReport rep;
  rep.id = rec.id();
  rep.expected_regime = expected.regime;
  const double top = trusted_top(circ, opt);
  double fitted_power = 0.0;
  if (!check_phi_circ(rec, expected, circ, top, opt, rep, fitted_power)) return rep;
  if (rep.dichotomy.verdict == Dichotomy::convergent) {
    rep.measured_regime = Regime::convergent;
    rep.status = VerifyStatus::fail;
    finalize(rep);
    return rep;
  }
  const auto prof = EmbeddingProfile::build(circ, rec.n(), profile_options(circ, top));
  return verify_profile(rec, prof, opt, rep, fitted_power);
}

VerificationReport verify_asymptotics(const ExampleRecord& rec, const EmbeddingProfile& prof, const VerifyOptions& opt) {
  if (prof.n() != rec.n()) throw Error(ErrorKind::invalid_input, "profile dimension differs from the record's n");
  const auto expected = expected_regularity(rec);
  VerificationReport rep;
  rep.id = rec.id();
  rep.expected_regime = expected.regime;
  double fitted_power = 0.0;
  if (!check_phi_circ(rec, expected, prof.original(), prof.range().hi, opt, rep, fitted_power)) return rep;
  return verify_profile(rec, prof, opt, rep, fitted_power);
}

VerificationReport verify_example(const ExampleRecord& rec, const VerifyOptions& opt) {
  return verify_asymptotics(rec, computed_phi_circ(rec, opt), opt);
}

}  // namespace anisokit
