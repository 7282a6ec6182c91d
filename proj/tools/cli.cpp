#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "anisokit/anisotropic.hpp"
#include "anisokit/error.hpp"
#include "anisokit/examples.hpp"
#include "anisokit/grid.hpp"
#include "anisokit/numerics.hpp"
#include "anisokit/rearrangement.hpp"
#include "anisokit/sobolev.hpp"
#include "anisokit/symmetrized.hpp"
#include "anisokit/young.hpp"
#include "json.hpp"

namespace anisokit::cli {
namespace {

using json = nlohmann::json;

std::string key_of(std::string flag) {
  std::replace(flag.begin(), flag.end(), '-', '_');
  return flag;
}

double to_number(const std::string& key, const std::string& s) {
  if (s == "pi") return pi;
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw Error(ErrorKind::invalid_input, "'" + key + "' is not a number: " + s);
  return x;
}

// Config document overlaid with the flags given on the command line.
class Params {
 public:
  explicit Params(json j) : j_(std::move(j)) {}

  bool has(const std::string& k) const { return j_.contains(k); }
  const json& raw(const std::string& k) const { return j_.at(k); }

  double num(const std::string& k, std::optional<double> dflt = std::nullopt) const {
    if (!has(k)) {
      if (!dflt) throw Error(ErrorKind::invalid_input, "missing parameter '" + k + "'");
      return *dflt;
    }
    const auto& v = j_.at(k);
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) return to_number(k, v.get<std::string>());
    throw Error(ErrorKind::invalid_input, "'" + k + "' must be a number");
  }

  int integer(const std::string& k, std::optional<int> dflt = std::nullopt) const {
    const double x = num(k, dflt ? std::optional<double>(*dflt) : std::nullopt);
    if (x != std::floor(x) || std::abs(x) > 1e9) throw Error(ErrorKind::invalid_input, "'" + k + "' must be an integer");
    return static_cast<int>(x);
  }

  std::string str(const std::string& k, std::optional<std::string> dflt = std::nullopt) const {
    if (!has(k)) {
      if (!dflt) throw Error(ErrorKind::invalid_input, "missing parameter '" + k + "'");
      return *dflt;
    }
    const auto& v = j_.at(k);
    if (!v.is_string()) throw Error(ErrorKind::invalid_input, "'" + k + "' must be a string");
    return v.get<std::string>();
  }

  // A number, an array of numbers or a comma-separated list.
  std::vector<double> list(const std::string& k, std::vector<double> dflt = {}) const {
    if (!has(k)) return dflt;
    const auto& v = j_.at(k);
    if (v.is_number()) return {v.get<double>()};
    if (v.is_array()) {
      std::vector<double> out;
      for (const auto& e : v) {
        if (!e.is_number()) throw Error(ErrorKind::invalid_input, "'" + k + "' must hold numbers");
        out.push_back(e.get<double>());
      }
      return out;
    }
    if (!v.is_string()) throw Error(ErrorKind::invalid_input, "'" + k + "' must be a list of numbers");
    std::vector<double> out;
    std::stringstream ss(v.get<std::string>());
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_number(k, item));
    if (out.empty()) throw Error(ErrorKind::invalid_input, "'" + k + "' is empty");
    return out;
  }

  bool flag(const std::string& k) const {
    if (!has(k)) return false;
    const auto& v = j_.at(k);
    if (v.is_boolean()) return v.get<bool>();
    return num(k) != 0.0;
  }

 private:
  json j_;
};

class Context {
 public:
  Context(std::ostream& out, std::string dir, bool quiet, std::uint64_t seed)
      : out_(out), dir_(std::move(dir)), quiet_(quiet), seed_(seed) {
    if (!dir_.empty()) std::filesystem::create_directories(dir_);
  }

  std::uint64_t seed() const { return seed_; }
  bool has_dir() const { return !dir_.empty(); }
  std::string path(const std::string& name) const { return (std::filesystem::path(dir_) / name).string(); }

  // Writes <out>/<name> when an output directory is set.
  void artifact(const std::string& name, const std::function<void(std::ostream&)>& write) const {
    if (!has_dir()) return;
    std::ofstream os(path(name), std::ios::binary);
    if (!os) throw Error(ErrorKind::io, "cannot write " + path(name));
    write(os);
    if (!os) throw Error(ErrorKind::io, "write failed: " + path(name));
  }

  void report(const json& j) const {
    artifact("report.json", [&](std::ostream& os) { os << j.dump(2) << '\n'; });
    if (!quiet_) out_ << j.dump(2) << '\n';
  }

 private:
  std::ostream& out_;
  std::string dir_;
  bool quiet_;
  std::uint64_t seed_;
};

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Evaluates one CSV cell; non-finite values and evaluation errors leave the cell empty.
std::string cell(const std::function<double()>& f) {
  try {
    const double v = f();
    return std::isfinite(v) ? fmt(v) : std::string();
  } catch (const Error&) {
    return {};
  }
}

std::pair<std::string, std::string> split_spec(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) return {spec, ""};
  return {spec.substr(0, colon), spec.substr(colon + 1)};
}

// "kind:k=v,..." as an anisotropic term description.
json term_json(const std::string& spec) {
  const auto [kind, rest] = split_spec(spec);
  json t = {{"kind", kind}};
  for (const auto& [k, v] : parse_params(rest)) t[k] = v;
  return t;
}

// A JSON object (inline or in the config) or a term spec taken as a radial form in dimension n.
AnisotropicFunction phi_of(const Params& P, std::optional<int> default_n = std::nullopt) {
  if (!P.has("phi")) throw Error(ErrorKind::invalid_input, "missing parameter 'phi'");
  const auto& v = P.raw("phi");
  if (v.is_object()) return AnisotropicFunction::from_json(v);
  const auto s = P.str("phi");
  if (!s.empty() && s.front() == '{') return AnisotropicFunction::from_json(json::parse(s));
  const int n = P.integer("n", default_n);
  return AnisotropicFunction::from_json({{"form", "radial"}, {"n", n}, {"term", term_json(s)}});
}

struct CircData {
  YoungFunction phi_circ;
  json info;
};

CircData phi_circ_of(const AnisotropicFunction& phi, const Params& P, std::uint64_t seed) {
  if (phi.kind() == AnisotropicFunction::Kind::radial)
    return {phi.terms().front().fn, {{"method", "radial generator"}}};
  auto opt = ladder_for_radii(phi, P.num("r_lo", 1e-3), P.num("r_hi", 1e6), P.num("levels_per_decade", 85.0));
  opt.measure.seed = seed;
  opt.measure.force_generic = P.flag("force_generic");
  opt.measure.mc_points = static_cast<std::size_t>(P.num("mc_points", static_cast<double>(opt.measure.mc_points)));
  const auto res = phi_circ(phi, opt);
  return {res.phi_circ,
          {{"method", "sublevel measures"},
           {"levels", res.level.size()},
           {"monotonicity_defect", res.monotonicity_defect},
           {"max_std_error", res.max_std_error}}};
}

// Scalar function used in place of Phi_circ in the symmetrized problem.
YoungFunction diamond_of(const YoungFunction& phi_circ) {
  if (phi_circ.convexity_certified()) return phi_circ;
  return phi_diamond(phi_circ).phi_diamond;
}

// Nonincreasing datum on (0, omega): const:c or power:c=..,a=..
RearrangedFunction radial_data(const std::string& spec, double omega) {
  const auto [kind, rest] = split_spec(spec);
  if (kind == "const") {
    double c = 1.0;
    if (!rest.empty()) c = rest.find('=') == std::string::npos ? to_number("f", rest) : parse_params(rest).at("c");
    return RearrangedFunction::constant(c, omega);
  }
  if (kind == "power") {
    const auto p = parse_params(rest);
    if (!p.contains("a")) throw Error(ErrorKind::invalid_input, "power datum needs a");
    return realize(power_data(p.contains("c") ? p.at("c") : 1.0, p.at("a"), omega));
  }
  throw Error(ErrorKind::invalid_input, "unknown datum '" + spec + "' (const:c, power:c=..,a=..)");
}

// Grid datum: const:c or power:c=..,a=..,x0=..,y0=.. for c |x - x0|^{-a}. The default centre sits
// half a cell off the middle node.
GridField grid_data(const std::string& spec, int N) {
  const auto [kind, rest] = split_spec(spec);
  if (kind == "const") {
    double c = 1.0;
    if (!rest.empty()) c = rest.find('=') == std::string::npos ? to_number("f", rest) : parse_params(rest).at("c");
    return GridField::from_function(N, [c](double, double) { return c; });
  }
  if (kind == "power") {
    auto p = parse_params(rest);
    const double half = 0.5 / (N - 1);
    const double c = p.contains("c") ? p.at("c") : 1.0;
    if (!p.contains("a")) throw Error(ErrorKind::invalid_input, "power datum needs a");
    const double a = p.at("a");
    const double x0 = p.contains("x0") ? p.at("x0") : 0.5 + half, y0 = p.contains("y0") ? p.at("y0") : 0.5 + half;
    auto f = GridField::from_function(N, [=](double x, double y) { return c * std::pow(std::hypot(x - x0, y - y0), -a); });
    for (double v : f.values())
      if (!std::isfinite(v)) throw Error(ErrorKind::invalid_input, "power datum: the singular point is a grid node");
    return f;
  }
  throw Error(ErrorKind::invalid_input, "unknown grid datum '" + spec + "' (const:c, power:c=..,a=..,x0=..,y0=..)");
}

std::optional<PointMass> point_mass(const std::string& spec) {
  const auto [kind, rest] = split_spec(spec);
  if (kind != "mass") return std::nullopt;
  const auto p = parse_params(rest);
  PointMass mu;
  if (p.contains("x")) mu.x = p.at("x");
  if (p.contains("y")) mu.y = p.at("y");
  if (p.contains("m")) mu.mass = p.at("m");
  return mu;
}

OperatorSpec operator_of(const Params& P) {
  OperatorSpec spec;
  spec.phi = phi_of(P, 2);
  if (spec.phi.dim() != 2) throw Error(ErrorKind::invalid_input, "grid problems need n = 2");
  spec.epsilon = P.num("epsilon", 0.0);
  spec.q = P.num("q", 4.0);
  spec.c_phi = P.num("c_phi", 0.5);
  return spec;
}

SolveOptions solve_options(const Params& P) {
  SolveOptions so;
  so.tol_factor = P.num("tol", so.tol_factor);
  so.max_iterations = P.integer("max_iterations", so.max_iterations);
  so.lbfgs_memory = P.integer("lbfgs_memory", so.lbfgs_memory);
  so.parallel = !P.flag("serial");
  return so;
}

void write_field(const Context& C, const std::string& name, const GridField& u) {
  C.artifact(name, [&](std::ostream& os) { u.write_csv(os); });
}

// ---- commands ---------------------------------------------------------------------------

int cmd_conjugate(const Params& P, const Context& C) {
  const auto A = YoungFunction::catalog(P.str("A"));
  const auto conj = A.conjugate();
  const auto bi = conj.conjugate();
  const double tol = A.form() == Form::analytic ? 1e-6 : 1e-3;
  const double slack = 1e-9;
  const auto grid = log_grid(P.num("lo", 1e-2), P.num("hi", 1e4), P.num("per_decade", 16.0));

  bool two_sided = true;
  double involution = 0.0;
  for (double t : grid) {
    const double prod = A.inverse(t) * conj.inverse(t);
    if (prod < t * (1 - slack) || prod > 2 * t * (1 + slack)) two_sided = false;
    const double a = A(t), b = bi(t);
    if (std::isfinite(a) && a > 0) involution = std::max(involution, std::abs(b - a) / a);
  }
  C.artifact("conjugate.csv", [&](std::ostream& os) {
    os << "t,A(t),conjugate(t),inverse_product_over_t,biconjugate(t)\n";
    for (double t : grid)
      os << fmt(t) << ',' << cell([&] { return A(t); }) << ',' << cell([&] { return conj(t); }) << ','
         << cell([&] { return A.inverse(t) * conj.inverse(t) / t; }) << ',' << cell([&] { return bi(t); }) << '\n';
  });
  const bool pass = two_sided && involution <= tol;
  C.report({{"command", "conjugate"},
            {"A", A.id()},
            {"conjugate", conj.id()},
            {"conjugate_at_1", conj(1.0)},
            {"inverse_product_within_t_2t", two_sided},
            {"involution_max_rel", involution},
            {"involution_tolerance", tol},
            {"pass", pass}});
  return pass ? success : verdict_failure;
}

int cmd_phicirc(const Params& P, const Context& C) {
  const auto phi = phi_of(P);
  const auto circ = phi_circ_of(phi, P, C.seed());
  const double lo = P.num("r_lo", 1e-3), hi = P.num("r_hi", 1e6);
  const auto grid = log_grid(lo, hi, P.num("per_decade", 16.0));
  C.artifact("phi_circ.csv", [&](std::ostream& os) {
    os << "t,phi_circ(t)\n";
    for (double t : grid) os << fmt(t) << ',' << cell([&] { return circ.phi_circ(t); }) << '\n';
  });
  const double top_lo = std::max(lo, hi * 1e-4);
  C.report({{"command", "phicirc"},
            {"phi", phi.to_json()},
            {"phi_circ", circ.info},
            {"top_slope", loglog_slope([&](double t) { return circ.phi_circ(t); }, top_lo, hi)},
            {"slope_window", {top_lo, hi}},
            {"convexity_certified", circ.phi_circ.convexity_certified()}});
  return success;
}

int cmd_embedding(const Params& P, const Context& C) {
  const auto phi = phi_of(P);
  const int n = phi.dim();
  const auto circ = phi_circ_of(phi, P, C.seed());
  const auto dich = classify_integral(circ.phi_circ, n);
  json rep = {{"command", "embedding"}, {"phi", phi.to_json()}, {"phi_circ", circ.info}, {"dichotomy", dich.to_json()}};
  if (dich.verdict == Dichotomy::convergent) {
    rep["bounded_solutions"] = true;
    C.report(rep);
    return success;
  }
  ProfileOptions opt;
  opt.t_lo = P.num("t_lo", 0.0);
  opt.t_hi = P.num("t_hi", 0.0);
  opt.with_hat = !P.flag("no_hat");
  opt.force_modify = P.flag("force_modify");
  const auto profile = EmbeddingProfile::build(circ.phi_circ, n, opt);
  C.artifact("embedding.csv", [&](std::ostream& os) { profile.write_csv(os, P.num("per_decade", 16.0)); });
  rep["profile"] = profile.report();
  rep["bounded_solutions"] = false;
  C.report(rep);
  return success;
}

int cmd_symmetrize_solve(const Params& P, const Context& C) {
  const auto phi = phi_of(P);
  const int n = phi.dim();
  const double omega = P.num("omega", 1.0);
  const auto circ = phi_circ_of(phi, P, C.seed());
  const auto diamond = diamond_of(circ.phi_circ);
  const auto psi = psi_of(diamond);
  const auto f = radial_data(P.str("f", "const:1"), omega);
  RadialOptions ro;
  ro.nodes = P.integer("nodes", ro.nodes);
  const auto sol = solve_radial(psi, f, n, ro);
  const auto bound = linf_bound(f, psi, n);
  const double v0 = sol.linf();
  const double sharp_tol = 1e-10 * std::max(1.0, std::abs(v0));
  const bool sharp = bound.finite && std::abs(bound.value - v0) <= sharp_tol;
  C.artifact("radial.csv", [&](std::ostream& os) { sol.write_csv(os); });
  C.report({{"command", "symmetrize-solve"},
            {"phi", phi.to_json()},
            {"phi_circ", circ.info},
            {"solution", sol.to_json()},
            {"v0", v0},
            {"linf_bound", bound.to_json()},
            {"bound_equals_v0", sharp},
            {"tolerance", sharp_tol}});
  return sharp ? success : verdict_failure;
}

struct GridRun {
  OperatorSpec spec;
  GridField f;
  GridSolution sol;
};

GridRun grid_run(const Params& P, const Context& C) {
  GridRun g;
  g.spec = operator_of(P);
  const int N = P.integer("N", 65);
  g.f = grid_data(P.str("f", "const:1"), N);
  auto so = solve_options(P);
  std::ofstream log;
  if (C.has_dir()) {
    log.open(C.path("solve_log.jsonl"), std::ios::binary);
    so.log = &log;
  }
  g.sol = solve(g.spec, g.f, so);
  return g;
}

int cmd_grid_solve(const Params& P, const Context& C) {
  const auto g = grid_run(P, C);
  const auto& vals = g.f.values();
  const bool nonneg = std::all_of(vals.begin(), vals.end(), [](double v) { return v >= 0.0; });
  const double u_min = *std::min_element(g.sol.u.values().begin(), g.sol.u.values().end());
  const bool max_principle = !nonneg || u_min >= -1e-12;
  const auto trunc = truncation_energy(g.spec, g.sol.u, g.f);
  const int N = g.f.size();
  const double centre = (N % 2 == 1) ? g.sol.u(N / 2, N / 2) : NAN;
  json rep = {{"command", "grid-solve"},
              {"solution", g.sol.to_json()},
              {"data_l1", g.f.l1()},
              {"invariants",
               {{"energy_monotone", g.sol.energy_monotone},
                {"maximum_principle", max_principle},
                {"u_min", u_min},
                {"truncation_energy", trunc.to_json()}}}};
  if (std::isfinite(centre)) rep["centre_value"] = centre;
  bool pass = g.sol.energy_monotone && max_principle && trunc.pass;
  if (P.flag("audit")) {
    AuditOptions ao;
    ao.seed = C.seed();
    const auto audit = assumption_audit(g.spec, ao);
    rep["invariants"]["audit"] = audit.to_json();
    pass = pass && audit.pass();
  }
  rep["pass"] = pass;
  write_field(C, "u.csv", g.sol.u);
  C.report(rep);
  return pass ? success : verdict_failure;
}

int cmd_approx_seq(const Params& P, const Context& C) {
  const auto spec = operator_of(P);
  const int N = P.integer("N", 65);
  std::vector<double> dflt;
  for (int e = 0; e <= 10; ++e) dflt.push_back(std::ldexp(1.0, e));
  const auto ladder = P.list("ladder", dflt);
  SequenceOptions so;
  so.solve = solve_options(P);
  so.tau = P.num("tau", so.tau);
  so.grad_tau = P.num("grad_tau", so.grad_tau);
  const auto fspec = P.str("f", "const:1");
  const auto mu = point_mass(fspec);
  const auto seq = mu ? approximable_sequence(spec, *mu, N, ladder, so)
                      : approximable_sequence(spec, grid_data(fspec, N), ladder, so);
  C.artifact("steps.csv", [&](std::ostream& os) {
    os << "k,next_k,sup_diff,deviation_measure,gradient_deviation_measure\n";
    for (const auto& s : seq.steps)
      os << fmt(s.k) << ',' << fmt(s.next_k) << ',' << fmt(s.sup_diff) << ',' << fmt(s.deviation_measure) << ','
         << fmt(s.gradient_deviation_measure) << '\n';
  });
  if (!seq.solutions.empty()) write_field(C, "u_last.csv", seq.solutions.back().u);
  json rep = seq.to_json();
  rep["command"] = "approx-seq";
  C.report(rep);
  return seq.deviation_monotone ? success : verdict_failure;
}

int cmd_regularity_report(const Params& P, const Context& C) {
  GridRun g;
  if (P.has("u")) {
    std::ifstream is(P.str("u"));
    if (!is) throw Error(ErrorKind::io, "cannot read " + P.str("u"));
    g.spec = operator_of(P);
    g.sol.u = GridField::read_csv(is);
    g.f = grid_data(P.str("f", "const:1"), g.sol.u.size());
  } else {
    g = grid_run(P, C);
  }
  const auto& u = g.sol.u;
  const double f_l1 = g.f.l1();
  const double omega = 1.0;
  const int n = 2;
  const auto circ = phi_circ_of(g.spec.phi, P, C.seed());
  const auto diamond = diamond_of(circ.phi_circ);

  const double cell = u.cell_measure();
  const auto phi_grad = cell_map(u, [&](std::span<const double> xi) { return g.spec.phi(xi); });
  const std::vector<double> cells(phi_grad.size(), cell);
  const ThetaMap theta(g.spec.phi, diamond);
  const auto theta_vals = cell_map(u, [&](std::span<const double> xi) { return theta(xi); });
  const auto theta_bound = gradient_l1_bound(theta_vals, cells, omega, f_l1, n);
  const auto trunc = truncation_energy(g.spec, u, g.f);

  json rep = {{"command", "regularity-report"},
              {"data_l1", f_l1},
              {"sup_u", u.sup()},
              {"phi_circ", circ.info},
              {"truncation_energy", trunc.to_json()},
              {"theta_gradient_bound", theta_bound.to_json()}};
  const auto dich = classify_integral(circ.phi_circ, n);
  rep["dichotomy"] = dich.to_json();
  if (dich.verdict == Dichotomy::divergent) {
    const auto profile = EmbeddingProfile::build(circ.phi_circ, n);
    const double K = 2.0 * f_l1;
    const auto u_star = rearrange(u);
    const auto grad_star = rearrange(phi_grad, cells);
    const auto bu = LevelSetBoundU(profile, K, 0.0, 1.0, omega).check(u_star);
    const auto bg = LevelSetBoundGrad(profile).check(grad_star);
    rep["level_set_u"] = bu.to_json();
    rep["level_set_u"]["K"] = K;
    rep["level_set_u"]["t0"] = LevelSetBoundU(profile, K, 0.0, 1.0, omega).t0();
    rep["level_set_gradient"] = bg.to_json();
    rep["marcinkiewicz_u"] = marcinkiewicz_quasinorm(u_star, profile.vartheta()).to_json();
    rep["marcinkiewicz_phi_gradient"] = marcinkiewicz_quasinorm(grad_star, profile.varrho()).to_json();
  } else {
    rep["bounded_solutions"] = true;
  }
  const bool pass = trunc.pass && theta_bound.pass;
  rep["pass"] = pass;
  C.report(rep);
  return pass ? success : verdict_failure;
}

int cmd_verify_example(const Params& P, const Context& C, const std::string& id) {
  json params = json::object();
  for (const char* k : {"n", "alpha", "q", "beta", "c"})
    if (P.has(k)) {
      const auto v = P.list(k);
      params[k] = v.size() == 1 ? json(v.front()) : json(v);
    }
  if (P.has("p")) {
    const auto v = P.list("p");
    params["p"] = v.size() == 1 ? json(v.front()) : json(v);
  }
  const auto rec = ExampleRecord::from_json(id, params);
  VerifyOptions vo;
  vo.decades = P.num("decades", vo.decades);
  vo.analytic_top = P.num("analytic_top", vo.analytic_top);
  const auto rep = verify_example(rec, vo);
  json j = rep.to_json();
  j["command"] = "verify-example";
  j["record"] = rec.to_json();
  j["expected"] = expected_regularity(rec).to_json();
  C.report(j);
  return rep.pass() ? success : verdict_failure;
}

int cmd_admissibility(const Params& P, const Context& C) {
  const auto phi = phi_of(P);
  const int n = phi.dim();
  const double omega = P.num("omega", 1.0);
  const auto circ = phi_circ_of(phi, P, C.seed());
  const auto f = radial_data(P.str("f", "const:1"), omega);
  const auto adm = data_admissibility(f, circ.phi_circ, n, P.list("lambdas"));
  const auto bounded = boundedness_criterion(f, psi_of(diamond_of(circ.phi_circ)), n);
  C.report({{"command", "admissibility"},
            {"phi", phi.to_json()},
            {"phi_circ", circ.info},
            {"admissibility", adm.to_json()},
            {"boundedness", bounded.to_json()}});
  return success;
}

struct Command {
  std::string name, help;
  std::vector<std::pair<std::string, std::string>> options;
};

const std::vector<Command>& commands() {
  static const std::vector<std::pair<std::string, std::string>> phi_opts = {
      {"phi", "Phi: kind:k=v,... (radial) or a JSON object"},
      {"n", "dimension for a radial Phi"},
      {"r-lo", "smallest radius of the level ladder"},
      {"r-hi", "largest radius of the level ladder"},
      {"levels-per-decade", "levels per decade of the ladder"},
      {"force-generic", "1 for the cubature or Monte Carlo measure path"},
      {"mc-points", "Monte Carlo points per level (n >= 4)"}};
  static const std::vector<std::pair<std::string, std::string>> grid_opts = {
      {"N", "grid nodes per side"},
      {"f", "datum: const:c or power:c=..,a=..,x0=..,y0=.."},
      {"epsilon", "regularization weight"},
      {"q", "regularization exponent"},
      {"c-phi", "coercivity constant for the audit"},
      {"tol", "stopping tolerance relative to ||f||_1"},
      {"max-iterations", "iteration budget"},
      {"lbfgs-memory", "L-BFGS memory"},
      {"serial", "1 for the serial kernels"}};
  auto join = [](auto a, const auto& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
  };
  static const std::vector<Command> cmds = {
      {"conjugate", "Young conjugate table and checks",
       {{"A", "catalog function, e.g. power:p=3"}, {"lo", "table start"}, {"hi", "table end"}, {"per-decade", "rows per decade"}}},
      {"phicirc", "radial average Phi_circ of Phi", join(phi_opts, std::vector<std::pair<std::string, std::string>>{{"per-decade", "rows per decade"}})},
      {"embedding", "Sobolev conjugate, vartheta and varrho tables with the dichotomy",
       join(phi_opts, std::vector<std::pair<std::string, std::string>>{{"t-lo", "table start"},
                                                                         {"t-hi", "table end"},
                                                                         {"per-decade", "rows per decade"},
                                                                         {"no-hat", "1 to skip the optimal target"},
                                                                         {"force-modify", "1 to linearize near zero"}})},
      {"symmetrize-solve", "radial solution of the symmetrized problem",
       join(phi_opts, std::vector<std::pair<std::string, std::string>>{{"f", "datum: const:c or power:c=..,a=.."},
                                                                         {"omega", "measure of the domain (number or pi)"},
                                                                         {"nodes", "radial nodes"}})},
      {"grid-solve", "nonlinear Dirichlet problem on the unit square",
       join(join(phi_opts, grid_opts), std::vector<std::pair<std::string, std::string>>{{"audit", "1 to audit the operator"}})},
      {"approx-seq", "truncated data ladder and deviation measures",
       join(join(phi_opts, grid_opts), std::vector<std::pair<std::string, std::string>>{
                                           {"ladder", "truncation levels k"},
                                           {"tau", "deviation threshold for u"},
                                           {"grad-tau", "deviation threshold for grad u"}})},
      {"regularity-report", "a-priori bounds and quasinorms of a grid solution",
       join(join(phi_opts, grid_opts), std::vector<std::pair<std::string, std::string>>{{"u", "field CSV to use instead of solving"}})},
      {"verify-example", "expected against computed exponents for a catalog example",
       {{"n", "dimension"},
        {"p", "exponent or list"},
        {"alpha", "log exponent or list"},
        {"q", "second exponent"},
        {"beta", "exponential exponent"},
        {"c", "log shift"},
        {"decades", "fit window in decades"},
        {"analytic-top", "top of the profile range for radial forms"}}},
      {"admissibility", "data class report for a radial datum",
       join(phi_opts, std::vector<std::pair<std::string, std::string>>{{"f", "datum: const:c or power:c=..,a=.."},
                                                                         {"omega", "measure of the domain (number or pi)"},
                                                                         {"lambdas", "modular ladder"}})},
  };
  return cmds;
}

int dispatch(const std::string& name, const Params& P, const Context& C, const std::string& id) {
  if (name == "conjugate") return cmd_conjugate(P, C);
  if (name == "phicirc") return cmd_phicirc(P, C);
  if (name == "embedding") return cmd_embedding(P, C);
  if (name == "symmetrize-solve") return cmd_symmetrize_solve(P, C);
  if (name == "grid-solve") return cmd_grid_solve(P, C);
  if (name == "approx-seq") return cmd_approx_seq(P, C);
  if (name == "regularity-report") return cmd_regularity_report(P, C);
  if (name == "verify-example") return cmd_verify_example(P, C, id);
  if (name == "admissibility") return cmd_admissibility(P, C);
  throw Error(ErrorKind::invalid_input, "unknown command '" + name + "'");
}

void error_record(std::ostream& err, const std::string& command, const std::string& kind, const std::string& message) {
  err << json{{"error", {{"command", command}, {"kind", kind}, {"message", message}}}}.dump() << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"anisokit: Orlicz-Sobolev tools for anisotropic elliptic problems"};
  app.name("anisokit");
  app.require_subcommand(1);

  struct Bound {
    CLI::App* sub;
    std::map<std::string, std::string> values;
    std::string config, out_dir, id;
    std::uint64_t seed = 1;
    bool quiet = false;
  };
  std::vector<std::unique_ptr<Bound>> bound;
  for (const auto& c : commands()) {
    auto b = std::make_unique<Bound>();
    b->sub = app.add_subcommand(c.name, c.help);
    if (c.name == "verify-example") b->sub->add_option("id", b->id, "example id")->required();
    for (const auto& [flag, help] : c.options) b->sub->add_option("--" + flag, b->values[flag], help);
    b->sub->add_option("--config", b->config, "JSON parameter document; flags override its keys");
    b->sub->add_option("--out", b->out_dir, "directory for CSV and JSON artifacts");
    b->sub->add_option("--seed", b->seed, "seed for Monte Carlo measures and audits");
    b->sub->add_flag("--quiet", b->quiet, "no report on stdout");
    bound.push_back(std::move(b));
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return success;
    }
    error_record(err, args.empty() ? "" : args.front(), "usage", e.what());
    return operational_error;
  }

  const Bound* b = nullptr;
  for (const auto& x : bound)
    if (x->sub->parsed()) b = x.get();
  const std::string name = b->sub->get_name();
  try {
    json cfg = json::object();
    if (!b->config.empty()) {
      std::ifstream is(b->config);
      if (!is) throw Error(ErrorKind::io, "cannot read config " + b->config);
      cfg = json::parse(is);
      if (!cfg.is_object()) throw Error(ErrorKind::invalid_input, "config must be a JSON object");
      std::vector<std::string> known;
      for (const auto& c : commands())
        if (c.name == name)
          for (const auto& o : c.options) known.push_back(key_of(o.first));
      for (const auto& [k, v] : cfg.items())
        if (std::find(known.begin(), known.end(), k) == known.end())
          throw Error(ErrorKind::invalid_input, "unknown config key '" + k + "' for " + name);
    }
    for (const auto& [flag, value] : b->values)
      if (b->sub->count("--" + flag) > 0) cfg[key_of(flag)] = value;
    const Context ctx(out, b->out_dir, b->quiet, b->seed);
    return dispatch(name, Params(cfg), ctx, b->id);
  } catch (const Error& e) {
    error_record(err, name, to_string(e.kind()), e.what());
  } catch (const json::exception& e) {
    error_record(err, name, "invalid_input", e.what());
  } catch (const std::exception& e) {
    error_record(err, name, "internal", e.what());
  }
  return operational_error;
}

}  // namespace anisokit::cli
