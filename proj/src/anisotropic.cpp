#include "anisokit/anisotropic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>
#include <boost/random/sobol.hpp>

#include "anisokit/error.hpp"
#include "anisokit/numerics.hpp"

namespace anisokit {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double number(const nlohmann::json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw Error(ErrorKind::invalid_input, std::string("term field '") + key + "' must be a number");
  return j.at(key).get<double>();
}

double required(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorKind::invalid_input, std::string("term needs field '") + key + "'");
  return number(j, key, 0.0);
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

// Root in log-radius of Phi(rho dir)/level = 1 on a known bracket.
double ray_root(const std::function<double(double)>& ratio, double lo, double hi) {
  auto g = [&](double x) {
    const double r = ratio(std::exp(x));
    return std::isfinite(r) ? r - 1.0 : 1e300;
  };
  return std::exp(solve_increasing(g, std::log(lo), std::log(hi), 50));
}

// Radius along `dir` with growing/shrinking bracket; throws when the box is exceeded.
double bracket_ray(const std::function<double(double)>& ratio, double box) {
  double lo = 1.0, hi = 1.0;
  if (ratio(1.0) < 1.0) {
    while (ratio(hi) < 1.0) {
      lo = hi;
      hi *= 4.0;
      if (hi > box) {
        std::ostringstream os;
        os << "sublevel set reaches the bound box radius " << box << "; enlarge it to at least " << 16.0 * box;
        throw Error(ErrorKind::box_too_small, os.str());
      }
    }
  } else {
    while (ratio(lo) >= 1.0) {
      hi = lo;
      lo *= 0.25;
      if (lo < 1e-300) return 0.0;
    }
  }
  return ray_root(ratio, lo, hi);
}

// Volume of a centrally symmetric star body given its radial function on the unit sphere.
// `octant` means symmetry under every coordinate reflection.
double star_volume(int n, const std::function<double(std::span<const double>)>& rho, bool octant,
                   double tol) {
  if (n == 2) {
    auto f = [&](double th) {
      const double w[2] = {std::cos(th), std::sin(th)};
      const double r = rho(w);
      return 0.5 * r * r;
    };
    if (octant) return 4.0 * integrate(f, 0.0, 0.5 * pi, tol, 20).value;
    return 2.0 * integrate(f, 0.0, pi, tol, 20).value;
  }
  if (n == 3) {
    auto inner = [&](double th) {
      auto g = [&](double ph) {
        const double w[3] = {std::sin(ph) * std::cos(th), std::sin(ph) * std::sin(th), std::cos(ph)};
        const double r = rho(w);
        return r * r * r / 3.0 * std::sin(ph);
      };
      return integrate(g, 0.0, 0.5 * pi, tol, 16).value;
    };
    if (octant) return 8.0 * integrate(inner, 0.0, 0.5 * pi, tol, 16).value;
    return 2.0 * integrate(inner, 0.0, 2.0 * pi, tol, 16).value;
  }
  throw Error(ErrorKind::invalid_input, "cubature path handles n = 2, 3 only");
}

// omega_n E[rho(U)^n] over uniformly distributed directions, randomized Sobol points.
MeasureResult star_volume_mc(int n, const std::function<double(std::span<const double>)>& rho,
                             const MeasureOptions& opt) {
  constexpr int kReplicas = 16;
  const std::size_t per = std::max<std::size_t>(opt.mc_points / kReplicas, 64);
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<std::vector<double>> shifts(kReplicas, std::vector<double>(n));
  for (auto& s : shifts)
    for (auto& x : s) x = unif(rng);

  boost::random::sobol seq(static_cast<std::size_t>(n));
  std::vector<double> base(per * n);
  const double span = static_cast<double>(seq.max()) - static_cast<double>(seq.min()) + 1.0;
  for (auto& x : base) x = (static_cast<double>(seq()) - static_cast<double>(seq.min()) + 0.5) / span;

  const boost::math::normal_distribution<double> normal;
  std::vector<double> means(kReplicas, 0.0);
#pragma omp parallel for schedule(dynamic)
  for (int r = 0; r < kReplicas; ++r) {
    std::vector<double> w(n);
    double acc = 0.0;
    for (std::size_t k = 0; k < per; ++k) {
      double norm = 0.0;
      for (int i = 0; i < n; ++i) {
        double u = base[k * n + i] + shifts[r][i];
        u -= std::floor(u);
        u = std::clamp(u, 1e-15, 1.0 - 1e-15);
        w[i] = boost::math::quantile(normal, u);
        norm += w[i] * w[i];
      }
      norm = std::sqrt(norm);
      for (auto& x : w) x /= norm;
      acc += std::pow(rho(w), n);
    }
    means[r] = acc / static_cast<double>(per);
  }
  const double mean = std::accumulate(means.begin(), means.end(), 0.0) / kReplicas;
  double var = 0.0;
  for (double m : means) var += (m - mean) * (m - mean);
  var /= (kReplicas - 1);
  const double omega = unit_ball_volume(n);
  return {omega * mean, omega * std::sqrt(var / kReplicas), "quasi-monte-carlo"};
}

// Measure of {sum_i A_i(|eta_i|) <= L}: rescale each axis to the set's extent so the
// radial function is bracketed between the cross-polytope and the cube.
MeasureResult split_measure(const std::vector<YoungFunction>& a, double level, const MeasureOptions& opt) {
  const int n = static_cast<int>(a.size());
  std::vector<double> ext(n);
  double scale = 1.0;
  for (int i = 0; i < n; ++i) {
    ext[i] = a[i].inverse(level);
    if (!(ext[i] > 0.0) || !std::isfinite(ext[i]))
      throw Error(ErrorKind::out_of_range, "axis extent of the sublevel set is not finite and positive");
    scale *= ext[i];
  }
  auto rho = [&](std::span<const double> w) {
    double l1 = 0.0, linf = 0.0;
    for (int i = 0; i < n; ++i) {
      l1 += std::abs(w[i]);
      linf = std::max(linf, std::abs(w[i]));
    }
    auto ratio = [&](double r) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += a[i](ext[i] * r * std::abs(w[i]));
      return s / level;
    };
    const double lo = 1.0 / l1, hi = 1.0 / linf;
    if (hi <= lo * (1.0 + 1e-15)) return hi;
    return ray_root(ratio, lo, hi);
  };
  if (n >= 4) {
    auto r = star_volume_mc(n, rho, opt);
    r.value *= scale;
    r.std_error *= scale;
    r.method = "split-" + r.method;
    return r;
  }
  return {scale * star_volume(n, rho, true, opt.rel_tol), 0.0, "split-cubature"};
}

MeasureResult generic_measure(const AnisotropicFunction& phi, double level, const MeasureOptions& opt) {
  const int n = phi.dim();
  std::vector<double> ext(n), w(n), x(n);
  double scale = 1.0;
  for (int i = 0; i < n; ++i) {
    std::fill(w.begin(), w.end(), 0.0);
    w[i] = 1.0;
    ext[i] = ray_radius(phi, w, level);
    if (!(ext[i] > 0.0)) throw Error(ErrorKind::out_of_range, "sublevel set is degenerate along an axis");
    scale *= ext[i];
  }
  auto rho = [&, x](std::span<const double> d) mutable {
    auto ratio = [&](double r) {
      for (int i = 0; i < n; ++i) x[i] = ext[i] * r * d[i];
      return phi(x) / level;
    };
    return bracket_ray(ratio, phi.box_radius / *std::max_element(ext.begin(), ext.end()));
  };
  if (n >= 4) {
    // each replica needs its own scratch vector
    auto r = star_volume_mc(
        n,
        [&](std::span<const double> d) {
          std::vector<double> y(n);
          auto ratio = [&](double r) {
            for (int i = 0; i < n; ++i) y[i] = ext[i] * r * d[i];
            return phi(y) / level;
          };
          return bracket_ray(ratio, phi.box_radius / *std::max_element(ext.begin(), ext.end()));
        },
        opt);
    r.value *= scale;
    r.std_error *= scale;
    return r;
  }
  return {scale * star_volume(n, rho, false, opt.rel_tol), 0.0, "cubature"};
}

}  // namespace

// ---------------------------------------------------------------------------

AnisotropicFunction AnisotropicFunction::radial(int n, YoungFunction a) {
  if (n < 2) throw Error(ErrorKind::invalid_input, "dimension must be >= 2");
  AnisotropicFunction f;
  f.n_ = n;
  f.kind_ = Kind::radial;
  f.id_ = "radial(" + a.id() + ")";
  f.terms_.push_back({std::move(a), {}, {}});
  return f;
}

AnisotropicFunction AnisotropicFunction::split(std::vector<YoungFunction> a) {
  if (a.size() < 2) throw Error(ErrorKind::invalid_input, "split form needs one function per coordinate, n >= 2");
  AnisotropicFunction f;
  f.n_ = static_cast<int>(a.size());
  f.kind_ = Kind::split;
  f.id_ = "split(";
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::vector<double> e(a.size(), 0.0);
    e[i] = 1.0;
    f.id_ += (i ? "," : "") + a[i].id();
    f.terms_.push_back({std::move(a[i]), std::move(e), {}});
  }
  f.id_ += ")";
  return f;
}

AnisotropicFunction AnisotropicFunction::linear_combination(std::vector<YoungFunction> a,
                                                            std::vector<std::vector<double>> coeffs) {
  if (a.empty() || a.size() != coeffs.size())
    throw Error(ErrorKind::invalid_input, "linear combination needs one coefficient vector per term");
  const std::size_t n = coeffs.front().size();
  if (n < 2) throw Error(ErrorKind::invalid_input, "dimension must be >= 2");
  AnisotropicFunction f;
  f.n_ = static_cast<int>(n);
  f.kind_ = Kind::linear_combination;
  f.id_ = "lincomb(";
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (coeffs[k].size() != n) throw Error(ErrorKind::invalid_input, "coefficient vectors must share one dimension");
    f.id_ += (k ? "," : "") + a[k].id() + "[";
    for (std::size_t i = 0; i < n; ++i) f.id_ += (i ? " " : "") + fmt(coeffs[k][i]);
    f.id_ += "]";
    f.terms_.push_back({std::move(a[k]), std::move(coeffs[k]), {}});
  }
  f.id_ += ")";
  return f;
}

AnisotropicFunction AnisotropicFunction::custom(int n, std::string id, Evaluator fn) {
  if (n < 2) throw Error(ErrorKind::invalid_input, "dimension must be >= 2");
  if (!fn) throw Error(ErrorKind::invalid_input, "custom form needs an evaluator");
  AnisotropicFunction f;
  f.n_ = n;
  f.kind_ = Kind::custom;
  f.id_ = std::move(id);
  f.custom_ = std::move(fn);
  return f;
}

YoungFunction AnisotropicFunction::term_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
    throw Error(ErrorKind::invalid_input, "term needs a string field 'kind'");
  const auto kind = j.at("kind").get<std::string>();
  std::string spec;
  if (kind == "power") {
    spec = "power:p=" + fmt(required(j, "p")) + ",scale=" + fmt(number(j, "scale", 1.0));
  } else if (kind == "power_log") {
    spec = "power_log:p=" + fmt(required(j, "p")) + ",alpha=" + fmt(required(j, "alpha")) +
           ",shift=" + fmt(number(j, "shift", 1.0)) + ",scale=" + fmt(number(j, "scale", 1.0));
  } else if (kind == "exp_power") {
    spec = "exp_power:beta=" + fmt(required(j, "beta"));
  } else if (kind == "exp_minus_linear" || kind == "one_plus_log") {
    spec = kind;
  } else if (kind == "catalog") {
    if (!j.contains("id") || !j.at("id").is_string()) throw Error(ErrorKind::invalid_input, "catalog term needs 'id'");
    spec = j.at("id").get<std::string>();
  } else {
    throw Error(ErrorKind::invalid_input, "unknown term kind '" + kind + "'");
  }
  return YoungFunction::catalog(spec);
}

AnisotropicFunction AnisotropicFunction::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorKind::invalid_input, "anisotropic specification must be a JSON object");
  const std::string form = j.value("form", std::string("split"));
  std::vector<nlohmann::json> specs;
  if (j.contains("terms")) {
    if (!j.at("terms").is_array()) throw Error(ErrorKind::invalid_input, "'terms' must be an array");
    for (const auto& t : j.at("terms")) specs.push_back(t);
  } else if (j.contains("term")) {
    specs.push_back(j.at("term"));
  }
  if (specs.empty()) throw Error(ErrorKind::invalid_input, "specification has no terms");
  std::vector<YoungFunction> fns;
  for (const auto& t : specs) fns.push_back(term_from_json(t));

  AnisotropicFunction out;
  if (form == "radial") {
    if (specs.size() != 1) throw Error(ErrorKind::invalid_input, "radial form takes exactly one term");
    if (!j.contains("n")) throw Error(ErrorKind::invalid_input, "radial form needs 'n'");
    out = radial(j.at("n").get<int>(), fns.front());
  } else if (form == "split") {
    if (j.contains("n") && j.at("n").get<int>() != static_cast<int>(specs.size()))
      throw Error(ErrorKind::invalid_input, "split form needs exactly n terms");
    out = split(fns);
  } else if (form == "linear_combination") {
    std::vector<std::vector<double>> coeffs;
    for (const auto& t : specs) {
      if (!t.contains("coeffs") || !t.at("coeffs").is_array())
        throw Error(ErrorKind::invalid_input, "linear combination term needs 'coeffs'");
      coeffs.push_back(t.at("coeffs").get<std::vector<double>>());
    }
    out = linear_combination(fns, coeffs);
    if (j.contains("n") && j.at("n").get<int>() != out.dim())
      throw Error(ErrorKind::invalid_input, "'n' disagrees with the coefficient length");
  } else {
    throw Error(ErrorKind::invalid_input, "unknown form '" + form + "'");
  }
  for (std::size_t k = 0; k < specs.size(); ++k) out.terms_[k].spec = specs[k];
  if (j.contains("box_radius")) out.box_radius = j.at("box_radius").get<double>();
  return out;
}

nlohmann::json AnisotropicFunction::to_json() const {
  nlohmann::json j;
  j["n"] = n_;
  j["id"] = id_;
  switch (kind_) {
    case Kind::radial: j["form"] = "radial"; break;
    case Kind::split: j["form"] = "split"; break;
    case Kind::linear_combination: j["form"] = "linear_combination"; break;
    case Kind::custom: j["form"] = "custom"; break;
  }
  if (kind_ != Kind::custom) {
    j["terms"] = nlohmann::json::array();
    for (const auto& t : terms_) {
      nlohmann::json tj = t.spec.is_null() ? nlohmann::json{{"kind", "catalog"}, {"id", t.fn.id()}} : t.spec;
      if (kind_ == Kind::linear_combination) tj["coeffs"] = t.coeffs;
      j["terms"].push_back(tj);
    }
  }
  return j;
}

double AnisotropicFunction::operator()(std::span<const double> xi) const {
  switch (kind_) {
    case Kind::radial: return terms_[0].fn(std::sqrt(dot(xi, xi)));
    case Kind::split: {
      double s = 0.0;
      for (int i = 0; i < n_; ++i) s += terms_[i].fn(std::abs(xi[i]));
      return s;
    }
    case Kind::linear_combination: {
      double s = 0.0;
      for (const auto& t : terms_) s += t.fn(std::abs(dot(t.coeffs, xi)));
      return s;
    }
    case Kind::custom: return custom_(xi);
  }
  return 0.0;
}

void AnisotropicFunction::gradient(std::span<const double> xi, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  switch (kind_) {
    case Kind::radial: {
      const double r = std::sqrt(dot(xi, xi));
      if (r == 0.0) return;
      const double d = terms_[0].fn.derivative(r) / r;
      for (int i = 0; i < n_; ++i) out[i] = d * xi[i];
      return;
    }
    case Kind::split:
      for (int i = 0; i < n_; ++i)
        if (xi[i] != 0.0) out[i] = std::copysign(terms_[i].fn.derivative(std::abs(xi[i])), xi[i]);
      return;
    case Kind::linear_combination:
      for (const auto& t : terms_) {
        const double s = dot(t.coeffs, xi);
        if (s == 0.0) continue;
        const double d = std::copysign(t.fn.derivative(std::abs(s)), s);
        for (int i = 0; i < n_; ++i) out[i] += d * t.coeffs[i];
      }
      return;
    case Kind::custom: {
      std::vector<double> y(xi.begin(), xi.end());
      for (int i = 0; i < n_; ++i) {
        const double h = 1e-6 * std::max(std::abs(xi[i]), 1e-3);
        y[i] = xi[i] + h;
        const double fp = custom_(y);
        y[i] = xi[i] - h;
        const double fm = custom_(y);
        y[i] = xi[i];
        out[i] = (fp - fm) / (2.0 * h);
      }
      return;
    }
  }
}

double ray_radius(const AnisotropicFunction& phi, std::span<const double> dir, double level) {
  if (!(level > 0.0)) return 0.0;
  if (phi.kind() == AnisotropicFunction::Kind::radial) return phi.terms()[0].fn.inverse(level);
  std::vector<double> x(dir.size());
  auto ratio = [&](double r) {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = r * dir[i];
    return phi(x) / level;
  };
  return bracket_ray(ratio, phi.box_radius);
}

MeasureResult sublevel_measure(const AnisotropicFunction& phi, double level, const MeasureOptions& opt) {
  if (!(level > 0.0) || !std::isfinite(level)) throw Error(ErrorKind::invalid_input, "level must be positive and finite");
  const int n = phi.dim();
  if (!opt.force_generic) {
    if (phi.kind() == AnisotropicFunction::Kind::radial) {
      const double r = phi.terms()[0].fn.inverse(level);
      if (r > phi.box_radius) throw Error(ErrorKind::box_too_small, "sublevel set exceeds the bound box");
      return {unit_ball_volume(n) * std::pow(r, n), 0.0, "radial-closed-form"};
    }
    if (phi.kind() == AnisotropicFunction::Kind::split) {
      std::vector<YoungFunction> a;
      for (const auto& t : phi.terms()) a.push_back(t.fn);
      return split_measure(a, level, opt);
    }
    if (phi.kind() == AnisotropicFunction::Kind::linear_combination &&
        static_cast<int>(phi.terms().size()) == n) {
      // Phi(xi) = sum_k A_k(|(M xi)_k|): the image under M is a split-form sublevel set
      Eigen::MatrixXd m(n, n);
      for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i) m(k, i) = phi.terms()[k].coeffs[i];
      const double det = m.determinant();
      if (std::abs(det) > 1e-12 * std::pow(m.norm(), n)) {
        std::vector<YoungFunction> a;
        for (const auto& t : phi.terms()) a.push_back(t.fn);
        auto r = split_measure(a, level, opt);
        r.value /= std::abs(det);
        r.std_error /= std::abs(det);
        r.method = "sheared-" + r.method;
        return r;
      }
    }
  }
  return generic_measure(phi, level, opt);
}

PhiCircOptions ladder_for_radii(const AnisotropicFunction& phi, double r_lo, double r_hi, double per_decade) {
  if (!(r_lo > 0.0) || !(r_hi > r_lo)) throw Error(ErrorKind::invalid_input, "radius range must satisfy 0 < lo < hi");
  const int n = phi.dim();
  // Phi_circ(r) lies between the extremes of Phi on the sphere of radius r
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  double lo = inf, hi = 0.0;
  std::vector<double> w(n), x(n);
  for (int k = 0; k < 512 + 2 * n; ++k) {
    if (k < 2 * n) {
      std::fill(w.begin(), w.end(), 0.0);
      w[k / 2] = (k % 2) ? -1.0 : 1.0;
    } else {
      double nrm = 0.0;
      for (auto& v : w) {
        v = g(rng);
        nrm += v * v;
      }
      for (auto& v : w) v /= std::sqrt(nrm);
    }
    for (int i = 0; i < n; ++i) x[i] = r_lo * w[i];
    lo = std::min(lo, phi(x));
    for (int i = 0; i < n; ++i) x[i] = r_hi * w[i];
    hi = std::max(hi, phi(x));
  }
  if (!(lo > 0.0) || !std::isfinite(hi))
    throw Error(ErrorKind::out_of_range, "cannot bracket levels for the requested radius range");
  PhiCircOptions opt;
  opt.level_lo = lo;
  opt.level_hi = hi;
  opt.levels = static_cast<std::size_t>(std::ceil(std::log10(hi / lo) * per_decade)) + 1;
  return opt;
}

PhiCircResult phi_circ(const AnisotropicFunction& phi, const PhiCircOptions& opt) {
  if (opt.levels < 2 || !(opt.level_lo > 0.0) || !(opt.level_hi > opt.level_lo))
    throw Error(ErrorKind::invalid_input, "level ladder needs >= 2 levels with 0 < lo < hi");
  PhiCircResult res;
  const int n = phi.dim();
  if (phi.kind() == AnisotropicFunction::Kind::radial && !opt.measure.force_generic) {
    res.phi_circ = phi.terms()[0].fn;
    return res;
  }
  const auto levels = log_space(opt.level_lo, opt.level_hi, opt.levels);
  const double omega = unit_ball_volume(n);
  std::vector<double> radius(levels.size());
  std::vector<double> err(levels.size(), 0.0);
  for (std::size_t j = 0; j < levels.size(); ++j) {
    const auto m = sublevel_measure(phi, levels[j], opt.measure);
    radius[j] = std::pow(m.value / omega, 1.0 / n);
    err[j] = m.std_error / std::max(m.value, 1e-300);
  }
  // the measure is nondecreasing in the level; repair cubature noise and drop ties
  std::vector<double> t, v;
  double running = 0.0;
  for (std::size_t j = 0; j < levels.size(); ++j) {
    if (radius[j] < running) res.monotonicity_defect = std::max(res.monotonicity_defect, 1.0 - radius[j] / running);
    running = std::max(running, radius[j]);
    if (!t.empty() && running <= t.back()) continue;
    t.push_back(running);
    v.push_back(levels[j]);
    res.max_std_error = std::max(res.max_std_error, err[j]);
  }
  res.radius = t;
  res.level = v;
  res.phi_circ = YoungFunction::sampled("circ(" + phi.id() + ")", std::move(t), std::move(v));
  return res;
}

PhiDiamondResult phi_diamond(const YoungFunction& circ) {
  PhiDiamondResult res;
  if (circ.form() == Form::analytic) {
    if (!circ.convexity_certified())
      throw Error(ErrorKind::non_convex, "analytic Phi_circ must be convex; sample it first");
    res.phi_diamond = circ;
    return res;
  }
  const auto& t = circ.abscissae();
  res.phi_diamond = convex_envelope("diamond(" + circ.id() + ")", t, circ.values());
  res.c1 = inf;
  res.c2 = 0.0;
  for (double s : t) {
    const double ratio = circ.inverse(res.phi_diamond(s)) / s;
    res.c1 = std::min(res.c1, ratio);
    res.c2 = std::max(res.c2, ratio);
  }
  return res;
}

ThetaMap::ThetaMap(AnisotropicFunction phi, YoungFunction diamond)
    : phi_(std::move(phi)), diamond_(std::move(diamond)), conj_(diamond_.conjugate()) {}

double ThetaMap::operator()(std::span<const double> xi) const {
  const double v = phi_(xi);
  if (v <= 0.0) return 0.0;
  return conj_.inverse(v);
}

MonotoneFunction ThetaMap::theta_diamond() const { return anisokit::theta_diamond(diamond_, conj_); }

double vector_conjugate(const AnisotropicFunction& phi, std::span<const double> eta) {
  const int n = phi.dim();
  if (n > 3) throw Error(ErrorKind::invalid_input, "vector conjugate is materialized for n <= 3 only");
  const double en = std::sqrt(dot(eta, eta));
  if (en == 0.0) return 0.0;
  // every maximizer satisfies Phi(xi) <= |eta||xi|; find a radius where that fails on the sphere
  std::vector<double> x(n), best(n, 0.0), center(n, 0.0);
  std::vector<std::vector<double>> dirs;
  const int m = n == 2 ? 256 : 40;
  for (int a = 0; a < m; ++a) {
    const double th = 2.0 * pi * a / m;
    if (n == 2) {
      dirs.push_back({std::cos(th), std::sin(th)});
    } else {
      for (int b = 0; b <= m / 2; ++b) {
        const double ph = pi * b / (m / 2);
        dirs.push_back({std::sin(ph) * std::cos(th), std::sin(ph) * std::sin(th), std::cos(ph)});
      }
    }
  }
  double radius = 1.0;
  for (int it = 0;; ++it) {
    double worst = inf;
    for (const auto& d : dirs) {
      for (int i = 0; i < n; ++i) x[i] = radius * d[i];
      worst = std::min(worst, phi(x) / radius);
    }
    if (worst > 2.0 * en) break;
    radius *= 2.0;
    if (it > 1000 || radius > phi.box_radius)
      throw Error(ErrorKind::box_too_small, "conjugate maximizer escapes the bound box");
  }
  const int g = n == 2 ? 41 : 21;
  double half = radius, value = 0.0;
  std::vector<int> idx(n);
  for (int round = 0; round < 200 && half > 1e-14 * radius; ++round) {
    std::fill(idx.begin(), idx.end(), 0);
    const double step = 2.0 * half / (g - 1);
    bool done = false;
    while (!done) {
      for (int i = 0; i < n; ++i) x[i] = center[i] - half + step * idx[i];
      const double val = dot(eta, x) - phi(x);
      if (val > value) {
        value = val;
        best = x;
      }
      for (int i = 0;; ++i) {
        if (i == n) {
          done = true;
          break;
        }
        if (++idx[i] < g) break;
        idx[i] = 0;
      }
    }
    center = best;
    half = 2.0 * step;
  }
  return value;
}

InvariantReport check_invariants(const AnisotropicFunction& phi, int probes, std::uint64_t seed) {
  InvariantReport rep;
  const int n = phi.dim();
  std::vector<double> zero(n, 0.0);
  if (phi(zero) != 0.0) {
    rep.zero_at_origin = false;
    rep.detail += "Phi(0) != 0; ";
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> lg(-2.0, 1.0);
  std::vector<double> a(n), b(n), mid(n), neg(n);
  for (int k = 0; k < probes; ++k) {
    const double sa = std::pow(10.0, lg(rng)), sb = std::pow(10.0, lg(rng));
    for (int i = 0; i < n; ++i) {
      a[i] = sa * g(rng);
      b[i] = sb * g(rng);
      mid[i] = 0.5 * (a[i] + b[i]);
      neg[i] = -a[i];
    }
    const double fa = phi(a), fb = phi(b);
    if (std::abs(phi(neg) - fa) > 1e-12 * std::max(fa, 1e-300)) {
      rep.even = false;
      rep.detail += "asymmetric probe; ";
    }
    if (phi(mid) > 0.5 * (fa + fb) + 1e-10 * std::max(1.0, 0.5 * (fa + fb))) {
      rep.convex = false;
      rep.detail += "midpoint convexity violated; ";
    }
  }
  for (double level : {1e-2, 1.0, 1e2}) {
    try {
      std::vector<double> w(n, 0.0);
      for (int i = 0; i < n; ++i) {
        std::fill(w.begin(), w.end(), 0.0);
        w[i] = 1.0;
        ray_radius(phi, w, level);
        w[i] = 1.0 / std::sqrt(2.0);
        w[(i + 1) % n] = 1.0 / std::sqrt(2.0);
        ray_radius(phi, w, level);
      }
    } catch (const Error&) {
      rep.bounded = false;
      rep.detail += "unbounded sublevel set at level " + fmt(level) + "; ";
    }
  }
  return rep;
}

}  // namespace anisokit
