#pragma once

#include <functional>
#include <iosfwd>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace anisokit {

inline constexpr double inf = std::numeric_limits<double>::infinity();

struct Domain {
  double lo = 0.0;
  double hi = inf;
};

// Nondecreasing scalar function with access to its left-continuous inverse.
class MonotoneFunction {
 public:
  using Fn = std::function<double(double)>;

  MonotoneFunction() = default;
  MonotoneFunction(std::string id, Fn value, Fn inverse, Domain domain);

  // Inverse computed by bisection on `value` over [0, domain.hi].
  static MonotoneFunction with_bisection_inverse(std::string id, Fn value, Domain domain);

  double operator()(double t) const { return value_(t); }
  double inverse(double y) const { return inverse_(y); }
  const std::string& id() const { return id_; }
  Domain domain() const { return domain_; }
  explicit operator bool() const { return static_cast<bool>(value_); }

 private:
  std::string id_;
  Fn value_, inverse_;
  Domain domain_;
};

class YoungFunction;

struct AnalyticDef {
  std::string id;
  std::function<double(double)> value;
  std::function<double(double)> derivative;
  std::function<double(double)> inverse;       // optional closed form
  std::function<double(double)> psi_inverse;   // optional closed form of (A(t)/t)^{-1}
  std::function<YoungFunction()> conjugate;    // optional closed form
  double limit = inf;                          // largest t with finite A(t)
  Domain hint{1e-6, 1e6};                      // trusted probe range
};

enum class Form { analytic, sampled };

enum class GrowthCondition { delta2, nabla2 };
enum class Verdict { holds, fails, inconclusive };
const char* to_string(Verdict v);

struct GrowthReport {
  Verdict verdict = Verdict::inconclusive;
  double constant = 0.0;       // stabilized ratio A(2t)/A(t)
  double witness_t = 0.0;      // probe point backing the verdict
  double witness_ratio = 0.0;
  Domain probe;
};

class YoungFunction {
 public:
  YoungFunction() = default;

  static YoungFunction analytic(AnalyticDef def);
  // Abscissae strictly increasing and positive; values nondecreasing, >= 0.
  static YoungFunction sampled(std::string id, std::vector<double> t, std::vector<double> v);
  // Samples `f` on a log grid with `per_decade` points per decade.
  static YoungFunction sample(const YoungFunction& f, double lo, double hi,
                              double per_decade = 2048.0);
  // Catalog ids: power:p=..[,scale=..], power_log:p=..,alpha=..[,shift=..][,scale=..],
  // exp_minus_linear, one_plus_log, exp_power:beta=..
  static YoungFunction catalog(const std::string& spec);

  double operator()(double t) const;
  double derivative(double t) const;
  // Left-continuous generalized inverse: smallest t with A(t) >= y.
  double inverse(double y) const;
  YoungFunction conjugate() const;
  // Log-log slope dlogA/dlogt.
  double local_exponent(double t) const;

  MonotoneFunction as_monotone() const;

  Form form() const;
  const std::string& id() const;
  Domain domain() const;
  double limit() const;
  bool convexity_certified() const;
  bool n_function() const;
  const std::vector<double>& abscissae() const;
  const std::vector<double>& values() const;
  explicit operator bool() const { return static_cast<bool>(core_); }

  struct Core;

 private:
  std::shared_ptr<const Core> core_;
  friend MonotoneFunction psi_of(const YoungFunction&);
};

// Psi(t) = A(t)/t with its inverse.
MonotoneFunction psi_of(const YoungFunction& a);

// Theta_diamond(t) = conj(A)^{-1}(A(t)); inverse conj(A)(A^{-1}) composed the other way.
MonotoneFunction theta_diamond(const YoungFunction& phi_diamond);
MonotoneFunction theta_diamond(const YoungFunction& phi_diamond, const YoungFunction& conj);

GrowthReport check_growth_condition(const YoungFunction& a, GrowthCondition which,
                                    double t_probe = 0.0);

// Lower convex envelope through the origin, returned as a sampled function.
YoungFunction convex_envelope(const std::string& id, const std::vector<double>& t,
                              const std::vector<double>& v);

std::map<std::string, double> parse_params(const std::string& text);

void write_csv(std::ostream& os, const YoungFunction& a, const std::string& header);
YoungFunction read_csv(std::istream& is, const std::string& id);

}  // namespace anisokit
