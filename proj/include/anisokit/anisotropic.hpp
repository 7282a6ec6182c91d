#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "anisokit/young.hpp"
#include "json.hpp"

namespace anisokit {

// One summand A(|c . xi|); for split forms c is a coordinate vector.
struct AnisoTerm {
  YoungFunction fn;
  std::vector<double> coeffs;
  nlohmann::json spec;  // the term description it was built from, if any
};

class AnisotropicFunction {
 public:
  enum class Kind { radial, split, linear_combination, custom };
  using Evaluator = std::function<double(std::span<const double>)>;

  AnisotropicFunction() = default;

  static AnisotropicFunction radial(int n, YoungFunction a);
  static AnisotropicFunction split(std::vector<YoungFunction> a);
  static AnisotropicFunction linear_combination(std::vector<YoungFunction> a,
                                                std::vector<std::vector<double>> coeffs);
  static AnisotropicFunction custom(int n, std::string id, Evaluator f);
  // {"n":2,"form":"split","terms":[{"kind":"power_log","p":2,"alpha":1},...]}
  static AnisotropicFunction from_json(const nlohmann::json& j);
  // Builds an unnormalized scalar term |s|^p, |s|^p log^a(shift+|s|), e^{|s|^b}-1, ...
  static YoungFunction term_from_json(const nlohmann::json& j);

  double operator()(std::span<const double> xi) const;
  // Gradient; analytic for catalog terms, central differences for custom forms.
  void gradient(std::span<const double> xi, std::span<double> out) const;

  int dim() const { return n_; }
  Kind kind() const { return kind_; }
  const std::string& id() const { return id_; }
  const std::vector<AnisoTerm>& terms() const { return terms_; }
  nlohmann::json to_json() const;

  // Largest radius searched when bracketing sublevel sets.
  double box_radius = 1e150;

 private:
  int n_ = 0;
  Kind kind_ = Kind::custom;
  std::string id_;
  std::vector<AnisoTerm> terms_;
  Evaluator custom_;
};

struct MeasureOptions {
  double rel_tol = 1e-5;
  std::size_t mc_points = std::size_t{1} << 20;  // n >= 4
  std::uint64_t seed = 20240611;
  bool force_generic = false;  // skip closed forms and the shear reduction
};

struct MeasureResult {
  double value = 0.0;
  double std_error = 0.0;  // Monte Carlo only
  std::string method;
};

MeasureResult sublevel_measure(const AnisotropicFunction& phi, double level,
                               const MeasureOptions& opt = {});

struct PhiCircOptions {
  std::size_t levels = 512;
  double level_lo = 1e-2;
  double level_hi = 1e4;
  MeasureOptions measure;
};

// Level ladder whose radii cover [r_lo, r_hi] with `per_decade` levels per decade of level.
PhiCircOptions ladder_for_radii(const AnisotropicFunction& phi, double r_lo, double r_hi,
                                double per_decade = 85.0);

struct PhiCircResult {
  YoungFunction phi_circ;
  std::vector<double> radius;     // Phi_circ^{-1}(level)
  std::vector<double> level;
  double monotonicity_defect = 0.0;  // largest relative drop repaired in the raw ladder
  double max_std_error = 0.0;
};

PhiCircResult phi_circ(const AnisotropicFunction& phi, const PhiCircOptions& opt = {});

struct PhiDiamondResult {
  YoungFunction phi_diamond;
  double c1 = 1.0, c2 = 1.0;  // Phi_circ(c1 t) <= Phi_diamond(t) <= Phi_circ(c2 t)
};

// Scalar biconjugate (convex envelope) of Phi_circ with measured dilation constants.
PhiDiamondResult phi_diamond(const YoungFunction& phi_circ);

// Bundles Phi, Phi_diamond and its conjugate to evaluate Theta(xi).
class ThetaMap {
 public:
  ThetaMap(AnisotropicFunction phi, YoungFunction phi_diamond);
  double operator()(std::span<const double> xi) const;
  const YoungFunction& phi_diamond() const { return diamond_; }
  const YoungFunction& conjugate() const { return conj_; }
  MonotoneFunction theta_diamond() const;

 private:
  AnisotropicFunction phi_;
  YoungFunction diamond_, conj_;
};

// sup_xi (eta . xi - Phi(xi)) by zooming product grids; n <= 3.
double vector_conjugate(const AnisotropicFunction& phi, std::span<const double> eta);

// Radius rho with Phi(rho * dir) = level along a unit direction.
double ray_radius(const AnisotropicFunction& phi, std::span<const double> dir, double level);

struct InvariantReport {
  bool zero_at_origin = true;
  bool even = true;
  bool convex = true;
  bool bounded = true;
  std::string detail;
  bool ok() const { return zero_at_origin && even && convex && bounded; }
};

// Random-probe checks of Phi(0)=0, evenness, midpoint convexity and bounded sublevel sets.
InvariantReport check_invariants(const AnisotropicFunction& phi, int probes = 200,
                                 std::uint64_t seed = 1);

}  // namespace anisokit
