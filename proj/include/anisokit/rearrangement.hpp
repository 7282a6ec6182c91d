#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "anisokit/young.hpp"
#include "json.hpp"

namespace anisokit {

class EmbeddingProfile;

// Nonincreasing right-continuous step function on (0, |Omega|): value v_j on [s_{j-1}, s_j).
class RearrangedFunction {
 public:
  RearrangedFunction() = default;
  // breakpoints s_0 = 0 < s_1 < ... < s_m; m values, nonincreasing and >= 0.
  RearrangedFunction(std::vector<double> breakpoints, std::vector<double> values);
  static RearrangedFunction constant(double c, double measure);

  double operator()(double s) const;
  // Integral of u* over (0, s).
  double integral(double s) const;
  // u**(s) = integral(s) / s, exact.
  double maximal(double s) const;
  // mu(t) = |{u* > t}|.
  double distribution(double t) const;
  // |{u* >= t}|.
  double measure_at_least(double t) const;
  double measure() const { return s_.empty() ? 0.0 : s_.back(); }
  std::size_t size() const { return v_.size(); }
  const std::vector<double>& breakpoints() const { return s_; }
  const std::vector<double>& values() const { return v_; }
  RearrangedFunction scaled(double c) const;

 private:
  std::vector<double> s_, v_, cum_;
};

// Decreasing rearrangement of |values| with the given cell measures.
RearrangedFunction rearrange(const std::vector<double>& values, const std::vector<double>& measures);

// u** as a step function: each step of u* split into `per_step` log-spaced pieces carrying
// the exact average of u** over the piece.
RearrangedFunction maximal_rearrangement(const RearrangedFunction& u, int per_step = 8);

// Integral of u* v* over (0, min measure).
double product_integral(const RearrangedFunction& u, const RearrangedFunction& v);

// Rows "s,value" with s the right end of each step.
void write_csv(std::ostream& os, const RearrangedFunction& u);
RearrangedFunction read_rearranged_csv(std::istream& is);

// A nonincreasing datum f*(s) on (0, |Omega|) given by formula.
struct DataProfile {
  std::string id;
  std::function<double(double)> value;
  std::function<double(double)> primitive;  // integral over (0, s); optional, may be +inf
  double measure = 1.0;
};
// c * s^{-a} on (0, measure).
DataProfile power_data(double c, double a, double measure = 1.0);
// Step function with cell averages on `cells` log-spaced breakpoints from s_min_ratio*|Omega|;
// the first cell is (0, s_1).
RearrangedFunction realize(const DataProfile& f, std::size_t cells = 1u << 14, double s_min_ratio = 1e-12);

// An improper integral near s = 0 over a step datum, with the divergence probe: infinite when
// the partial integral grows more than 10x across the last two probe decades, or when the
// per-decade increments stop shrinking (ratio >= 10^-0.02).
struct TailIntegral {
  double value = 0.0;
  bool finite = true;
  double increment_ratio = 0.0;  // last-decade over previous-decade increment
  double growth = 0.0;           // partial integral growth across the last two probe decades
  nlohmann::json to_json() const;
};

enum class Variant { star, double_star };

struct NormResult {
  double value = 0.0;  // +inf when no finite lambda works
  bool finite = true;
};

NormResult luxemburg_norm(const YoungFunction& a, const RearrangedFunction& u);
// || s^{1/r} u^(*|**)(s) ||_{L^A(0,|Omega|)}; r = +inf gives weight 1.
NormResult orlicz_lorentz_norm(const YoungFunction& a, double r, const RearrangedFunction& u,
                               Variant variant = Variant::star);

struct AdmissibilityReport {
  bool admissible = true;
  bool convergent_dichotomy = false;  // any integrable datum is admissible
  std::vector<double> lambdas;
  std::vector<TailIntegral> modulars;
  double failing_lambda = 0.0;
  std::string verdict;
  nlohmann::json to_json() const;
};

// M(lambda) = int_0^|Omega| conj(Phi_circ)(s^{1/n} f**(s) / lambda) ds on a decreasing ladder
// (default 8 values over [1e-2, 1e2]).
AdmissibilityReport data_admissibility(const RearrangedFunction& f, const EmbeddingProfile& profile,
                                       std::vector<double> lambdas = {});
// Classifies first; a convergent dichotomy admits any integrable datum.
AdmissibilityReport data_admissibility(const RearrangedFunction& f, const YoungFunction& phi_circ, int n,
                                       std::vector<double> lambdas = {});

// B = (n w_n^{1/n})^{-1} int_0^|Omega| s^{-1/n'} Psi_diamond^{-1}(s^{1/n} f**(s) / (n w_n^{1/n})) ds.
TailIntegral boundedness_criterion(const RearrangedFunction& f, const MonotoneFunction& psi_diamond, int n);

}  // namespace anisokit
