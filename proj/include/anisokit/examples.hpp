#pragma once

#include <optional>
#include <string>
#include <vector>

#include "anisokit/anisotropic.hpp"
#include "anisokit/sobolev.hpp"
#include "anisokit/young.hpp"
#include "json.hpp"

namespace anisokit {

enum class Regime { subcritical, exp, double_exp, convergent };
const char* to_string(Regime r);

// Growth f(t) ~ t^power (log t)^log (log log t)^loglog for exp_level 0, exp(t^power) for
// exp_level 1 and exp(exp(t^power)) for exp_level 2.
struct Asymptotic {
  std::string variable;  // "u", "grad u", "u_x1", "u_x1 - u_x2", ...
  std::string function;  // "phi_circ", "sobolev_conjugate", "vartheta", "varrho"
  int exp_level = 0;
  double power = 0.0;
  double log = 0.0;
  double loglog = 0.0;
  int term = -1;  // for varrho: index of the term A with varrho_n(A(t)); -1 for |grad u| on radial forms
  nlohmann::json to_json() const;
};

// One scalar term A(|c . xi|) with A(t) ~ t^p (log t)^alpha at infinity; `exp_beta` > 0 marks
// e^{t^beta} - 1 instead.
struct ExampleTerm {
  std::string variable;
  std::vector<double> coeffs;
  double p = 0.0;
  double alpha = 0.0;
  double exp_beta = 0.0;
};

class ExampleRecord {
 public:
  static ExampleRecord plap(double p, int n);
  static ExampleRecord iso_zyg(double p, double alpha, int n);
  static ExampleRecord aniso_plap(std::vector<double> p);
  static ExampleRecord aniso_zyg(std::vector<double> p, std::vector<double> alpha);
  // c <= 0 selects the default e^2.
  static ExampleRecord aniso_trud(double p, double q, double alpha, double c = 0.0);
  static ExampleRecord aniso_new(double p, double beta);
  // Keys n, p (number or array), alpha (number or array), q, beta, c.
  static ExampleRecord from_json(const std::string& id, const nlohmann::json& params);
  static const std::vector<std::string>& ids();

  const std::string& id() const { return id_; }
  int n() const { return n_; }
  double p_bar() const { return p_bar_; }
  double alpha_bar() const { return alpha_bar_; }
  double log_shift() const { return c_; }  // c in log(c + t), raised until the terms are convex
  const std::vector<ExampleTerm>& terms() const { return terms_; }
  const nlohmann::json& parameters() const { return params_; }

  // The model Phi built in the anisotropic module.
  AnisotropicFunction phi() const;
  // The scalar function of term k.
  YoungFunction term_function(std::size_t k) const;
  nlohmann::json to_json() const;

 private:
  void finish();

  std::string id_;
  int n_ = 0;
  double p_bar_ = 0.0, alpha_bar_ = 0.0;
  double c_ = 0.0;
  std::vector<ExampleTerm> terms_;
  nlohmann::json params_;
};

struct Regularity {
  Regime regime = Regime::subcritical;
  std::vector<Asymptotic> entries;
  std::vector<std::string> notes;
  nlohmann::json to_json() const;
};

// Closed-form exponents of Phi_circ, the Sobolev conjugate and the Marcinkiewicz functions for u
// and each gradient component, with the case split on (p_bar, alpha_bar).
Regularity expected_regularity(const ExampleRecord& record);

struct ExponentCheck {
  std::string variable, function, quantity;  // quantity: power, log, loglog, exp_inner
  double expected = 0.0, measured = 0.0, tolerance = 0.0;
  bool relative = false;
  bool pass = false;
  Domain window;
  nlohmann::json to_json() const;
};

struct VerifyOptions {
  double decades = 3.0;          // fit window below the top of the trusted range
  double level_lo = 1e-4;        // level ladder for the computed Phi_circ
  double level_hi = 1e280;
  double levels_per_decade = 6.0;
  double analytic_top = 1e100;   // top of the profile range for radial forms
  double power_tol = 0.02;       // relative; absolute when the expected exponent is 0
  double log_tol = 0.15;         // absolute, also applied to log log exponents
};

enum class VerifyStatus { pass, fail, inconclusive };
const char* to_string(VerifyStatus s);

struct VerificationReport {
  std::string id;
  Regime expected_regime = Regime::subcritical;
  Regime measured_regime = Regime::subcritical;
  VerifyStatus status = VerifyStatus::inconclusive;
  DichotomyReport dichotomy;
  std::vector<ExponentCheck> checks;
  std::vector<std::string> notes;
  bool pass() const { return status == VerifyStatus::pass; }
  nlohmann::json to_json() const;
};

// Phi_circ of the record's Phi: the generator for radial forms, else the cubature ladder.
YoungFunction computed_phi_circ(const ExampleRecord& record, const VerifyOptions& opt = {});

// Fits the exponents of Phi_circ and, when the dichotomy diverges, of the profile functions.
VerificationReport verify_asymptotics(const ExampleRecord& record, const YoungFunction& phi_circ,
                                      const VerifyOptions& opt = {});
VerificationReport verify_asymptotics(const ExampleRecord& record, const EmbeddingProfile& profile,
                                      const VerifyOptions& opt = {});
// computed_phi_circ followed by verify_asymptotics.
VerificationReport verify_example(const ExampleRecord& record, const VerifyOptions& opt = {});

}  // namespace anisokit
