#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "anisokit/anisotropic.hpp"
#include "anisokit/young.hpp"
#include "json.hpp"

namespace anisokit {

enum class Dichotomy { divergent, convergent };
const char* to_string(Dichotomy d);

struct DichotomyReport {
  Dichotomy verdict = Dichotomy::divergent;
  int level = 0;            // 0: power scale, 1: one log, 2: two logs
  double exponent = 0.0;    // integrand exponent at the deciding level, compared with -1
  double sigma = 0.0;       // fitted growth exponent of Phi_circ on the window
  double spread = 0.0;      // range of windowed local exponents
  bool borderline = false;  // decided by sign alone at the deepest level
  Domain window;
  std::vector<double> level_exponents;
  nlohmann::json to_json() const;
};

// Decides whether int^inf (t/Phi_circ(t))^{1/(n-1)} dt diverges. Default window: top two
// decades of the trusted range.
DichotomyReport classify_integral(const YoungFunction& phi_circ, int n, Domain window = {0.0, 0.0},
                                  double margin = 0.02);

// Growth exponent of Phi_circ near zero and whether int_0 (t/Phi_circ)^{1/(n-1)} converges.
struct NearZeroReport {
  double exponent = 0.0;
  bool converges = true;
};
NearZeroReport near_zero_behaviour(const YoungFunction& phi_circ, int n);

struct ScalarModification {
  YoungFunction function;
  bool applied = false;
  double knee = 1.0;  // linear on [0, knee], unchanged above
  NearZeroReport before;
};
// Linear on [0, knee] and equal to the input above, when the near-zero integral diverges.
ScalarModification modify_near_zero(const YoungFunction& phi_circ, int n, double knee = 1.0,
                                    bool force = false);

struct AnisotropicModification {
  AnisotropicFunction function;  // Xi on {Phi <= 1}, Phi elsewhere
  AnisotropicFunction xi;        // the 1-homogeneous extension of Phi restricted to {Phi = 1}
  bool applied = false;
  double exponent_at_zero = 0.0;  // growth exponent of Phi_circ near zero, from sublevel measures
};
AnisotropicModification modify_near_zero(const AnisotropicFunction& phi, bool force = false);

struct ProfileOptions {
  double t_lo = 0.0;  // 0: trusted range of phi_circ
  double t_hi = 0.0;
  double per_decade = 64.0;
  bool auto_modify = true;
  bool force_modify = false;  // linearize near zero even when the integral converges
  double knee = 1.0;
  double kappa2 = 1.0;  // embedding constant; existence-only, reported as a parameter
  bool with_hat = true;
};

class EmbeddingProfile {
 public:
  // Throws ErrorKind::refused for a convergent dichotomy.
  static EmbeddingProfile build(const YoungFunction& phi_circ, int n, const ProfileOptions& opt = {});

  int n() const;
  double n_prime() const;
  const YoungFunction& phi_circ() const;  // after any near-zero modification
  const YoungFunction& original() const;
  bool modification_applied() const;
  const DichotomyReport& dichotomy() const;
  Domain range() const;
  double kappa2() const;

  double H(double t) const;
  double H_inverse(double s) const;
  const YoungFunction& phi_n() const;
  const MonotoneFunction& vartheta() const;
  const MonotoneFunction& varrho() const;
  const YoungFunction& hat_phi_circ() const;  // empty when built without it

  // Columns t, H, phi_n, hat_phi_circ, vartheta, varrho on a log grid of the range.
  void write_csv(std::ostream& os, double per_decade = 16.0) const;
  nlohmann::json report() const;

  struct Data;

 private:
  std::shared_ptr<const Data> d_;
};

// Optimal Orlicz-Lorentz target function built from the nested integral; `range` bounds
// the radii where phi_circ' is sampled.
YoungFunction hat_phi_circ(const YoungFunction& phi_circ, int n, Domain range, double per_decade = 64.0);

// Pool-adjacent-violators nondecreasing fit.
std::vector<double> isotonic_fit(const std::vector<double>& y, const std::vector<double>& w);

}  // namespace anisokit
