#pragma once

#include <iosfwd>
#include <memory>
#include <vector>

#include "anisokit/rearrangement.hpp"
#include "anisokit/sobolev.hpp"
#include "anisokit/young.hpp"
#include "json.hpp"

namespace anisokit {

struct RadialOptions {
  int nodes = 4096;  // cosine-clustered towards the boundary of the ball
  double rel_tol = 1e-13;
};

// Solution of the symmetrized problem on the ball with the measure of Omega:
// v(r) = int_{w_n r^n}^{|Omega|} Psi^{-1}(s^{1/n} f**(s) / c) / (c s^{1/n'}) ds, c = n w_n^{1/n}.
class RadialSolution {
 public:
  int n() const;
  double measure() const;
  double radius() const;
  const std::vector<double>& r() const;
  const std::vector<double>& v() const;
  const std::vector<double>& g() const;  // |grad v| at the nodes
  double linf() const;                   // v(0)

  // Cubic Hermite interpolation using v' = -g.
  double value_at(double r) const;
  double gradient_at(double r) const;
  // v*(s) = v at the radius of the ball of measure s.
  double symmetral(double s) const;

  void write_csv(std::ostream& os) const;  // r,v,g
  nlohmann::json to_json() const;

  struct Data;

 private:
  std::shared_ptr<const Data> d_;
  friend RadialSolution solve_radial(const MonotoneFunction&, const RearrangedFunction&, int, const RadialOptions&);
};

// Throws a range error naming the largest argument when Psi^{-1} cannot be evaluated.
RadialSolution solve_radial(const MonotoneFunction& psi_diamond, const RearrangedFunction& f, int n,
                            const RadialOptions& opt = {});

// Sharp L-infinity bound; the same integral as v(0).
TailIntegral linf_bound(const RearrangedFunction& f, const MonotoneFunction& psi_diamond, int n);

struct BoundCheck {
  double bound = 0.0;
  double measured = 0.0;
  bool pass = false;
  nlohmann::json to_json() const;
};

// int_Omega Theta(grad u) against 2 w_n^{-1/n} |Omega|^{1/n} ||f||_1; theta_values holds Theta(grad u)
// per cell.
BoundCheck gradient_l1_bound(const std::vector<double>& theta_values, const std::vector<double>& measures,
                             double omega_measure, double f_l1, int n);

struct LadderCheck {
  std::vector<double> ladder, bound, measured;
  bool pass = true;
  double calibrated = 0.0;  // constant making the bound hold on the ladder (see each producer)
  nlohmann::json to_json() const;
};

// sum over {|u| < t} of Phi(grad u) * cell <= 2 t ||f||_1 on the ladder (default 20 points up to max |u|).
LadderCheck truncation_energy_check(const std::vector<double>& u_values, const std::vector<double>& phi_grad_values,
                                    const std::vector<double>& measures, double f_l1,
                                    std::vector<double> ladder = {});

// |{|u| >= t}| <= K t / Phi_n(kappa2 t^{1/n'} K^{-1/n}) for t > t0. With the near-zero
// modification applied, K becomes K + |Omega| and t0 becomes max(t0, 1).
class LevelSetBoundU {
 public:
  LevelSetBoundU(const EmbeddingProfile& profile, double K, double t0 = 0.0, double kappa2 = 1.0,
                 double omega_measure = 0.0);
  double operator()(double t) const;
  double K() const { return K_; }
  double t0() const { return t0_; }
  double kappa2() const { return kappa2_; }
  // calibrated: largest kappa2 for which the bound holds at every ladder point.
  LadderCheck check(const RearrangedFunction& u_star, std::vector<double> ladder = {}) const;

 private:
  EmbeddingProfile profile_;
  double K_, t0_, kappa2_;
};

// |{Phi(grad u) > s}| <= c1 Phi_n^{-1}(s)^{n'} / s for s > s0; the proof's constant 2 (K/kappa2)^{n'}
// is reported alongside.
class LevelSetBoundGrad {
 public:
  LevelSetBoundGrad(const EmbeddingProfile& profile, double c1 = 1.0, double s0 = 0.0);
  double operator()(double s) const;
  double c1() const { return c1_; }
  static double proof_constant(double K, double kappa2, int n);
  // calibrated: smallest c1 for which the bound holds at every ladder point.
  LadderCheck check(const RearrangedFunction& phi_grad_star, std::vector<double> ladder = {}) const;

 private:
  EmbeddingProfile profile_;
  double c1_, s0_;
};

struct MarcinkiewiczResult {
  double value = 0.0;  // smallest lambda with sup_s u*(s) / varrho^{-1}(lambda / s) <= 1
  bool finite = true;
  double growth = 0.0;  // per-decade growth of s varrho(u*(s)) over the last probe decade
  nlohmann::json to_json() const;
};
MarcinkiewiczResult marcinkiewicz_quasinorm(const RearrangedFunction& u_star, const MonotoneFunction& varrho);

}  // namespace anisokit
