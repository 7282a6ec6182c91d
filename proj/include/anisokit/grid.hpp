#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "anisokit/anisotropic.hpp"
#include "anisokit/error.hpp"
#include "anisokit/rearrangement.hpp"
#include "anisokit/symmetrized.hpp"
#include "json.hpp"

namespace anisokit {

// Nodal field on the N x N grid over the unit square with zero boundary values.
// Node (i, j) sits at (i h, j h) and is stored at i + N j.
class GridField {
 public:
  GridField() = default;
  explicit GridField(int N);
  // Evaluates f at the interior nodes; boundary nodes stay 0.
  static GridField from_function(int N, const std::function<double(double, double)>& f);
  // Throws unless the boundary is exactly 0 and every value is finite.
  static GridField from_values(int N, std::vector<double> values);

  int size() const { return n_; }
  double h() const { return 1.0 / (n_ - 1); }
  double cell_measure() const { return h() * h(); }
  double x(int i) const { return i * h(); }
  bool interior(int i, int j) const { return i > 0 && j > 0 && i < n_ - 1 && j < n_ - 1; }

  double operator()(int i, int j) const { return v_[i + n_ * j]; }
  double& operator()(int i, int j) { return v_[i + n_ * j]; }
  const std::vector<double>& values() const { return v_; }
  std::span<double> data() { return v_; }

  double l1() const;   // sum |v| h^2
  double sup() const;  // max |v|
  // Dual-cell measure of each node: h^2 inside, h^2/2 on edges, h^2/4 at corners (total 1).
  std::vector<double> node_measures() const;

  // Header row "y\x,x_0,...", then one row per j with y_j first.
  void write_csv(std::ostream& os) const;
  static GridField read_csv(std::istream& is);

 private:
  int n_ = 0;
  std::vector<double> v_;
};

// Rearrangement of |u| with dual-cell weights.
RearrangedFunction rearrange(const GridField& u);

struct OperatorSpec {
  AnisotropicFunction phi;                         // a(x, xi) = b(x) grad Phi(xi)
  std::function<double(double, double)> coefficient;  // b >= 1; empty means 1
  double epsilon = 0.0;                            // regularization weight in [0, 1)
  double q = 4.0;                                  // A(t) = t^q / q, q > n
  double c_phi = 0.5;                              // coercivity record for the audit
  std::function<double(double, double)> h_profile;  // audit slack h(x); empty means 0

  // Throws on eps outside [0,1), q <= n, b < 1 at a node, or non-convex Phi.
  void validate(int N = 0) const;
  double b(double x, double y) const { return coefficient ? coefficient(x, y) : 1.0; }
  // Phi(xi) + eps A(|xi|), the potential of the regularized operator.
  double potential(std::span<const double> xi) const;
  // b grad Phi(xi) + eps A'(|xi|) xi / |xi| at a point.
  void flux(double x, double y, std::span<const double> xi, std::span<double> out) const;
};

OperatorSpec regularized(const OperatorSpec& base, double epsilon, double q = 4.0);

// Discrete energy J(u) = sum_cells [b Phi(D u) + eps A(|D u|)] h^2 - sum_nodes f u h^2 with D the
// forward difference on each cell.
class DiscreteEnergy {
 public:
  DiscreteEnergy(OperatorSpec spec, int N);
  int size() const { return n_; }
  const OperatorSpec& spec() const { return spec_; }

  double value(std::span<const double> u, std::span<const double> f) const;
  // dJ/du with zeros on the boundary; cell fluxes then an OpenMP gather over nodes.
  void gradient(std::span<const double> u, std::span<const double> f, std::span<double> grad) const;

  // J(u_new) - J(u_old) from per-cell differences with compensated summation; resolves changes
  // far below the rounding unit of J itself.
  double difference(std::span<const double> u_new, std::span<const double> u_old, std::span<const double> f) const;

  // Serial references: scatter over cells.
  double difference_serial(std::span<const double> u_new, std::span<const double> u_old,
                           std::span<const double> f) const;
  double value_serial(std::span<const double> u, std::span<const double> f) const;
  void gradient_serial(std::span<const double> u, std::span<const double> f, std::span<double> grad) const;

  // Forward-difference gradient on cell (i, j), 0 <= i, j < N-1.
  std::array<double, 2> cell_gradient(std::span<const double> u, int i, int j) const;

 private:
  OperatorSpec spec_;
  int n_;
  double h_;
  std::vector<double> b_;  // coefficient at cell centers
};

// Inverse of the 5-point Dirichlet Laplacian scaled by h^2 (the Hessian of J for |xi|^2/2),
// applied with a type-I sine transform.
class LaplacePreconditioner {
 public:
  explicit LaplacePreconditioner(int N);
  ~LaplacePreconditioner();
  LaplacePreconditioner(const LaplacePreconditioner&) = delete;
  LaplacePreconditioner& operator=(const LaplacePreconditioner&) = delete;
  void apply(std::span<const double> r, std::span<double> z) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

struct SolveOptions {
  double tol_factor = 1e-9;  // stop when max |dJ/du| <= tol_factor ||f||_1
  int max_iterations = 20000;
  int lbfgs_memory = 8;
  bool parallel = true;
  std::ostream* log = nullptr;  // JSON lines per accepted step
  const GridField* initial = nullptr;
};

struct GridSolution {
  GridField u;
  double energy = 0.0;
  double residual = 0.0;  // max |dJ/du| at the returned field
  double tolerance = 0.0;
  int iterations = 0;
  bool energy_monotone = true;
  std::string method;  // "bb" or "bb+lbfgs"
  std::vector<double> energy_history;
  nlohmann::json to_json() const;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual, int iterations)
      : Error(ErrorKind::non_convergence, what), residual_(residual), iterations_(iterations) {}
  double residual() const { return residual_; }
  int iterations() const { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

// Minimizes J by preconditioned Barzilai-Borwein steps with Armijo backtracking, falling back
// to preconditioned L-BFGS when the line search stalls.
GridSolution solve(const OperatorSpec& spec, const GridField& f, const SolveOptions& opt = {});

// Per-cell Phi(D u) (or any map of D u) and the matching cell measures.
std::vector<double> cell_map(const GridField& u, const std::function<double(std::span<const double>)>& fn);
// Max |u| over the three nodes of each cell's stencil.
std::vector<double> cell_stencil_max(const GridField& u);

// Truncation energy bound on the solution: cells whose stencil lies in {|u| < t}.
LadderCheck truncation_energy(const OperatorSpec& spec, const GridField& u, const GridField& f,
                              std::vector<double> ladder = {});

struct PointMass {
  double x = 0.5, y = 0.5, mass = 1.0;
};

// Tent of half-width w centred at the mass, normalized so that sum f h^2 = mass on the grid.
GridField mollified_mass(const PointMass& mu, int N, double half_width);
GridField truncated(const GridField& f, double k);

struct SequenceOptions {
  SolveOptions solve;
  double tau = 1e-3;       // deviation threshold for u
  double grad_tau = 1e-2;  // deviation threshold for grad u
  bool warm_start = true;
};

struct SequenceStep {
  double k = 0.0, next_k = 0.0;
  double sup_diff = 0.0;
  double deviation_measure = 0.0;           // |{|u_k - u_next| > tau}|
  double gradient_deviation_measure = 0.0;  // |{|D u_k - D u_next| > grad_tau}|
};

struct ApproximableSequence {
  std::vector<double> ladder;
  std::vector<double> data_l1;
  std::vector<GridSolution> solutions;
  std::vector<SequenceStep> steps;
  bool deviation_monotone = true;
  nlohmann::json to_json() const;
};

// f_k = T_k(f) for each k of the ladder.
ApproximableSequence approximable_sequence(const OperatorSpec& spec, const GridField& f,
                                           const std::vector<double>& k_ladder, const SequenceOptions& opt = {});
// f_k = tent of half-width max(2h, 1/(4k)) carrying the mass.
ApproximableSequence approximable_sequence(const OperatorSpec& spec, const PointMass& mu, int N,
                                           const std::vector<double>& k_ladder, const SequenceOptions& opt = {});

struct AuditOptions {
  int samples = 400;
  int growth_samples = 24;
  double lo = 1e-2, hi = 1e2;  // range of |xi|
  std::uint64_t seed = 7;
};

struct AuditReport {
  bool monotone = true;
  bool coercive = true;
  bool growth = true;
  double c_phi = 0.0;       // the recorded constant that was checked
  double c_phi_best = 0.0;  // largest c with conj(Phi)(c a) <= Phi on the growth samples with h = 0
  double h_measured = 0.0;  // max of conj(Phi)(c_phi a) - Phi, positive part
  int equal_pairs_skipped = 0;
  std::vector<std::string> findings;
  bool pass() const { return monotone && coercive && growth; }
  nlohmann::json to_json() const;
};

// Sampled check of strict monotonicity, coercivity a.xi >= Phi and growth
// conj(Phi)(c_phi a) <= Phi + h against the operator's own potential Phi + eps A.
AuditReport assumption_audit(const OperatorSpec& spec, const AuditOptions& opt = {});

struct RegularizationReport {
  std::vector<double> epsilon;
  std::vector<double> sup_diff;  // ||u^eps - u^0||_inf
  bool monotone = true;
  nlohmann::json to_json() const;
};

RegularizationReport regularization_consistency(const OperatorSpec& spec, const GridField& f,
                                                const std::vector<double>& eps_ladder, const SolveOptions& opt = {});

}  // namespace anisokit
