#include <cmath>
#include <random>
#include <sstream>

#include "anisokit/grid.hpp"
#include "anisokit/numerics.hpp"
#include "doctest.h"

using namespace anisokit;

namespace {

OperatorSpec radial_spec(double p) {
  OperatorSpec s;
  s.phi = AnisotropicFunction::radial(2, YoungFunction::catalog("power:p=" + std::to_string(p)));
  return s;
}

OperatorSpec split_spec(double p1, double p2) {
  OperatorSpec s;
  s.phi = AnisotropicFunction::split({YoungFunction::catalog("power:p=" + std::to_string(p1)),
                                      YoungFunction::catalog("power:p=" + std::to_string(p2))});
  return s;
}

GridField ones(int N) {
  return GridField::from_function(N, [](double, double) { return 1.0; });
}

// -Laplace u = 1 on the unit square, value at the centre:
// sum over odd m, k of 16 sin(m pi/2) sin(k pi/2) / (pi^4 m k (m^2 + k^2))
double fourier_center(int terms) {
  double s = 0.0;
  for (int m = 1; m < terms; m += 2)
    for (int k = 1; k < terms; k += 2) {
      const double sign = ((m / 2 + k / 2) % 2 == 0) ? 1.0 : -1.0;
      s += sign * 16.0 / (std::pow(pi, 4) * m * k * (m * m + k * k));
    }
  return s;
}

std::vector<double> random_field(int N, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.2, 0.3);
  GridField g = GridField::from_function(N, [&](double, double) { return u(rng); });
  return g.values();
}

}  // namespace

TEST_CASE("grid field invariants and csv") {
  const auto f = GridField::from_function(9, [](double x, double y) { return x + 2 * y; });
  CHECK(f(0, 4) == 0.0);
  CHECK(f(8, 3) == 0.0);
  CHECK(f(2, 3) == doctest::Approx(0.25 + 0.75));
  double total = 0.0;
  for (double m : f.node_measures()) total += m;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));

  std::ostringstream os;
  f.write_csv(os);
  CHECK(os.str().rfind("y\\x,0,", 0) == 0);
  std::istringstream is(os.str());
  const auto back = GridField::read_csv(is);
  CHECK(back.values() == f.values());

  std::vector<double> bad(81, 0.0);
  bad[3] = 1.0;  // boundary node (3, 0)
  CHECK_THROWS_AS(GridField::from_values(9, bad), Error);
  bad[3] = 0.0;
  bad[40] = std::nan("");
  CHECK_THROWS_AS(GridField::from_values(9, bad), Error);
  CHECK_THROWS_AS(GridField::from_function(9, [](double, double) { return inf; }), Error);
  CHECK_THROWS_AS(GridField(2), Error);
}

TEST_CASE("parallel kernels agree with the serial references") {
  const int N = 33;
  std::vector<OperatorSpec> specs = {radial_spec(3.0), split_spec(2.0, 4.0), radial_spec(1.5)};
  specs.push_back(regularized(radial_spec(2.0), 0.1, 4.0));
  specs.back().coefficient = [](double x, double y) { return 1.0 + x * y; };
  const auto u = random_field(N, 3);
  const auto v = random_field(N, 4);
  const auto f = random_field(N, 5);
  for (const auto& s : specs) {
    const DiscreteEnergy E(s, N);
    CHECK(E.value(u, f) == doctest::Approx(E.value_serial(u, f)).epsilon(1e-13));
    std::vector<double> g1(u.size()), g2(u.size());
    E.gradient(u, f, g1);
    E.gradient_serial(u, f, g2);
    double err = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
      err = std::max(err, std::abs(g1[k] - g2[k]));
      scale = std::max(scale, std::abs(g2[k]));
    }
    CHECK(err <= 1e-13 * scale);
    const double d = E.difference(v, u, f);
    CHECK(d == doctest::Approx(E.value(v, f) - E.value(u, f)).epsilon(1e-10));
    CHECK(d == doctest::Approx(E.difference_serial(v, u, f)).epsilon(1e-13));
    // directional derivative of J matches the gradient
    std::vector<double> dir(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) dir[k] = v[k] - u[k];
    const double t = 1e-6;
    std::vector<double> up(u), um(u);
    for (std::size_t k = 0; k < u.size(); ++k) {
      up[k] += t * dir[k];
      um[k] -= t * dir[k];
    }
    double gd = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) gd += g1[k] * dir[k];
    CHECK(E.difference(up, um, f) / (2 * t) == doctest::Approx(gd).epsilon(1e-6));
  }
}

TEST_CASE("sine-transform preconditioner inverts the discrete Laplacian") {
  const int N = 17;
  const DiscreteEnergy E(radial_spec(2.0), N);
  const LaplacePreconditioner P(N);
  const auto u = random_field(N, 11);
  const std::vector<double> zero(u.size(), 0.0);
  std::vector<double> g(u.size()), z(u.size());
  E.gradient(u, zero, g);
  P.apply(g, z);
  for (std::size_t k = 0; k < u.size(); ++k) CHECK(z[k] == doctest::Approx(u[k]).epsilon(1e-12));
}

TEST_CASE("Poisson problem against the Fourier series") {
  const double oracle = fourier_center(4001);
  CHECK(oracle == doctest::Approx(0.0736713).epsilon(1e-5));
  const auto sol = solve(radial_spec(2.0), ones(129));
  CHECK(std::abs(sol.u(64, 64) - oracle) <= 2e-4);
  CHECK(sol.residual <= sol.tolerance);
  CHECK(sol.energy_monotone);
  for (std::size_t k = 1; k < sol.energy_history.size(); ++k)
    CHECK(sol.energy_history[k] <= sol.energy_history[k - 1]);
}

TEST_CASE("zero datum gives the zero solution") {
  const auto sol = solve(radial_spec(3.0), GridField(33));
  CHECK(sol.iterations == 0);
  for (double v : sol.u.values()) CHECK(v == 0.0);
}

TEST_CASE("nonlinear solves: residual, monotone energy, maximum principle, truncation bound") {
  for (const auto& s : {radial_spec(3.0), radial_spec(1.5), split_spec(2.0, 4.0)}) {
    CAPTURE(s.phi.id());
    std::ostringstream log;
    SolveOptions opt;
    opt.log = &log;
    const auto f = ones(65);
    const auto sol = solve(s, f, opt);
    CHECK(sol.residual <= sol.tolerance);
    CHECK(sol.energy_monotone);
    for (std::size_t k = 1; k < sol.energy_history.size(); ++k)
      CHECK(sol.energy_history[k] <= sol.energy_history[k - 1]);
    double mn = inf;
    for (double v : sol.u.values()) mn = std::min(mn, v);
    CHECK(mn >= -1e-12);
    // Euler-Lagrange residual recomputed independently of the solver
    const DiscreteEnergy E(s, 65);
    std::vector<double> g(f.values().size());
    E.gradient_serial(sol.u.values(), f.values(), g);
    double r = 0.0;
    for (double x : g) r = std::max(r, std::abs(x));
    CHECK(r <= sol.tolerance);
    const auto te = truncation_energy(s, sol.u, f);
    CHECK(te.ladder.size() == 20);
    CHECK(te.pass);
    // one JSON line per accepted step
    std::istringstream lines(log.str());
    std::string line;
    int count = 0;
    while (std::getline(lines, line)) {
      const auto j = nlohmann::json::parse(line);
      CHECK(j.contains("residual"));
      ++count;
    }
    CHECK(count == sol.iterations);
  }
}

TEST_CASE("serial and parallel solves coincide") {
  SolveOptions a, b;
  b.parallel = false;
  const auto s1 = solve(radial_spec(3.0), ones(33), a);
  const auto s2 = solve(radial_spec(3.0), ones(33), b);
  double d = 0.0;
  for (std::size_t k = 0; k < s1.u.values().size(); ++k)
    d = std::max(d, std::abs(s1.u.values()[k] - s2.u.values()[k]));
  CHECK(d < 1e-9);
}

TEST_CASE("operator validation and solver errors") {
  auto s = radial_spec(2.0);
  s.epsilon = 1.0;
  CHECK_THROWS_AS(solve(s, ones(9)), Error);
  s.epsilon = 0.1;
  s.q = 2.0;
  CHECK_THROWS_AS(solve(s, ones(9)), Error);
  s = radial_spec(2.0);
  s.coefficient = [](double x, double) { return 0.5 + x; };
  CHECK_THROWS_AS(solve(s, ones(9)), Error);
  OperatorSpec bent;
  bent.phi = AnisotropicFunction::custom(2, "bent", [](std::span<const double> x) {
    return std::sqrt(std::abs(x[0])) + std::sqrt(std::abs(x[1]));
  });
  try {
    solve(bent, ones(9));
    FAIL("expected rejection");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::non_convex);
  }
  SolveOptions opt;
  opt.max_iterations = 2;
  try {
    solve(radial_spec(3.0), ones(33), opt);
    FAIL("expected non-convergence");
  } catch (const ConvergenceError& e) {
    CHECK(e.residual() > 0.0);
    CHECK(e.iterations() == 2);
  }
}

TEST_CASE("regularized solutions approach the unregularized one") {
  const auto rep = regularization_consistency(radial_spec(2.0), ones(33), {1e-1, 1e-2, 1e-3});
  REQUIRE(rep.sup_diff.size() == 3);
  CHECK(rep.monotone);
  CHECK(rep.sup_diff[0] > rep.sup_diff[1]);
  CHECK(rep.sup_diff[1] > rep.sup_diff[2]);
  // first order in eps for small eps
  CHECK(rep.sup_diff[2] / rep.sup_diff[1] == doctest::Approx(0.1).epsilon(0.05));
}

TEST_CASE("data for approximable solutions") {
  const auto f = GridField::from_function(33, [](double x, double y) { return 1.0 / (0.01 + x * y); });
  const auto t = truncated(f, 5.0);
  CHECK(t.sup() == 5.0);
  CHECK(truncated(t, 5.0).values() == t.values());
  for (double w : {2.0 / 32, 0.1, 0.3}) {
    const auto m = mollified_mass({0.5, 0.5, 2.0}, 33, w);
    CHECK(m.l1() == doctest::Approx(2.0).epsilon(1e-14));
  }
  const auto off = mollified_mass({0.4, 0.55, 1.0}, 33, 2.0 / 32);
  CHECK(off.l1() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(mollified_mass({0.0, 0.0, 1.0}, 33, 0.01), Error);
}

TEST_CASE("approximable sequence for bounded data is constant") {
  const auto f = ones(33);
  const auto seq = approximable_sequence(radial_spec(2.0), f, {1.0, 2.0, 4.0});
  REQUIRE(seq.steps.size() == 2);
  for (const auto& st : seq.steps) {
    CHECK(st.sup_diff < 1e-12);
    CHECK(st.deviation_measure == 0.0);
    CHECK(st.gradient_deviation_measure == 0.0);
  }
  CHECK(seq.deviation_monotone);
  CHECK(seq.to_json()["steps"].size() == 2);
}

TEST_CASE("point-mass sequence keeps the mass") {
  const auto seq = approximable_sequence(radial_spec(2.0), PointMass{}, 33, {1.0, 4.0, 16.0});
  REQUIRE(seq.data_l1.size() == 3);
  for (double m : seq.data_l1) CHECK(m == doctest::Approx(1.0).epsilon(1e-14));
  // narrower tents raise the peak
  CHECK(seq.solutions[2].u.sup() > seq.solutions[0].u.sup());
}

TEST_CASE("assumption audit") {
  // Phi = |xi|^2: a = 2 xi, conj(Phi)(eta) = |eta|^2 / 4, growth holds iff c <= 1
  OperatorSpec s;
  s.phi = AnisotropicFunction::radial(2, YoungFunction::catalog("power:p=2,scale=1"));
  s.c_phi = 0.5;
  AuditOptions opt;
  opt.growth_samples = 6;
  const auto rep = assumption_audit(s, opt);
  CHECK(rep.pass());
  CHECK(rep.equal_pairs_skipped == 1);
  CHECK(rep.c_phi_best == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(rep.h_measured <= 0.0);

  s.c_phi = 1.5;
  CHECK_FALSE(assumption_audit(s, opt).growth);

  // regularized: the q-power part limits c to 1/(q-1)
  auto r = regularized(radial_spec(2.0), 0.1, 4.0);
  r.c_phi = 1.0 / 3.0;
  const auto rr = assumption_audit(r, opt);
  CHECK(rr.monotone);
  CHECK(rr.coercive);
  CHECK(rr.growth);
  CHECK(rr.c_phi_best >= 1.0 / 3.0 * (1 - 1e-3));
}

TEST_CASE("rearranged grid solution stays below the symmetrized solution") {
  const auto sol = solve(radial_spec(2.0), ones(65));
  const auto us = rearrange(sol.u);
  CHECK(us.measure() == doctest::Approx(1.0).epsilon(1e-14));
  const auto v = solve_radial(psi_of(YoungFunction::catalog("power:p=2")), RearrangedFunction::constant(1.0, 1.0), 2,
                              {.nodes = 1024});
  for (double s : log_space(0.05, 0.95, 30)) CHECK(us(s) <= 1.05 * v.symmetral(s));
}
