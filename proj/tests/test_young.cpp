#include <cmath>
#include <sstream>

#include "anisokit/error.hpp"
#include "anisokit/numerics.hpp"
#include "anisokit/young.hpp"
#include "doctest.h"

using namespace anisokit;

namespace {

// Brute-force sup_s (s t - A(s)) over a log grid; independent of the library.
double brute_conjugate(const std::function<double(double)>& A, double t, double lo, double hi, int n) {
  double best = 0.0;
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < n; ++i) {
    const double s = std::exp(a + (b - a) * i / (n - 1));
    best = std::max(best, s * t - A(s));
  }
  return best;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

YoungFunction without_closed_forms(const YoungFunction& f) {
  AnalyticDef d;
  d.id = "plain(" + f.id() + ")";
  d.value = [f](double t) { return f(t); };
  d.derivative = [f](double t) { return f.derivative(t); };
  d.limit = f.limit();
  d.hint = f.domain();
  return YoungFunction::analytic(d);
}

}  // namespace

TEST_CASE("conjugate: closed-form catalog pairs") {
  auto quad = YoungFunction::catalog("power:p=2");
  auto qc = quad.conjugate();
  for (double t : {0.1, 1.0, 3.0, 50.0}) CHECK(qc(t) == doctest::Approx(t * t / 2).epsilon(1e-14));

  auto cube = YoungFunction::catalog("power:p=3");
  auto cc = cube.conjugate();
  for (double t : {0.1, 1.0, 7.0}) CHECK(cc(t) == doctest::Approx(std::pow(t, 1.5) / 1.5).epsilon(1e-13));
  CHECK(cc(1.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("conjugate: exp_minus_linear against brute-force sup") {
  auto a = YoungFunction::catalog("exp_minus_linear");
  auto closed = a.conjugate();
  auto numeric = without_closed_forms(a).conjugate();
  auto A = [](double s) { return std::expm1(s) - s; };
  for (double t : {0.1, 1.0, 10.0}) {
    const double oracle = brute_conjugate(A, t, 1e-6, 50.0, 100000);
    CHECK(rel(closed(t), oracle) < 1e-6);
    CHECK(rel(numeric(t), oracle) < 1e-6);
    CHECK(rel(closed(t), (1 + t) * std::log1p(t) - t) < 1e-13);
  }
}

TEST_CASE("conjugate: sampled discrete Legendre transform") {
  auto a = YoungFunction::catalog("power:p=3");
  auto s = YoungFunction::sample(a, 1e-3, 1e5, 2048);
  auto sc = s.conjugate();
  CHECK(sc.form() == Form::sampled);
  CHECK(sc.convexity_certified());
  for (double t : {0.01, 1.0, 100.0, 1e4}) CHECK(rel(sc(t), std::pow(t, 1.5) / 1.5) < 1e-5);
  auto back = sc.conjugate();
  for (double t : {0.01, 0.5, 30.0, 1e4}) CHECK(rel(back(t), a(t)) < 1e-3);
}

TEST_CASE("conjugate rejects non-convex input") {
  auto bad = YoungFunction::sampled("bump", {1, 2, 3, 4}, {1, 4, 4.5, 10});
  CHECK_FALSE(bad.convexity_certified());
  CHECK_THROWS_AS(bad.conjugate(), Error);
}

TEST_CASE("inverse") {
  CHECK(YoungFunction::catalog("power:p=2,scale=1").inverse(4.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(YoungFunction::catalog("power:p=3").inverse(9.0) == doctest::Approx(3.0).epsilon(1e-14));
  // the grid keeps values finite in double precision; t = 1 lies on the 2048/decade lattice
  auto e = YoungFunction::catalog("exp_power:beta=1");
  auto s = YoungFunction::sample(e, 1e-3, 1e2, 2048);
  CHECK(std::abs(s.inverse(std::exp(1.0) - 1.0) - 1.0) < 1e-8);
  // bisection path without closed form
  auto plain = without_closed_forms(e);
  CHECK(std::abs(plain.inverse(std::exp(1.0) - 1.0) - 1.0) < 1e-10);
  CHECK_THROWS_AS(s.inverse(1e300), RangeError);
  try {
    s.inverse(1e300);
  } catch (const RangeError& err) {
    CHECK(err.hi() == doctest::Approx(std::expm1(100.0)));
  }
}

TEST_CASE("inverse is left-continuous on flat segments") {
  auto f = YoungFunction::sampled("flat", {1, 2, 3, 4}, {1, 2, 2, 5});
  CHECK(f.inverse(2.0) == doctest::Approx(2.0));
  CHECK(f(f.inverse(3.0)) <= 3.0 + 1e-12);
}

TEST_CASE("growth conditions") {
  auto sq = check_growth_condition(YoungFunction::catalog("power:p=2"), GrowthCondition::delta2);
  CHECK(sq.verdict == Verdict::holds);
  CHECK(sq.constant == doctest::Approx(4.0).epsilon(1e-9));

  auto ex = check_growth_condition(YoungFunction::catalog("exp_power:beta=1"), GrowthCondition::delta2);
  CHECK(ex.verdict == Verdict::fails);
  CHECK(ex.witness_ratio > 1e6);

  auto tl = check_growth_condition(YoungFunction::catalog("power_log:p=1,alpha=1"), GrowthCondition::nabla2);
  CHECK(tl.verdict == Verdict::fails);

  auto pw = check_growth_condition(YoungFunction::catalog("power:p=3"), GrowthCondition::nabla2);
  CHECK(pw.verdict == Verdict::holds);

  // a narrow sampled range cannot decide
  auto narrow = YoungFunction::sample(YoungFunction::catalog("power:p=2"), 1.0, 10.0, 64);
  CHECK(check_growth_condition(narrow, GrowthCondition::delta2).verdict == Verdict::inconclusive);
}

TEST_CASE("psi") {
  auto p3 = psi_of(YoungFunction::catalog("power:p=3,scale=1"));
  CHECK(p3(2.0) == doctest::Approx(4.0));
  CHECK(p3.inverse(4.0) == doctest::Approx(2.0).epsilon(1e-14));
  auto pl = psi_of(YoungFunction::catalog("power_log:p=2,alpha=1"));
  CHECK(pl(3.0) == doctest::Approx(3.0 * std::log(4.0)).epsilon(1e-14));
  auto se = psi_of(YoungFunction::sample(YoungFunction::catalog("exp_power:beta=1"), 1e-3, 1e2, 2048));
  CHECK(std::abs(se.inverse((std::exp(2.0) - 1.0) / 2.0) - 2.0) < 1e-6);
}

TEST_CASE("theta_diamond") {
  auto half = theta_diamond(YoungFunction::catalog("power:p=2"));
  for (double t : {0.3, 1.0, 8.0}) CHECK(half(t) == doctest::Approx(t).epsilon(1e-12));

  const double p = 3.0, q = 1.5;
  auto th = theta_diamond(YoungFunction::catalog("power:p=3"));
  for (double t : {1.0, 2.0, 10.0})
    CHECK(th(t) == doctest::Approx(std::pow(q * std::pow(t, p) / p, 1.0 / q)).epsilon(1e-12));

  auto cube = YoungFunction::catalog("power:p=3,scale=1");
  auto tc = theta_diamond(cube);
  auto psi = psi_of(cube);
  for (double t : {0.5, 1.0, 100.0}) CHECK(tc(psi.inverse(t)) <= 2.0 * t * (1.0 + 1e-9));
}

TEST_CASE("catalog parsing") {
  CHECK_THROWS_AS(YoungFunction::catalog("power:p=1"), Error);
  CHECK_THROWS_AS(YoungFunction::catalog("nope"), Error);
  CHECK_THROWS_AS(YoungFunction::catalog("power:p=abc"), Error);
  CHECK(YoungFunction::catalog("power:p=2").n_function());
  CHECK(YoungFunction::catalog("exp_minus_linear").n_function());
  CHECK_FALSE(YoungFunction::catalog("exp_power:beta=1").n_function());
}

TEST_CASE("csv round trip") {
  auto s = YoungFunction::sample(YoungFunction::catalog("power:p=2"), 0.1, 10.0, 16);
  std::stringstream ss;
  write_csv(ss, s, "t,A(t)");
  auto back = read_csv(ss, "back");
  CHECK(back.abscissae().size() == s.abscissae().size());
  CHECK(back(3.3) == doctest::Approx(s(3.3)).epsilon(1e-15));
}
