#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>

#include "anisokit/error.hpp"
#include "anisokit/examples.hpp"
#include "doctest.h"

using namespace anisokit;

namespace {

const Asymptotic& entry(const Regularity& r, const std::string& variable, const std::string& function) {
  auto it = std::find_if(r.entries.begin(), r.entries.end(),
                         [&](const Asymptotic& a) { return a.variable == variable && a.function == function; });
  REQUIRE(it != r.entries.end());
  return *it;
}

const ExponentCheck& check(const VerificationReport& rep, const std::string& variable, const std::string& function,
                           const std::string& quantity) {
  auto it = std::find_if(rep.checks.begin(), rep.checks.end(), [&](const ExponentCheck& c) {
    return c.variable == variable && c.function == function && c.quantity == quantity;
  });
  REQUIRE(it != rep.checks.end());
  return *it;
}

std::string rejection(const std::function<void()>& make) {
  try {
    make();
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::invalid_input);
    return e.what();
  }
  FAIL("expected a rejection");
  return {};
}

bool contains(const std::string& s, const std::string& part) { return s.find(part) != std::string::npos; }

}  // namespace

TEST_CASE("power growth: weak Lebesgue exponents and the critical dimension") {
  const auto r = expected_regularity(ExampleRecord::plap(2.0, 3));
  CHECK(r.regime == Regime::subcritical);
  // u in L^{n(p-1)/(n-p), inf} and |grad u| in L^{n(p-1)/(n-1), inf}
  CHECK(entry(r, "u", "vartheta").power == doctest::Approx(3.0));
  CHECK(entry(r, "grad u", "varrho").power == doctest::Approx(1.5));
  CHECK(entry(r, "u", "sobolev_conjugate").power == doctest::Approx(6.0));

  const auto crit = expected_regularity(ExampleRecord::plap(3.0, 3));
  CHECK(crit.regime == Regime::exp);
  CHECK(entry(crit, "u", "vartheta").exp_level == 1);
  CHECK(entry(crit, "u", "vartheta").power == doctest::Approx(1.0));
  // t^n / log t
  CHECK(entry(crit, "grad u", "varrho").power == doctest::Approx(3.0));
  CHECK(entry(crit, "grad u", "varrho").log == doctest::Approx(-1.0));
  CHECK(expected_regularity(ExampleRecord::plap(3.5, 3)).regime == Regime::convergent);
}

TEST_CASE("anisotropic powers: harmonic mean and the exponential regime") {
  const auto split = ExampleRecord::aniso_plap({2.0, 4.0});
  CHECK(split.p_bar() == doctest::Approx(8.0 / 3.0).epsilon(1e-14));
  CHECK(expected_regularity(split).regime == Regime::convergent);

  const auto r = expected_regularity(ExampleRecord::aniso_plap({2.0, 2.0}));
  CHECK(r.regime == Regime::exp);
  for (const char* v : {"u_x1", "u_x2"}) {
    CHECK(entry(r, v, "varrho").power == 2.0);
    CHECK(entry(r, v, "varrho").log == doctest::Approx(-1.0));
  }
}

TEST_CASE("power-log exponents follow the closed forms for every regime") {
  // oracle: the four closed forms written in terms of p_bar, alpha_bar and each (p_i, alpha_i)
  for (auto [p1, p2, a1, a2] : std::vector<std::array<double, 4>>{
           {1.5, 1.8, 0.3, -0.7}, {1.2, 3.0, 1.0, 2.0}, {2.0, 2.0, 0.5, 0.0}, {2.0, 2.0, 1.5, -0.5}, {3.0, 1.5, 0.2, 0.4}}) {
    const auto rec = ExampleRecord::aniso_zyg({p1, p2}, {a1, a2});
    const double n = 2.0, P = rec.p_bar(), B = rec.alpha_bar();
    CHECK(P == doctest::Approx(1.0 / (0.5 * (1.0 / p1 + 1.0 / p2))));
    CHECK(B == doctest::Approx(P / n * (a1 / p1 + a2 / p2)));
    const auto r = expected_regularity(rec);
    const double ps[2] = {p1, p2}, as[2] = {a1, a2};
    if (P < n) {
      REQUIRE(r.regime == Regime::subcritical);
      CHECK(entry(r, "u", "vartheta").power == doctest::Approx(n * (P - 1) / (n - P)));
      CHECK(entry(r, "u", "vartheta").log == doctest::Approx(n * B / (n - P)));
      for (int i = 0; i < 2; ++i) {
        const auto& e = entry(r, "u_x" + std::to_string(i + 1), "varrho");
        CHECK(e.power == doctest::Approx(ps[i] * n * (P - 1) / ((n - 1) * P)));
        CHECK(e.log == doctest::Approx(n * (as[i] * (P - 1) + B) / ((n - 1) * P)));
      }
    } else if (std::abs(P - n) < 1e-9 && B < n - 1) {
      REQUIRE(r.regime == Regime::exp);
      CHECK(entry(r, "u", "vartheta").power == doctest::Approx((n - 1) / (n - 1 - B)));
      for (int i = 0; i < 2; ++i)
        CHECK(entry(r, "u_x" + std::to_string(i + 1), "varrho").log ==
              doctest::Approx((as[i] * (n - 1) + B) / (n - 1) - 1));
    } else {
      CHECK(r.regime == Regime::convergent);
    }
  }
}

TEST_CASE("double-exponential regime") {
  const auto iso = expected_regularity(ExampleRecord::iso_zyg(2.0, 1.0, 2));
  CHECK(iso.regime == Regime::double_exp);
  CHECK(entry(iso, "u", "vartheta").exp_level == 2);
  const auto& g = entry(iso, "grad u", "varrho");
  CHECK(g.power == 2.0);
  CHECK(g.log == 1.0);
  CHECK(g.loglog == -1.0);

  // pq = p + q and alpha = q
  const auto trud = expected_regularity(ExampleRecord::aniso_trud(2.0, 2.0, 2.0));
  CHECK(trud.regime == Regime::double_exp);
  const auto& d = entry(trud, "u_x1 - u_x2", "varrho");
  CHECK(d.power == 2.0);
  CHECK(d.log == 0.0);
  CHECK(d.loglog == -1.0);
  const auto& x1 = entry(trud, "u_x1", "varrho");
  CHECK(x1.log == 2.0);
  CHECK(x1.loglog == -1.0);
}

TEST_CASE("trud regimes") {
  // (i) pq < p + q
  const auto sub = ExampleRecord::aniso_trud(2.0, 1.5, 1.0);
  const double p = 2.0, q = 1.5, a = 1.0;
  const auto r = expected_regularity(sub);
  REQUIRE(r.regime == Regime::subcritical);
  CHECK(entry(r, "u", "sobolev_conjugate").power == doctest::Approx(2 * p * q / (p + q - p * q)));
  CHECK(entry(r, "u", "sobolev_conjugate").log == doctest::Approx(p * a / (p + q - p * q)));
  CHECK(entry(r, "u", "vartheta").power == doctest::Approx(p * q / (p + q - p * q) - 1));
  CHECK(entry(r, "u", "vartheta").log == doctest::Approx(a * p / (p + q - p * q)));
  CHECK(entry(r, "u_x1", "varrho").power == doctest::Approx(q * (2 - 1 / p) - 1));
  CHECK(entry(r, "u_x1", "varrho").log == doctest::Approx(a * (2 - 1 / p)));
  // the difference component carries p: p (2 - 1/q) - 1
  CHECK(entry(r, "u_x1 - u_x2", "varrho").power == doctest::Approx(p * (2 - 1 / q) - 1));
  CHECK(entry(r, "u_x1 - u_x2", "varrho").log == doctest::Approx(a / q));

  // (ii) pq = p + q, alpha < q: exp L^{q/(q-alpha)}
  const auto ii = expected_regularity(ExampleRecord::aniso_trud(3.0, 1.5, 0.5));
  REQUIRE(ii.regime == Regime::exp);
  CHECK(entry(ii, "u", "vartheta").power == doctest::Approx(1.5 / (1.5 - 0.5)));
  CHECK(entry(ii, "u_x1 - u_x2", "varrho").log == doctest::Approx(0.5 / 1.5 - 1));

  // (iv) pq > p + q, or pq = p + q with alpha > q
  CHECK(expected_regularity(ExampleRecord::aniso_trud(3.0, 2.0, 1.0)).regime == Regime::convergent);
  CHECK(expected_regularity(ExampleRecord::aniso_trud(2.0, 2.0, 2.5)).regime == Regime::convergent);
}

TEST_CASE("record invariants") {
  // p_bar symmetric in the exponents and equal to p on the diagonal
  const auto a = ExampleRecord::aniso_zyg({1.5, 2.5, 4.0}, {0.1, 0.2, 0.3});
  const auto b = ExampleRecord::aniso_zyg({4.0, 1.5, 2.5}, {0.3, 0.1, 0.2});
  CHECK(a.p_bar() == doctest::Approx(b.p_bar()).epsilon(1e-15));
  CHECK(a.alpha_bar() == doctest::Approx(b.alpha_bar()).epsilon(1e-15));
  CHECK(ExampleRecord::aniso_plap({2.5, 2.5, 2.5}).p_bar() == doctest::Approx(2.5).epsilon(1e-15));

  // exactly one regime per record, and the exponential term of the last example
  const auto nw = ExampleRecord::aniso_new(2.0, 1.5);
  CHECK(nw.p_bar() == doctest::Approx(4.0));
  CHECK(nw.alpha_bar() == doctest::Approx(-2.0 / 1.5));
  CHECK(expected_regularity(nw).regime == Regime::convergent);

  // iso_zyg with alpha = 0 is plap
  for (auto [p, n] : std::vector<std::pair<double, int>>{{1.5, 2}, {2.0, 2}, {2.0, 3}, {4.0, 3}}) {
    const auto zyg = ExampleRecord::iso_zyg(p, 0.0, n), pl = ExampleRecord::plap(p, n);
    CHECK(expected_regularity(zyg).to_json() == expected_regularity(pl).to_json());
    CHECK(zyg.phi().to_json() == pl.phi().to_json());
    if (p != 4.0) {
      auto jz = verify_example(zyg).to_json(), jp = verify_example(pl).to_json();
      jz.erase("id");
      jp.erase("id");
      CHECK(jz == jp);
    }
  }
}

TEST_CASE("parameter ranges name the violated hypothesis") {
  CHECK(contains(rejection([] { ExampleRecord::plap(1.0, 3); }), "1 < p"));
  CHECK(contains(rejection([] { ExampleRecord::iso_zyg(1.0, 0.0, 2); }), "or p = 1 and alpha > 0"));
  CHECK(contains(rejection([] { ExampleRecord::aniso_plap({2.0, 0.9}); }), "p_i > 1"));
  CHECK(contains(rejection([] { ExampleRecord::aniso_zyg({2.0, 1.0}, {0.0, -1.0}); }), "p_2 = 1 and alpha_2 > 0"));
  CHECK(contains(rejection([] { ExampleRecord::aniso_trud(2.0, 1.0, -1.0); }), "q = 1 and alpha > 0"));
  CHECK(contains(rejection([] { ExampleRecord::aniso_trud(1.0, 2.0, 1.0); }), "p > 1"));
  CHECK(contains(rejection([] { ExampleRecord::aniso_new(2.0, 1.0); }), "beta > 1"));
  CHECK(contains(rejection([] { ExampleRecord::plap(2.0, 1); }), "n >= 2"));
  CHECK(contains(rejection([] { ExampleRecord::aniso_zyg({2.0, 2.0}, {1.0}); }), "one entry per coordinate"));
  CHECK(contains(rejection([] { ExampleRecord::from_json("plap", {{"p", 2}}); }), "'n'"));
  CHECK(contains(rejection([] { ExampleRecord::from_json("nope", {{"p", 2}}); }), "unknown example"));
}

TEST_CASE("logarithmic shift defaults to e^2 and grows until the terms are convex") {
  CHECK(ExampleRecord::aniso_trud(2.0, 2.0, 1.0).log_shift() == doctest::Approx(std::exp(2.0)));
  const auto steep = ExampleRecord::aniso_trud(2.0, 2.0, -6.0);
  CHECK(steep.log_shift() > std::exp(2.0));
  CHECK(steep.term_function(1).convexity_certified());
  CHECK(ExampleRecord::aniso_trud(2.0, 2.0, 1.0, 20.0).log_shift() == 20.0);
}

TEST_CASE("json parameters") {
  const auto r = ExampleRecord::from_json("aniso_zyg", nlohmann::json::parse(R"({"p":[2,2],"alpha":[1,3],"n":2})"));
  CHECK(r.alpha_bar() == doctest::Approx(2.0));
  CHECK(ExampleRecord::from_json("plap", {{"p", 2}, {"n", 3}}).to_json()["p_bar"] == 2.0);
  CHECK(ExampleRecord::ids().size() == 6);
}

TEST_CASE("verification against computed profiles") {
  const auto pl = verify_example(ExampleRecord::plap(2.0, 3));
  CHECK(pl.pass());
  CHECK(std::abs(check(pl, "u", "vartheta", "power").measured - 3.0) <= 0.06);

  const auto sp = verify_example(ExampleRecord::aniso_plap({2.0, 4.0}));
  CHECK(sp.pass());
  CHECK(sp.dichotomy.verdict == Dichotomy::convergent);
  CHECK(sp.measured_regime == Regime::convergent);

  const auto zy = verify_example(ExampleRecord::aniso_zyg({2.0, 2.0}, {1.0, 3.0}));
  CHECK(zy.pass());
  CHECK(zy.expected_regime == Regime::convergent);

  // the measured difference-component exponent separates p (2 - 1/q) - 1 from q (2 - 1/p) - 1
  const auto tr = verify_example(ExampleRecord::aniso_trud(2.0, 1.5, 1.0));
  CHECK(tr.pass());
  CHECK(check(tr, "u_x1 - u_x2", "varrho", "power").measured == doctest::Approx(2.0 * (2.0 - 1.0 / 1.5) - 1.0).epsilon(0.01));

  const auto dd = verify_example(ExampleRecord::aniso_trud(2.0, 2.0, 2.0));
  CHECK(dd.pass());
  CHECK(dd.measured_regime == Regime::double_exp);

  // the profile overload agrees with the cubature path for radial forms
  const auto rec = ExampleRecord::iso_zyg(2.0, 1.0, 3);
  const auto prof = EmbeddingProfile::build(rec.term_function(0), 3, {.t_hi = 1e100, .with_hat = false});
  CHECK(verify_asymptotics(rec, prof).to_json() == verify_example(rec).to_json());
}

TEST_CASE("verification is inconclusive on a short range and fails on a wrong record") {
  VerifyOptions short_range;
  short_range.analytic_top = 1e4;
  const auto rep = verify_example(ExampleRecord::plap(2.0, 3), short_range);
  CHECK(rep.status == VerifyStatus::inconclusive);
  CHECK_FALSE(rep.notes.empty());

  // expectations of p = 2 against the computed functions of p = 2.2
  const auto wrong = verify_asymptotics(ExampleRecord::plap(2.0, 3), ExampleRecord::plap(2.2, 3).term_function(0));
  CHECK(wrong.status == VerifyStatus::fail);
}
