#include <cmath>
#include <random>
#include <sstream>

#include "anisokit/error.hpp"
#include "anisokit/numerics.hpp"
#include "anisokit/sobolev.hpp"
#include "doctest.h"

using namespace anisokit;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

YoungFunction from_lambda(std::string id, std::function<double(double)> f, Domain hint = {1e-6, 1e12}) {
  AnalyticDef d;
  d.id = std::move(id);
  d.value = std::move(f);
  d.hint = hint;
  return YoungFunction::analytic(d);
}

YoungFunction dilated(const YoungFunction& a, double lambda) {
  return from_lambda(a.id() + "*", [a, lambda](double t) { return a(lambda * t); });
}

double slope(const std::function<double(double)>& f, double lo, double hi) { return loglog_slope(f, lo, hi, 64); }

}  // namespace

TEST_CASE("dichotomy on powers, logs and iterated logs") {
  CHECK(classify_integral(YoungFunction::catalog("power:p=2"), 3).verdict == Dichotomy::divergent);
  CHECK(classify_integral(YoungFunction::catalog("power:p=4"), 3).verdict == Dichotomy::convergent);

  // t^{2p} log^{-p/beta}(1+t) with p = 2, beta = 1.5, n = 2
  auto trud = YoungFunction::catalog("power_log:p=4,alpha=-1.3333333333333333,shift=1");
  auto r = classify_integral(trud, 2);
  CHECK(r.verdict == Dichotomy::convergent);
  CHECK(r.level == 0);

  // n = 2 with Phi = t^2 log^a: the integrand is 1/(t log^a t)
  auto two = classify_integral(YoungFunction::catalog("power_log:p=2,alpha=2"), 2);
  CHECK(two.verdict == Dichotomy::convergent);
  CHECK(two.level <= 1);
  auto one = classify_integral(YoungFunction::catalog("power_log:p=2,alpha=1"), 2);
  CHECK(one.verdict == Dichotomy::divergent);
  CHECK(one.level == 2);
  auto ll = from_lambda("t2 log loglog^2", [](double t) {
    const double l = std::log(std::exp(1.0) + t);
    return t * t * l * std::pow(std::log(l), 2.0);
  });
  auto llr = classify_integral(ll, 2, {1e10, 1e12});
  CHECK(llr.verdict == Dichotomy::convergent);

  auto wobbly = from_lambda("wobbly", [](double t) { return t * t * std::exp(0.3 * std::sin(std::log(t))); });
  CHECK_THROWS_AS(classify_integral(wobbly, 2), Error);

  CHECK_THROWS_AS(classify_integral(YoungFunction::sample(YoungFunction::catalog("power:p=2"), 1e-2, 1e3, 32), 3),
                  Error);
}

TEST_CASE("dichotomy is invariant under dilation") {
  for (const char* id : {"power:p=2", "power:p=4", "power_log:p=2,alpha=2", "power_log:p=2,alpha=1",
                         "power_log:p=2,alpha=1.1", "power_log:p=2,alpha=0.9", "power_log:p=2,alpha=1,shift=7.389",
                         "power:p=1.5"}) {
    CAPTURE(std::string(id));
    auto a = YoungFunction::catalog(id);
    const auto base = classify_integral(a, 2).verdict;
    for (double lambda : {0.5, 2.0}) CHECK(classify_integral(dilated(a, lambda), 2).verdict == base);
  }
}

TEST_CASE("scalar near-zero modification") {
  // t log(1+t) behaves like t^2 at zero: the near-zero integral diverges for n = 2
  auto a = YoungFunction::catalog("power_log:p=1,alpha=1");
  auto mod = modify_near_zero(a, 2);
  CHECK(mod.applied);
  CHECK_FALSE(mod.before.converges);
  for (double t : {0.01, 0.3, 1.0}) CHECK(mod.function(t) == doctest::Approx(std::log(2.0) * t).epsilon(1e-14));
  for (double t : {1.5, 10.0, 1e4}) CHECK(mod.function(t) == doctest::Approx(a(t)).epsilon(1e-14));
  CHECK(near_zero_behaviour(mod.function, 2).converges);
  // direct quadrature of the modified head
  auto head = integrate([&](double t) { return t / mod.function(t); }, 0.0, 1.0);
  CHECK(head.value == doctest::Approx(1.0 / std::log(2.0)).epsilon(1e-10));

  auto lin = modify_near_zero(YoungFunction::catalog("power:p=1.5"), 2);
  CHECK_FALSE(lin.applied);
  auto ident = from_lambda("id", [](double t) { return t; });
  auto forced = modify_near_zero(ident, 2, 1.0, true);
  for (double t : {0.1, 0.7}) CHECK(forced.function(t) == doctest::Approx(t));
}

TEST_CASE("anisotropic near-zero modification") {
  auto phi = AnisotropicFunction::from_json(nlohmann::json::parse(
      R"({"n":2,"form":"split","terms":[{"kind":"power","p":1.2},{"kind":"power","p":1.1}]})"));
  auto plain = modify_near_zero(phi);
  CHECK_FALSE(plain.applied);
  auto mod = modify_near_zero(phi, true);
  CHECK(mod.applied);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int k = 0; k < 1000; ++k) {
    const double x[2] = {u(rng), u(rng)};
    const double base = phi(x), bar = mod.function(x);
    CHECK(bar >= base * (1 - 1e-12));
    if (base > 1.0) CHECK(bar == base);
    const double y[2] = {0.5 * x[0], 0.5 * x[1]};
    CHECK(mod.xi(y) == doctest::Approx(0.5 * mod.xi(x)).epsilon(1e-10));
  }

  auto quad = AnisotropicFunction::from_json(nlohmann::json::parse(
      R"({"n":2,"form":"split","terms":[{"kind":"power","p":2},{"kind":"power","p":3}]})"));
  auto qm = modify_near_zero(quad);
  CHECK(qm.applied);
  CHECK(qm.exponent_at_zero == doctest::Approx(2.4).epsilon(1e-3));
}

TEST_CASE("Sobolev conjugate of powers matches closed forms") {
  struct Case {
    double p;
    int n;
  };
  for (Case c : {Case{1.5, 2}, Case{2, 3}, Case{3, 4}}) {
    CAPTURE(c.p);
    CAPTURE(c.n);
    auto a = YoungFunction::catalog("power:p=" + std::to_string(c.p));
    ProfileOptions opt;
    opt.t_hi = 1e40;
    auto prof = EmbeddingProfile::build(a, c.n, opt);
    CHECK_FALSE(prof.modification_applied());
    const double n = c.n, p = c.p, m = n - 1.0;
    // H(t) = (p^{1/(n-1)} t^e / e)^{(n-1)/n}, e = (n-p)/(n-1)
    const double e = (n - p) / m;
    for (double t : {1e-3, 1.0, 1e5, 1e30})
      CHECK(rel(prof.H(t), std::pow(std::pow(p, 1.0 / m) * std::pow(t, e) / e, m / n)) < 1e-9);
    const double s_lo = 10.0, s_hi = 1e5;
    CHECK(rel(slope([&](double s) { return prof.phi_n()(s); }, s_lo, s_hi), n * p / (n - p)) < 0.02);
    CHECK(rel(slope([&](double t) { return prof.vartheta()(t); }, 1e2, 1e6), n * (p - 1) / (n - p)) < 0.02);
    CHECK(rel(slope([&](double t) { return prof.varrho()(t); }, 1e2, 1e6), n * (p - 1) / (p * (n - 1))) < 0.02);

    // defining identities on the probe grid
    const double np = prof.n_prime();
    for (double t : log_space(1e-4, 1e30, 40)) {
      CHECK(rel(prof.phi_n()(prof.H(t)), a(t)) < 1e-8);
      if (std::pow(t, 1.0 / np) < prof.phi_n().limit())
        CHECK(rel(prof.vartheta()(t) * t, prof.phi_n()(std::pow(t, 1.0 / np))) < 1e-12);
      CHECK(rel(prof.varrho()(t) * std::pow(prof.phi_n().inverse(t), np), t) < 1e-12);
    }
  }
}

TEST_CASE("critical case p = n = 2 after modification is of exponential type") {
  auto a = YoungFunction::catalog("power:p=2,scale=1");
  ProfileOptions opt;
  opt.t_hi = 1e150;
  auto prof = EmbeddingProfile::build(a, 2, opt);
  CHECK(prof.modification_applied());
  CHECK(prof.dichotomy().verdict == Dichotomy::divergent);
  // H(t) = (1 + log t)^{1/2} above the knee, so Phi_n(s) = exp(2 s^2 - 2)
  for (double s : {1.5, 3.0, 10.0}) CHECK(rel(prof.phi_n()(s), std::exp(2 * s * s - 2)) < 1e-8);
  const double top = prof.phi_n().limit();
  const double lo = prof.phi_n().inverse(prof.phi_n()(top) / 10.0);
  double mn = inf, mx = 0.0;
  for (double s : log_space(lo, top, 20)) {
    const double v = std::log(prof.phi_n()(s)) / (s * s);
    mn = std::min(mn, v);
    mx = std::max(mx, v);
  }
  CHECK(mx / mn < 1.1);
}

TEST_CASE("near-zero modification leaves the tail alone") {
  auto a = YoungFunction::catalog("power:p=1.5");
  ProfileOptions opt;
  opt.t_hi = 1e40;
  auto plain = EmbeddingProfile::build(a, 2, opt);
  opt.force_modify = true;
  auto mod = EmbeddingProfile::build(a, 2, opt);
  CHECK(mod.modification_applied());
  CHECK(mod.dichotomy().verdict == plain.dichotomy().verdict);
  const double s1 = slope([&](double s) { return plain.phi_n()(s); }, 1e3, 1e6);
  const double s2 = slope([&](double s) { return mod.phi_n()(s); }, 1e3, 1e6);
  CHECK(rel(s2, s1) < 0.01);
}

TEST_CASE("convergent dichotomy is refused") {
  try {
    EmbeddingProfile::build(YoungFunction::catalog("power:p=4"), 3);
    FAIL("expected refusal");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::refused);
  }
}

TEST_CASE("optimal target function") {
  // pure powers: Phi_hat(y) = c^{p-1} y^p / p with c = (a^n/(n-1))^{1/(n-1)}, a = (n-p)/(n-1)
  const double p = 2.0, n = 3.0, a = (n - p) / (n - 1.0);
  const double c = std::pow(std::pow(a, n) / (n - 1.0), 1.0 / (n - 1.0));
  auto hat = hat_phi_circ(YoungFunction::catalog("power:p=2"), 3, {1e-6, 1e8});
  CHECK(hat.convexity_certified());
  for (double y : {1e-2, 1.0, 1e3}) CHECK(rel(hat(y), std::pow(c, p - 1) * y * y / p) < 1e-8);
  CHECK(rel(slope([&](double y) { return hat(y); }, 1e-2, 1e4), 2.0) < 0.01);

  for (auto [id, dim] : std::vector<std::pair<const char*, int>>{
           {"power:p=1.5", 2}, {"power_log:p=2,alpha=1", 3}, {"power_log:p=1.5,alpha=-0.5,shift=3", 2},
           {"power:p=3", 4}}) {
    CAPTURE(id);
    auto phi = YoungFunction::catalog(id);
    auto h = hat_phi_circ(phi, dim, {1e-6, 1e8});
    CHECK(h.convexity_certified());
    CHECK(h.n_function());
  }

  // sampled input goes through chord slopes and the isotonic fit
  auto sampled = YoungFunction::sample(YoungFunction::catalog("power:p=2"), 1e-6, 1e8, 64);
  auto hs = hat_phi_circ(sampled, 3, {1e-6, 1e8});
  for (double y : {1e-2, 1.0, 1e3}) CHECK(rel(hs(y), std::pow(c, p - 1) * y * y / p) < 1e-3);

  CHECK(isotonic_fit({1, 3, 2, 4}, {1, 1, 1, 1}) == std::vector<double>{1, 2.5, 2.5, 4});
}

TEST_CASE("profile exports") {
  auto prof = EmbeddingProfile::build(YoungFunction::catalog("power:p=2"), 3);
  std::ostringstream os;
  prof.write_csv(os);
  CHECK(os.str().rfind("t,H(t),sobolev_conjugate(t)", 0) == 0);
  auto j = prof.report();
  CHECK(j["dichotomy"]["verdict"] == "divergent");
  CHECK(j["kappa2"] == 1.0);
}
