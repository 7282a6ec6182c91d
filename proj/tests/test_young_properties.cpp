#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "anisokit/numerics.hpp"
#include "anisokit/young.hpp"
#include "doctest.h"

using namespace anisokit;

namespace {

const std::vector<std::string> kCatalog = {
    "power:p=1.5",          "power:p=2",
    "power:p=3,scale=1",    "power:p=5",
    "power_log:p=2,alpha=1", "power_log:p=1.5,alpha=2",
    "power_log:p=3,alpha=-1,shift=3", "exp_minus_linear",
    "one_plus_log",         "exp_power:beta=1.5",
    "exp_power:beta=2"};

std::vector<double> probe(const YoungFunction& a, double lo, double hi, int n) {
  hi = std::min(hi, 0.5 * a.limit());
  return log_space(lo, hi, static_cast<std::size_t>(n));
}

}  // namespace

TEST_CASE("involution holds for analytic and sampled catalog functions") {
  for (const auto& id : kCatalog) {
    CAPTURE(id);
    auto a = YoungFunction::catalog(id);
    REQUIRE(a.convexity_certified());
    auto back = a.conjugate().conjugate();
    double worst = 0.0;
    for (double t : probe(a, 1e-2, 1e4, 120)) worst = std::max(worst, std::abs(back(t) - a(t)) / a(t));
    CHECK(worst <= 1e-6);
  }
  for (const auto& id : {"power:p=1.5", "power:p=3", "power_log:p=2,alpha=1", "one_plus_log"}) {
    CAPTURE(id);
    auto a = YoungFunction::catalog(id);
    auto s = YoungFunction::sample(a, 1e-3, 1e5, 2048);
    auto back = s.conjugate().conjugate();
    double worst = 0.0;
    for (double t : probe(a, 1e-2, 1e4, 120)) worst = std::max(worst, std::abs(back(t) - a(t)) / a(t));
    CHECK(worst <= 1e-3);
  }
}

TEST_CASE("two-sided inverse inequalities and Young's inequality") {
  for (const auto& id : kCatalog) {
    CAPTURE(id);
    auto a = YoungFunction::catalog(id);
    auto c = a.conjugate();
    for (double t : probe(a, 1e-2, 1e4, 60)) {
      const double prod = c.inverse(t) * a.inverse(t);
      CHECK(prod >= t - 1e-9 * t);
      CHECK(prod <= 2.0 * t + 1e-9 * t);
      const double at = a(t);
      const double ci = c.inverse(at);
      CHECK(ci >= at / t * (1.0 - 1e-9));
      CHECK(ci <= 2.0 * at / t * (1.0 + 1e-9));
    }
    const auto ss = probe(a, 1e-2, 1e2, 100);
    const auto ts = probe(c, 1e-2, 1e2, 100);
    int violations = 0;
    for (double s : ss)
      for (double t : ts) {
        const double rhs = a(s) + c(t);
        if (s * t > rhs + 1e-12 * rhs) ++violations;
      }
    CHECK(violations == 0);
  }
}

TEST_CASE("identities and bounds for Theta_diamond and Psi") {
  for (const auto& id : kCatalog) {
    CAPTURE(id);
    auto phi = YoungFunction::catalog(id);
    auto conj = phi.conjugate();
    auto th = theta_diamond(phi, conj);
    auto psi = psi_of(phi);
    for (double t : probe(phi, 1e-2, std::min(1e3, 0.5 * conj.limit()), 40)) {
      const double ct = conj(t);
      CHECK(std::abs(phi(th.inverse(t)) - ct) <= 1e-8 * ct);
      const double pi = psi.inverse(t);
      CHECK(std::abs(phi.inverse(t * pi) - pi) <= 1e-8 * pi);
      CHECK(th(pi) <= 2.0 * t * (1.0 + 1e-9));
      CHECK(phi(psi.inverse(t / 2.0)) <= ct * (1.0 + 1e-9));
      CHECK(ct <= phi(pi) * (1.0 + 1e-9));
    }
  }
}

TEST_CASE("psi is nondecreasing and theta_diamond is monotone") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (const auto& id : kCatalog) {
    CAPTURE(id);
    auto phi = YoungFunction::catalog(id);
    auto psi = psi_of(phi);
    auto th = theta_diamond(phi);
    for (int k = 0; k < 50; ++k) {
      double x = std::pow(10.0, u(rng)), y = std::pow(10.0, u(rng));
      if (x > y) std::swap(x, y);
      if (y > 0.5 * phi.limit()) continue;
      CHECK(psi(x) <= psi(y) * (1 + 1e-12));
      CHECK(th(x) <= th(y) * (1 + 1e-12));
    }
  }
}
