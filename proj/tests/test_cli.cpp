#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "anisokit/grid.hpp"
#include "cli.hpp"
#include "doctest.h"
#include "json.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code = 0;
  std::string out, err;
  json report() const { return json::parse(out); }
  json error() const { return json::parse(err); }
};

Result run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  Result r;
  r.code = anisokit::cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("anisokit_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("cli: symmetrized solve on the disk") {
  const auto r = run({"symmetrize-solve", "--phi", "power:p=2", "--n", "2", "--f", "const:1", "--omega", "pi"});
  REQUIRE(r.code == 0);
  const auto j = r.report();
  CHECK(j["v0"].get<double>() == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(j["bound_equals_v0"].get<bool>());
}

TEST_CASE("cli: conjugate table") {
  const auto dir = scratch("conjugate");
  const auto r = run({"conjugate", "--A", "power:p=3", "--out", dir.string(), "--quiet"});
  REQUIRE(r.code == 0);
  CHECK(r.out.empty());
  const auto j = json::parse(slurp(dir / "report.json"));
  CHECK(j["conjugate_at_1"].get<double>() == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(j["inverse_product_within_t_2t"].get<bool>());
  std::ifstream csv(dir / "conjugate.csv");
  std::string header, row;
  std::getline(csv, header);
  CHECK(header == "t,A(t),conjugate(t),inverse_product_over_t,biconjugate(t)");
  int rows = 0;
  while (std::getline(csv, row)) ++rows;
  CHECK(rows == 97);  // 16 per decade over six decades
}

TEST_CASE("cli: example verification") {
  const auto r = run({"verify-example", "plap", "--p", "2", "--n", "3"});
  REQUIRE(r.code == 0);
  const auto j = r.report();
  CHECK(j["status"] == "pass");
  bool seen = false;
  for (const auto& c : j["checks"])
    if (c["variable"] == "u" && c["function"] == "vartheta" && c["quantity"] == "power") {
      CHECK(std::abs(c["measured"].get<double>() - 3.0) <= 0.06);
      seen = true;
    }
  CHECK(seen);

  const auto split = run({"verify-example", "aniso_zyg", "--p", "2,2", "--alpha", "1,3", "--quiet"});
  CHECK(split.code == 0);
}

TEST_CASE("cli: exit codes and error records") {
  const auto unknown = run({"frobnicate"});
  CHECK(unknown.code == 1);
  CHECK(unknown.error()["error"]["kind"] == "usage");

  const auto bad = run({"verify-example", "plap", "--p", "1", "--n", "3"});
  CHECK(bad.code == 1);
  const auto e = bad.error()["error"];
  CHECK(e["kind"] == "invalid_input");
  CHECK(e["command"] == "verify-example");
  CHECK(e["message"].get<std::string>().find("1 < p") != std::string::npos);

  CHECK(run({"conjugate", "--A", "power:p=abc"}).code == 1);
  CHECK(run({"symmetrize-solve", "--n", "2"}).error()["error"]["message"] == "missing parameter 'phi'");

  // a short profile range leaves the verification inconclusive, which is not a pass
  const auto short_range = run({"verify-example", "plap", "--p", "2", "--n", "3", "--analytic-top", "1e4"});
  CHECK(short_range.code == 2);
  CHECK(short_range.report()["status"] == "inconclusive");
}

TEST_CASE("cli: config document with flag overrides") {
  const auto dir = scratch("config");
  fs::create_directories(dir);
  {
    std::ofstream cfg(dir / "run.json");
    cfg << R"({"phi":{"form":"radial","n":2,"term":{"kind":"power","p":2}},"f":"const:2","omega":"pi"})";
  }
  const auto from_cfg = run({"symmetrize-solve", "--config", (dir / "run.json").string()});
  REQUIRE(from_cfg.code == 0);
  CHECK(from_cfg.report()["v0"].get<double>() == doctest::Approx(0.5).epsilon(1e-12));
  const auto overridden = run({"symmetrize-solve", "--config", (dir / "run.json").string(), "--f", "const:1"});
  CHECK(overridden.report()["v0"].get<double>() == doctest::Approx(0.25).epsilon(1e-12));

  {
    std::ofstream cfg(dir / "typo.json");
    cfg << R"({"phi":"power:p=2","n":2,"omgea":1})";
  }
  const auto typo = run({"symmetrize-solve", "--config", (dir / "typo.json").string()});
  CHECK(typo.code == 1);
  CHECK(typo.error()["error"]["message"].get<std::string>().find("omgea") != std::string::npos);
}

TEST_CASE("cli: seeded Monte Carlo output is reproducible") {
  const std::string phi =
      R"({"form":"split","terms":[{"kind":"power","p":2},{"kind":"power","p":2},{"kind":"power","p":3},{"kind":"power","p":3}]})";
  auto go = [&](const std::string& seed, const fs::path& dir) {
    return run({"phicirc", "--phi", phi, "--force-generic", "1", "--mc-points", "4096", "--r-lo", "0.1", "--r-hi", "10",
                "--levels-per-decade", "8", "--seed", seed, "--out", dir.string(), "--quiet"})
        .code;
  };
  const auto a = scratch("mc_a"), b = scratch("mc_b"), c = scratch("mc_c");
  REQUIRE(go("5", a) == 0);
  REQUIRE(go("5", b) == 0);
  REQUIRE(go("6", c) == 0);
  CHECK(slurp(a / "phi_circ.csv") == slurp(b / "phi_circ.csv"));
  CHECK(slurp(a / "report.json") == slurp(b / "report.json"));
  CHECK(slurp(a / "phi_circ.csv") != slurp(c / "phi_circ.csv"));
}

TEST_CASE("cli: grid solve artifacts") {
  const auto dir = scratch("grid");
  const auto r = run({"grid-solve", "--phi", "power:p=2,scale=0.5", "--N", "17", "--out", dir.string(), "--quiet"});
  REQUIRE(r.code == 0);
  std::ifstream csv(dir / "u.csv");
  const auto u = anisokit::GridField::read_csv(csv);
  CHECK(u.size() == 17);
  const auto j = json::parse(slurp(dir / "report.json"));
  CHECK(j["invariants"]["energy_monotone"].get<bool>());
  CHECK(j["centre_value"].get<double>() == doctest::Approx(u(8, 8)).epsilon(1e-15));
  CHECK(fs::exists(dir / "solve_log.jsonl"));

  const auto reg = run({"regularity-report", "--phi", "power:p=2,scale=0.5", "--N", "17", "--u", (dir / "u.csv").string(),
                        "--quiet", "--out", (dir / "reg").string()});
  CHECK(reg.code == 0);
  const auto rj = json::parse(slurp(dir / "reg" / "report.json"));
  CHECK(rj["truncation_energy"]["pass"].get<bool>());
  CHECK(rj["theta_gradient_bound"]["pass"].get<bool>());
}
