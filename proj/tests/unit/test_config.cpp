#include <charconv>
#include <random>

#include "doctest.h"
#include "qsum/config.hpp"
#include "qsum/report.hpp"

using namespace qsum;
using nlohmann::json;

namespace {

void same_poly(const Polynomial& a, const Polynomial& b) {
  REQUIRE(a.coefficients().size() == b.coefficients().size());
  for (size_t i = 0; i < a.coefficients().size(); ++i)
    CHECK(std::abs(a.coefficients()[i] - b.coefficients()[i]) <= 1e-14 * std::abs(b.coefficients()[i]));
}

void same_function(const GridFunction& a, const GridFunction& b) {
  REQUIRE(a.grid() == b.grid());
  for (int i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-15 * (1 + std::abs(b[i])));
}

void same_problem(const ProblemSpec& a, const ProblemSpec& b) {
  CHECK(a.q == b.q);
  CHECK(a.k1 == b.k1);
  CHECK(a.k2 == b.k2);
  CHECK(a.D == b.D);
  CHECK(a.dD == b.dD);
  same_poly(a.Q, b.Q);
  same_poly(a.RD, b.RD);
  CHECK(a.grid == b.grid);
  CHECK(a.decay.beta == b.decay.beta);
  CHECK(a.decay.mu == b.decay.mu);
  CHECK(a.epsilon0 == b.epsilon0);
  CHECK(a.s_qr.direction == doctest::Approx(b.s_qr.direction).epsilon(1e-15));
  CHECK(a.s_qr.half_opening == doctest::Approx(b.s_qr.half_opening).epsilon(1e-15));
  CHECK(a.s_qr.radius == b.s_qr.radius);
  REQUIRE(a.levels.size() == b.levels.size());
  for (size_t l = 0; l < a.levels.size(); ++l) {
    CHECK(a.levels[l].delta == b.levels[l].delta);
    same_poly(a.levels[l].R, b.levels[l].R);
    REQUIRE(a.levels[l].terms.size() == b.levels[l].terms.size());
    for (size_t t = 0; t < a.levels[l].terms.size(); ++t) {
      const auto &x = a.levels[l].terms[t], &y = b.levels[l].terms[t];
      CHECK(x.d == y.d);
      CHECK(x.Delta == y.Delta);
      CHECK(x.C.eps_poly == y.C.eps_poly);
      same_function(x.C.base, y.C.base);
    }
  }
  REQUIRE(a.forcing.terms.size() == b.forcing.terms.size());
  for (size_t t = 0; t < a.forcing.terms.size(); ++t) {
    const auto &x = a.forcing.terms[t], &y = b.forcing.terms[t];
    CHECK(x.eps_power == y.eps_power);
    same_function(x.G, y.G);
    REQUIRE(x.phi.poles.size() == y.phi.poles.size());
    for (size_t i = 0; i < x.phi.poles.size(); ++i) {
      CHECK(std::abs(x.phi.poles[i].location - y.phi.poles[i].location) <= 1e-15);
      CHECK(x.phi.poles[i].weight == y.phi.poles[i].weight);
    }
    REQUIRE(x.phi.monomials.size() == y.phi.monomials.size());
    for (size_t i = 0; i < x.phi.monomials.size(); ++i) {
      CHECK(x.phi.monomials[i].power == y.phi.monomials[i].power);
      CHECK(x.phi.monomials[i].coefficient == y.phi.monomials[i].coefficient);
    }
  }
}

json example_json() { return json::parse(example_config_text()); }

}  // namespace

TEST_CASE("the example scenario file parses to the built-in example") {
  const ScenarioConfig a = parse_config(example_config_text());
  const ScenarioConfig b = example_scenario();
  same_problem(a.problem, b.problem);
  REQUIRE(a.covering.sectors.size() == b.covering.sectors.size());
  for (size_t p = 0; p < a.covering.sectors.size(); ++p) {
    CHECK(a.covering.sectors[p].bisecting_direction ==
          doctest::Approx(b.covering.sectors[p].bisecting_direction).epsilon(1e-15));
    CHECK(a.covering.sectors[p].half_opening ==
          doctest::Approx(b.covering.sectors[p].half_opening).epsilon(1e-15));
    CHECK(a.directions[p] == doctest::Approx(b.directions[p]).epsilon(1e-15));
  }
  CHECK(a.fixed_point.mode == b.fixed_point.mode);
  CHECK(a.grids.L == b.grids.L);
  CHECK(a.grids.z == b.grids.z);
  CHECK(a.asymptotics.expansion.r0 == b.asymptotics.expansion.r0);
  CHECK(a.asymptotics.cocycle.ratio == b.asymptotics.cocycle.ratio);
  CHECK(a.asymptotics.M == b.asymptotics.M);
  REQUIRE(a.chained.has_value());
  same_problem(a.chained->bold, b.chained->bold);
  CHECK(a.chained->eps == b.chained->eps);
  CHECK(validate_scenario(a).ok());
}

TEST_CASE("malformed scenario files are config errors") {
  CHECK_THROWS_AS(parse_config("{ not json"), ConfigError);
  json j = example_json();
  j["schema_version"] = 99;
  CHECK_THROWS_AS(parse_config(j.dump()), ConfigError);
  j = example_json();
  j["problem"].erase("Q");
  CHECK_THROWS_AS(parse_config(j.dump()), ConfigError);
  j = example_json();
  j["problem"]["levels"][0]["terms"][0]["C"]["kind"] = "mystery";
  CHECK_THROWS_AS(parse_config(j.dump()), ConfigError);
  j = example_json();
  j["problem"]["Q"][0] = json::array({1.0, 2.0, 3.0});
  CHECK_THROWS_AS(parse_config(j.dump()), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/scenario.json"), ConfigError);
}

TEST_CASE("hypothesis violations surface through validation") {
  json j = example_json();
  j["problem"]["levels"][0]["terms"][0]["Delta"] = 0;
  const auto rep = validate_scenario(parse_config(j.dump()));
  bool named = false;
  for (const auto& v : rep.violations) named = named || v.clause == "e800";
  CHECK(named);
}

TEST_CASE("shortest round-trip formatting") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-30.0, 30.0);
  for (int t = 0; t < 1000; ++t) {
    const double v = std::ldexp(u(rng), static_cast<int>(u(rng)));
    const std::string s = format_double(v);
    double back = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    CHECK(back == v);
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(-0.0) == "0");
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("tables and manifest") {
  Table t("demo", {{"n", "index"}, {"re", "real part"}, {"im", "imaginary part"}});
  Table::Row r;
  r << 3 << cplx(0.5, -2.0);
  t.add(r);
  CHECK(t.csv() == "n,re,im\n3,0.5,-2\n");
  Table::Row bad;
  bad << 1;
  CHECK_THROWS_AS(t.add(bad), ShapeError);

  Manifest m("demo");
  m.record(t);
  m.values()["x"] = 1.5;
  const json& j = m.json();
  CHECK(j["subcommand"] == "demo");
  CHECK(j.dump().find("real part") != std::string::npos);
  CHECK(fingerprint("abc") == fingerprint("abc"));
  CHECK(fingerprint("abc") != fingerprint("abd"));
}
