#include <random>

#include "doctest.h"
#include "qsum/geometry.hpp"

using namespace qsum;

namespace {

double deg(double d) { return d * kPi / 180.0; }

GoodCovering covering(std::vector<double> directions_deg, double half_deg, double eps0 = 0.5) {
  GoodCovering c;
  c.epsilon0 = eps0;
  for (double d : directions_deg) c.sectors.push_back({deg(d), deg(half_deg), eps0});
  return c;
}

bool has_clause(const ValidationReport& r, const std::string& clause) {
  for (const auto& v : r.violations)
    if (v.clause == clause) return true;
  return false;
}

// inf_r |1 + r e^{i gamma}/T| by dense sampling of r in [0, 4|T|].
double sampled_margin(cplx T, double gamma) {
  double best = 1.0;
  const cplx dir = std::polar(1.0, gamma) / T;
  for (int i = 0; i < 10000; ++i) {
    const double r = 4.0 * std::abs(T) * i / 9999.0;
    best = std::min(best, std::abs(1.0 + r * dir));
  }
  return best;
}

}  // namespace

TEST_CASE("sector membership folds angles") {
  Sector s{deg(170), deg(20), 1.0};
  CHECK(s.contains(std::polar(0.5, deg(-175))));
  CHECK_FALSE(s.contains(std::polar(0.5, deg(-165))));
  CHECK_FALSE(s.contains(std::polar(1.5, deg(170))));
  CHECK_FALSE(s.contains(cplx(0.0)));
  CHECK(fold_angle(3 * kPi) == doctest::Approx(kPi));
  CHECK(fold_angle(-kPi) == doctest::Approx(kPi));
}

TEST_CASE("four sectors at 60 degrees form a good covering") {
  CHECK(validate_good_covering(covering({0, 90, 180, 270}, 60)).ok());
}

TEST_CASE("two sectors at 30 degrees miss the vertical directions") {
  const auto rep = validate_good_covering(covering({0, 180}, 30));
  CHECK_FALSE(rep.ok());
  CHECK(has_clause(rep, "coverage"));
}

TEST_CASE("three sectors are all cyclically adjacent") {
  // With three sectors every pair is consecutive, so wide overlaps are allowed.
  CHECK(validate_good_covering(covering({0, 120, 240}, 100)).ok());
}

TEST_CASE("wide sectors overlap beyond adjacency") {
  const auto rep = validate_good_covering(covering({0, 90, 180, 270}, 100));
  CHECK(has_clause(rep, "skip-overlap"));
  bool named = false;
  for (const auto& v : rep.violations)
    if (v.clause == "skip-overlap" && v.detail.find("0 and 2") != std::string::npos) named = true;
  CHECK(named);
}

TEST_CASE("angular overlap is exact interval arithmetic") {
  Sector a{0.0, deg(60), 1.0}, b{deg(90), deg(60), 1.0};
  CHECK(angular_overlap(a, b) == doctest::Approx(deg(30)).epsilon(1e-14));
  Sector c{deg(180), deg(30), 1.0};
  CHECK(angular_overlap(a, c) < 0.0);
}

TEST_CASE("covering validation is invariant under rotation") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> rot(-180.0, 180.0);
  const std::vector<std::pair<std::vector<double>, double>> cases{
      {{0, 90, 180, 270}, 60}, {{0, 180}, 30}, {{0, 120, 240}, 100}, {{0, 90, 150, 240}, 70}};
  for (const auto& [dirs, half] : cases) {
    const auto base = validate_good_covering(covering(dirs, half));
    for (int trial = 0; trial < 10; ++trial) {
      const double r = rot(rng);
      std::vector<double> turned;
      for (double d : dirs) turned.push_back(d + r);
      const auto rep = validate_good_covering(covering(turned, half));
      REQUIRE(rep.violations.size() == base.violations.size());
      for (size_t i = 0; i < rep.violations.size(); ++i)
        CHECK(rep.violations[i].clause == base.violations[i].clause);
    }
  }
}

TEST_CASE("laplace domain membership cases") {
  const double g = 0.4;
  CHECK(in_laplace_domain(std::polar(1.0, g), {g, 0.5}));
  CHECK_FALSE(in_laplace_domain(-std::polar(1.0, g), {g, 1e-6}));
  CHECK(in_laplace_domain(cplx(0, 1) * std::polar(1.0, g), {g, 0.9}));
  CHECK_FALSE(in_laplace_domain(std::polar(1.0, g), {g, 0.5, 0.5}));
}

TEST_CASE("laplace margin agrees with a sampling oracle") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ang(-kPi, kPi), lr(-3.0, 3.0), mar(0.0, 1.0);
  int compared = 0;
  for (int i = 0; i < 100; ++i) {
    const cplx T = std::polar(std::exp(lr(rng)), ang(rng));
    const double gamma = ang(rng), margin = mar(rng);
    const double exact = laplace_margin(T, gamma);
    CHECK(std::abs(exact - sampled_margin(T, gamma)) <= 1e-6);
    if (std::abs(exact - margin) < 1e-6) continue;
    ++compared;
    CHECK(in_laplace_domain(T, {gamma, margin}) == (sampled_margin(T, gamma) > margin));
  }
  CHECK(compared > 90);
}

TEST_CASE("associated family hypotheses") {
  const GoodCovering cov = covering({0, 90, 180, 270}, 60, 0.3);
  std::vector<LaplaceDomain> doms;
  for (const auto& s : cov.sectors) doms.push_back({s.bisecting_direction, 0.05});
  const Sector t_sector{0.0, 0.05, 0.3};
  FamilyParams fp;
  fp.epsilon0 = 0.3;
  fp.r_T = 0.3;
  fp.nu = -3.0;

  SUBCASE("example geometry passes the growth clauses") {
    const auto rep = validate_associated_family(cov, doms, t_sector, fp);
    CHECK_FALSE(has_clause(rep, "nu-growth"));
    CHECK_FALSE(has_clause(rep, "e0-range"));
    CHECK(rep.ok());
  }
  SUBCASE("eps0 above one is flagged") {
    FamilyParams bad = fp;
    bad.epsilon0 = 1.5;
    CHECK(has_clause(validate_associated_family(cov, doms, t_sector, bad), "e0-range"));
  }
  SUBCASE("opposed directions produce a witness") {
    auto flipped = doms;
    for (auto& d : flipped) d.direction = fold_angle(d.direction + kPi);
    const auto rep = validate_associated_family(cov, flipped, t_sector, fp);
    bool witness = false;
    for (const auto& v : rep.violations)
      if (v.clause == "product-domain" && v.detail.find("p=") != std::string::npos &&
          v.detail.find("eps=") != std::string::npos)
        witness = true;
    CHECK(witness);
  }
}
