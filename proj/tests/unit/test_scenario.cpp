#include "doctest.h"
#include "fixtures.hpp"
#include "qsum/scenario.hpp"

using namespace qsum;
using qsum::testing::rel_diff;

namespace {

// The example geometry on a coarse grid, for pipeline-level checks.
ScenarioConfig small_scenario() {
  ScenarioConfig cfg = example_scenario();
  cfg.problem = qsum::testing::small_spec(10.0, MGrid{20.0, 201});
  cfg.grids.L = 16;
  cfg.chained = example_chained(cfg.problem);
  cfg.chained->eps = {cplx(0.05), std::polar(0.08, 0.2)};
  return cfg;
}

PointResidual perturbed_pde(const ScenarioConfig& cfg, const SectorRun& run,
                            const std::vector<CollocationPoint>& pts, double size) {
  SectorialSolution u = run.u;
  for (auto& v : u.profiles) v *= 1.0 + size;
  return pde_residual(cfg.problem, u, run.f, pts);
}

}  // namespace

TEST_CASE("single-sample pipeline on the example geometry") {
  const ScenarioConfig cfg = small_scenario();
  REQUIRE(validate_scenario(cfg).ok());
  const SolveReport r = solve_single(cfg, 0);
  CHECK(r.w_k1.contraction_ratio <= 0.5);
  CHECK(r.w_k2.contraction_ratio <= 0.5);
  CHECK(r.residual_k1 <= 1e-8);
  CHECK(r.residual_k2 <= 1e-8);
  CHECK(r.uniqueness_gap_k1 <= 2 * cfg.fixed_point.tol);
  CHECK(r.uniqueness_gap_k2 <= 2 * cfg.fixed_point.tol);
  CHECK(r.acceleration.sup_rel_diff <= 1e-4);
  CHECK(r.pde.per_point.size() == static_cast<size_t>(cfg.asymptotics.collocation));
  CHECK(r.pde.max_rel <= 1e-5);
}

TEST_CASE("the (t, z) residual responds linearly to perturbations") {
  const ScenarioConfig cfg = small_scenario();
  const SectorRun run = solve_sector(cfg, 0, {cplx(0.05)});
  const auto pts = seeded_points(run.u, 3.0, 10, cfg.seed);
  const double base = pde_residual(cfg.problem, run.u, run.f, pts).max_rel;
  const double r1 = perturbed_pde(cfg, run, pts, 1e-4).max_rel;
  const double r2 = perturbed_pde(cfg, run, pts, 2e-4).max_rel;
  CHECK(r1 > 100 * base);
  CHECK(r2 / r1 == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("threads do not change results") {
  ScenarioConfig cfg = small_scenario();
  const std::vector<cplx> eps{cplx(0.05), std::polar(0.04, 0.1)};
  const SectorRun a = solve_sector(cfg, 0, eps);
  cfg.jobs = 2;
  const SectorRun b = solve_sector(cfg, 0, eps);
  for (size_t e = 0; e < eps.size(); ++e) CHECK(rel_diff(a.u.values[e], b.u.values[e]) == 0.0);
}

TEST_CASE("seeded collocation points") {
  const ScenarioConfig cfg = small_scenario();
  const SectorRun run = solve_sector(cfg, 0, {cplx(0.05)});
  auto key = [](const std::vector<CollocationPoint>& v) {
    std::vector<int> k;
    for (const auto& p : v) k.insert(k.end(), {p.eps_index, p.t_index, p.z_index});
    return k;
  };
  const auto a = seeded_points(run.u, 3.0, 12, 7), b = seeded_points(run.u, 3.0, 12, 7);
  CHECK(key(a) == key(b));
  CHECK(key(a) != key(seeded_points(run.u, 3.0, 12, 8)));
  for (const auto& p : a) CHECK(p.t_index + run.u.tgrid.shift(3.0) < run.u.tgrid.count);
}

TEST_CASE("chained scenario") {
  const ScenarioConfig cfg = small_scenario();
  REQUIRE(validate_forcing_problem(cfg.chained->bold).ok());
  const ChainedReport r = run_chained(cfg);
  for (double res : r.psi_residuals) CHECK(res <= 1e-8);
  CHECK(r.composed.max_rel <= 1e-4);

  const auto pts = seeded_points(r.u, 4.0, 10, cfg.seed);
  auto bumped = [&](double size) {
    SectorialSolution u = r.u;
    for (auto& p : u.profiles) p *= 1.0 + size;
    return composed_residual(cfg.problem, cfg.chained->bold, u, pts).max_rel;
  };
  const double r1 = bumped(1e-4), r2 = bumped(2e-4);
  CHECK(r1 > 100 * r.composed.max_rel);
  CHECK(r2 / r1 == doctest::Approx(2.0).epsilon(0.05));
}
