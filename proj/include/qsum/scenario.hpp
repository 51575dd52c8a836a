#pragma once
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qsum/asymptotics.hpp"

namespace qsum {

// Grid policy shared by every sector of a run.
struct GridPolicy {
  double ray_rmin = 1e-8;
  double k1_rmax = 3e3;
  double k2_rmax = 100.0;
  int L = 64;                        // tau ratio q^{1/L}
  double u_half_opening = 0.2;       // sector around each direction for the root bounds
  double rho1 = 1.0;                 // disc radius for the root bounds
  double laplace_margin = 0.05;
  double beta_prime = 0.25;
  double r_T = 0.5;                  // radius of the t-sector
  TGrid tgrid{0.005, 2.0, 2, 14};
  std::vector<cplx> z{cplx(-1.0), cplx(0.0), cplx(0.5), cplx(1.0), cplx(0.0, 0.1)};
};

// Moduli r0 ratio^{-i}, i = 0..count-1.
struct EpsSampling {
  double r0 = 0.3 * 0.8408964152537145;
  double ratio = 1.189207115002721;
  int count = 16;
  std::vector<double> moduli() const;
  void check() const;
};

struct AsymptoticsSettings {
  EpsSampling cocycle;                 // along the overlap bisectors
  EpsSampling expansion{0.015, 1.25, 16};  // along the sector directions
  int M = 5;
  double flatness_floor = 1e-12;
  int collocation = 20;
  double solve_modulus = 0.05;         // eps of the single-sample solve
};

// Chained scenario: the forcing is the formal solution of the bold problem.
struct ChainedSettings {
  ProblemSpec bold;
  double direction = 0.0;
  double k1_rmax = 2e4;
  std::vector<cplx> eps;
};

struct ScenarioConfig {
  int schema_version = 1;
  std::string name = "example";
  ProblemSpec problem;
  GoodCovering covering;
  std::vector<double> directions;  // Laplace direction per sector
  GridPolicy grids;
  FixedPointConfig fixed_point;
  AsymptoticsSettings asymptotics;
  std::optional<ChainedSettings> chained;
  std::uint64_t seed = 0;
  int jobs = 1;

  int sectors() const { return static_cast<int>(directions.size()); }
  std::vector<LaplaceDomain> domains() const;
  // Bisector of the overlap of sectors p and p + 1.
  double overlap_direction(int p) const;
};

// The built-in example with parameter A: four sectors whose consecutive
// pairs alternate between the two flatness regimes.
ScenarioConfig example_scenario(double A = 10.0);

// Bold problem of the chained example and its polynomial forcing.
ChainedSettings example_chained(const ProblemSpec& main);

ValidationReport validate_scenario(const ScenarioConfig& cfg);

std::vector<cplx> eps_on_ray(const EpsSampling& s, double angle);

struct SectorRun {
  int index = 0;
  SectorialSolution u;
  SectorialSolution f;
  int max_iterations = 0;
  double seconds = 0.0;
};

// w_k2 per eps sample, then u and f on the (t, z) grid.
SectorRun solve_sector(const ScenarioConfig& cfg, int p, const std::vector<cplx>& eps);

// Full single-sample pipeline on one sector: Picard solves of w_k1 and w_k2,
// their residuals, the acceleration identity and the (t, z) residual.
struct SolveReport {
  int index = 0;
  cplx eps;
  FixedPointResult w_k1, w_k2;
  double residual_k1 = 0.0, residual_k2 = 0.0;
  // Relative distance to the solution from a second starting iterate.
  double uniqueness_gap_k1 = 0.0, uniqueness_gap_k2 = 0.0;
  AccelerationCheck acceleration;
  SectorialSolution u;
  PointResidual pde;
  double seconds = 0.0;
};

SolveReport solve_single(const ScenarioConfig& cfg, int p, bool uniqueness = true);

struct AsymptoticsReport {
  std::vector<SectorialSolution> cocycle_u;   // per sector, both overlap rays
  std::vector<CocycleSample> cocycles;
  std::vector<FlatnessFit> fits;
  TwoLevelSplit split;
  std::vector<SectorialSolution> expansion_u, expansion_f;
  ExpansionEstimate expansion, forcing_expansion;
  RecursionCheck recursion;
  GevreyCheck gevrey;
  double smallest_eps = 0.0;          // smallest cocycle modulus
  std::vector<double> envelope_at_smallest;  // per pair
  std::vector<PointResidual> pde;            // per sector, cocycle samples
  double seconds = 0.0;
};

AsymptoticsReport run_asymptotics(const ScenarioConfig& cfg);

struct ChainedReport {
  std::vector<cplx> eps;
  std::vector<int> psi_iterations;
  std::vector<double> psi_residuals;
  SectorialSolution u;
  PointResidual composed;
  double seconds = 0.0;
};

ChainedReport run_chained(const ScenarioConfig& cfg);

// Deterministic collocation points drawn with the config seed.
std::vector<CollocationPoint> seeded_points(const SectorialSolution& u, double max_gamma,
                                            int count, std::uint64_t seed);

}  // namespace qsum
