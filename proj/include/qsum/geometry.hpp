#pragma once

#include <limits>
#include <string>
#include <vector>

#include "qsum/common.hpp"

namespace qsum {

// Angle folded to (-pi, pi].
double fold_angle(double a);

struct Sector {
  double bisecting_direction = 0.0;
  double half_opening = kPi / 4;
  double radius = std::numeric_limits<double>::infinity();

  void check() const;
  bool contains(cplx z) const;
  // Point at relative angular position s in [-1, 1] and modulus r.
  cplx point(double s, double r) const;
};

struct GoodCovering {
  std::vector<Sector> sectors;
  double epsilon0 = 0.5;
};

// Half-plane-free region {T : |1 + r e^{i gamma}/T| > margin for all r >= 0},
// optionally cut to |T| < radius_bound.
struct LaplaceDomain {
  double direction = 0.0;
  double margin = 0.1;
  double radius_bound = std::numeric_limits<double>::infinity();
};

struct Violation {
  std::string clause;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  void add(std::string clause, std::string detail) {
    violations.push_back({std::move(clause), std::move(detail)});
  }
  void merge(const ValidationReport& o) {
    violations.insert(violations.end(), o.violations.begin(), o.violations.end());
  }
};

// Angular overlap of two open sectors (ignores radii), in radians; <= 0 when
// they are disjoint.
double angular_overlap(const Sector& a, const Sector& b);

ValidationReport validate_good_covering(const GoodCovering& covering);

// min_{r >= 0} |1 + r e^{i gamma}/T|.
double laplace_margin(cplx T, double gamma);
bool in_laplace_domain(cplx T, const LaplaceDomain& dom);

struct FamilyParams {
  double nu = -3.0;
  double alpha = 1.0;
  double kappa = 2.0;
  double k2 = 2.0;
  double q = 2.0;
  double epsilon0 = 0.5;
  double r_T = 0.5;
  int samples = 10;  // per axis of the (t, eps) sampling grids
};

ValidationReport validate_associated_family(const GoodCovering& covering,
                                            const std::vector<LaplaceDomain>& domains,
                                            const Sector& t_sector,
                                            const FamilyParams& params);

}  // namespace qsum
