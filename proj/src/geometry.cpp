#include "qsum/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qsum {

double fold_angle(double a) {
  double r = std::remainder(a, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

void Sector::check() const {
  if (!(half_opening > 0.0) || !(half_opening < kPi))
    throw DomainError("sector half opening must lie in (0, pi)");
  if (!(radius > 0.0)) throw DomainError("sector radius must be positive");
}

bool Sector::contains(cplx z) const {
  const double r = std::abs(z);
  if (!(r > 0.0) || !(r < radius)) return false;
  return std::abs(fold_angle(std::arg(z) - bisecting_direction)) <= half_opening;
}

cplx Sector::point(double s, double r) const {
  return std::polar(r, bisecting_direction + s * half_opening);
}

double angular_overlap(const Sector& a, const Sector& b) {
  const double gap = std::abs(fold_angle(a.bisecting_direction - b.bisecting_direction));
  // Sectors wider than pi in total can also meet around the far side.
  const double far = 2.0 * kPi - gap;
  const double near_ov = a.half_opening + b.half_opening - gap;
  const double far_ov = a.half_opening + b.half_opening - far;
  return std::max(near_ov, far_ov);
}

namespace {

std::string deg(double rad) {
  std::ostringstream os;
  os << rad * 180.0 / kPi;
  return os.str();
}

}  // namespace

ValidationReport validate_good_covering(const GoodCovering& covering) {
  ValidationReport rep;
  const auto& s = covering.sectors;
  const int n = static_cast<int>(s.size());
  if (n < 2) {
    rep.add("count", "a good covering needs at least 2 sectors");
    return rep;
  }
  if (!(covering.epsilon0 > 0.0)) rep.add("radius", "epsilon0 must be positive");
  for (int p = 0; p < n; ++p) {
    if (!(s[p].half_opening > 0.0) || !(s[p].half_opening < kPi))
      rep.add("opening", "sector " + std::to_string(p) + " half opening outside (0, pi)");
    if (s[p].radius != covering.epsilon0)
      rep.add("radius", "sector " + std::to_string(p) + " radius differs from epsilon0");
  }
  // Intersections occur exactly for cyclically adjacent indices.
  for (int j = 0; j < n; ++j) {
    for (int k = j + 1; k < n; ++k) {
      const bool adjacent = (k - j == 1) || (j == 0 && k == n - 1);
      const double ov = angular_overlap(s[j], s[k]);
      if (adjacent && !(ov > 0.0))
        rep.add("overlap", "consecutive sectors " + std::to_string(j) + " and " +
                               std::to_string(k) + " do not intersect");
      if (!adjacent && ov > 0.0)
        rep.add("skip-overlap", "non-consecutive sectors " + std::to_string(j) + " and " +
                                    std::to_string(k) + " intersect over " + deg(ov) +
                                    " degrees");
    }
  }
  // Coverage: sweep the open angular intervals on [0, 2 pi).
  std::vector<std::pair<double, double>> iv;
  for (const auto& sec : s) {
    const double lo = fold_angle(sec.bisecting_direction) - sec.half_opening;
    const double hi = fold_angle(sec.bisecting_direction) + sec.half_opening;
    for (int shift = -1; shift <= 1; ++shift)
      iv.push_back({lo + 2.0 * kPi * shift, hi + 2.0 * kPi * shift});
  }
  std::sort(iv.begin(), iv.end());
  double reach = -kPi;
  bool started = false;
  double first_gap = 0.0;
  bool covered = true;
  for (const auto& [lo, hi] : iv) {
    if (hi <= -kPi) continue;
    if (!started) {
      if (lo >= -kPi) {
        covered = false;
        first_gap = -kPi;
        break;
      }
      started = true;
      reach = hi;
      continue;
    }
    if (reach >= kPi) break;
    if (lo >= reach) {
      covered = false;
      first_gap = reach;
      break;
    }
    reach = std::max(reach, hi);
  }
  if (covered && reach < kPi) {
    covered = false;
    first_gap = reach;
  }
  if (!covered)
    rep.add("coverage", "union of sectors misses the direction " + deg(fold_angle(first_gap)) +
                            " degrees");
  return rep;
}

double laplace_margin(cplx T, double gamma) {
  if (T == cplx(0.0)) throw DomainError("Laplace domain test at T = 0");
  const cplx v = std::polar(1.0, gamma) / T;
  if (v.real() >= 0.0) return 1.0;
  return std::abs(v.imag()) / std::abs(v);
}

bool in_laplace_domain(cplx T, const LaplaceDomain& dom) {
  const double m = laplace_margin(T, dom.direction);
  if (!(m > dom.margin)) return false;
  return std::abs(T) < dom.radius_bound;
}

ValidationReport validate_associated_family(const GoodCovering& covering,
                                            const std::vector<LaplaceDomain>& domains,
                                            const Sector& t_sector,
                                            const FamilyParams& pr) {
  ValidationReport rep;
  const int n = static_cast<int>(covering.sectors.size());
  if (static_cast<int>(domains.size()) != n) {
    rep.add("shape", "one Laplace domain per covering sector is required");
    return rep;
  }
  const double lq = std::log(pr.q);
  if (!(pr.epsilon0 > 0.0 && pr.epsilon0 < 1.0)) rep.add("e0-range", "0 < eps0 < 1 violated");
  if (!(pr.r_T > 0.0 && pr.r_T < 1.0)) rep.add("rT-range", "0 < r_T < 1 violated");
  if (!(pr.nu + pr.k2 / lq * std::log(pr.r_T) < 0.0))
    rep.add("nu-growth", "nu + (k2/log q) log r_T < 0 violated");
  if (!(pr.alpha + pr.kappa / lq * std::log(pr.epsilon0 * pr.r_T) < 0.0))
    rep.add("alpha-growth", "alpha + (kappa/log q) log(eps0 r_T) < 0 violated");
  if (!(pr.epsilon0 * pr.r_T <= std::pow(pr.q, (0.5 - pr.nu) / pr.k2) / 2.0))
    rep.add("radius-bound", "eps0 r_T <= q^{(1/2 - nu)/k2}/2 violated");

  const double rb = pr.epsilon0 * pr.r_T;
  const int ns = std::max(2, pr.samples);
  // Odd angular counts keep the bisectors among the samples.
  const int na = std::max(3, pr.samples | 1);
  // Products eps t for sampled t in the t-sector and eps in each E_p.
  for (int p = 0; p < n; ++p) {
    const Sector& E = covering.sectors[p];
    const LaplaceDomain dom{domains[p].direction, domains[p].margin,
                            std::min(domains[p].radius_bound, rb)};
    bool reported = false;
    for (int a = 0; a < na && !reported; ++a) {
      const double st = -0.98 + 1.96 * a / (na - 1);
      for (int b = 0; b < ns && !reported; ++b) {
        const double rt = t_sector.radius * (0.02 + 0.96 * b / (ns - 1));
        const cplx t = t_sector.point(st, rt);
        for (int c = 0; c < na && !reported; ++c) {
          const double se = -0.98 + 1.96 * c / (na - 1);
          for (int d = 0; d < ns && !reported; ++d) {
            const double re = E.radius * (0.02 + 0.96 * d / (ns - 1));
            const cplx e = E.point(se, re);
            if (!in_laplace_domain(e * t, dom)) {
              std::ostringstream os;
              os << "p=" << p << " t=(" << t.real() << "," << t.imag() << ") eps=("
                 << e.real() << "," << e.imag() << ")";
              rep.add("product-domain", os.str());
              reported = true;
            }
          }
        }
      }
    }
  }
  // Consecutive R^b domains intersect, sampled on a polar grid.
  for (int p = 0; p < n; ++p) {
    const int p1 = (p + 1) % n;
    const LaplaceDomain a{domains[p].direction, domains[p].margin,
                          std::min(domains[p].radius_bound, rb)};
    const LaplaceDomain b{domains[p1].direction, domains[p1].margin,
                          std::min(domains[p1].radius_bound, rb)};
    bool found = false;
    for (int i = 0; i < 720 && !found; ++i) {
      const cplx T = std::polar(0.5 * rb, 2.0 * kPi * i / 720.0);
      found = in_laplace_domain(T, a) && in_laplace_domain(T, b);
    }
    if (!found)
      rep.add("domain-overlap", "Laplace domains " + std::to_string(p) + " and " +
                                    std::to_string(p1) + " do not intersect");
  }
  return rep;
}

}  // namespace qsum
