#include "qsum/problem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qsum {

cplx CoefficientMap::poly(cplx eps) const {
  cplx acc = 0.0;
  for (auto it = eps_poly.rbegin(); it != eps_poly.rend(); ++it) acc = acc * eps + *it;
  return acc;
}

GridFunction CoefficientMap::at(cplx eps) const { return base.scaled(poly(eps)); }

CoefficientMap CoefficientMap::gaussian(const MGrid& g, const Decay& d, cplx amplitude,
                                        double width, double center,
                                        std::vector<cplx> eps_poly) {
  if (!(width > 0.0)) throw DomainError("gaussian width must be positive");
  CoefficientMap c;
  c.kind = "gaussian";
  c.eps_poly = std::move(eps_poly);
  c.base = GridFunction::sample(g, d, [&](double m) {
    const double x = (m - center) / width;
    return amplitude * std::exp(-0.5 * x * x);
  });
  return c;
}

CoefficientMap CoefficientMap::rational_decay(const MGrid& g, const Decay& d,
                                              cplx amplitude, double scale, double power,
                                              double rate, std::vector<cplx> eps_poly) {
  if (!(scale > 0.0)) throw DomainError("rational-decay scale must be positive");
  if (!(rate > d.beta))
    throw DomainError("rational-decay rate must exceed beta for membership in E");
  CoefficientMap c;
  c.kind = "rational-decay";
  c.eps_poly = std::move(eps_poly);
  c.base = GridFunction::sample(g, d, [&](double m) {
    const double x = m / scale;
    return amplitude / std::cosh(rate * m) / std::pow(1.0 + x * x, power);
  });
  return c;
}

CoefficientMap CoefficientMap::table(GridFunction base, std::vector<cplx> eps_poly) {
  CoefficientMap c;
  c.kind = "table";
  c.eps_poly = std::move(eps_poly);
  c.base = std::move(base);
  return c;
}

cplx TauProfile::operator()(cplx tau) const {
  cplx acc = 0.0;
  for (const auto& p : poles) acc += p.weight / (1.0 - tau / p.location);
  for (const auto& mo : monomials) acc += mo.coefficient * std::pow(tau, mo.power);
  return acc;
}

cplx TauProfile::taylor(int n) const {
  cplx acc = 0.0;
  for (const auto& p : poles) acc += p.weight * std::pow(p.location, -n);
  for (const auto& mo : monomials)
    if (mo.power == n) acc += mo.coefficient;
  return acc;
}

GridFunction Forcing::coefficient(int n, cplx eps, double q, double k1) const {
  if (terms.empty()) throw ShapeError("forcing has no terms");
  const double borel = std::exp(std::log(q) / k1 * n * (n - 1) / 2.0);
  GridFunction out = GridFunction::zeros(terms[0].G.grid(), terms[0].G.decay());
  for (const auto& t : terms)
    out = out.plus(t.G.scaled(std::pow(eps, t.eps_power) * t.phi.taylor(n) * borel));
  return out;
}

bool QRSector::contains(cplx z) const {
  if (std::abs(z) < radius) return false;
  return std::abs(fold_angle(std::arg(z) - direction)) <= half_opening;
}

int ProblemSpec::max_delay() const {
  int h = dD;
  for (const auto& lv : levels)
    for (const auto& t : lv.terms) h = std::max(h, t.d);
  return h;
}

namespace {

std::string idx(int l, int lam) {
  return "(lambda=" + std::to_string(lam) + ", l=" + std::to_string(l) + ")";
}

}  // namespace

namespace {

// Shared checks; order and clause name differ between the main problem (k2,
// e800) and the forcing problem of the chained scenario (k1, e1336).
ValidationReport validate_with_order(const ProblemSpec& s, double order,
                                     const std::string& exp_clause) {
  ValidationReport rep;
  if (!(s.q > 1.0)) rep.add("q", "q > 1 violated");
  if (!(s.k1 >= 1 && s.k2 > s.k1)) rep.add("orders", "1 <= k1 < k2 violated");
  if (s.D < 3) rep.add("D", "D >= 3 violated");
  if (s.dD < 1) rep.add("dD", "d_D >= 1 violated");
  if (static_cast<int>(s.levels.size()) != s.D - 1)
    rep.add("levels", "expected D-1 levels, got " + std::to_string(s.levels.size()));
  if (!(s.epsilon0 > 0.0)) rep.add("epsilon0", "epsilon0 > 0 violated");

  // Level ordering.
  for (size_t l = 0; l < s.levels.size(); ++l) {
    const int dl = s.levels[l].delta;
    if (l == 0 && dl != 1) rep.add("e796", "delta_1 = 1 violated");
    if (l + 1 < s.levels.size() && !(dl < s.levels[l + 1].delta))
      rep.add("e796", "delta_" + std::to_string(l + 1) + " < delta_" + std::to_string(l + 2) +
                          " violated");
    if (s.levels[l].terms.empty())
      rep.add("levels", "level " + std::to_string(l + 1) + " has no terms");
  }
  // Degree and exponent conditions.
  for (size_t l = 0; l < s.levels.size(); ++l) {
    const Level& lv = s.levels[l];
    const int li = static_cast<int>(l) + 1;
    const std::string k = order == s.k2 ? "k2" : "k1";
    if (!((s.dD - 1.0) / order + 1.0 >= lv.delta))
      rep.add(exp_clause, "(d_D-1)/" + k + " + 1 >= delta_" + std::to_string(li) + " violated");
    for (const auto& t : lv.terms) {
      if (t.d < 1) rep.add(exp_clause, "d >= 1 violated at " + idx(li, t.lambda_id));
      if (!(t.Delta >= t.d))
        rep.add(exp_clause, "Delta >= d violated at " + idx(li, t.lambda_id));
      if (!(static_cast<double>(t.d) / order + 1.0 >= lv.delta))
        rep.add(exp_clause, "d/" + k + " + 1 >= delta violated at " + idx(li, t.lambda_id));
      if (!(t.C.base.grid() == s.grid))
        rep.add("shape", "coefficient grid differs at " + idx(li, t.lambda_id));
    }
    if (lv.R.degree() > s.RD.degree())
      rep.add("e804", "deg R_D >= deg R_" + std::to_string(li) + " violated");
  }
  if (s.RD.degree() > s.Q.degree()) rep.add("e804", "deg Q >= deg R_D violated");
  if (!(s.decay.mu > s.RD.degree() + 1.0)) rep.add("mu", "mu > deg(R_D) + 1 violated");

  // Nonvanishing and sector conditions on the grid: first offending m and count.
  struct Finding {
    std::string clause, what;
    double first_m = 0.0;
    int count = 0;
  };
  std::vector<Finding> found{{"e804", "Q(im) = 0"},
                             {"e804", "R_D(im) = 0"},
                             {"e814", "Q(im)/R_D(im) outside S_{Q,R_D}"}};
  auto hit = [&](int f, double m) {
    if (found[f].count++ == 0) found[f].first_m = m;
  };
  for (int i = 0; i < s.grid.n_points; ++i) {
    const double m = s.grid.m(i);
    const cplx Qv = s.Q.at_im(m), Rv = s.RD.at_im(m);
    if (std::abs(Qv) <= 1e-12) hit(0, m);
    if (std::abs(Rv) <= 1e-12) {
      hit(1, m);
      continue;
    }
    if (!s.s_qr.contains(Qv / Rv)) hit(2, m);
  }
  for (const auto& f : found) {
    if (f.count == 0) continue;
    std::ostringstream os;
    os << f.what << " at m=" << f.first_m << " (" << f.count << " grid points)";
    rep.add(f.clause, os.str());
  }
  return rep;
}

}  // namespace

ValidationReport validate_problem(const ProblemSpec& s) {
  return validate_with_order(s, s.k2, "e800");
}

ValidationReport validate_forcing_problem(const ProblemSpec& s) {
  return validate_with_order(s, s.k1, "e1336");
}

FormalSeries forcing_coefficients(const ProblemSpec& spec, int N, cplx eps) {
  std::vector<GridFunction> c;
  for (int n = 0; n <= N; ++n)
    c.push_back(spec.forcing.empty() ? GridFunction::zeros(spec.grid, spec.decay)
                                     : spec.forcing.coefficient(n, eps, spec.q, spec.k1));
  return FormalSeries(std::move(c));
}

FormalSeries delay_recursion(const ProblemSpec& spec, double order, const FormalSeries& F,
                             int N, cplx eps, const std::vector<GridFunction>* initial) {
  if (N < 0) throw DomainError("negative truncation order");
  if (F.size() < N + 1) throw ShapeError("forcing series shorter than the requested order");
  const MGrid& g = spec.grid;
  const double s2pi = kInvSqrt2Pi;
  std::vector<GridFunction> U;
  U.reserve(N + 1);
  const int head = initial ? static_cast<int>(initial->size()) : 0;
  for (int n = 0; n <= N; ++n) {
    if (n < head) {
      U.push_back((*initial)[n]);
      continue;
    }
    const double qn = std::pow(spec.q, n);
    std::vector<cplx> rhs(g.n_points);
    for (int i = 0; i < g.n_points; ++i) rhs[i] = F[n][i] * qn;
    if (n - spec.dD >= 0) {
      const double w = std::pow(spec.q, (static_cast<double>(spec.dD) / order + 1.0) *
                                            (n - spec.dD));
      for (int i = 0; i < g.n_points; ++i)
        rhs[i] += spec.RD.at_im(g.m(i)) * U[n - spec.dD][i] * w;
    }
    for (const auto& lv : spec.levels) {
      for (const auto& t : lv.terms) {
        if (n - t.d < 0) continue;
        const cplx f = std::pow(eps, t.Delta - t.d) *
                       std::pow(spec.q, static_cast<double>(n - t.d) * lv.delta) * s2pi;
        const GridFunction cv = convolve_Q(t.C.at(eps), U[n - t.d], lv.R);
        for (int i = 0; i < g.n_points; ++i) rhs[i] += f * cv[i];
      }
    }
    for (int i = 0; i < g.n_points; ++i) {
      const cplx Qv = spec.Q.at_im(g.m(i));
      if (Qv == cplx(0.0)) throw DomainError("Q(im) vanishes on the grid");
      rhs[i] /= Qv * qn;
    }
    U.emplace_back(g, std::move(rhs), spec.decay);
  }
  return FormalSeries(std::move(U));
}

FormalSeries formal_coefficients(const ProblemSpec& spec, int N, cplx eps,
                                 const std::vector<GridFunction>* initial) {
  return delay_recursion(spec, spec.k2, forcing_coefficients(spec, N, eps), N, eps, initial);
}

std::vector<cplx> pm_roots(const Polynomial& Q, const Polynomial& RD, int dD, double q,
                           double k, double m) {
  const cplx Rv = RD.at_im(m);
  if (Rv == cplx(0.0)) throw DomainError("R_D(im) = 0: P_m has no roots of full degree");
  const cplx ratio = Q.at_im(m) / Rv;
  const double a = std::pow(q, 1.0 / k);
  const double expo = ((dD + k) * (dD + k - 1.0) - k * (k - 1.0)) / 2.0;
  const double mod = std::pow(std::abs(ratio) * std::pow(a, expo), 1.0 / dD);
  std::vector<cplx> roots(dD);
  for (int l = 0; l < dD; ++l)
    roots[l] = std::polar(mod, std::arg(ratio) / dD + 2.0 * kPi * l / dD);
  return roots;
}

std::vector<cplx> pm_roots(const ProblemSpec& spec, double m) {
  return pm_roots(spec.Q, spec.RD, spec.dD, spec.q, spec.k2, m);
}

cplx pm_value(const Polynomial& Q, const Polynomial& RD, int dD, double q, double k,
              double m, cplx tau) {
  const double a = std::pow(q, 1.0 / k);
  return Q.at_im(m) / std::pow(a, k * (k - 1.0) / 2.0) -
         RD.at_im(m) * std::pow(tau, dD) / std::pow(a, (dD + k) * (dD + k - 1.0) / 2.0);
}

RootBounds check_root_bounds(const Polynomial& Q, const Polynomial& RD, int dD, double q,
                             double k, const MGrid& grid, double r_qr, const Sector& sector,
                             double rho, int density) {
  density = std::max(1, density);
  std::vector<cplx> taus;
  const int na = 21 * density, nr = 60 * density;
  for (int a = 0; a < na; ++a) {
    const double s = -1.0 + 2.0 * a / (na - 1);
    for (int r = 0; r < nr; ++r) {
      const double rad = std::pow(10.0, -3.0 + 7.0 * r / (nr - 1));
      if (rad < sector.radius) taus.push_back(sector.point(s, rad));
    }
  }
  const int dr = 10 * density, dth = 36 * density;
  for (int r = 1; r <= dr; ++r)
    for (int th = 0; th < dth; ++th)
      taus.push_back(std::polar(rho * r / dr, 2.0 * kPi * th / dth));
  taus.push_back(0.0);

  RootBounds b;
  b.M1_hat = std::numeric_limits<double>::infinity();
  b.CP_hat = std::numeric_limits<double>::infinity();
  std::vector<double> m2(dD, std::numeric_limits<double>::infinity());
  for (int i = 0; i < grid.n_points; ++i) {
    const double m = grid.m(i);
    const auto roots = pm_roots(Q, RD, dD, q, k, m);
    const double rd = std::abs(RD.at_im(m));
    for (const cplx& t : taus) {
      const double one = 1.0 + std::abs(t);
      for (int l = 0; l < dD; ++l) {
        const double dist = std::abs(t - roots[l]);
        b.M1_hat = std::min(b.M1_hat, dist / one);
        m2[l] = std::min(m2[l], dist / std::abs(roots[l]));
      }
      const double P = std::abs(pm_value(Q, RD, dD, q, k, m, t));
      b.CP_hat = std::min(b.CP_hat, P / (rd * std::pow(one, dD - 1) * std::pow(r_qr, 1.0 / dD)));
    }
  }
  b.l0 = 0;
  for (int l = 1; l < dD; ++l)
    if (m2[l] > m2[b.l0]) b.l0 = l;
  b.M2_hat = m2[b.l0];
  return b;
}

RootBounds check_root_bounds(const ProblemSpec& spec, const Sector& sector, double rho,
                             int density) {
  return check_root_bounds(spec.Q, spec.RD, spec.dD, spec.q, spec.k2, spec.grid,
                           spec.s_qr.radius, sector, rho, density);
}

ProblemSpec effective(const ProblemSpec& spec, double zeta_le, double zeta_psi) {
  ProblemSpec out = spec;
  for (auto& lv : out.levels)
    for (auto& t : lv.terms) t.C.base = t.C.base.scaled(zeta_le);
  for (auto& t : out.forcing.terms) t.G = t.G.scaled(zeta_psi);
  return out;
}

}  // namespace qsum
