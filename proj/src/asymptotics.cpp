#include "qsum/asymptotics.hpp"

#include <algorithm>
#include <cmath>

namespace qsum {

namespace {

int find_eps(const std::vector<cplx>& list, cplx e) {
  for (size_t i = 0; i < list.size(); ++i)
    if (list[i] == e) return static_cast<int>(i);
  return -1;
}

bool same_grid(const SectorialSolution& a, const SectorialSolution& b) {
  return a.tgrid.t0 == b.tgrid.t0 && a.tgrid.q == b.tgrid.q && a.tgrid.L == b.tgrid.L &&
         a.tgrid.count == b.tgrid.count && a.z == b.z && a.grid == b.grid;
}

double factorial(int n) { return std::tgamma(n + 1.0); }

}  // namespace

CocycleSample cocycle(const SectorialSolution& u_p, const SectorialSolution& u_p1,
                      const std::vector<cplx>& eps_values, int pair_index) {
  if (!same_grid(u_p, u_p1)) throw ShapeError("cocycle needs solutions on one (t, z) grid");
  CocycleSample c;
  c.pair_index = pair_index;
  for (const cplx& e : eps_values) {
    const int a = find_eps(u_p.eps, e), b = find_eps(u_p1.eps, e);
    if (a < 0 || b < 0) throw ShapeError("eps sample missing from one of the solutions");
    c.eps_values.push_back(e);
    c.diff_norms.push_back((u_p1.values[b] - u_p.values[a]).cwiseAbs().maxCoeff());
    c.scales.push_back(u_p.values[a].cwiseAbs().maxCoeff());
  }
  return c;
}

double FlatnessFit::envelope(double e, double q) const {
  if (infinite) return 0.0;
  const double l = std::log(e);
  return K_hat * std::exp(M_hat * l - k_hat * l * l / (2.0 * std::log(q)));
}

FlatnessFit fit_flatness_order(const CocycleSample& c, double q, double floor_rel) {
  if (c.eps_values.size() != c.diff_norms.size()) throw ShapeError("cocycle sample sizes differ");
  std::vector<double> x, y;
  for (size_t i = 0; i < c.diff_norms.size(); ++i) {
    const double s = i < c.scales.size() ? c.scales[i] : 0.0;
    if (!(c.diff_norms[i] > floor_rel * s) || c.diff_norms[i] <= 0.0) continue;
    x.push_back(std::log(std::abs(c.eps_values[i])));
    y.push_back(std::log(c.diff_norms[i]));
  }
  FlatnessFit f;
  f.used = static_cast<int>(x.size());
  if (x.empty()) {
    f.infinite = true;
    f.k_hat = std::numeric_limits<double>::infinity();
    return f;
  }
  std::vector<double> distinct = x;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end(),
                             [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                 distinct.end());
  if (distinct.size() < 6) throw FitError("flatness fit needs at least 6 distinct |eps| above the floor");
  Eigen::MatrixXd A(x.size(), 3);
  Eigen::VectorXd b(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    A(i, 0) = 1.0;
    A(i, 1) = x[i];
    A(i, 2) = x[i] * x[i];
    b[i] = y[i];
  }
  const Eigen::Vector3d sol = A.colPivHouseholderQr().solve(b);
  f.K_hat = std::exp(sol[0]);
  f.M_hat = sol[1];
  f.k_hat = -2.0 * std::log(q) * sol[2];
  const double mean = b.mean();
  const double ss_tot = (b.array() - mean).square().sum();
  const double ss_res = (A * sol - b).squaredNorm();
  f.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return f;
}

Eigen::MatrixXcd fit_eps_polynomial(const std::vector<cplx>& eps, const Eigen::MatrixXcd& Y,
                                    int M) {
  const int n = static_cast<int>(eps.size());
  if (M < 0) throw FitError("negative expansion order");
  if (Y.rows() != n) throw ShapeError("one sample row per eps expected");
  if (n < M + 3) throw FitError("expansion fit needs at least M + 3 eps samples");
  double s = 0.0;
  for (const cplx& e : eps) {
    if (e == cplx(0.0)) throw FitError("eps = 0 sample in the expansion fit");
    s = std::max(s, std::abs(e));
  }
  Eigen::MatrixXcd coef = Eigen::MatrixXcd::Zero(M + 1, Y.cols());
  Eigen::MatrixXcd R = Y;  // y minus the fixed lower orders
  for (int N = 0; N <= M; ++N) {
    // Two guard orders absorb the truncated tail.
    const int deg = std::min(M - N + 2, n - 1);
    Eigen::MatrixXcd A(n, deg + 1);
    Eigen::MatrixXcd G(n, Y.cols());
    for (int i = 0; i < n; ++i) {
      const cplx u = eps[i] / s;
      cplx p = 1.0;
      for (int j = 0; j <= deg; ++j, p *= u) A(i, j) = p;
      G.row(i) = R.row(i) / std::pow(eps[i], N);
    }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double cond = sv[0] / sv[sv.size() - 1];
    if (!(cond <= 1e12)) throw FitError("ill-conditioned expansion fit; reduce M");
    const Eigen::MatrixXcd b = svd.solve(G);
    coef.row(N) = b.row(0);
    for (int i = 0; i < n; ++i) R.row(i) -= std::pow(eps[i], N) * coef.row(N);
  }
  return coef;
}

ExpansionEstimate estimate_expansion(const std::vector<SectorialSolution>& sols, int M) {
  if (sols.empty()) throw ShapeError("no sectorial solutions");
  for (const auto& s : sols)
    if (!same_grid(s, sols[0])) throw ShapeError("sectors sampled on different (t, z) grids");
  ExpansionEstimate est;
  est.M = M;
  est.tgrid = sols[0].tgrid;
  est.z = sols[0].z;
  est.grid = sols[0].grid;
  est.decay = sols[0].decay;
  est.beta_prime = sols[0].beta_prime;
  const int nm = est.grid.n_points, nt = est.tgrid.count;
  const FourierEvaluator fe(est.grid, est.beta_prime, est.z);
  std::vector<std::vector<Eigen::MatrixXcd>> sector_profiles;
  for (const auto& s : sols) {
    Eigen::MatrixXcd Y(s.n_eps(), static_cast<long>(nm) * nt);
    for (int e = 0; e < s.n_eps(); ++e)
      Y.row(e) = Eigen::Map<const Eigen::RowVectorXcd>(s.profiles[e].data(), Y.cols());
    const Eigen::MatrixXcd a = fit_eps_polynomial(s.eps, Y, M);
    std::vector<Eigen::MatrixXcd> prof, vals;
    for (int m = 0; m <= M; ++m) {
      Eigen::MatrixXcd P = Eigen::Map<const Eigen::MatrixXcd>(a.row(m).eval().data(), nm, nt);
      P *= factorial(m);
      vals.push_back(fe.apply(P));
      prof.push_back(std::move(P));
    }
    // Fit residual on the (t, z) values.
    double worst = 0.0, scale = 0.0;
    for (int e = 0; e < s.n_eps(); ++e) {
      Eigen::MatrixXcd fit = Eigen::MatrixXcd::Zero(est.z.size(), nt);
      for (int m = 0; m <= M; ++m) fit += vals[m] * (std::pow(s.eps[e], m) / factorial(m));
      worst = std::max(worst, (s.values[e] - fit).cwiseAbs().maxCoeff());
      scale = std::max(scale, s.values[e].cwiseAbs().maxCoeff());
    }
    est.fit_residuals.push_back(scale > 0.0 ? worst / scale : worst);
    sector_profiles.push_back(std::move(prof));
    est.sector_values.push_back(std::move(vals));
  }
  const double ns = static_cast<double>(sols.size());
  for (int m = 0; m <= M; ++m) {
    Eigen::MatrixXcd P = Eigen::MatrixXcd::Zero(nm, nt);
    Eigen::MatrixXcd V = Eigen::MatrixXcd::Zero(est.z.size(), nt);
    for (size_t s = 0; s < sols.size(); ++s) {
      P += sector_profiles[s][m] / ns;
      V += est.sector_values[s][m] / ns;
    }
    est.profiles.push_back(P);
    est.values.push_back(V);
    double dev = 0.0;
    for (size_t a = 0; a < sols.size(); ++a)
      for (size_t b = a + 1; b < sols.size(); ++b)
        dev = std::max(dev, (est.sector_values[a][m] - est.sector_values[b][m]).cwiseAbs().maxCoeff());
    est.cross_sector_deviation.push_back(dev);
  }
  return est;
}

EpsSamples samples_of(const SectorialSolution& u) {
  EpsSamples s;
  s.eps = u.eps;
  const long cols = static_cast<long>(u.z.size()) * u.tgrid.count;
  s.values.resize(u.n_eps(), cols);
  for (int e = 0; e < u.n_eps(); ++e)
    s.values.row(e) = Eigen::Map<const Eigen::RowVectorXcd>(u.values[e].data(), cols);
  return s;
}

Eigen::MatrixXcd flatten_values(const ExpansionEstimate& est) {
  const long cols = static_cast<long>(est.z.size()) * est.tgrid.count;
  Eigen::MatrixXcd h(est.M + 1, cols);
  for (int m = 0; m <= est.M; ++m)
    h.row(m) = Eigen::Map<const Eigen::RowVectorXcd>(est.values[m].data(), cols);
  return h;
}

GevreyCheck check_q_gevrey_bound(const std::vector<EpsSamples>& f, const Eigen::MatrixXcd& h,
                                 double k, double q, double floor_rel) {
  const int M = static_cast<int>(h.rows()) - 1;
  if (M < 0) throw ShapeError("empty expansion");
  GevreyCheck g;
  std::vector<double> roots;
  for (int N = 0; N <= M; ++N) {
    double eta = 0.0;
    for (const auto& s : f) {
      if (s.values.cols() != h.cols()) throw ShapeError("expansion and samples differ in width");
      const double floor = floor_rel * s.values.cwiseAbs().maxCoeff();
      for (size_t i = 0; i < s.eps.size(); ++i) {
        Eigen::RowVectorXcd rem = s.values.row(i);
        for (int n = 0; n <= N; ++n) rem -= h.row(n) * (std::pow(s.eps[i], n) / factorial(n));
        const double r = rem.cwiseAbs().maxCoeff();
        if (r <= floor) continue;
        const double a = std::abs(s.eps[i]);
        eta = std::max(eta, r / (std::pow(q, N * (N + 1.0) / (2.0 * k)) * std::pow(a, N + 1.0)));
      }
    }
    g.eta.push_back(eta);
    if (eta > 0.0) roots.push_back(std::pow(eta, 1.0 / (N + 1.0)));
  }
  if (roots.empty()) {
    g.bounded = true;
    return g;
  }
  std::vector<double> sorted = roots;
  std::sort(sorted.begin(), sorted.end());
  const size_t n = sorted.size();
  g.median_root = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  g.max_root = sorted.back();
  g.bounded = g.max_root <= 3.0 * g.median_root;
  return g;
}

RecursionCheck verify_formal_recursion(const ExpansionEstimate& est, const ProblemSpec& spec,
                                       const ExpansionEstimate& f_est, int max_order) {
  int need = spec.dD;
  for (const auto& lv : spec.levels)
    for (const auto& t : lv.terms) need = std::max(need, t.Delta);
  need += 2;
  if (est.M < need || f_est.M < need)
    throw DomainError("recursion check needs expansion orders up to " + std::to_string(need));
  if (!(est.z == f_est.z) || est.tgrid.count != f_est.tgrid.count || est.tgrid.t0 != f_est.tgrid.t0)
    throw ShapeError("solution and forcing expansions on different grids");
  const MGrid& g = est.grid;
  const int nm = g.n_points, nt = est.tgrid.count;
  const FourierEvaluator fe(g, est.beta_prime, est.z);
  auto mult = [&](const Polynomial& P, const Eigen::MatrixXcd& X) {
    Eigen::MatrixXcd Y = X;
    for (int i = 0; i < nm; ++i) Y.row(i) *= P.at_im(g.m(i));
    return fe.apply(Y);
  };
  const int s1 = est.tgrid.shift(1.0);
  const int sD = est.tgrid.shift(static_cast<double>(spec.dD) / spec.k2 + 1.0);
  int reach = std::max(s1, sD);
  std::vector<Eigen::MatrixXcd> QH, RH;
  std::vector<std::vector<Eigen::MatrixXcd>> LH(spec.levels.size());
  std::vector<int> sl;
  for (const auto& lv : spec.levels) {
    sl.push_back(est.tgrid.shift(lv.delta));
    reach = std::max(reach, sl.back());
  }
  for (int m = 0; m <= est.M; ++m) {
    QH.push_back(mult(spec.Q, est.profiles[m]));
    RH.push_back(mult(spec.RD, est.profiles[m]));
    for (size_t l = 0; l < spec.levels.size(); ++l)
      LH[l].push_back(mult(spec.levels[l].R, est.profiles[m]));
  }
  // c(z, eps) = sum_j eps_poly[j] eps^j F^{-1}(base)(z).
  std::vector<std::vector<std::vector<cplx>>> cz(spec.levels.size());
  for (size_t l = 0; l < spec.levels.size(); ++l)
    for (const auto& t : spec.levels[l].terms) cz[l].push_back(inverse_fourier(t.C.base, est.z));
  if (reach >= nt) throw GridError("t lattice too short for the recursion check");
  RecursionCheck out;
  for (int m = 0; m <= est.M; ++m) {
    double worst = 0.0, peak = 0.0;
    for (int j = 0; j + reach < nt; ++j) {
      const double t = est.tgrid.t(j);
      for (size_t zi = 0; zi < est.z.size(); ++zi) {
        const cplx lhs = QH[m](zi, j + s1);
        cplx rhs = 0.0;
        double mass = std::abs(lhs);
        auto add = [&](cplx v) {
          rhs += v;
          mass += std::abs(v);
        };
        if (m >= spec.dD)
          add(factorial(m) / factorial(m - spec.dD) * std::pow(t, spec.dD) *
              RH[m - spec.dD](zi, j + sD));
        for (size_t l = 0; l < spec.levels.size(); ++l) {
          const Level& lv = spec.levels[l];
          for (size_t i = 0; i < lv.terms.size(); ++i) {
            const LevelTerm& tm = lv.terms[i];
            for (int m2 = 0; m2 <= m - tm.Delta; ++m2) {
              if (m2 >= static_cast<int>(tm.C.eps_poly.size())) break;
              const int m3 = m - tm.Delta - m2;
              const cplx dc = factorial(m2) * tm.C.eps_poly[m2] * cz[l][i][zi];
              add(factorial(m) / (factorial(m2) * factorial(m3)) * std::pow(t, tm.d) * dc *
                  LH[l][m3](zi, j + sl[l]));
            }
          }
        }
        add(f_est.values[m](zi, j + s1));
        worst = std::max(worst, std::abs(lhs - rhs));
        peak = std::max(peak, mass);
      }
    }
    out.per_order.push_back(peak > 0.0 ? worst / peak : 0.0);
    if (max_order < 0 || m <= max_order) out.max_rel = std::max(out.max_rel, out.per_order.back());
  }
  return out;
}

TwoLevelSplit verify_two_level_split(const std::vector<FlatnessFit>& fits, double k1,
                                     double k2) {
  TwoLevelSplit s;
  const double span = std::log(k2 / k1);
  for (size_t p = 0; p < fits.size(); ++p) {
    const FlatnessFit& f = fits[p];
    if (f.infinite || !(f.k_hat > 0.0) || !std::isfinite(f.k_hat)) {
      s.margin.push_back(0.0);
      s.flagged.push_back(true);
      continue;
    }
    const double d1 = std::abs(std::log(f.k_hat / k1)), d2 = std::abs(std::log(f.k_hat / k2));
    const double margin = std::abs(d1 - d2) / span;
    s.margin.push_back(margin);
    s.flagged.push_back(margin < 0.1);
    (d1 <= d2 ? s.I1 : s.I2).push_back(static_cast<int>(p));
  }
  s.both_nonempty = !s.I1.empty() && !s.I2.empty();
  return s;
}

}  // namespace qsum
