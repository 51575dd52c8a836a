#include "qsum/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace qsum {

int TGrid::shift(double gamma) const {
  const double s = gamma * L;
  const double r = std::round(s);
  if (std::abs(s - r) > 1e-9) throw GridError("dilation exponent is not on the t lattice");
  return static_cast<int>(r);
}

void TGrid::check() const {
  if (!(t0 > 0.0) || !(q > 1.0) || L < 1 || count < 1) throw DomainError("invalid t lattice");
}

SectorialSolution laplace_fourier(const std::vector<TauFamily>& families, double q, double k,
                                  const LaplaceDomain& dom, const TGrid& tgrid,
                                  const std::vector<cplx>& z, const std::vector<cplx>& eps,
                                  double beta_prime) {
  tgrid.check();
  if (families.size() != eps.size()) throw ShapeError("one family per eps sample expected");
  if (families.empty()) throw ShapeError("no eps samples");
  SectorialSolution out;
  out.direction = dom.direction;
  out.tgrid = tgrid;
  out.z = z;
  out.eps = eps;
  out.grid = families[0].grid();
  out.decay = families[0].decay();
  out.beta_prime = beta_prime;
  if (!(beta_prime > 0.0 && beta_prime < out.decay.beta))
    throw DomainError("beta' must satisfy 0 < beta' < beta");
  const FourierEvaluator fe(out.grid, beta_prime, z);
  for (size_t e = 0; e < eps.size(); ++e) {
    const TauFamily& w = families[e];
    if (std::abs(fold_angle(w.ray().direction - dom.direction)) > 1e-12)
      throw DomainError("family ray differs from the Laplace direction");
    std::vector<cplx> targets(tgrid.count);
    for (int j = 0; j < tgrid.count; ++j) {
      targets[j] = eps[e] * tgrid.t(j);
      if (!in_laplace_domain(targets[j], dom))
        throw DomainError("eps t outside the Laplace domain of the sector");
    }
    FamilyLaplaceReport rep;
    out.profiles.push_back(family_q_laplace(w, ThetaParams{q, k}, targets, &rep));
    if (rep.upper_tail > 1e-10)
      throw DivergenceError("Laplace integrand not negligible at the end of the ray");
    out.values.push_back(fe.apply(out.profiles.back()));
  }
  return out;
}

SectorialSolution build_forcing(const ProblemSpec& spec, const std::vector<TauFamily>& psi_k2,
                                const LaplaceDomain& dom, const TGrid& tgrid,
                                const std::vector<cplx>& z, const std::vector<cplx>& eps,
                                double beta_prime) {
  return laplace_fourier(psi_k2, spec.q, spec.k2, dom, tgrid, z, eps, beta_prime);
}

SectorialSolution assemble_solution(const ProblemSpec& spec, const std::vector<TauFamily>& w_k2,
                                    const LaplaceDomain& dom, const TGrid& tgrid,
                                    const std::vector<cplx>& z, const std::vector<cplx>& eps,
                                    double beta_prime) {
  return laplace_fourier(w_k2, spec.q, spec.k2, dom, tgrid, z, eps, beta_prime);
}

std::vector<CollocationPoint> interior_points(const SectorialSolution& u, double max_gamma,
                                              int count) {
  const int reach = static_cast<int>(std::ceil(max_gamma * u.tgrid.L - 1e-9));
  const int nt = u.tgrid.count - reach;
  if (nt <= 0) throw GridError("t lattice too short for the needed dilations");
  const long total = static_cast<long>(u.n_eps()) * nt * static_cast<long>(u.z.size());
  std::vector<CollocationPoint> pts;
  const int n = static_cast<int>(std::min<long>(count, total));
  for (int s = 0; s < n; ++s) {
    long idx = n == 1 ? 0 : static_cast<long>(std::llround(s * (total - 1.0) / (n - 1)));
    CollocationPoint p;
    p.z_index = static_cast<int>(idx % u.z.size());
    idx /= static_cast<long>(u.z.size());
    p.t_index = static_cast<int>(idx % nt);
    p.eps_index = static_cast<int>(idx / nt);
    pts.push_back(p);
  }
  return pts;
}

namespace {

Eigen::VectorXcd times_poly(const Polynomial& P, const MGrid& g, const Eigen::VectorXcd& v) {
  Eigen::VectorXcd out(v.size());
  for (int i = 0; i < v.size(); ++i) out[i] = P.at_im(g.m(i)) * v[i];
  return out;
}

cplx fourier_at(const MGrid& g, const Eigen::VectorXcd& v, cplx z) {
  const auto tw = trapezoid_weights(g);
  cplx acc = 0.0;
  for (int i = 0; i < v.size(); ++i) acc += tw[i] * v[i] * std::exp(cplx(0.0, 1.0) * z * g.m(i));
  return acc * kInvSqrt2Pi;
}

Eigen::VectorXcd column(const SectorialSolution& u, int e, int j) {
  if (j < 0 || j >= u.tgrid.count) throw GridError("dilated t node outside the lattice");
  return u.profiles[e].col(j);
}

}  // namespace

PointResidual pde_residual(const ProblemSpec& spec, const SectorialSolution& u,
                           const SectorialSolution& f,
                           const std::vector<CollocationPoint>& points) {
  if (!(u.tgrid.t0 == f.tgrid.t0 && u.tgrid.L == f.tgrid.L && u.eps == f.eps && u.z == f.z))
    throw ShapeError("solution and forcing grids differ");
  const MGrid& g = u.grid;
  const int s1 = u.tgrid.shift(1.0);
  const int sD = u.tgrid.shift(static_cast<double>(spec.dD) / spec.k2 + 1.0);
  PointResidual out;
  for (const auto& p : points) {
    const cplx eps = u.eps[p.eps_index];
    const cplx z = u.z[p.z_index];
    const double t = u.tgrid.t(p.t_index);
    const int j = p.t_index;
    const cplx lhs = fourier_at(g, times_poly(spec.Q, g, column(u, p.eps_index, j + s1)), z);
    std::vector<cplx> terms;
    terms.push_back(std::pow(eps * t, spec.dD) *
                    fourier_at(g, times_poly(spec.RD, g, column(u, p.eps_index, j + sD)), z));
    for (const auto& lv : spec.levels) {
      const int sd = u.tgrid.shift(lv.delta);
      const cplx du = fourier_at(g, times_poly(lv.R, g, column(u, p.eps_index, j + sd)), z);
      for (const auto& tm : lv.terms) {
        const GridFunction C = tm.C.at(eps);
        const cplx c = inverse_fourier(C, {z})[0];
        terms.push_back(std::pow(t, tm.d) * std::pow(eps, tm.Delta) * c * du);
      }
    }
    if (j + s1 >= f.tgrid.count) throw GridError("dilated t node outside the forcing lattice");
    terms.push_back(f.values[p.eps_index](p.z_index, j + s1));
    cplx diff = lhs;
    double mass = std::abs(lhs);
    for (const cplx& v : terms) {
      diff -= v;
      mass += std::abs(v);
    }
    const double r = mass > 0.0 ? std::abs(diff) / mass : 0.0;
    out.per_point.push_back(r);
    out.max_rel = std::max(out.max_rel, r);
  }
  return out;
}

FormalSeries chained_forcing_coefficients(const ProblemSpec& bold, const FormalSeries& bold_F,
                                          int N, cplx eps) {
  return delay_recursion(bold, bold.k1, bold_F, N, eps);
}

FixedPointResult chained_psi_k1(const ProblemSpec& bold, const TauRay& ray,
                                const FixedPointConfig& cfg, cplx eps) {
  const TauFamily psi = sample_psi_k1(bold, ray, eps);
  NormParams norm;
  norm.k = bold.k1;
  norm.beta = bold.decay.beta;
  norm.mu = bold.decay.mu;
  norm.tilt = cfg.alpha;
  norm.q = bold.q;
  return solve_ptype(ptype_of(bold, bold.k1), psi, cfg, eps, norm);
}

namespace {

// Q sigma_q U - T^{d_D} sigma_q^{d_D/order+1} R_D U - level terms, at T = T(n),
// as m-profiles; U(n) returns the profile at lattice node n.
class DelayOperator {
 public:
  DelayOperator(const ProblemSpec& s, double order, const TGrid& tg, cplx eps)
      : s_(s), eps_(eps), s1_(tg.shift(1.0)),
        sD_(tg.shift(static_cast<double>(s.dD) / order + 1.0)) {
    for (const auto& lv : s.levels) {
      shifts_.push_back(tg.shift(lv.delta));
      std::vector<GridFunction> cs;
      for (const auto& t : lv.terms) cs.push_back(t.C.at(eps));
      kernels_.push_back(std::move(cs));
    }
  }

  // Term list of the operator applied to V at node n with T = T_n.
  template <class Get>
  std::vector<Eigen::VectorXcd> terms(const Get& V, int n, cplx T) const {
    const MGrid& g = s_.grid;
    std::vector<Eigen::VectorXcd> out;
    out.push_back(times_poly(s_.Q, g, V(n + s1_)));
    out.push_back(-std::pow(T, s_.dD) * times_poly(s_.RD, g, V(n + sD_)));
    for (size_t l = 0; l < s_.levels.size(); ++l) {
      const Level& lv = s_.levels[l];
      const Eigen::VectorXcd v = V(n + shifts_[l]);
      for (size_t i = 0; i < lv.terms.size(); ++i) {
        const auto& t = lv.terms[i];
        const auto cv = reference_convolution(kernels_[l][i], lv.R, v.data());
        const cplx f = -std::pow(T, t.d) * std::pow(eps_, t.Delta - t.d) * kInvSqrt2Pi;
        out.push_back(f * Eigen::Map<const Eigen::VectorXcd>(cv.data(), cv.size()));
      }
    }
    return out;
  }

  int s1() const { return s1_; }

 private:
  const ProblemSpec& s_;
  cplx eps_;
  int s1_, sD_;
  std::vector<int> shifts_;
  std::vector<std::vector<GridFunction>> kernels_;
};

}  // namespace

PointResidual composed_residual(const ProblemSpec& spec, const ProblemSpec& bold,
                                const SectorialSolution& u,
                                const std::vector<CollocationPoint>& points) {
  for (const auto& t : bold.forcing.terms)
    if (!t.phi.poles.empty())
      throw DomainError("composed residual needs a polynomial bold forcing");
  int top = 0;
  for (const auto& t : bold.forcing.terms)
    for (const auto& mo : t.phi.monomials) top = std::max(top, mo.power);
  const MGrid& g = u.grid;
  PointResidual out;
  for (const auto& p : points) {
    const cplx eps = u.eps[p.eps_index];
    const DelayOperator inner(spec, spec.k2, u.tgrid, eps);
    const DelayOperator outer(bold, bold.k1, u.tgrid, eps);
    auto T = [&](int n) { return eps * u.tgrid.t(n); };
    std::map<int, Eigen::VectorXcd> memo;
    // G(T) = (P u)(T / q) at lattice node n.
    auto G = [&](int n) -> Eigen::VectorXcd {
      auto it = memo.find(n);
      if (it != memo.end()) return it->second;
      const int m = n - inner.s1();
      const auto parts = inner.terms([&](int k) { return column(u, p.eps_index, k); }, m, T(m));
      Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(g.n_points);
      for (const auto& v : parts) acc += v;
      memo[n] = acc;
      return acc;
    };
    const int j = p.t_index;
    auto parts = outer.terms(G, j, T(j));
    // sigma_q bold_f at T_j.
    Eigen::VectorXcd bf = Eigen::VectorXcd::Zero(g.n_points);
    const cplx qT = bold.q * T(j);
    for (int n = 0; n <= top; ++n) {
      const GridFunction Fn = bold.forcing.coefficient(n, eps, bold.q, bold.k1);
      for (int i = 0; i < g.n_points; ++i) bf[i] += Fn[i] * std::pow(qT, n);
    }
    parts.push_back(-bf);
    const cplx z = u.z[p.z_index];
    cplx sum = 0.0;
    double mass = 0.0;
    for (const auto& v : parts) {
      const cplx a = fourier_at(g, v, z);
      sum += a;
      mass += std::abs(a);
    }
    const double r = mass > 0.0 ? std::abs(sum) / mass : 0.0;
    out.per_point.push_back(r);
    out.max_rel = std::max(out.max_rel, r);
  }
  return out;
}

}  // namespace qsum
