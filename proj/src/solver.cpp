#include "qsum/solver.hpp"

#include <algorithm>
#include <cmath>

namespace qsum {

void FixedPointConfig::check() const {
  if (!(tol > 0.0)) throw DomainError("fixed-point tolerance must be positive");
  if (max_iter < 1) throw DomainError("max_iter must be positive");
  if (!(ball_radius > 0.0)) throw DomainError("ball radius must be positive");
  if (!(zeta_psi > 0.0) || !(zeta_le > 0.0)) throw DomainError("smallness knobs must be positive");
}

TauRay make_ray(double direction, double r_min, double r_max, double q, int L) {
  if (!(r_min > 0.0) || !(r_max > r_min)) throw DomainError("ray needs 0 < r_min < r_max");
  TauRay ray;
  ray.direction = direction;
  ray.r_min = r_min;
  ray.q = q;
  ray.L = L;
  ray.count = static_cast<int>(std::ceil(std::log(r_max / r_min) / ray.log_step())) + 1;
  return ray;
}

NormParams k1_norm(const ProblemSpec& spec, const FixedPointConfig& cfg) {
  NormParams p;
  p.k = spec.kappa();
  p.beta = spec.decay.beta;
  p.mu = spec.decay.mu;
  p.tilt = cfg.alpha;
  p.shift = cfg.shift;
  p.q = spec.q;
  return p;
}

NormParams k2_norm(const ProblemSpec& spec, const FixedPointConfig& cfg) {
  NormParams p;
  p.k = spec.k2;
  p.beta = spec.decay.beta;
  p.mu = spec.decay.mu;
  p.tilt = cfg.nu;
  p.shift = 0.0;
  p.q = spec.q;
  return p;
}

TauFamily sample_psi_k1(const ProblemSpec& spec, const TauRay& ray, cplx eps) {
  TauFamily out(ray, spec.grid, spec.decay);
  auto& v = out.values();
  for (const auto& t : spec.forcing.terms) {
    const cplx ep = std::pow(eps, t.eps_power);
    for (int j = 0; j < ray.count; ++j) {
      const cplx ph = t.phi(ray.node(j)) * ep;
      for (int i = 0; i < spec.grid.n_points; ++i) v(i, j) += t.G[i] * ph;
    }
  }
  return out;
}

TauFamily psi_k2_family(const ProblemSpec& spec, const TauRay& ray, cplx eps) {
  TauFamily out(ray, spec.grid, spec.decay);
  auto& v = out.values();
  const ThetaParams tp{spec.q, spec.kappa()};
  for (const auto& t : spec.forcing.terms) {
    const cplx ep = std::pow(eps, t.eps_power);
    const TauProfile phi = t.phi;
    const auto Phi = q_laplace_on_ray([&phi](cplx u) { return phi(u); }, tp, ray);
    for (int j = 0; j < ray.count; ++j)
      for (int i = 0; i < spec.grid.n_points; ++i) v(i, j) += t.G[i] * Phi[j] * ep;
  }
  return out;
}

PTypeProblem ptype_of(const ProblemSpec& spec, double k) {
  PTypeProblem pb;
  pb.q = spec.q;
  pb.k = k;
  pb.Q = spec.Q;
  pb.RD = spec.RD;
  pb.dD = spec.dD;
  pb.levels = spec.levels;
  return pb;
}

namespace {

// One linear contribution node_coef[j] * Op(w at node j + shift), shift <= 0,
// nodes below the ray read the first node.
struct LinearTerm {
  bool diagonal = false;
  ConvolutionOperator conv;
  std::vector<cplx> diag;
  int shift = 0;
  std::vector<cplx> node_coef;

  void apply(const cplx* in, cplx* out) const {
    if (diagonal) {
      for (size_t i = 0; i < diag.size(); ++i) out[i] = diag[i] * in[i];
    } else {
      conv.apply(in, out);
    }
  }
};

// w -> mult .* (sum_t terms + source'), source already multiplied.
struct AffineMap {
  int nm = 0, count = 0;
  Eigen::MatrixXcd mult;
  Eigen::MatrixXcd source;
  std::vector<LinearTerm> terms;

  void apply(const Eigen::MatrixXcd& w, Eigen::MatrixXcd& out) const {
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(nm, count);
    Eigen::VectorXcd V(nm);
    for (const auto& t : terms) {
      // Op(w_i) once per source node, scattered to every node reading it.
      const int last = count - 1 + t.shift;
      if (last < 0) {
        t.apply(w.col(0).data(), V.data());
        for (int j = 0; j < count; ++j) acc.col(j) += t.node_coef[j] * V;
        continue;
      }
      for (int i = 0; i <= last; ++i) {
        t.apply(w.col(i).data(), V.data());
        if (i == 0) {
          for (int j = 0; j <= -t.shift && j < count; ++j) acc.col(j) += t.node_coef[j] * V;
        } else {
          acc.col(i - t.shift) += t.node_coef[i - t.shift] * V;
        }
      }
    }
    out = source + mult.cwiseProduct(acc);
  }

  // Nodes in increasing order; only terms with shift 0 couple a node to
  // itself and are resolved by a local iteration.
  int sweep(Eigen::MatrixXcd& w, double tol, int max_local, const std::vector<double>& mweight) const {
    std::vector<Eigen::MatrixXcd> V(terms.size(), Eigen::MatrixXcd(nm, count));
    Eigen::VectorXcd base(nm), cur(nm), nxt(nm), tmp(nm);
    int worst = 0;
    auto wnorm = [&](const Eigen::VectorXcd& x) {
      double b = 0.0;
      for (int i = 0; i < nm; ++i) b = std::max(b, mweight[i] * std::abs(x[i]));
      return b;
    };
    for (int j = 0; j < count; ++j) {
      base.setZero();
      std::vector<const LinearTerm*> self;
      for (size_t t = 0; t < terms.size(); ++t) {
        const int src = j + terms[t].shift;
        if (terms[t].shift == 0 || (src <= 0 && j == 0)) {
          self.push_back(&terms[t]);
        } else {
          base += terms[t].node_coef[j] * V[t].col(std::max(src, 0));
        }
      }
      cur = source.col(j) + mult.col(j).cwiseProduct(base);
      int it = 0;
      if (!self.empty()) {
        for (; it < max_local; ++it) {
          tmp.setZero();
          for (const auto* t : self) {
            t->apply(cur.data(), nxt.data());
            tmp += t->node_coef[j] * nxt;
          }
          nxt = source.col(j) + mult.col(j).cwiseProduct(base + tmp);
          const double upd = wnorm(nxt - cur), sc = wnorm(nxt);
          cur = nxt;
          if (upd <= tol * std::max(sc, 1e-300)) break;
        }
        if (it == max_local) throw SmallnessError("local iteration did not converge in sweep");
      }
      worst = std::max(worst, it + 1);
      w.col(j) = cur;
      for (size_t t = 0; t < terms.size(); ++t) terms[t].apply(cur.data(), V[t].col(j).data());
    }
    return worst;
  }
};

std::vector<double> m_weights(const MGrid& g, const Decay& d) {
  std::vector<double> w(g.n_points);
  for (int i = 0; i < g.n_points; ++i) w[i] = d.weight(g.m(i));
  return w;
}

FixedPointResult run_fixed_point(const AffineMap& map, const TauFamily& like,
                                 const FixedPointConfig& cfg, const NormParams& norm,
                                 ExpSpace space, const TauFamily* start) {
  cfg.check();
  FixedPointResult res;
  res.w = TauFamily(like.ray(), like.grid(), like.decay());
  auto family = [&](Eigen::MatrixXcd v) {
    return TauFamily(like.ray(), like.grid(), like.decay(), std::move(v));
  };
  if (cfg.mode == IterationMode::sweep) {
    Eigen::MatrixXcd w = map.source;
    res.iterations = map.sweep(w, cfg.tol, cfg.max_iter, m_weights(like.grid(), like.decay()));
    res.w = family(std::move(w));
    res.norm = exp_norm(res.w, norm, space);
    res.within_ball = res.norm <= cfg.ball_radius;
    return res;
  }
  Eigen::MatrixXcd w = start ? start->values() : map.source;
  Eigen::MatrixXcd next;
  double prev = -1.0;
  for (int it = 1; it <= cfg.max_iter; ++it) {
    map.apply(w, next);
    if (!next.allFinite()) throw DivergenceError("fixed-point iterate overflowed");
    const double upd = exp_norm(family(next - w), norm, space);
    const double sc = exp_norm(family(next), norm, space);
    res.updates.push_back(upd);
    w.swap(next);
    res.iterations = it;
    if (prev > 1e-12 * sc && it >= 2) {
      const double ratio = upd / prev;
      res.contraction_ratio = std::max(res.contraction_ratio, ratio);
      if (it >= 5 && ratio >= 1.0)
        throw SmallnessError("contraction ratio >= 1 after 5 iterations");
    }
    prev = upd;
    if (upd <= cfg.tol * std::max(sc, 1e-300)) break;
    if (it == cfg.max_iter) throw DivergenceError("fixed point not reached within max_iter");
  }
  res.w = family(std::move(w));
  res.norm = exp_norm(res.w, norm, space);
  res.within_ball = res.norm <= cfg.ball_radius;
  return res;
}

void check_family(const TauFamily& f, const MGrid& g) {
  if (!(f.grid() == g)) throw ShapeError("family grid differs from the problem grid");
  if (f.values().rows() != g.n_points || f.values().cols() != f.count())
    throw ShapeError("family values have the wrong shape");
}

LinearTerm level_term(const Level& lv, const LevelTerm& t, cplx eps, double zeta_le,
                      const TauRay& ray, double k, double node_scale_pow) {
  LinearTerm lt;
  const cplx f = zeta_le * std::pow(eps, t.Delta - t.d) * kInvSqrt2Pi;
  lt.conv = ConvolutionOperator(t.C.at(eps).scaled(f), lv.R);
  lt.shift = ray.dilation_shift(lv.delta - t.d / k - 1.0);
  if (lt.shift > 0) throw GridError("positive dilation shift in the Borel-plane map");
  lt.node_coef.resize(ray.count);
  for (int j = 0; j < ray.count; ++j)
    lt.node_coef[j] = std::pow(ray.node(j), t.d) * node_scale_pow;
  return lt;
}

double borel_pow(double q, double k, double x) {
  // (q^{1/k})^{(x+k)(x+k-1)/2}
  return std::exp(std::log(q) / k * (x + k) * (x + k - 1.0) / 2.0);
}

}  // namespace

FixedPointResult solve_w_k1(const ProblemSpec& spec, const TauFamily& psi,
                            const FixedPointConfig& cfg, cplx eps, const TauFamily* start) {
  check_family(psi, spec.grid);
  const TauRay& ray = psi.ray();
  const int nm = spec.grid.n_points;
  const double k1 = spec.k1;
  const double head = borel_pow(spec.q, k1, 0.0);  // (q^{1/k1})^{k1(k1-1)/2}
  AffineMap map;
  map.nm = nm;
  map.count = ray.count;
  Eigen::VectorXcd invQ(nm);
  for (int i = 0; i < nm; ++i) {
    const cplx Qv = spec.Q.at_im(spec.grid.m(i));
    if (Qv == cplx(0.0)) throw DomainError("Q(im) vanishes on the grid");
    invQ[i] = 1.0 / Qv;
  }
  map.mult = invQ.replicate(1, ray.count);
  map.source = map.mult.cwiseProduct(psi.values()) * cfg.zeta_psi;
  LinearTerm rd;
  rd.diagonal = true;
  rd.diag.resize(nm);
  for (int i = 0; i < nm; ++i) rd.diag[i] = spec.RD.at_im(spec.grid.m(i));
  rd.shift = ray.dilation_shift(-spec.dD / spec.kappa());
  rd.node_coef.resize(ray.count);
  const double cD = head / borel_pow(spec.q, k1, spec.dD);
  for (int j = 0; j < ray.count; ++j) rd.node_coef[j] = cD * std::pow(ray.node(j), spec.dD);
  map.terms.push_back(std::move(rd));
  for (const auto& lv : spec.levels)
    for (const auto& t : lv.terms)
      map.terms.push_back(
          level_term(lv, t, eps, cfg.zeta_le, ray, k1, head / borel_pow(spec.q, k1, t.d)));
  return run_fixed_point(map, psi, cfg, k1_norm(spec, cfg), ExpSpace::shifted, start);
}

FixedPointResult solve_ptype(const PTypeProblem& pb, const TauFamily& psi,
                             const FixedPointConfig& cfg, cplx eps, const NormParams& norm,
                             const TauFamily* start) {
  const TauRay& ray = psi.ray();
  const MGrid& g = psi.grid();
  const int nm = g.n_points;
  AffineMap map;
  map.nm = nm;
  map.count = ray.count;
  map.mult.resize(nm, ray.count);
  for (int j = 0; j < ray.count; ++j) {
    const cplx tau = ray.node(j);
    for (int i = 0; i < nm; ++i) {
      const cplx P = pm_value(pb.Q, pb.RD, pb.dD, pb.q, pb.k, g.m(i), tau);
      if (std::abs(P) < 1e-12) throw DomainError("root of P_m too close to a ray node");
      map.mult(i, j) = 1.0 / P;
    }
  }
  map.source = map.mult.cwiseProduct(psi.values()) * (cfg.zeta_psi / borel_pow(pb.q, pb.k, 0.0));
  for (const auto& lv : pb.levels)
    for (const auto& t : lv.terms)
      map.terms.push_back(level_term(lv, t, eps, cfg.zeta_le, ray, pb.k,
                                     1.0 / borel_pow(pb.q, pb.k, t.d)));
  return run_fixed_point(map, psi, cfg, norm, ExpSpace::plain, start);
}

FixedPointResult solve_w_k2(const ProblemSpec& spec, const TauFamily& psi,
                            const FixedPointConfig& cfg, cplx eps, const Sector& sector,
                            double rho1, const TauFamily* start) {
  check_family(psi, spec.grid);
  const RootBounds rb = check_root_bounds(spec, sector, rho1);
  if (!(rb.M1_hat > 0.01))
    throw DomainError("direction inadmissible: roots of P_m too close to the sector");
  return solve_ptype(ptype_of(spec, spec.k2), psi, cfg, eps, k2_norm(spec, cfg), start);
}

std::vector<cplx> reference_convolution(const GridFunction& C, const Polynomial& R,
                                        const cplx* w) {
  const MGrid& g = C.grid();
  const int n = g.n_points;
  const double h = g.spacing();
  const int c = g.center();
  std::vector<cplx> out(n, 0.0);
  for (int i = 0; i < n; ++i) {
    cplx acc = 0.0;
    for (int j = 0; j < n; ++j) {
      const int d = i - j + c;
      if (d < 0 || d >= n) continue;
      const double wt = (j == 0 || j == n - 1) ? 0.5 : 1.0;
      acc += wt * C[d] * R.at_im(g.m(j)) * w[j];
    }
    out[i] = acc * h;
  }
  return out;
}

namespace {

// Column of w at radius r q^gamma (first column below the ray).
int lookup(const TauRay& ray, int j, double gamma) {
  const double r = ray.radius(j) * std::pow(ray.q, gamma);
  if (r < ray.r_min * (1.0 - 1e-9)) return 0;
  const int idx = ray.find_radius(r);
  if (idx < 0) throw GridError("dilated radius missing from the ray");
  return idx;
}

double rel_family_residual(const TauFamily& like, const Eigen::MatrixXcd& lhs,
                           const Eigen::MatrixXcd& rhs, const NormParams& norm, ExpSpace sp) {
  const TauFamily L(like.ray(), like.grid(), like.decay(), lhs);
  const TauFamily D(like.ray(), like.grid(), like.decay(), lhs - rhs);
  const double s = exp_norm(L, norm, sp);
  return s > 0.0 ? exp_norm(D, norm, sp) / s : exp_norm(D, norm, sp);
}

}  // namespace

double residual_w_k1(const ProblemSpec& spec, const FixedPointConfig& cfg,
                     const TauFamily& psi, const TauFamily& w, cplx eps) {
  const TauRay& ray = w.ray();
  const MGrid& g = spec.grid;
  const int nm = g.n_points;
  const double k1 = spec.k1, a = std::pow(spec.q, 1.0 / k1);
  const double head = std::pow(a, k1 * (k1 - 1.0) / 2.0);
  Eigen::MatrixXcd lhs(nm, ray.count), rhs(nm, ray.count);
  std::vector<std::pair<GridFunction, const Level*>> kernels;
  std::vector<const LevelTerm*> tt;
  for (const auto& lv : spec.levels)
    for (const auto& t : lv.terms) {
      kernels.push_back({t.C.at(eps).scaled(cfg.zeta_le), &lv});
      tt.push_back(&t);
    }
  for (int j = 0; j < ray.count; ++j) {
    const cplx tau = ray.node(j);
    const int jd = lookup(ray, j, -spec.dD / spec.kappa());
    for (int i = 0; i < nm; ++i) {
      const double m = g.m(i);
      lhs(i, j) = spec.Q.at_im(m) * std::pow(tau, k1) / head * w.values()(i, j);
      rhs(i, j) = std::pow(tau, spec.dD + k1) /
                      std::pow(a, (spec.dD + k1) * (spec.dD + k1 - 1.0) / 2.0) *
                      spec.RD.at_im(m) * w.values()(i, jd) +
                  std::pow(tau, k1) / head * cfg.zeta_psi * psi.values()(i, j);
    }
    for (size_t s = 0; s < tt.size(); ++s) {
      const LevelTerm& t = *tt[s];
      const Level& lv = *kernels[s].second;
      const int js = lookup(ray, j, lv.delta - t.d / k1 - 1.0);
      const auto cv = reference_convolution(kernels[s].first, lv.R, w.values().col(js).data());
      const cplx f = std::pow(eps, t.Delta - t.d) * std::pow(tau, t.d + k1) /
                     std::pow(a, (t.d + k1) * (t.d + k1 - 1.0) / 2.0) * kInvSqrt2Pi;
      for (int i = 0; i < nm; ++i) rhs(i, j) += f * cv[i];
    }
  }
  return rel_family_residual(w, lhs, rhs, k1_norm(spec, cfg), ExpSpace::shifted);
}

double residual_ptype(const PTypeProblem& pb, const FixedPointConfig& cfg,
                      const TauFamily& psi, const TauFamily& w, cplx eps,
                      const NormParams& norm) {
  const TauRay& ray = w.ray();
  const MGrid& g = w.grid();
  const int nm = g.n_points;
  const double k = pb.k, a = std::pow(pb.q, 1.0 / k);
  const double head = std::pow(a, k * (k - 1.0) / 2.0);
  Eigen::MatrixXcd lhs(nm, ray.count), rhs(nm, ray.count);
  for (int j = 0; j < ray.count; ++j) {
    const cplx tau = ray.node(j);
    for (int i = 0; i < nm; ++i) {
      const double m = g.m(i);
      lhs(i, j) = pb.Q.at_im(m) * std::pow(tau, k) / head * w.values()(i, j);
      rhs(i, j) = pb.RD.at_im(m) * std::pow(tau, pb.dD + k) /
                      std::pow(a, (pb.dD + k) * (pb.dD + k - 1.0) / 2.0) * w.values()(i, j) +
                  std::pow(tau, k) / head * cfg.zeta_psi * psi.values()(i, j);
    }
    for (const auto& lv : pb.levels) {
      for (const auto& t : lv.terms) {
        const int js = lookup(ray, j, lv.delta - t.d / k - 1.0);
        const auto cv = reference_convolution(t.C.at(eps).scaled(cfg.zeta_le), lv.R,
                                              w.values().col(js).data());
        const cplx f = std::pow(eps, t.Delta - t.d) * std::pow(tau, t.d + k) /
                       std::pow(a, (t.d + k) * (t.d + k - 1.0) / 2.0) * kInvSqrt2Pi;
        for (int i = 0; i < nm; ++i) rhs(i, j) += f * cv[i];
      }
    }
  }
  return rel_family_residual(w, lhs, rhs, norm, ExpSpace::plain);
}

double residual_w_k2(const ProblemSpec& spec, const FixedPointConfig& cfg,
                     const TauFamily& psi, const TauFamily& w, cplx eps) {
  return residual_ptype(ptype_of(spec, spec.k2), cfg, psi, w, eps, k2_norm(spec, cfg));
}

Eigen::MatrixXcd accelerate(const TauFamily& src, const ProblemSpec& spec,
                            const LaplaceDomain& dom, const std::vector<cplx>& targets,
                            FamilyLaplaceReport* report) {
  for (const auto& T : targets)
    if (!in_laplace_domain(T, dom)) throw DomainError("acceleration target outside the Laplace domain");
  return family_q_laplace(src, ThetaParams{spec.q, spec.kappa()}, targets, report);
}

TauFamily accelerate_onto(const TauFamily& src, double q, double k, const TauRay& target) {
  const TauRay& sr = src.ray();
  const ThetaParams tp{q, k};
  const double h = sr.log_step();
  const double scale = h / laplace_normalizer(q, k);
  const int n = sr.count, nm = src.grid().n_points;
  std::vector<double> colmax(n);
  for (int j = 0; j < n; ++j) colmax[j] = src.values().col(j).cwiseAbs().maxCoeff();
  // Shared lattice: the kernel depends on the node offset only.
  const double off = std::log(target.r_min / sr.r_min) / h;
  const bool lattice = target.L == sr.L && target.q == sr.q &&
                       std::abs(off - std::round(off)) < 1e-9 &&
                       std::abs(fold_angle(target.direction - sr.direction)) < 1e-12;
  const long base = lattice ? std::lround(off) : 0;
  std::vector<cplx> cache;
  long cache_lo = 0;
  if (lattice) {
    cache_lo = -(base + target.count);
    const long hi = n;
    cache.resize(hi - cache_lo + 1);
    for (long s = cache_lo; s <= hi; ++s)
      cache[s - cache_lo] = theta_reciprocal(tp, cplx(std::exp(s * h), 0.0));
  }
  TauFamily out(target, src.grid(), src.decay());
  Eigen::VectorXcd kv(n);
  for (int i = 0; i < target.count; ++i) {
    const cplx T = target.node(i);
    double imax = 0.0;
    for (int j = 0; j < n; ++j) {
      kv[j] = lattice ? cache[(j - i - base) - cache_lo] : theta_reciprocal(tp, sr.node(j) / T);
      imax = std::max(imax, std::abs(kv[j]) * colmax[j]);
    }
    int lo = 0, hi = n - 1;
    while (lo < hi && std::abs(kv[lo]) * colmax[lo] < 1e-18 * imax) ++lo;
    while (hi > lo && std::abs(kv[hi]) * colmax[hi] < 1e-18 * imax) --hi;
    Eigen::VectorXcd col = src.values().middleCols(lo, hi - lo + 1) * kv.segment(lo, hi - lo + 1);
    cplx tail = 0.0;
    for (int j = -1;; --j) {
      const cplx kj = theta_reciprocal(tp, std::polar(sr.r_min * std::exp(j * h), sr.direction) / T);
      tail += kj;
      if (std::abs(kj) * colmax[0] <= 1e-18 * std::max(imax, 1e-300) || j < -100000) break;
    }
    col += src.values().col(0) * tail;
    out.values().col(i) = col * scale;
  }
  (void)nm;
  return out;
}

AccelerationCheck check_acceleration_identity(const TauFamily& w1, const TauFamily& w2,
                                              const ProblemSpec& spec,
                                              const Sector& overlap, int samples) {
  const TauRay& r2 = w2.ray();
  if (std::abs(fold_angle(r2.direction - overlap.bisecting_direction)) > overlap.half_opening ||
      std::abs(fold_angle(w1.ray().direction - r2.direction)) > 1e-12)
    throw DomainError("empty overlap: rays do not lie in the overlap sector");
  std::vector<int> inside;
  for (int j = 0; j < r2.count; ++j)
    if (r2.radius(j) < overlap.radius) inside.push_back(j);
  if (inside.empty()) throw DomainError("empty overlap: no nodes below the sector radius");
  std::vector<int> pick;
  const int ns = std::min<int>(samples, inside.size());
  for (int s = 0; s < ns; ++s) {
    const int idx = ns == 1 ? 0 : static_cast<int>(std::lround(s * (inside.size() - 1.0) / (ns - 1)));
    pick.push_back(inside[idx]);
  }
  // Trend samples beyond the overlap radius.
  std::vector<int> beyond;
  for (double f : {1.5, 2.0, 3.0}) {
    const int j = static_cast<int>(std::lround(std::log(overlap.radius * f / r2.r_min) / r2.log_step()));
    if (j >= 0 && j < r2.count) beyond.push_back(j);
  }
  std::vector<cplx> targets;
  for (int j : pick) targets.push_back(r2.node(j));
  for (int j : beyond) targets.push_back(r2.node(j));
  FamilyLaplaceReport rep;
  const Eigen::MatrixXcd A =
      family_q_laplace(w1, ThetaParams{spec.q, spec.kappa()}, targets, &rep);
  AccelerationCheck out;
  out.upper_tail = rep.upper_tail;
  double wmax = 0.0;
  for (int j : pick) wmax = std::max(wmax, w2.values().col(j).cwiseAbs().maxCoeff());
  for (size_t s = 0; s < targets.size(); ++s) {
    const int j = s < pick.size() ? pick[s] : beyond[s - pick.size()];
    double dmax = 0.0;
    for (int i = 0; i < w2.grid().n_points; ++i) {
      const double d = std::abs(A(i, s) - w2.values()(i, j));
      dmax = std::max(dmax, d);
      if (s < pick.size())
        out.sup_rel_diff = std::max(out.sup_rel_diff, d / (1.0 + std::abs(w2.values()(i, j))));
    }
    if (s < pick.size()) out.sup_scaled_diff = std::max(out.sup_scaled_diff, dmax / wmax);
    out.radii.push_back(r2.radius(j));
    out.diff_by_radius.push_back(wmax > 0.0 ? dmax / wmax : dmax);
  }
  return out;
}

GrowthFit fit_growth(const TauFamily& w, double k, double q, double r_lo, double r_hi) {
  const TauRay& ray = w.ray();
  const MGrid& g = w.grid();
  const double lq = std::log(q);
  std::vector<double> xs, ys;
  for (int j = 0; j < ray.count; ++j) {
    const double r = ray.radius(j);
    if (r < r_lo || r > r_hi) continue;
    double best = 0.0;
    for (int i = 0; i < g.n_points; ++i)
      best = std::max(best, w.decay().weight(g.m(i)) * std::abs(w.values()(i, j)));
    if (!(best > 0.0)) continue;
    const double l = std::log(r);
    xs.push_back(l);
    ys.push_back(std::log(best) - k * l * l / (2.0 * lq));
  }
  GrowthFit f;
  if (xs.size() < 2) return f;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = xs.size();
  for (size_t s = 0; s < xs.size(); ++s) {
    sx += xs[s];
    sy += ys[s];
    sxx += xs[s] * xs[s];
    sxy += xs[s] * ys[s];
  }
  f.nu = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  double c = -std::numeric_limits<double>::infinity();
  for (size_t s = 0; s < xs.size(); ++s) c = std::max(c, ys[s] - f.nu * xs[s]);
  f.C = std::exp(c);
  return f;
}

}  // namespace qsum
