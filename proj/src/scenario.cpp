#include "qsum/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <set>
#include <thread>

namespace qsum {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Runs fn(i) for i = 0..n-1 on up to jobs threads; results are written by index.
template <class Fn>
void parallel_for(int n, int jobs, Fn fn) {
  jobs = std::max(1, std::min(jobs, n));
  if (jobs == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(jobs);
  std::vector<std::thread> pool;
  for (int w = 0; w < jobs; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int i = w; i < n; i += jobs) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

double deg(double d) { return d * kPi / 180.0; }

ProblemSpec example_problem(double A) {
  ProblemSpec s;
  s.q = 2.0;
  s.k1 = 1;
  s.k2 = 2;
  s.D = 3;
  s.dD = 3;
  const double c = 0.3;
  const cplx iA(0.0, A);
  // ((x + iA)^2 - c^2)(x + 1)
  const cplx a0 = iA * iA - c * c, a1 = 2.0 * iA;
  s.Q = Polynomial({a0, a0 + a1, a1 + 1.0, 1.0});
  s.RD = Polynomial({1.0, 1.0});
  s.grid = MGrid{20.0, 401};
  s.decay = Decay{0.5, 2.5};
  s.epsilon0 = 0.3;
  s.s_qr = QRSector{kPi, 0.2, c * c};
  Level l1;
  l1.delta = 1;
  l1.R = Polynomial({1.0});
  l1.terms.push_back(
      {1, 1, 1, CoefficientMap::gaussian(s.grid, s.decay, 0.5, 1.0, 0.0, {1.0, 0.5})});
  Level l2;
  l2.delta = 2;
  l2.R = Polynomial({0.0, 1.0});
  l2.terms.push_back({1, 2, 3, CoefficientMap::gaussian(s.grid, s.decay, 0.5, 1.0, 0.0, {1.0})});
  s.levels = {l1, l2};
  ForcingTerm f;
  f.eps_power = 0;
  f.G = GridFunction::sample(s.grid, s.decay, [&](double m) {
    return cplx(1.0 / std::cosh(m + A) + 1.0 / std::cosh(m));
  });
  f.phi.poles = {{1.0, std::polar(1.0, 2.0 * kPi / 3.0)}, {0.5, std::polar(1.2, 1.5 * kPi)}};
  s.forcing.terms = {f};
  return s;
}

FixedPointConfig picard(const FixedPointConfig& c) {
  FixedPointConfig p = c;
  p.mode = IterationMode::picard;
  return p;
}

}  // namespace

std::vector<double> EpsSampling::moduli() const {
  std::vector<double> r;
  for (int i = 0; i < count; ++i) r.push_back(r0 * std::pow(ratio, -i));
  return r;
}

void EpsSampling::check() const {
  if (!(r0 > 0.0) || !(ratio > 1.0) || count < 1)
    throw DomainError("eps sampling needs r0 > 0, ratio > 1, count >= 1");
}

std::vector<LaplaceDomain> ScenarioConfig::domains() const {
  std::vector<LaplaceDomain> d;
  for (double a : directions) d.push_back(LaplaceDomain{a, grids.laplace_margin});
  return d;
}

double ScenarioConfig::overlap_direction(int p) const {
  const int n = static_cast<int>(covering.sectors.size());
  const Sector& a = covering.sectors[p % n];
  const Sector& b = covering.sectors[(p + 1) % n];
  // Overlap interval [b.lo, a.hi] measured from a's bisector.
  const double hi = a.half_opening;
  const double lo = fold_angle(b.bisecting_direction - a.bisecting_direction) - b.half_opening;
  return fold_angle(a.bisecting_direction + 0.5 * (lo + hi));
}

ScenarioConfig example_scenario(double A) {
  ScenarioConfig cfg;
  cfg.problem = example_problem(A);
  cfg.directions = {0.0, deg(90.0), deg(150.0), deg(240.0)};
  const double half[4] = {70.0, 35.0, 45.0, 60.0};
  cfg.covering.epsilon0 = cfg.problem.epsilon0;
  for (int p = 0; p < 4; ++p)
    cfg.covering.sectors.push_back(Sector{cfg.directions[p], deg(half[p]), cfg.problem.epsilon0});
  cfg.fixed_point.mode = IterationMode::sweep;
  cfg.chained = example_chained(cfg.problem);
  return cfg;
}

ChainedSettings example_chained(const ProblemSpec& main) {
  ChainedSettings c;
  ProblemSpec& b = c.bold;
  b = main;
  const double B = 10.0, cb = 0.3;
  const cplx iB(0.0, B);
  b.Q = Polynomial({iB * iB - cb * cb, 2.0 * iB, 1.0});
  b.RD = Polynomial({1.0});
  b.dD = 2;
  b.D = 3;
  b.s_qr = QRSector{kPi, 0.2, cb * cb};
  Level l1;
  l1.delta = 1;
  l1.R = Polynomial({1.0});
  l1.terms.push_back({1, 1, 1, CoefficientMap::gaussian(b.grid, b.decay, 0.25, 1.0, 0.0, {1.0})});
  Level l2;
  l2.delta = 2;
  l2.R = Polynomial({1.0});
  l2.terms.push_back({1, 2, 3, CoefficientMap::gaussian(b.grid, b.decay, 0.25, 1.0, 0.0, {1.0})});
  b.levels = {l1, l2};
  ForcingTerm f;
  f.eps_power = 0;
  f.G = GridFunction::sample(b.grid, b.decay,
                             [](double m) { return cplx(1.0 / std::cosh(m)); });
  f.phi.monomials = {{0, cplx(1.0)}, {1, cplx(0.5)}};
  b.forcing.terms = {f};
  c.direction = 0.0;
  c.eps = {cplx(0.05), std::polar(0.08, 0.2), std::polar(0.12, -0.2)};
  return c;
}

ValidationReport validate_scenario(const ScenarioConfig& cfg) {
  ValidationReport rep = validate_problem(cfg.problem);
  const int n = static_cast<int>(cfg.covering.sectors.size());
  if (cfg.sectors() != n) rep.add("shape", "one direction per covering sector is required");
  rep.merge(validate_good_covering(cfg.covering));
  if (!(cfg.grids.beta_prime > 0.0 && cfg.grids.beta_prime < cfg.problem.decay.beta))
    rep.add("beta-prime", "0 < beta' < beta violated");
  if (rep.ok()) {
    FamilyParams fp;
    fp.nu = cfg.fixed_point.nu;
    fp.alpha = cfg.fixed_point.alpha;
    fp.kappa = cfg.problem.kappa();
    fp.k2 = cfg.problem.k2;
    fp.q = cfg.problem.q;
    fp.epsilon0 = cfg.covering.epsilon0;
    fp.r_T = cfg.grids.r_T;
    const Sector t_sector{0.0, 0.05, cfg.grids.r_T};
    rep.merge(validate_associated_family(cfg.covering, cfg.domains(), t_sector, fp));
    const TGrid& tg = cfg.grids.tgrid;
    if (tg.t(tg.count - 1) >= cfg.grids.r_T) rep.add("t-range", "t nodes exceed r_T");
    for (int p = 0; p < cfg.sectors(); ++p) {
      const RootBounds rb = check_root_bounds(
          cfg.problem, Sector{cfg.directions[p], cfg.grids.u_half_opening, 1e6}, cfg.grids.rho1);
      if (!rb.admissible())
        rep.add("root-bounds", "P_m roots too close to the sector around direction " +
                                   std::to_string(p));
    }
  }
  if (cfg.chained) {
    for (const auto& v : validate_forcing_problem(cfg.chained->bold).violations)
      rep.add("bold/" + v.clause, v.detail);
    for (const auto& t : cfg.chained->bold.forcing.terms)
      if (!t.phi.poles.empty()) rep.add("bold-forcing", "the bold forcing must be polynomial");
  }
  return rep;
}

std::vector<cplx> eps_on_ray(const EpsSampling& s, double angle) {
  s.check();
  std::vector<cplx> e;
  for (double r : s.moduli()) e.push_back(std::polar(r, angle));
  return e;
}

SectorRun solve_sector(const ScenarioConfig& cfg, int p, const std::vector<cplx>& eps) {
  const auto t0 = Clock::now();
  const ProblemSpec& spec = cfg.problem;
  const GridPolicy& g = cfg.grids;
  const double dir = cfg.directions.at(p);
  const TauRay ray = make_ray(dir, g.ray_rmin, g.k2_rmax, spec.q, g.L);
  const Sector u_sector{dir, g.u_half_opening, 1e6};
  const int n = static_cast<int>(eps.size());
  std::vector<TauFamily> ws(n), ps(n);
  std::vector<int> its(n);
  parallel_for(n, cfg.jobs, [&](int i) {
    ps[i] = psi_k2_family(spec, ray, eps[i]);
    auto r = solve_w_k2(spec, ps[i], cfg.fixed_point, eps[i], u_sector, g.rho1);
    ws[i] = std::move(r.w);
    its[i] = r.iterations;
  });
  SectorRun run;
  run.index = p;
  const LaplaceDomain dom{dir, g.laplace_margin};
  run.f = build_forcing(spec, ps, dom, g.tgrid, g.z, eps, g.beta_prime);
  run.u = assemble_solution(spec, ws, dom, g.tgrid, g.z, eps, g.beta_prime);
  run.max_iterations = its.empty() ? 0 : *std::max_element(its.begin(), its.end());
  run.seconds = seconds_since(t0);
  return run;
}

std::vector<CollocationPoint> seeded_points(const SectorialSolution& u, double max_gamma,
                                            int count, std::uint64_t seed) {
  const int reach = static_cast<int>(std::ceil(max_gamma * u.tgrid.L - 1e-9));
  const int nt = u.tgrid.count - reach;
  if (nt <= 0) throw GridError("t lattice too short for the needed dilations");
  const std::uint64_t nz = u.z.size();
  const std::uint64_t total = static_cast<std::uint64_t>(u.n_eps()) * nt * nz;
  const std::uint64_t want = std::min<std::uint64_t>(count, total);
  std::mt19937_64 rng(seed);
  std::set<std::uint64_t> chosen;
  std::vector<CollocationPoint> pts;
  while (chosen.size() < want) {
    std::uint64_t idx = rng() % total;
    if (!chosen.insert(idx).second) continue;
    CollocationPoint c;
    c.z_index = static_cast<int>(idx % nz);
    idx /= nz;
    c.t_index = static_cast<int>(idx % nt);
    c.eps_index = static_cast<int>(idx / nt);
    pts.push_back(c);
  }
  return pts;
}

namespace {

// Largest dilation exponent read by the (t, z) equation.
double max_gamma(const ProblemSpec& s, double order) {
  double g = std::max(1.0, static_cast<double>(s.dD) / order + 1.0);
  for (const auto& lv : s.levels) g = std::max(g, static_cast<double>(lv.delta));
  return g;
}

}  // namespace

SolveReport solve_single(const ScenarioConfig& cfg, int p, bool uniqueness) {
  const auto t0 = Clock::now();
  const ProblemSpec& spec = cfg.problem;
  const GridPolicy& g = cfg.grids;
  const FixedPointConfig fp = picard(cfg.fixed_point);
  const double dir = cfg.directions.at(p);
  SolveReport rep;
  rep.index = p;
  rep.eps = std::polar(cfg.asymptotics.solve_modulus, dir);
  const TauRay r1 = make_ray(dir, g.ray_rmin, g.k1_rmax, spec.q, g.L);
  const TauFamily psi1 = sample_psi_k1(spec, r1, rep.eps);
  rep.w_k1 = solve_w_k1(spec, psi1, fp, rep.eps);
  rep.residual_k1 = residual_w_k1(spec, fp, psi1, rep.w_k1.w, rep.eps);
  const TauRay r2 = make_ray(dir, g.ray_rmin, g.k2_rmax, spec.q, g.L);
  const TauFamily psi2 = psi_k2_family(spec, r2, rep.eps);
  const Sector u_sector{dir, g.u_half_opening, 1e6};
  rep.w_k2 = solve_w_k2(spec, psi2, fp, rep.eps, u_sector, g.rho1);
  rep.residual_k2 = residual_w_k2(spec, fp, psi2, rep.w_k2.w, rep.eps);
  if (uniqueness) {
    // Second start: the forcing itself, scaled.
    auto gap = [](const FixedPointResult& a, const TauFamily& b, const NormParams& nrm,
                  ExpSpace sp) {
      TauFamily d = b;
      d.values() -= a.w.values();
      return exp_norm(d, nrm, sp) / std::max(a.norm, 1e-300);
    };
    TauFamily s1 = psi1;
    s1.values() *= 0.5;
    rep.uniqueness_gap_k1 = gap(rep.w_k1, solve_w_k1(spec, psi1, fp, rep.eps, &s1).w,
                                k1_norm(spec, fp), ExpSpace::shifted);
    TauFamily s2 = psi2;
    s2.values() *= 0.5;
    rep.uniqueness_gap_k2 =
        gap(rep.w_k2, solve_w_k2(spec, psi2, fp, rep.eps, u_sector, g.rho1, &s2).w,
            k2_norm(spec, fp), ExpSpace::plain);
  }
  rep.acceleration = check_acceleration_identity(rep.w_k1.w, rep.w_k2.w, spec,
                                                 Sector{dir, 0.1, 0.3}, 20);
  const LaplaceDomain dom{dir, g.laplace_margin};
  const std::vector<cplx> eps{rep.eps};
  const auto f = build_forcing(spec, {psi2}, dom, g.tgrid, g.z, eps, g.beta_prime);
  rep.u = assemble_solution(spec, {rep.w_k2.w}, dom, g.tgrid, g.z, eps, g.beta_prime);
  rep.pde = pde_residual(spec, rep.u, f,
                         seeded_points(rep.u, max_gamma(spec, spec.k2), cfg.asymptotics.collocation,
                                       cfg.seed));
  rep.seconds = seconds_since(t0);
  return rep;
}

AsymptoticsReport run_asymptotics(const ScenarioConfig& cfg) {
  const auto t0 = Clock::now();
  const AsymptoticsSettings& as = cfg.asymptotics;
  const int n = cfg.sectors();
  AsymptoticsReport rep;
  std::vector<std::vector<cplx>> ray_eps(n);
  for (int p = 0; p < n; ++p) ray_eps[p] = eps_on_ray(as.cocycle, cfg.overlap_direction(p));
  rep.smallest_eps = as.cocycle.moduli().back();
  const double gmax = max_gamma(cfg.problem, cfg.problem.k2);
  for (int p = 0; p < n; ++p) {
    // Sector p meets pairs p - 1 and p.
    std::vector<cplx> eps = ray_eps[(p + n - 1) % n];
    eps.insert(eps.end(), ray_eps[p].begin(), ray_eps[p].end());
    SectorRun run = solve_sector(cfg, p, eps);
    rep.pde.push_back(pde_residual(cfg.problem, run.u, run.f,
                                   seeded_points(run.u, gmax, as.collocation, cfg.seed + p)));
    rep.cocycle_u.push_back(std::move(run.u));
  }
  for (int p = 0; p < n; ++p) {
    rep.cocycles.push_back(cocycle(rep.cocycle_u[p], rep.cocycle_u[(p + 1) % n], ray_eps[p], p));
    rep.fits.push_back(fit_flatness_order(rep.cocycles.back(), cfg.problem.q, as.flatness_floor));
    rep.envelope_at_smallest.push_back(rep.fits.back().envelope(rep.smallest_eps, cfg.problem.q));
  }
  rep.split = verify_two_level_split(rep.fits, cfg.problem.k1, cfg.problem.k2);
  for (int p = 0; p < n; ++p) {
    SectorRun run = solve_sector(cfg, p, eps_on_ray(as.expansion, cfg.directions[p]));
    rep.expansion_u.push_back(std::move(run.u));
    rep.expansion_f.push_back(std::move(run.f));
  }
  rep.expansion = estimate_expansion(rep.expansion_u, as.M);
  rep.forcing_expansion = estimate_expansion(rep.expansion_f, as.M);
  rep.recursion = verify_formal_recursion(rep.expansion, cfg.problem, rep.forcing_expansion,
                                          cfg.problem.dD);
  std::vector<EpsSamples> samples;
  for (const auto& u : rep.expansion_u) samples.push_back(samples_of(u));
  // Orders up to 4 enter the bound proxy.
  const int top = std::min(as.M, 4);
  rep.gevrey = check_q_gevrey_bound(samples, flatten_values(rep.expansion).topRows(top + 1),
                                    cfg.problem.k1, cfg.problem.q);
  rep.seconds = seconds_since(t0);
  return rep;
}

ChainedReport run_chained(const ScenarioConfig& cfg) {
  if (!cfg.chained) throw DomainError("scenario has no chained section");
  const auto t0 = Clock::now();
  const ChainedSettings& ch = *cfg.chained;
  const ProblemSpec& spec = cfg.problem;
  const GridPolicy& g = cfg.grids;
  const double dir = ch.direction;
  const TauRay r1 = make_ray(dir, g.ray_rmin, ch.k1_rmax, spec.q, g.L);
  const TauRay r2 = make_ray(dir, g.ray_rmin, g.k2_rmax, spec.q, g.L);
  const Sector u_sector{dir, g.u_half_opening, 1e6};
  const int n = static_cast<int>(ch.eps.size());
  ChainedReport rep;
  rep.eps = ch.eps;
  rep.psi_iterations.resize(n);
  rep.psi_residuals.resize(n);
  std::vector<TauFamily> ws(n);
  parallel_for(n, cfg.jobs, [&](int i) {
    const auto psi1 = chained_psi_k1(ch.bold, r1, cfg.fixed_point, ch.eps[i]);
    rep.psi_iterations[i] = psi1.iterations;
    NormParams nrm;
    nrm.k = ch.bold.k1;
    nrm.beta = ch.bold.decay.beta;
    nrm.mu = ch.bold.decay.mu;
    nrm.tilt = cfg.fixed_point.alpha;
    nrm.q = ch.bold.q;
    rep.psi_residuals[i] = residual_ptype(ptype_of(ch.bold, ch.bold.k1), cfg.fixed_point,
                                          sample_psi_k1(ch.bold, r1, ch.eps[i]), psi1.w,
                                          ch.eps[i], nrm);
    const TauFamily psi2 = accelerate_onto(psi1.w, spec.q, spec.kappa(), r2);
    ws[i] = solve_w_k2(spec, psi2, cfg.fixed_point, ch.eps[i], u_sector, g.rho1).w;
  });
  const LaplaceDomain dom{dir, g.laplace_margin};
  rep.u = assemble_solution(spec, ws, dom, g.tgrid, g.z, ch.eps, g.beta_prime);
  const double reach = max_gamma(spec, spec.k2) + max_gamma(ch.bold, ch.bold.k1);
  rep.composed = composed_residual(spec, ch.bold, rep.u,
                                   seeded_points(rep.u, reach, cfg.asymptotics.collocation,
                                                 cfg.seed));
  rep.seconds = seconds_since(t0);
  return rep;
}

}  // namespace qsum
