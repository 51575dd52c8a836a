#include "doctest.h"
#include "fixtures.hpp"
#include "qsum/assembly.hpp"

using namespace qsum;
using qsum::testing::max_abs;
using qsum::testing::rel_diff;
using qsum::testing::small_spec;

namespace {

bool has_clause(const ValidationReport& r, const std::string& clause) {
  for (const auto& v : r.violations)
    if (v.clause == clause) return true;
  return false;
}

// Largest relative mismatch of the T^n coefficients of
// Q sigma_q U = T^{d_D} sigma_q^{d_D/k2+1} R_D U + sum eps^{Delta-d} T^d sigma_q^{delta}
// (C *^R U)/sqrt(2 pi) + sigma_q F, with an independent convolution.
double coefficient_mismatch(const ProblemSpec& s, const FormalSeries& U, const FormalSeries& F,
                            cplx eps) {
  const MGrid& g = s.grid;
  double worst = 0.0;
  for (int n = 0; n < U.size(); ++n) {
    std::vector<cplx> lhs(g.n_points), rhs(g.n_points);
    double scale = 0.0;
    for (int i = 0; i < g.n_points; ++i) {
      lhs[i] = s.Q.at_im(g.m(i)) * std::pow(s.q, n) * U[n][i];
      rhs[i] = std::pow(s.q, n) * F[n][i];
      if (n >= s.dD)
        rhs[i] += std::pow(s.q, (double(s.dD) / s.k2 + 1.0) * (n - s.dD)) *
                  s.RD.at_im(g.m(i)) * U[n - s.dD][i];
    }
    for (const auto& lv : s.levels)
      for (const auto& t : lv.terms) {
        if (n < t.d) continue;
        const auto cv = reference_convolution(t.C.at(eps), lv.R, U[n - t.d].values().data());
        const cplx f = std::pow(eps, t.Delta - t.d) * std::pow(s.q, double(lv.delta) * (n - t.d)) *
                       kInvSqrt2Pi;
        for (int i = 0; i < g.n_points; ++i) rhs[i] += f * cv[i];
      }
    for (int i = 0; i < g.n_points; ++i) scale = std::max(scale, std::abs(lhs[i]));
    for (int i = 0; i < g.n_points; ++i)
      worst = std::max(worst, std::abs(lhs[i] - rhs[i]) / scale);
  }
  return worst;
}

TauFamily scaled_family(const TauFamily& f, cplx c) {
  return TauFamily(f.ray(), f.grid(), f.decay(), f.values() * c);
}

TauFamily zero_like(const TauFamily& f) {
  return TauFamily(f.ray(), f.grid(), f.decay(),
                   Eigen::MatrixXcd::Zero(f.values().rows(), f.values().cols()));
}

struct Solved {
  TauFamily psi1, psi2;
  FixedPointResult w1, w2;
};

Solved solve_both(const ProblemSpec& s, cplx eps, const FixedPointConfig& cfg = {}) {
  Solved r;
  r.psi1 = sample_psi_k1(s, make_ray(0.0, 1e-6, 1e3, s.q, 16), eps);
  r.w1 = solve_w_k1(s, r.psi1, cfg, eps);
  r.psi2 = psi_k2_family(s, make_ray(0.0, 1e-6, 100.0, s.q, 16), eps);
  r.w2 = solve_w_k2(s, r.psi2, cfg, eps, Sector{0.0, 0.2, 1e6}, 1.0);
  return r;
}

}  // namespace

TEST_CASE("problem validation") {
  const ProblemSpec s = small_spec();
  CHECK(validate_problem(s).ok());

  SUBCASE("Delta below d is flagged") {
    ProblemSpec b = s;
    b.levels[0].terms[0].Delta = 0;
    CHECK(has_clause(validate_problem(b), "e800"));
  }
  SUBCASE("a zero of Q(im) on the grid is flagged") {
    ProblemSpec b = s;
    b.Q = Polynomial({0.0, 1.0, 0.5, 0.25});
    CHECK(has_clause(validate_problem(b), "e804"));
  }
  SUBCASE("the unamended example vanishes at m = 0") {
    // Q = (x + iA)^2 x and R_D = x are zero at m = 0, which lies on every symmetric grid.
    ProblemSpec b = s;
    const cplx iA(0.0, 10.0);
    b.Q = Polynomial({0.0, iA * iA, 2.0 * iA, 1.0});
    b.RD = Polynomial({0.0, 1.0});
    CHECK(has_clause(validate_problem(b), "e804"));
  }
  SUBCASE("levels must increase") {
    ProblemSpec b = s;
    b.levels[1].delta = 1;
    CHECK(has_clause(validate_problem(b), "e796"));
  }
}

TEST_CASE("formal coefficients") {
  const ProblemSpec s = small_spec();
  const cplx eps(0.04, 0.01);

  SUBCASE("without level coefficients the head is F_n / Q") {
    ProblemSpec b = s;
    for (auto& lv : b.levels)
      for (auto& t : lv.terms) t.C = CoefficientMap::table(t.C.base.scaled(0.0), {1.0});
    const auto U = formal_coefficients(b, 6, eps);
    const auto F = forcing_coefficients(b, 6, eps);
    for (int n = 0; n < b.dD; ++n)
      for (int i = 0; i < b.grid.n_points; ++i) {
        const cplx expect = F[n][i] / b.Q.at_im(b.grid.m(i));
        CHECK(std::abs(U[n][i] - expect) <= 1e-15 * std::abs(expect));
      }
  }
  SUBCASE("coefficients match the equation order by order") {
    const auto U = formal_coefficients(s, 8, eps);
    CHECK(coefficient_mismatch(s, U, forcing_coefficients(s, 8, eps), eps) <= 1e-10);
  }
  SUBCASE("level terms scale with eps^{Delta - d}") {
    // A constant Borel profile leaves F_1 = 0, so U_1 is the level term alone.
    ProblemSpec b = s;
    b.levels[0].terms[0].Delta = 3;
    b.levels[0].terms[0].C.eps_poly = {1.0};
    b.forcing.terms[0].phi.poles.clear();
    b.forcing.terms[0].phi.monomials = {{0, cplx(1.0)}};
    ProblemSpec off = b;
    off.levels[0].terms[0].C = CoefficientMap::table(b.levels[0].terms[0].C.base.scaled(0.0), {1.0});
    const cplx e(0.05, 0.02);
    const auto U1 = formal_coefficients(b, 1, e), U2 = formal_coefficients(b, 1, 2.0 * e);
    const auto U0 = formal_coefficients(off, 1, e);
    for (int i = 0; i < b.grid.n_points; ++i) {
      const cplx d1 = U1[1][i] - U0[1][i], d2 = U2[1][i] - U0[1][i];
      CHECK(std::abs(d2 - 4.0 * d1) <= 1e-12 * std::abs(d2));
    }
  }
}

TEST_CASE("P_m roots") {
  const ProblemSpec s = small_spec();
  const double a = std::pow(s.q, 1.0 / s.k2);
  for (double m : {-7.3, 0.0, 2.5}) {
    const auto r = pm_roots(s, m);
    REQUIRE(static_cast<int>(r.size()) == s.dD);
    for (int l = 0; l < s.dD; ++l) {
      const double gap = fold_angle(std::arg(r[(l + 1) % s.dD]) - std::arg(r[l]));
      CHECK(gap == doctest::Approx(2.0 * kPi / s.dD).epsilon(1e-12));
    }
    const double k = s.k2, d = s.dD;
    const double expo = ((d + k) * (d + k - 1) - k * (k - 1)) / 2.0;
    const double mod =
        std::pow(std::abs(s.Q.at_im(m) / s.RD.at_im(m)) * std::pow(a, expo), 1.0 / d);
    for (const auto& x : r) CHECK(std::abs(x) == doctest::Approx(mod).epsilon(1e-12));

    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd(0.0, 3.0);
    for (int t = 0; t < 10; ++t) {
      const cplx tau(nd(rng), nd(rng));
      cplx prod = -s.RD.at_im(m) / std::pow(a, (d + k) * (d + k - 1) / 2.0);
      for (const auto& x : r) prod *= tau - x;
      const cplx P = pm_value(s.Q, s.RD, s.dD, s.q, k, m, tau);
      CHECK(std::abs(prod - P) <= 1e-10 * std::max(1.0, std::abs(P)));
    }
  }
}

TEST_CASE("root bounds") {
  const ProblemSpec s = small_spec();
  const auto good = check_root_bounds(s, Sector{0.0, 0.2, 1e6}, 1.0);
  CHECK(good.M1_hat > 0.01);
  CHECK(good.admissible());
  // Q/R_D is close to -(m + A)^2, so one root ray sits near pi/3.
  const auto bad = check_root_bounds(s, Sector{kPi / 3, 0.2, 1e6}, 1.0);
  CHECK(bad.M1_hat < 0.01);
  CHECK_FALSE(bad.admissible());
  const auto fine = check_root_bounds(s, Sector{0.0, 0.2, 1e6}, 1.0, 2);
  CHECK(std::abs(fine.CP_hat - good.CP_hat) <= 0.1 * good.CP_hat);
}

TEST_CASE("dilations on the ray agree with formal dilations") {
  const TauRay ray{0.3, 1e-3, 2.0, 16, 200};
  const std::vector<cplx> a{cplx(1.0), cplx(-0.5, 2.0), cplx(0.25, 0.1)};
  auto poly = [&](cplx t) { return a[0] + a[1] * t + a[2] * t * t; };
  for (double gamma : {-1.5, -0.25, 0.5}) {
    const int sh = ray.dilation_shift(gamma);
    for (int j = std::max(0, -sh); j < ray.count && j + sh < ray.count; j += 7) {
      cplx formal = 0.0;
      for (int n = 0; n < 3; ++n) formal += a[n] * std::pow(std::pow(ray.q, gamma), n) * std::pow(ray.node(j), n);
      const cplx resampled = poly(ray.node(j + sh));
      CHECK(std::abs(formal - resampled) <= 1e-12 * std::abs(formal));
    }
  }
}

TEST_CASE("reference convolution agrees with the convolution operator") {
  const ProblemSpec s = small_spec();
  const auto& C = s.levels[1].terms[0].C.base;
  const auto h = GridFunction::sample(s.grid, s.decay, [](double m) { return cplx(std::exp(-m * m / 3), 0.2 * m / std::cosh(m)); });
  const auto fast = ConvolutionOperator(C, s.levels[1].R).apply(h).values();
  const auto slow = reference_convolution(C, s.levels[1].R, h.values().data());
  double worst = 0.0, scale = 0.0;
  for (size_t i = 0; i < fast.size(); ++i) {
    worst = std::max(worst, std::abs(fast[i] - slow[i]));
    scale = std::max(scale, std::abs(slow[i]));
  }
  CHECK(worst <= 1e-13 * scale);
}

TEST_CASE("fixed points of both Borel-plane equations") {
  const ProblemSpec s = small_spec();
  const cplx eps(0.05);
  const FixedPointConfig cfg;
  const Solved r = solve_both(s, eps, cfg);

  SUBCASE("contraction and residuals") {
    CHECK(r.w1.contraction_ratio <= 0.5);
    CHECK(r.w2.contraction_ratio <= 0.5);
    CHECK(residual_w_k1(s, cfg, r.psi1, r.w1.w, eps) <= 1e-8);
    CHECK(residual_w_k2(s, cfg, r.psi2, r.w2.w, eps) <= 1e-8);
    CHECK(r.w1.within_ball);
    CHECK(r.w2.within_ball);
  }
  SUBCASE("a second starting iterate reaches the same fixed point") {
    const TauFamily start1 = scaled_family(r.psi1, 0.5), start2 = scaled_family(r.psi2, 0.5);
    const auto v1 = solve_w_k1(s, r.psi1, cfg, eps, &start1);
    const auto v2 = solve_w_k2(s, r.psi2, cfg, eps, Sector{0.0, 0.2, 1e6}, 1.0, &start2);
    const TauFamily d1(r.w1.w.ray(), s.grid, s.decay, v1.w.values() - r.w1.w.values());
    const TauFamily d2(r.w2.w.ray(), s.grid, s.decay, v2.w.values() - r.w2.w.values());
    CHECK(exp_norm(d1, k1_norm(s, cfg), ExpSpace::shifted) <= 2 * cfg.tol * r.w1.norm);
    CHECK(exp_norm(d2, k2_norm(s, cfg), ExpSpace::plain) <= 2 * cfg.tol * r.w2.norm);
  }
  SUBCASE("zero forcing gives the zero fixed point") {
    const auto z1 = solve_w_k1(s, zero_like(r.psi1), cfg, eps);
    const auto z2 = solve_w_k2(s, zero_like(r.psi2), cfg, eps, Sector{0.0, 0.2, 1e6}, 1.0);
    CHECK(z1.iterations <= 1);
    CHECK(max_abs(z1.w.values()) == 0.0);
    CHECK(max_abs(z2.w.values()) == 0.0);
  }
  SUBCASE("doubling the forcing doubles the fixed point") {
    const auto d1 = solve_w_k1(s, scaled_family(r.psi1, 2.0), cfg, eps);
    CHECK(rel_diff(d1.w.values(), 2.0 * r.w1.w.values()) <= 1e-10);
  }
  SUBCASE("a common factor on Q, R_D, R_l and the forcing cancels") {
    const cplx c(3.0, -1.5);
    ProblemSpec b = qsum::testing::with_forcing_scaled(s, c);
    b.Q = s.Q.scaled(c);
    b.RD = s.RD.scaled(c);
    for (auto& lv : b.levels) lv.R = lv.R.scaled(c);
    const Solved rb = solve_both(b, eps, cfg);
    CHECK(rel_diff(rb.w1.w.values(), r.w1.w.values()) <= 1e-10);
    CHECK(rel_diff(rb.w2.w.values(), r.w2.w.values()) <= 1e-10);
  }
  SUBCASE("acceleration of w_k1 coincides with w_k2") {
    const auto ac = check_acceleration_identity(r.w1.w, r.w2.w, s, Sector{0.0, 0.1, 0.3});
    CHECK(ac.sup_rel_diff <= 1e-4);
    const auto z = check_acceleration_identity(zero_like(r.w1.w), zero_like(r.w2.w), s,
                                               Sector{0.0, 0.1, 0.3});
    CHECK(z.sup_rel_diff == 0.0);
  }
  SUBCASE("growth of w_k2 is stable under ray refinement") {
    const auto g = fit_growth(r.w2.w, s.k2, s.q, 1e-3, 50.0);
    const auto psi = psi_k2_family(s, make_ray(0.0, 1e-6, 100.0, s.q, 32), eps);
    const auto w = solve_w_k2(s, psi, cfg, eps, Sector{0.0, 0.2, 1e6}, 1.0);
    const auto gf = fit_growth(w.w, s.k2, s.q, 1e-3, 50.0);
    CHECK(std::isfinite(g.C));
    NormParams n = k2_norm(s, cfg);
    n.tilt = g.nu;
    const double e1 = exp_norm(r.w2.w, n, ExpSpace::plain), e2 = exp_norm(w.w, n, ExpSpace::plain);
    CHECK(std::abs(e1 - e2) <= 0.1 * e1);
    CHECK(std::abs(gf.nu - g.nu) <= 0.1 * std::max(1.0, std::abs(g.nu)));
  }
}

TEST_CASE("oversized coefficients break the contraction loudly") {
  const ProblemSpec s = small_spec();
  FixedPointConfig cfg;
  cfg.zeta_le = 200.0;
  const auto psi = sample_psi_k1(s, make_ray(0.0, 1e-6, 1e3, s.q, 16), 0.05);
  CHECK_THROWS_AS(solve_w_k1(s, psi, cfg, 0.05), Error);
}

TEST_CASE("inadmissible directions are refused") {
  const ProblemSpec s = small_spec();
  const auto psi = psi_k2_family(s, make_ray(kPi / 3, 1e-6, 100.0, s.q, 16), 0.05);
  CHECK_THROWS_AS(solve_w_k2(s, psi, FixedPointConfig{}, 0.05, Sector{kPi / 3, 0.2, 1e6}, 1.0),
                  DomainError);
}

TEST_CASE("acceleration inverts the order-kappa Borel transform on polynomials") {
  const ProblemSpec s = small_spec();
  const double kap = s.kappa(), a = std::pow(s.q, 1.0 / kap);
  const TauRay ray = make_ray(0.0, 1e-8, 1e4, s.q, 16);
  auto c = [&](int n, double m) { return cplx(1.0 / std::cosh(m)) * std::pow(cplx(0.5, 0.3), n); };
  TauFamily src(ray, s.grid, s.decay);
  for (int j = 0; j < ray.count; ++j)
    for (int i = 0; i < s.grid.n_points; ++i) {
      cplx v = 0.0;
      for (int n = 0; n <= 2; ++n)
        v += c(n, s.grid.m(i)) * std::pow(ray.node(j), n) / std::pow(a, n * (n - 1) / 2.0);
      src.values()(i, j) = v;
    }
  const std::vector<cplx> targets{cplx(0.2, 0.05), cplx(0.5, -0.1), cplx(1.0, 0.2)};
  const LaplaceDomain dom{0.0, 0.05};
  const auto out = accelerate(src, s, dom, targets);
  for (size_t t = 0; t < targets.size(); ++t)
    for (int i = 0; i < s.grid.n_points; i += 5) {
      cplx expect = 0.0;
      for (int n = 0; n <= 2; ++n) expect += c(n, s.grid.m(i)) * std::pow(targets[t], n);
      CHECK(std::abs(out(i, t) - expect) <= 1e-5 * std::abs(expect));
    }
  const auto zero = accelerate(zero_like(src), s, dom, targets);
  CHECK(max_abs(zero) == 0.0);
}

TEST_CASE("forcing and solution on the (t, z) grid") {
  ProblemSpec s = small_spec();
  const cplx eps(0.05, 0.01);
  const TGrid tg{0.01, 2.0, 2, 8};
  const std::vector<cplx> z{cplx(-0.5), cplx(0.0), cplx(0.7), cplx(0.2, 0.1)};
  const LaplaceDomain dom{0.0, 0.05};
  const TauRay ray = make_ray(0.0, 1e-6, 100.0, s.q, 16);

  SUBCASE("a finite forcing is the sum of its terms") {
    s.forcing.terms[0].phi.poles.clear();
    s.forcing.terms[0].phi.monomials = {{0, cplx(1.0)}, {1, cplx(0.5)}, {2, cplx(0.25, 0.1)}};
    const auto f = build_forcing(s, {psi_k2_family(s, ray, eps)}, dom, tg, z, {eps}, 0.25);
    const auto F = forcing_coefficients(s, 2, eps);
    double worst = 0.0;
    for (int j = 0; j < tg.count; ++j)
      for (size_t iz = 0; iz < z.size(); ++iz) {
        cplx expect = 0.0;
        for (int n = 0; n <= 2; ++n)
          expect += inverse_fourier(F[n], {z[iz]})[0] * std::pow(eps * tg.t(j), n);
        worst = std::max(worst, std::abs(f.values[0](iz, j) - expect) / std::abs(expect));
      }
    CHECK(worst <= 1e-5);
  }
  SUBCASE("zero Borel data gives the zero solution and assembly is linear") {
    const auto psi = psi_k2_family(s, ray, eps);
    const auto w = solve_w_k2(s, psi, FixedPointConfig{}, eps, Sector{0.0, 0.2, 1e6}, 1.0);
    const auto u0 = assemble_solution(s, {zero_like(w.w)}, dom, tg, z, {eps}, 0.25);
    CHECK(max_abs(u0.values[0]) == 0.0);

    ProblemSpec s2 = s;
    s2.forcing.terms[0].phi.poles = {{0.3, std::polar(2.0, 0.5 * kPi)}};
    const auto psi2 = psi_k2_family(s2, ray, eps);
    ProblemSpec sum = s;
    sum.forcing.terms.push_back(s2.forcing.terms[0]);
    const auto psis = psi_k2_family(sum, ray, eps);
    const FixedPointConfig cfg;
    const Sector sec{0.0, 0.2, 1e6};
    const auto wa = solve_w_k2(s, psi, cfg, eps, sec, 1.0);
    const auto wb = solve_w_k2(s, psi2, cfg, eps, sec, 1.0);
    const auto ws = solve_w_k2(s, psis, cfg, eps, sec, 1.0);
    const auto ua = assemble_solution(s, {wa.w}, dom, tg, z, {eps}, 0.25);
    const auto ub = assemble_solution(s, {wb.w}, dom, tg, z, {eps}, 0.25);
    const auto us = assemble_solution(s, {ws.w}, dom, tg, z, {eps}, 0.25);
    CHECK(rel_diff(us.values[0], ua.values[0] + ub.values[0]) <= 1e-8);
  }
}

TEST_CASE("chained forcing coefficients") {
  ProblemSpec bold = small_spec();
  bold.Q = Polynomial({cplx(-100.09), cplx(0.0, 20.0), 1.0});
  bold.RD = Polynomial({1.0});
  bold.dD = 2;
  bold.forcing.terms[0].phi.poles.clear();
  bold.forcing.terms[0].phi.monomials = {{0, cplx(1.0)}, {1, cplx(0.5)}};
  const cplx eps(0.05);
  const int N = 6;
  const auto bF = forcing_coefficients(bold, N, eps);
  const auto F = chained_forcing_coefficients(bold, bF, N, eps);
  for (int i = 0; i < bold.grid.n_points; i += 10) {
    const cplx expect = bF[0][i] / bold.Q.at_im(bold.grid.m(i));
    CHECK(std::abs(F[0][i] - expect) <= 1e-15 * std::abs(expect));
  }

  SUBCASE("q-geometric growth from the R_D term alone") {
    ProblemSpec b = bold;
    for (auto& lv : b.levels)
      for (auto& t : lv.terms) t.C = CoefficientMap::table(t.C.base.scaled(0.0), {1.0});
    const int M = 24;
    const auto G = chained_forcing_coefficients(b, forcing_coefficients(b, M, eps), M, eps);
    // Along n = n0 + j d_D the ratio of successive terms is
    // (R_D/Q) q^{(d_D/k1 + 1)(n - d_D) - n}; its log grows linearly in n.
    const int i = b.grid.center();
    std::vector<double> x, y;
    for (int n = 2 * b.dD; n <= M; n += b.dD) {
      x.push_back(n);
      y.push_back(std::log(std::abs(G[n][i] / G[n - b.dD][i])));
    }
    const double slope = (y.back() - y.front()) / (x.back() - x.front());
    const double predicted = (double(b.dD) / b.k1 + 1.0 - 1.0) * std::log(b.q);
    CHECK(std::abs(slope - predicted) <= 0.05 * predicted);
  }
}
