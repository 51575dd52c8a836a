#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "qsum/asymptotics.hpp"

using namespace qsum;
using qsum::testing::small_spec;

namespace {

CocycleSample synthetic_cocycle(double k, double M, double K, double q, int count = 12) {
  CocycleSample c;
  for (int i = 0; i < count; ++i) {
    const double r = 0.3 * std::pow(1.25, -i);
    const double l = std::log(r);
    c.eps_values.push_back(std::polar(r, 0.4));
    c.diff_norms.push_back(K * std::exp(M * l - k * l * l / (2 * std::log(q))));
    c.scales.push_back(1.0);
  }
  return c;
}

FlatnessFit fit_of(double k_hat) {
  FlatnessFit f;
  f.k_hat = k_hat;
  return f;
}

// Samples of f(eps) = sum_{n <= top} c_n eps^n at one point, c_n = A^n a^{n(n-1)/2},
// a = q^{1/k_true}; returns samples and the exact derivative-form coefficients.
std::pair<EpsSamples, Eigen::MatrixXcd> gevrey_data(double k_true, double q, int M, int top,
                                                     double r0) {
  const double a = std::pow(q, 1.0 / k_true), A = 0.7;
  auto c = [&](int n) { return std::pow(A, n) * std::pow(a, n * (n - 1) / 2.0); };
  EpsSamples s;
  for (int i = 0; i < 12; ++i) s.eps.push_back(std::polar(r0 * std::pow(1.3, -i), 0.3));
  s.values.resize(s.eps.size(), 1);
  for (size_t i = 0; i < s.eps.size(); ++i) {
    cplx v = 0.0;
    for (int n = 0; n <= top; ++n) v += c(n) * std::pow(s.eps[i], n);
    s.values(i, 0) = v;
  }
  Eigen::MatrixXcd h(M + 1, 1);
  double fact = 1.0;
  for (int n = 0; n <= M; ++n) {
    if (n > 0) fact *= n;
    h(n, 0) = fact * c(n);
  }
  return {s, h};
}

// Exact derivative-form expansion of the truncated formal solution
// sum_{n <= M} U_n(eps) (eps t)^n, with the eps-Taylor coefficients of U_n taken
// by a discrete Cauchy integral on the unit circle.
ExpansionEstimate exact_expansion(const ProblemSpec& s, int M, bool forcing) {
  const int K = 64;
  std::vector<FormalSeries> onc;
  for (int k = 0; k < K; ++k) {
    const cplx e = std::polar(1.0, 2.0 * kPi * k / K);
    onc.push_back(forcing ? forcing_coefficients(s, M, e) : formal_coefficients(s, M, e));
  }
  ExpansionEstimate est;
  est.M = M;
  est.tgrid = TGrid{0.01, s.q, 2, 14};
  est.z = {cplx(-0.5), cplx(0.0), cplx(0.8), cplx(0.3, 0.1)};
  est.grid = s.grid;
  est.decay = s.decay;
  est.beta_prime = 0.25;
  const int nm = s.grid.n_points, nt = est.tgrid.count;
  const FourierEvaluator fe(s.grid, est.beta_prime, est.z);
  double fact = 1.0;
  for (int m = 0; m <= M; ++m) {
    if (m > 0) fact *= m;
    Eigen::MatrixXcd P = Eigen::MatrixXcd::Zero(nm, nt);
    for (int n = 0; n <= m; ++n) {
      const int j = m - n;  // eps power taken from U_n
      for (int i = 0; i < nm; ++i) {
        cplx acc = 0.0;
        for (int k = 0; k < K; ++k) acc += onc[k][n][i] * std::polar(1.0, -2.0 * kPi * j * k / K);
        acc /= double(K);
        for (int c = 0; c < nt; ++c) P(i, c) += fact * acc * std::pow(est.tgrid.t(c), n);
      }
    }
    est.profiles.push_back(P);
    est.values.push_back(fe.apply(P));
  }
  return est;
}

}  // namespace

TEST_CASE("flatness fit recovers the order") {
  const double q = 2.0;
  const auto f = fit_flatness_order(synthetic_cocycle(2.0, 1.5, 0.3, q), q);
  CHECK(f.k_hat == doctest::Approx(2.0).epsilon(0.02));
  CHECK(f.M_hat == doctest::Approx(1.5).epsilon(1e-6));
  CHECK(f.r2 > 0.999);
  CHECK(f.envelope(0.05, q) ==
        doctest::Approx(0.3 * std::exp(1.5 * std::log(0.05) - 2.0 * std::pow(std::log(0.05), 2) /
                                                                (2 * std::log(q))))
            .epsilon(1e-6));

  SUBCASE("constant differences have order zero") {
    auto c = synthetic_cocycle(2.0, 0.0, 1.0, q);
    for (auto& d : c.diff_norms) d = 1e-3;
    CHECK(std::abs(fit_flatness_order(c, q).k_hat) <= 1e-10);
  }
  SUBCASE("rescaling the differences leaves the order unchanged") {
    auto c = synthetic_cocycle(1.0, 0.5, 2.0, q);
    auto d = c;
    for (size_t i = 0; i < d.diff_norms.size(); ++i) {
      d.diff_norms[i] *= 37.0;
      d.scales[i] *= 37.0;
    }
    CHECK(fit_flatness_order(d, q).k_hat ==
          doctest::Approx(fit_flatness_order(c, q).k_hat).epsilon(1e-12));
  }
  SUBCASE("round-off samples are dropped") {
    auto c = synthetic_cocycle(2.0, 1.5, 0.3, q, 16);
    for (auto& d : c.diff_norms) d = std::max(d, 1e-14);
    const auto g = fit_flatness_order(c, q, 1e-12);
    CHECK(g.used < 16);
    CHECK(g.k_hat == doctest::Approx(2.0).epsilon(0.02));
    for (auto& d : c.diff_norms) d = 0.0;
    CHECK(fit_flatness_order(c, q).infinite);
    auto few = synthetic_cocycle(2.0, 1.5, 0.3, q, 4);
    CHECK_THROWS_AS(fit_flatness_order(few, q), FitError);
  }
}

TEST_CASE("polynomial recovery in eps") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  const int M = 5, cols = 3;
  Eigen::MatrixXcd a(M + 1, cols);
  for (int i = 0; i <= M; ++i)
    for (int c = 0; c < cols; ++c) a(i, c) = cplx(n(rng), n(rng));
  std::vector<cplx> eps;
  for (int i = 0; i < 14; ++i) eps.push_back(std::polar(0.05 * std::pow(1.2, -i), 0.2 * i));
  Eigen::MatrixXcd Y = Eigen::MatrixXcd::Zero(eps.size(), cols);
  for (size_t i = 0; i < eps.size(); ++i)
    for (int m = 0; m <= M; ++m) Y.row(i) += a.row(m) * std::pow(eps[i], m);
  const auto fit = fit_eps_polynomial(eps, Y, M);
  for (int m = 0; m <= M; ++m)
    for (int c = 0; c < cols; ++c)
      CHECK(std::abs(fit(m, c) - a(m, c)) <= 1e-10 * std::abs(a(m, c)) * std::pow(20.0, m));
  CHECK_THROWS_AS(fit_eps_polynomial({eps.begin(), eps.begin() + 5}, Y.topRows(5), M), FitError);
}

TEST_CASE("q-Gevrey bound proxy") {
  const double q = 2.0;
  SUBCASE("series of the checked level are bounded") {
    const auto [s, h] = gevrey_data(1.0, q, 4, 8, 2e-3);
    const auto g = check_q_gevrey_bound({s}, h, 1.0, q);
    CHECK(g.bounded);
    CHECK(g.eta.size() == 5);
  }
  SUBCASE("coefficients that miss the samples are flagged") {
    auto [s, h] = gevrey_data(1.0, q, 4, 8, 2e-3);
    h(0, 0) += 1e-6;
    CHECK_FALSE(check_q_gevrey_bound({s}, h, 1.0, q).bounded);
  }
  SUBCASE("the proxy grows with the assumed order") {
    const auto [s, h] = gevrey_data(1.0, q, 4, 8, 2e-3);
    double prev = 0.0;
    for (double k : {0.5, 1.0, 2.0, 4.0}) {
      const double r = check_q_gevrey_bound({s}, h, k, q).max_root;
      CHECK(r >= prev);
      prev = r;
    }
  }
}

TEST_CASE("formal recursion of the expansion coefficients") {
  // The level products are formed in z-space, so the m-grid must resolve the
  // convolution tails.
  const ProblemSpec s = small_spec(10.0, MGrid{20.0, 401});
  const int M = 5;
  ExpansionEstimate est = exact_expansion(s, M, false);
  const ExpansionEstimate f = exact_expansion(s, M, true);
  const auto base = verify_formal_recursion(est, s, f);
  REQUIRE(base.per_order.size() == M + 1);
  for (double r : base.per_order) CHECK(r <= 1e-10);

  est.profiles[3] *= 1.01;
  est.values[3] *= 1.01;
  const auto bumped = verify_formal_recursion(est, s, f);
  CHECK(bumped.per_order[3] > 100.0 * base.per_order[3]);
  CHECK(bumped.per_order[3] > 1e-4);
  CHECK(bumped.max_rel > base.max_rel);

  const auto limited = verify_formal_recursion(est, s, f, 2);
  CHECK(limited.max_rel <= 1e-10);

  ExpansionEstimate short_est = est;
  short_est.M = 3;
  CHECK_THROWS_AS(verify_formal_recursion(short_est, s, f), DomainError);
}

TEST_CASE("two-level split") {
  SUBCASE("clear clusters") {
    const auto s = verify_two_level_split({fit_of(1.05), fit_of(1.9), fit_of(0.97), fit_of(2.1)}, 1, 2);
    CHECK(s.I1 == std::vector<int>{0, 2});
    CHECK(s.I2 == std::vector<int>{1, 3});
    CHECK(s.both_nonempty);
    for (bool f : s.flagged) CHECK_FALSE(f);
  }
  SUBCASE("a single regime leaves one set empty") {
    const auto s = verify_two_level_split({fit_of(1.9), fit_of(2.05)}, 1, 2);
    CHECK(s.I1.empty());
    CHECK_FALSE(s.both_nonempty);
  }
  SUBCASE("ambiguous and infinite orders are flagged") {
    FlatnessFit inf;
    inf.infinite = true;
    const auto s = verify_two_level_split({fit_of(std::sqrt(2.0)), inf, fit_of(1.0)}, 1, 2);
    CHECK(s.flagged[0]);
    CHECK(s.flagged[1]);
    CHECK_FALSE(s.flagged[2]);
  }
}

TEST_CASE("cocycle of two sampled solutions") {
  SectorialSolution a;
  a.tgrid = TGrid{0.01, 2.0, 2, 4};
  a.z = {cplx(0.0), cplx(1.0)};
  a.eps = {cplx(0.1), cplx(0.05)};
  a.grid = MGrid{1.0, 3};
  for (int e = 0; e < 2; ++e) {
    a.profiles.push_back(Eigen::MatrixXcd::Zero(3, 4));
    a.values.push_back(Eigen::MatrixXcd::Constant(2, 4, cplx(1.0 + e)));
  }
  SectorialSolution b = a;
  std::swap(b.eps[0], b.eps[1]);
  std::swap(b.values[0], b.values[1]);
  b.values[0](1, 2) += cplx(0.0, 3e-3);  // eps = 0.05
  const auto c = cocycle(a, b, {cplx(0.1), cplx(0.05)}, 2);
  CHECK(c.pair_index == 2);
  CHECK(c.diff_norms[0] == 0.0);
  CHECK(c.diff_norms[1] == doctest::Approx(3e-3));
  CHECK(c.scales[1] == doctest::Approx(2.0));
  CHECK_THROWS_AS(cocycle(a, b, {cplx(0.2)}), ShapeError);
}
