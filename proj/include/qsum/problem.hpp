#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qsum/geometry.hpp"
#include "qsum/mspace.hpp"
#include "qsum/qkernels.hpp"

namespace qsum {

// C(m, eps) = p(eps) base(m) with p a polynomial in eps.
struct CoefficientMap {
  std::string kind = "table";
  std::vector<cplx> eps_poly{1.0};
  GridFunction base;

  cplx poly(cplx eps) const;
  GridFunction at(cplx eps) const;

  static CoefficientMap gaussian(const MGrid& g, const Decay& d, cplx amplitude,
                                 double width, double center,
                                 std::vector<cplx> eps_poly);
  // amplitude sech(rate m) / (1 + (m/scale)^2)^power.
  static CoefficientMap rational_decay(const MGrid& g, const Decay& d, cplx amplitude,
                                       double scale, double power, double rate,
                                       std::vector<cplx> eps_poly);
  static CoefficientMap table(GridFunction base, std::vector<cplx> eps_poly);
};

struct LevelTerm {
  int lambda_id = 0;
  int d = 1;
  int Delta = 1;
  CoefficientMap C;
};

struct Level {
  int delta = 1;
  Polynomial R;
  std::vector<LevelTerm> terms;
};

// Borel-plane profile phi(tau) = sum_i b_i/(1 - tau/a_i) + sum_j c_j tau^{n_j}.
struct TauProfile {
  struct Pole {
    cplx weight;
    cplx location;
  };
  struct Monomial {
    int power;
    cplx coefficient;
  };
  std::vector<Pole> poles;
  std::vector<Monomial> monomials;

  cplx operator()(cplx tau) const;
  cplx taylor(int n) const;
};

// psi_{k1}(tau, m, eps) = sum_terms eps^p G(m) phi(tau): the order-k1 Borel
// image of the formal forcing.
struct ForcingTerm {
  int eps_power = 0;
  GridFunction G;
  TauProfile phi;
};

struct Forcing {
  std::vector<ForcingTerm> terms;
  bool empty() const { return terms.empty(); }
  // F_n(m, eps) for the Borel order k1.
  GridFunction coefficient(int n, cplx eps, double q, double k1) const;
};

// {z : |z| >= radius, |arg z - direction| <= half_opening}.
struct QRSector {
  double direction = kPi;
  double half_opening = 0.1;
  double radius = 0.01;
  bool contains(cplx z) const;
};

struct ProblemSpec {
  double q = 2.0;
  int k1 = 1;
  int k2 = 2;
  int D = 3;
  int dD = 3;
  Polynomial Q;
  Polynomial RD;
  std::vector<Level> levels;  // l = 1..D-1
  MGrid grid;
  Decay decay;
  double epsilon0 = 0.5;
  QRSector s_qr;
  Forcing forcing;

  double kappa() const { return kappa_of(k1, k2); }
  // Largest delay max(d_D, max d_{lambda,l}).
  int max_delay() const;
};

ValidationReport validate_problem(const ProblemSpec& spec);
// The same hypotheses with k1 in place of k2, for the problem whose formal
// solution is the forcing of the chained scenario.
ValidationReport validate_forcing_problem(const ProblemSpec& spec);

// Coefficients U_0..U_N of the formal solution in T. Without an initial
// segment the recursion runs from n = 0 with negative indices read as 0.
FormalSeries formal_coefficients(const ProblemSpec& spec, int N, cplx eps,
                                 const std::vector<GridFunction>* initial = nullptr);
// Coefficients of Q sigma_q U = T^{d_D} sigma_q^{d_D/order+1} R_D U + level terms
// + sigma_q F, i.e. the main recursion with k2 replaced by the given order.
FormalSeries delay_recursion(const ProblemSpec& spec, double order, const FormalSeries& F,
                             int N, cplx eps,
                             const std::vector<GridFunction>* initial = nullptr);
// F_0..F_N of the forcing.
FormalSeries forcing_coefficients(const ProblemSpec& spec, int N, cplx eps);

// Roots of P_m(tau) = Q(im)/a^{k(k-1)/2} - R_D(im) tau^{d_D}/a^{(d_D+k)(d_D+k-1)/2},
// a = q^{1/k}, by the closed form.
std::vector<cplx> pm_roots(const Polynomial& Q, const Polynomial& RD, int dD,
                           double q, double k, double m);
std::vector<cplx> pm_roots(const ProblemSpec& spec, double m);
cplx pm_value(const Polynomial& Q, const Polynomial& RD, int dD, double q, double k,
              double m, cplx tau);

struct RootBounds {
  double M1_hat = 0.0;
  double M2_hat = 0.0;
  int l0 = 0;
  double CP_hat = 0.0;
  bool admissible() const { return M1_hat > 0.01 && M2_hat > 0.0 && CP_hat > 0.0; }
};

// Sampled infima over tau in the sector and the closed disc of radius rho.
RootBounds check_root_bounds(const Polynomial& Q, const Polynomial& RD, int dD, double q,
                             double k, const MGrid& grid, double r_qr,
                             const Sector& sector, double rho, int density = 1);
RootBounds check_root_bounds(const ProblemSpec& spec, const Sector& sector, double rho,
                             int density = 1);

// Spec with C scaled by zeta_le and the forcing scaled by zeta_psi.
ProblemSpec effective(const ProblemSpec& spec, double zeta_le, double zeta_psi);

}  // namespace qsum
