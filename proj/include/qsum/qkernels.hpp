#pragma once

#include <functional>
#include <vector>

#include "qsum/mspace.hpp"

namespace qsum {

struct ThetaParams {
  double q = 2.0;
  double k = 1.0;
  double tail_tol = 1e-17;
  void check() const;
  double base() const { return std::pow(q, 1.0 / k); }
};

struct ThetaSum {
  cplx value;
  int terms = 0;  // cutoff N of the symmetric sum over [-N, N]
  bool converged = false;
  double abs_sum = 0.0;  // sum of term moduli, for cancellation checks
};

// Symmetric partial sum of sum_n q^{-n(n-1)/(2k)} x^n with a relative tail stop.
ThetaSum theta_partial_sum(const ThetaParams& p, cplx x);
// Throws DomainError at x = 0 and DivergenceError past the 500-term cap.
cplx theta(const ThetaParams& p, cplx x);

// 1/Theta(x) through the functional equation: x = q^{j/k} y with |y| near 1,
// Theta(x) = q^{j(j+1)/(2k)} y^j Theta(y). Underflows to 0 for huge |x| and
// throws DomainError when Theta(y) cancels to below 1e-12 of its term mass.
cplx theta_reciprocal(const ThetaParams& p, cplx x);

double pi_q_k(double q, double k);
// int_0^inf du/(u Theta(u)) = log(q)/k; the q-Laplace transforms divide by
// this value so that they invert formal_q_borel on monomials.
double laplace_normalizer(double q, double k);

class FormalSeries {
 public:
  FormalSeries() = default;
  explicit FormalSeries(std::vector<GridFunction> coefficients);

  const std::vector<GridFunction>& coefficients() const { return c_; }
  const GridFunction& operator[](int n) const { return c_[n]; }
  int truncation_order() const { return static_cast<int>(c_.size()) - 1; }
  int size() const { return static_cast<int>(c_.size()); }

  FormalSeries scaled(cplx s) const;
  FormalSeries plus(const FormalSeries& o) const;
  // Multiplication by T^sigma (coefficients move up by sigma places).
  FormalSeries shifted(int sigma) const;
  // Coefficient-wise scalar factor a(n).
  FormalSeries weighted(const std::function<cplx(int)>& a) const;

 private:
  std::vector<GridFunction> c_;
};

FormalSeries formal_q_borel(const FormalSeries& s, double q, double k);
FormalSeries dilate_formal(const FormalSeries& s, double q, double gamma);

struct RayQuadrature {
  double direction = 0.0;
  double r_min = 1e-3;
  double r_max = 1e3;
  int nodes_per_q_step = 32;
  void check() const;
};

struct LaplaceResult {
  cplx value;
  int nodes = 0;
  double r_lo = 0.0, r_hi = 0.0;  // final integration range
};

// (1/pi_{q^{1/k}}) int_{L_gamma} f(u)/Theta(u/T) du/u, trapezoid in log r,
// extended at both ends until the integrand drops below 1e-16 of its maximum.
LaplaceResult q_laplace_ex(const std::function<cplx(cplx)>& f,
                           const ThetaParams& p, const RayQuadrature& quad,
                           cplx T);
cplx q_laplace(const std::function<cplx(cplx)>& f, const ThetaParams& p,
               const RayQuadrature& quad, cplx T);

// Laplace transform of a sampled family w(u_j, m) along its own ray, evaluated
// at arbitrary targets. Below r_min the family is continued by its first
// column; the upper end must already be negligible. Returns nm x ntargets.
struct FamilyLaplaceReport {
  double upper_tail = 0.0;  // integrand mass at the last node relative to max
};
Eigen::MatrixXcd family_q_laplace(const TauFamily& w, const ThetaParams& p,
                                  const std::vector<cplx>& targets,
                                  FamilyLaplaceReport* report = nullptr);

// Scalar Laplace transform sampled at every node of a ray: returns
// L(f)(ray.node(i)) for i = 0..count-1, reusing one kernel per node offset
// when the quadrature lattice coincides with the ray lattice.
std::vector<cplx> q_laplace_on_ray(const std::function<cplx(cplx)>& f,
                                   const ThetaParams& p, const TauRay& ray);

// 1/kappa = 1/k1 - 1/k2.
double kappa_of(double k1, double k2);
// Constant of the R_D term after the two Borel steps, from its defining
// product, and its closed form (q^{1/k2})^{-(d+k2)(d+k2-1)/2}.
double accel_constant_product(double q, double k1, double k2, int d);
double accel_constant_closed(double q, double k2, int d);

}  // namespace qsum
