#pragma once

#include <vector>

#include "qsum/solver.hpp"

namespace qsum {

// q-geometric lattice t_j = t0 q^{j/L}, j = 0..count-1.
struct TGrid {
  double t0 = 0.002;
  double q = 2.0;
  int L = 2;
  int count = 16;

  double t(int j) const { return t0 * std::pow(q, static_cast<double>(j) / L); }
  // Index offset realizing t -> q^gamma t; throws GridError off the lattice.
  int shift(double gamma) const;
  void check() const;
};

// One sector's function sampled on the (t, z) grid for several eps values.
// profiles[e] holds the m-profiles at T = eps t_j (nm x nt); values[e] their
// inverse Fourier transforms (nz x nt).
struct SectorialSolution {
  double direction = 0.0;
  TGrid tgrid;
  std::vector<cplx> z;
  std::vector<cplx> eps;
  MGrid grid;
  Decay decay;
  double beta_prime = 0.25;
  std::vector<Eigen::MatrixXcd> profiles;
  std::vector<Eigen::MatrixXcd> values;

  int n_eps() const { return static_cast<int>(eps.size()); }
};

// L_{q;1/k} along each family's ray at T = eps t_j, then inverse Fourier at z.
// families[e] belongs to eps[e]. Every eps t_j must lie in the domain.
SectorialSolution laplace_fourier(const std::vector<TauFamily>& families, double q, double k,
                                  const LaplaceDomain& dom, const TGrid& tgrid,
                                  const std::vector<cplx>& z, const std::vector<cplx>& eps,
                                  double beta_prime);

// Forcing f(t, z, eps) from psi_k2 (Laplace of order k2, then inverse Fourier).
SectorialSolution build_forcing(const ProblemSpec& spec, const std::vector<TauFamily>& psi_k2,
                                const LaplaceDomain& dom, const TGrid& tgrid,
                                const std::vector<cplx>& z, const std::vector<cplx>& eps,
                                double beta_prime);
// Sectorial solution u(t, z, eps) from w_k2.
SectorialSolution assemble_solution(const ProblemSpec& spec, const std::vector<TauFamily>& w_k2,
                                    const LaplaceDomain& dom, const TGrid& tgrid,
                                    const std::vector<cplx>& z, const std::vector<cplx>& eps,
                                    double beta_prime);

struct CollocationPoint {
  int eps_index = 0;
  int t_index = 0;
  int z_index = 0;
};

struct PointResidual {
  double max_rel = 0.0;
  std::vector<double> per_point;
};

// Deterministic interior points whose dilated t nodes up to t q^{max_gamma}
// stay on the lattice.
std::vector<CollocationPoint> interior_points(const SectorialSolution& u, double max_gamma,
                                              int count);

// Residual of the (t, z) equation: Q(dz) sigma_q u against the R_D term, the
// level terms c(z, eps) R_l(dz) sigma_q^{delta} u and sigma_q f. Derivatives
// act as multipliers im on the profiles; the level products are formed in
// z-space. Relative to the sum of term moduli, per point.
PointResidual pde_residual(const ProblemSpec& spec, const SectorialSolution& u,
                           const SectorialSolution& f,
                           const std::vector<CollocationPoint>& points);

// Chained scenario: the forcing F solves the bold problem (order k1 in the
// role of k2) driven by the finite series bold_F.
FormalSeries chained_forcing_coefficients(const ProblemSpec& bold, const FormalSeries& bold_F,
                                          int N, cplx eps);

// Borel-plane forcing psi_k1 of the main problem: the solution of the bold
// problem's P-type equation of order k1 along the ray.
FixedPointResult chained_psi_k1(const ProblemSpec& bold, const TauRay& ray,
                                const FixedPointConfig& cfg, cplx eps);

// Residual of bold_P sigma_q^{-1} P u = sigma_q bold_f, evaluated on the
// profiles with the reference convolution and mapped to z. bold's forcing
// must be a finite sum of monomials.
PointResidual composed_residual(const ProblemSpec& spec, const ProblemSpec& bold,
                                const SectorialSolution& u,
                                const std::vector<CollocationPoint>& points);

}  // namespace qsum
