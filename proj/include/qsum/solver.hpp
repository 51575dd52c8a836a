#pragma once

#include <vector>

#include "qsum/problem.hpp"

namespace qsum {

enum class IterationMode { picard, sweep };

struct FixedPointConfig {
  double ball_radius = 1e6;
  int max_iter = 400;
  double tol = 1e-13;
  double zeta_psi = 1.0;
  double zeta_le = 1.0;
  double alpha = 1.0;  // tilt of the shifted norm used for w_k1
  double nu = -3.0;    // tilt of the plain norm used for w_k2
  double shift = 1.0;  // delta of the shifted norm
  IterationMode mode = IterationMode::picard;
  void check() const;
};

struct FixedPointResult {
  TauFamily w;
  int iterations = 0;
  double contraction_ratio = 0.0;  // max quotient of consecutive update norms
  double norm = 0.0;
  bool within_ball = true;
  std::vector<double> updates;
};

// Geometric ray from r_min up to at least r_max.
TauRay make_ray(double direction, double r_min, double r_max, double q, int L);

NormParams k1_norm(const ProblemSpec& spec, const FixedPointConfig& cfg);
NormParams k2_norm(const ProblemSpec& spec, const FixedPointConfig& cfg);

// psi_{k1} sampled on the ray (direct evaluation of the separable forcing).
TauFamily sample_psi_k1(const ProblemSpec& spec, const TauRay& ray, cplx eps);
// psi_{k2} = L_{q;1/kappa} psi_{k1} on the ray, term by term through the
// scalar transform of each tau-profile.
TauFamily psi_k2_family(const ProblemSpec& spec, const TauRay& ray, cplx eps);

// Equation of P-type at order k: division by P_m(tau), no dilation on the
// R_D term. The main problem uses k = k2; the chained forcing uses k = k1.
struct PTypeProblem {
  double q = 2.0;
  double k = 2.0;
  Polynomial Q, RD;
  int dD = 1;
  std::vector<Level> levels;
};
PTypeProblem ptype_of(const ProblemSpec& spec, double k);

FixedPointResult solve_w_k1(const ProblemSpec& spec, const TauFamily& psi_k1,
                            const FixedPointConfig& cfg, cplx eps,
                            const TauFamily* start = nullptr);
FixedPointResult solve_ptype(const PTypeProblem& pb, const TauFamily& psi,
                             const FixedPointConfig& cfg, cplx eps, const NormParams& norm,
                             const TauFamily* start = nullptr);
// Checks the root bounds on (sector, rho1) first; refuses M1_hat <= 0.01.
FixedPointResult solve_w_k2(const ProblemSpec& spec, const TauFamily& psi_k2,
                            const FixedPointConfig& cfg, cplx eps, const Sector& sector,
                            double rho1, const TauFamily* start = nullptr);

// Both sides of the Borel-plane equations evaluated with a direct double-loop
// convolution and radius lookup for dilations; returns
// norm(LHS - RHS) / norm(LHS).
double residual_w_k1(const ProblemSpec& spec, const FixedPointConfig& cfg,
                     const TauFamily& psi_k1, const TauFamily& w, cplx eps);
double residual_ptype(const PTypeProblem& pb, const FixedPointConfig& cfg,
                      const TauFamily& psi, const TauFamily& w, cplx eps,
                      const NormParams& norm);
double residual_w_k2(const ProblemSpec& spec, const FixedPointConfig& cfg,
                     const TauFamily& psi_k2, const TauFamily& w, cplx eps);

// q-Laplace transform of order kappa of a family along its own ray, at the
// given targets (nm x ntargets). Targets must lie in the Laplace domain.
Eigen::MatrixXcd accelerate(const TauFamily& src, const ProblemSpec& spec,
                            const LaplaceDomain& dom, const std::vector<cplx>& targets,
                            FamilyLaplaceReport* report = nullptr);
// The same transform at every node of another ray.
TauFamily accelerate_onto(const TauFamily& src, double q, double k, const TauRay& target);

struct AccelerationCheck {
  double sup_rel_diff = 0.0;     // sup |A - w2| / (1 + |w2|)
  double sup_scaled_diff = 0.0;  // sup |A - w2| / sup |w2|
  std::vector<double> radii;
  std::vector<double> diff_by_radius;  // per sampled radius, scaled
  double upper_tail = 0.0;
};
// Compares L_{q;1/kappa}(w_k1) with w_k2 at nodes of the w_k2 ray inside the
// overlap sector (samples nodes, log-spaced) and at a few radii beyond it.
AccelerationCheck check_acceleration_identity(const TauFamily& w_k1, const TauFamily& w_k2,
                                              const ProblemSpec& spec,
                                              const Sector& overlap_sector, int samples = 20);

// Direct double-loop h sum_j C(m_i - m_j) R(i m_j) w(m_j) with trapezoid end
// weights; an implementation independent of ConvolutionOperator.
std::vector<cplx> reference_convolution(const GridFunction& C, const Polynomial& R,
                                        const cplx* w);

struct GrowthFit {
  double C = 0.0;
  double nu = 0.0;
};
// Fits |w| <= C e^{-beta|m|}(1+|m|)^{-mu} exp(k log^2|tau|/(2 log q) + nu log|tau|).
GrowthFit fit_growth(const TauFamily& w, double k, double q, double r_lo = 0.0,
                     double r_hi = std::numeric_limits<double>::infinity());

}  // namespace qsum
