#pragma once

#include <vector>

#include "qsum/assembly.hpp"

namespace qsum {

// Sup differences of two sectorial solutions at shared eps samples.
struct CocycleSample {
  int pair_index = 0;
  std::vector<cplx> eps_values;
  std::vector<double> diff_norms;
  std::vector<double> scales;  // sup |u_p| per eps, the round-off reference
};

// eps_values must appear in both solutions (exact match); the (t, z) grids
// must coincide.
CocycleSample cocycle(const SectorialSolution& u_p, const SectorialSolution& u_p1,
                      const std::vector<cplx>& eps_values, int pair_index = 0);

struct FlatnessFit {
  double k_hat = 0.0;
  double M_hat = 0.0;
  double K_hat = 0.0;
  double r2 = 1.0;
  bool infinite = false;  // every sample at or below the floor
  int used = 0;
  double envelope(double eps_abs, double q) const;
};

// Least squares of log diff on {1, log|eps|, log^2|eps|}; k_hat = -2 log(q)
// times the quadratic coefficient. Samples with diff <= floor_rel * scale are
// round-off and skipped; fewer than 6 remaining samples is a FitError unless
// none remain (flatness beyond any order).
FlatnessFit fit_flatness_order(const CocycleSample& c, double q, double floor_rel = 1e-12);

// Taylor coefficients a_0..a_M (rows) of the columns of Y (n_eps x ncols) in
// eps, by staged weighted least squares: stage N fits (y - sum_{n<N} a_n eps^n)
// / eps^N with a polynomial of degree M - N and keeps its constant term.
// FitError when a stage's scaled design matrix has condition number > 1e12.
Eigen::MatrixXcd fit_eps_polynomial(const std::vector<cplx>& eps, const Eigen::MatrixXcd& Y,
                                    int M);

// Coefficients h_m = m! a_m of the common expansion sum h_m eps^m / m!.
struct ExpansionEstimate {
  int M = 0;
  TGrid tgrid;
  std::vector<cplx> z;
  MGrid grid;
  Decay decay;
  double beta_prime = 0.25;
  std::vector<Eigen::MatrixXcd> profiles;  // h_m as m-profiles per t (nm x nt)
  std::vector<Eigen::MatrixXcd> values;    // h_m on the grid (nz x nt)
  std::vector<std::vector<Eigen::MatrixXcd>> sector_values;  // [sector][m]
  std::vector<double> fit_residuals;        // per sector, sup |u - fit| / sup |u|
  std::vector<double> cross_sector_deviation;  // per m, sup over sector pairs
};

ExpansionEstimate estimate_expansion(const std::vector<SectorialSolution>& solutions, int M);

// Samples of a function of eps at a set of points (n_eps x npoints).
struct EpsSamples {
  std::vector<cplx> eps;
  Eigen::MatrixXcd values;
};
EpsSamples samples_of(const SectorialSolution& u);
// h (rows m = 0..M, derivative form) matching samples_of's column order.
Eigen::MatrixXcd flatten_values(const ExpansionEstimate& est);

struct GevreyCheck {
  std::vector<double> eta;  // eta_N, N = 0..M
  bool bounded = false;
  double max_root = 0.0;
  double median_root = 0.0;
};

// eta_N = sup |f - sum_{n<=N} h_n eps^n/n!| / (q^{N(N+1)/(2k)} |eps|^{N+1});
// bounded when max_N eta_N^{1/(N+1)} <= 3 median. Remainders at or below
// floor_rel * sup|f| are round-off and do not enter the sup.
GevreyCheck check_q_gevrey_bound(const std::vector<EpsSamples>& f, const Eigen::MatrixXcd& h,
                                 double k, double q, double floor_rel = 0.0);

struct RecursionCheck {
  std::vector<double> per_order;  // max relative residual for each m = 0..M
  double max_rel = 0.0;           // max over m <= max_order
};

// Residual of the recursion for h_m (derivative form) at interior (t, z)
// nodes, relative to the largest term sum over the nodes of that order. f_m is the forcing's estimate. Needs M >= max(d_D, max Delta) + 2.
// max_order < 0 means all orders.
RecursionCheck verify_formal_recursion(const ExpansionEstimate& est, const ProblemSpec& spec,
                                       const ExpansionEstimate& f_est, int max_order = -1);

struct TwoLevelSplit {
  std::vector<int> I1;  // pairs at level k1
  std::vector<int> I2;  // pairs at level k2
  std::vector<double> margin;  // per pair, relative gap between the two distances
  std::vector<bool> flagged;   // ambiguous (margin < 10%) or infinite order
  bool both_nonempty = false;
};
TwoLevelSplit verify_two_level_split(const std::vector<FlatnessFit>& fits, double k1, double k2);

}  // namespace qsum
