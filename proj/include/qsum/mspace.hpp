#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "qsum/common.hpp"

namespace qsum {

// Uniform symmetric grid on [-m_max, m_max].
struct MGrid {
  double m_max = 20.0;
  int n_points = 401;

  double spacing() const { return 2.0 * m_max / (n_points - 1); }
  double m(int i) const { return -m_max + i * spacing(); }
  int center() const { return (n_points - 1) / 2; }
  bool operator==(const MGrid& o) const {
    return m_max == o.m_max && n_points == o.n_points;
  }
  void check() const;
};

// Decay metadata of E_(beta,mu): weight (1+|m|)^mu e^{beta|m|}.
struct Decay {
  double beta = 0.5;
  double mu = 2.5;
  double weight(double m) const;
};

class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(MGrid grid, std::vector<cplx> values, Decay decay);

  static GridFunction sample(const MGrid& grid, const Decay& decay,
                             const std::function<cplx(double)>& f);
  static GridFunction zeros(const MGrid& grid, const Decay& decay);

  const MGrid& grid() const { return grid_; }
  const Decay& decay() const { return decay_; }
  const std::vector<cplx>& values() const { return values_; }
  int size() const { return static_cast<int>(values_.size()); }
  cplx operator[](int i) const { return values_[i]; }

  GridFunction scaled(cplx c) const;
  GridFunction plus(const GridFunction& o) const;
  // Pointwise product with a multiplier sampled on the same grid.
  GridFunction times(const std::function<cplx(double)>& a) const;

  // True when the edge samples exceed 10x the weight-scaled E-norm (advisory).
  bool tail_flag() const;

 private:
  MGrid grid_;
  Decay decay_;
  std::vector<cplx> values_;
};

class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<cplx> coefficients);

  const std::vector<cplx>& coefficients() const { return c_; }
  int degree() const { return static_cast<int>(c_.size()) - 1; }
  bool is_zero() const { return c_.empty(); }
  cplx operator()(cplx x) const;
  cplx at_im(double m) const { return (*this)(cplx(0.0, m)); }
  Polynomial scaled(cplx s) const;

 private:
  std::vector<cplx> c_;
};

struct NormParams {
  double k = 1.0;
  double beta = 0.5;
  double mu = 2.5;
  double tilt = 0.0;   // alpha (shifted) or nu (plain)
  double rho = 1.0;    // disc radius, shifted space only
  double shift = 0.0;  // delta of |tau + delta|, shifted space only
  double q = 2.0;
  void check() const;
};

enum class ExpSpace { shifted, plain };

// Geometric ray tau_j = r_min q^{j/L} e^{i direction}, j = 0..count-1.
struct TauRay {
  double direction = 0.0;
  double r_min = 1e-6;
  double q = 2.0;
  int L = 64;
  int count = 0;

  double log_step() const { return std::log(q) / L; }
  double radius(int j) const { return r_min * std::exp(j * log_step()); }
  cplx node(int j) const { return std::polar(radius(j), direction); }
  // Node offset realizing tau -> q^gamma tau; throws GridError when gamma*L is
  // not an integer.
  int dilation_shift(double gamma) const;
  // Index of the node with the given radius, or -1 when absent.
  int find_radius(double r) const;
};

// Values w(tau_j, m_i) of one ray; column j holds the m-profile at node j.
class TauFamily {
 public:
  TauFamily() = default;
  TauFamily(TauRay ray, MGrid grid, Decay decay);
  TauFamily(TauRay ray, MGrid grid, Decay decay, Eigen::MatrixXcd values);

  const TauRay& ray() const { return ray_; }
  const MGrid& grid() const { return grid_; }
  const Decay& decay() const { return decay_; }
  Eigen::MatrixXcd& values() { return values_; }
  const Eigen::MatrixXcd& values() const { return values_; }
  int count() const { return ray_.count; }
  GridFunction at(int j) const;

 private:
  TauRay ray_;
  MGrid grid_;
  Decay decay_;
  Eigen::MatrixXcd values_;
};

// Trapezoid weights on the grid (half weight at both ends, times spacing).
std::vector<double> trapezoid_weights(const MGrid& grid);

double e_norm(const GridFunction& h);

// h1 *^Q h2 (m) = int h1(m - m1) Q(i m1) h2(m1) dm1; out-of-grid h1 reads 0.
GridFunction convolve_Q(const GridFunction& h1, const GridFunction& h2,
                        const Polynomial& Qpoly);

// Precomputed convolution against a fixed kernel and polynomial.
class ConvolutionOperator {
 public:
  ConvolutionOperator() = default;
  ConvolutionOperator(const GridFunction& kernel, const Polynomial& poly);

  int size() const { return n_; }
  void apply(const cplx* in, cplx* out) const;
  GridFunction apply(const GridFunction& h) const;

 private:
  int n_ = 0;
  std::vector<double> krev_re_, krev_im_;
  std::vector<cplx> weight_;
};

// (1/sqrt(2 pi)) int h(m) e^{izm} dm by the trapezoid rule.
std::vector<cplx> inverse_fourier(const GridFunction& h,
                                  const std::vector<cplx>& z_points);

// Batched inverse Fourier transform at a fixed set of z points.
class FourierEvaluator {
 public:
  FourierEvaluator(const MGrid& grid, double beta,
                   const std::vector<cplx>& z_points);
  // Each column of profiles is an m-profile; returns nz x ncols.
  Eigen::MatrixXcd apply(const Eigen::MatrixXcd& profiles) const;
  std::vector<cplx> apply(const std::vector<cplx>& profile) const;
  const std::vector<cplx>& z_points() const { return z_; }

 private:
  std::vector<cplx> z_;
  Eigen::MatrixXcd kernel_;  // nz x nm
};

double exp_weight(const NormParams& p, ExpSpace space, cplx tau);
double exp_norm(const TauFamily& w, const NormParams& p, ExpSpace space);

}  // namespace qsum
