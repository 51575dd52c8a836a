#include "qsum/mspace.hpp"

#include <algorithm>
#include <cmath>

namespace qsum {

void MGrid::check() const {
  if (!(m_max > 0.0)) throw GridError("m_max must be positive");
  if (n_points < 3 || n_points % 2 == 0)
    throw GridError("n_points must be odd and at least 3");
}

double Decay::weight(double m) const {
  const double a = std::abs(m);
  return std::pow(1.0 + a, mu) * std::exp(beta * a);
}

GridFunction::GridFunction(MGrid grid, std::vector<cplx> values, Decay decay)
    : grid_(grid), decay_(decay), values_(std::move(values)) {
  grid_.check();
  if (static_cast<int>(values_.size()) != grid_.n_points)
    throw ShapeError("grid function length does not match its grid");
  if (!(decay_.beta > 0.0)) throw DomainError("decay beta must be positive");
}

GridFunction GridFunction::sample(const MGrid& grid, const Decay& decay,
                                  const std::function<cplx(double)>& f) {
  std::vector<cplx> v(grid.n_points);
  for (int i = 0; i < grid.n_points; ++i) v[i] = f(grid.m(i));
  return GridFunction(grid, std::move(v), decay);
}

GridFunction GridFunction::zeros(const MGrid& grid, const Decay& decay) {
  return GridFunction(grid, std::vector<cplx>(grid.n_points), decay);
}

GridFunction GridFunction::scaled(cplx c) const {
  std::vector<cplx> v(values_);
  for (auto& x : v) x *= c;
  return GridFunction(grid_, std::move(v), decay_);
}

GridFunction GridFunction::plus(const GridFunction& o) const {
  if (!(o.grid_ == grid_)) throw ShapeError("grid mismatch in sum");
  std::vector<cplx> v(values_);
  for (int i = 0; i < size(); ++i) v[i] += o.values_[i];
  return GridFunction(grid_, std::move(v), decay_);
}

GridFunction GridFunction::times(const std::function<cplx(double)>& a) const {
  std::vector<cplx> v(values_);
  for (int i = 0; i < size(); ++i) v[i] *= a(grid_.m(i));
  return GridFunction(grid_, std::move(v), decay_);
}

bool GridFunction::tail_flag() const {
  const double norm = e_norm(*this);
  const double edge_weight = 1.0 / decay_.weight(grid_.m_max);
  const double edge =
      std::max(std::abs(values_.front()), std::abs(values_.back()));
  return edge > 10.0 * edge_weight * norm;
}

Polynomial::Polynomial(std::vector<cplx> coefficients)
    : c_(std::move(coefficients)) {
  while (!c_.empty() && c_.back() == cplx(0.0)) c_.pop_back();
}

cplx Polynomial::operator()(cplx x) const {
  cplx acc = 0.0;
  for (auto it = c_.rbegin(); it != c_.rend(); ++it) acc = acc * x + *it;
  return acc;
}

Polynomial Polynomial::scaled(cplx s) const {
  std::vector<cplx> c(c_);
  for (auto& x : c) x *= s;
  return Polynomial(std::move(c));
}

void NormParams::check() const {
  if (!(k > 0.0)) throw DomainError("norm order k must be positive");
  if (!(beta > 0.0)) throw DomainError("norm beta must be positive");
  if (!(q > 1.0)) throw DomainError("norm q must exceed 1");
}

int TauRay::dilation_shift(double gamma) const {
  const double s = gamma * L;
  const double r = std::round(s);
  if (std::abs(s - r) > 1e-9)
    throw GridError("dilation exponent is not a multiple of 1/L");
  return static_cast<int>(r);
}

int TauRay::find_radius(double r) const {
  const double s = std::log(r / r_min) / log_step();
  const double j = std::round(s);
  if (std::abs(s - j) > 1e-7 || j < 0 || j >= count) return -1;
  return static_cast<int>(j);
}

TauFamily::TauFamily(TauRay ray, MGrid grid, Decay decay)
    : ray_(ray), grid_(grid), decay_(decay),
      values_(Eigen::MatrixXcd::Zero(grid.n_points, ray.count)) {}

TauFamily::TauFamily(TauRay ray, MGrid grid, Decay decay,
                     Eigen::MatrixXcd values)
    : ray_(ray), grid_(grid), decay_(decay), values_(std::move(values)) {
  if (values_.rows() != grid_.n_points || values_.cols() != ray_.count)
    throw ShapeError("tau family shape does not match ray and grid");
}

GridFunction TauFamily::at(int j) const {
  std::vector<cplx> v(values_.col(j).data(),
                      values_.col(j).data() + grid_.n_points);
  return GridFunction(grid_, std::move(v), decay_);
}

std::vector<double> trapezoid_weights(const MGrid& grid) {
  std::vector<double> w(grid.n_points, grid.spacing());
  w.front() *= 0.5;
  w.back() *= 0.5;
  return w;
}

double e_norm(const GridFunction& h) {
  double best = 0.0;
  for (int i = 0; i < h.size(); ++i)
    best = std::max(best, h.decay().weight(h.grid().m(i)) * std::abs(h[i]));
  return best;
}

GridFunction convolve_Q(const GridFunction& h1, const GridFunction& h2,
                        const Polynomial& Qpoly) {
  if (!(h1.grid() == h2.grid())) throw ShapeError("convolution grid mismatch");
  return ConvolutionOperator(h1, Qpoly).apply(h2);
}

ConvolutionOperator::ConvolutionOperator(const GridFunction& kernel,
                                         const Polynomial& poly)
    : n_(kernel.size()) {
  const MGrid& g = kernel.grid();
  const int c = g.center();
  // kernel value at offset d = i - j, d in [-(n-1), n-1], stored reversed so
  // that the inner loop over j reads it forwards.
  krev_re_.assign(2 * n_ - 1, 0.0);
  krev_im_.assign(2 * n_ - 1, 0.0);
  for (int d = -(n_ - 1); d <= n_ - 1; ++d) {
    const int src = c + d;
    if (src < 0 || src >= n_) continue;
    const int t = (n_ - 1) - d;
    krev_re_[t] = kernel[src].real();
    krev_im_[t] = kernel[src].imag();
  }
  const auto tw = trapezoid_weights(g);
  weight_.resize(n_);
  for (int j = 0; j < n_; ++j) weight_[j] = tw[j] * poly.at_im(g.m(j));
}

void ConvolutionOperator::apply(const cplx* in, cplx* out) const {
  std::vector<double> tre(n_), tim(n_);
  for (int j = 0; j < n_; ++j) {
    const cplx v = weight_[j] * in[j];
    tre[j] = v.real();
    tim[j] = v.imag();
  }
  const double* kr = krev_re_.data();
  const double* ki = krev_im_.data();
  const double* xr = tre.data();
  const double* xi = tim.data();
  for (int i = 0; i < n_; ++i) {
    const int off = n_ - 1 - i;
    double sr = 0.0, si = 0.0;
#pragma omp simd reduction(+ : sr, si)
    for (int j = 0; j < n_; ++j) {
      const double a = kr[off + j], b = ki[off + j];
      sr += a * xr[j] - b * xi[j];
      si += a * xi[j] + b * xr[j];
    }
    out[i] = cplx(sr, si);
  }
}

GridFunction ConvolutionOperator::apply(const GridFunction& h) const {
  if (h.size() != n_) throw ShapeError("convolution grid mismatch");
  std::vector<cplx> out(n_);
  apply(h.values().data(), out.data());
  return GridFunction(h.grid(), std::move(out), h.decay());
}

namespace {
void check_strip(const std::vector<cplx>& z, double beta) {
  for (const auto& x : z)
    if (!(std::abs(x.imag()) < beta))
      throw DomainError("inverse Fourier point outside the strip |Im z| < beta");
}
}  // namespace

std::vector<cplx> inverse_fourier(const GridFunction& h,
                                  const std::vector<cplx>& z_points) {
  check_strip(z_points, h.decay().beta);
  const auto tw = trapezoid_weights(h.grid());
  std::vector<cplx> out(z_points.size());
  for (size_t k = 0; k < z_points.size(); ++k) {
    cplx acc = 0.0;
    for (int j = 0; j < h.size(); ++j)
      acc += tw[j] * h[j] * std::exp(cplx(0.0, 1.0) * z_points[k] * h.grid().m(j));
    out[k] = acc * kInvSqrt2Pi;
  }
  return out;
}

FourierEvaluator::FourierEvaluator(const MGrid& grid, double beta,
                                   const std::vector<cplx>& z_points)
    : z_(z_points), kernel_(z_points.size(), grid.n_points) {
  check_strip(z_points, beta);
  const auto tw = trapezoid_weights(grid);
  for (size_t k = 0; k < z_.size(); ++k)
    for (int j = 0; j < grid.n_points; ++j)
      kernel_(k, j) = tw[j] * kInvSqrt2Pi *
                      std::exp(cplx(0.0, 1.0) * z_[k] * grid.m(j));
}

Eigen::MatrixXcd FourierEvaluator::apply(const Eigen::MatrixXcd& profiles) const {
  if (profiles.rows() != kernel_.cols()) throw ShapeError("profile length mismatch");
  return kernel_ * profiles;
}

std::vector<cplx> FourierEvaluator::apply(const std::vector<cplx>& profile) const {
  if (static_cast<int>(profile.size()) != kernel_.cols())
    throw ShapeError("profile length mismatch");
  Eigen::Map<const Eigen::VectorXcd> v(profile.data(), profile.size());
  Eigen::VectorXcd r = kernel_ * v;
  return std::vector<cplx>(r.data(), r.data() + r.size());
}

double exp_weight(const NormParams& p, ExpSpace space, cplx tau) {
  const double r = space == ExpSpace::shifted ? std::abs(tau + p.shift)
                                              : std::abs(tau);
  const double l = std::log(r);
  return std::exp(-p.k * l * l / (2.0 * std::log(p.q)) - p.tilt * l);
}

double exp_norm(const TauFamily& w, const NormParams& p, ExpSpace space) {
  p.check();
  const MGrid& g = w.grid();
  std::vector<double> mw(g.n_points);
  for (int i = 0; i < g.n_points; ++i) {
    const double a = std::abs(g.m(i));
    mw[i] = std::pow(1.0 + a, p.mu) * std::exp(p.beta * a);
  }
  double best = 0.0;
  for (int j = 0; j < w.count(); ++j) {
    const double tw = exp_weight(p, space, w.ray().node(j));
    const auto col = w.values().col(j);
    for (int i = 0; i < g.n_points; ++i)
      best = std::max(best, mw[i] * tw * std::abs(col[i]));
  }
  return best;
}

}  // namespace qsum
