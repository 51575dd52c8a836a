#include "qsum/qkernels.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace qsum {

void ThetaParams::check() const {
  if (!(q > 1.0)) throw DomainError("theta requires q > 1");
  if (!(k > 0.0)) throw DomainError("theta requires k > 0");
  if (!(tail_tol > 0.0)) throw DomainError("theta tail tolerance must be positive");
}

ThetaSum theta_partial_sum(const ThetaParams& p, cplx x) {
  p.check();
  if (x == cplx(0.0)) throw DomainError("theta evaluated at x = 0");
  constexpr int kCap = 500;
  const double pinv = std::pow(p.q, -1.0 / p.k);
  // Terms grow up to n* = k log|x| / log q + 1/2 and decay beyond it.
  const double peak = p.k * std::log(std::abs(x)) / std::log(p.q) + 0.5;
  const cplx xinv = 1.0 / x;

  ThetaSum out;
  cplx sum = 1.0;
  double mass = 1.0;
  cplx tp = 1.0;        // t_n for n >= 0
  cplx tm = 1.0;        // t_{-n}
  double pw_pos = 1.0;  // p^{-n}
  double pw_neg = pinv; // p^{-(n+1)}
  for (int n = 0; n < kCap; ++n) {
    // t_{n+1} = t_n x p^{-n}, t_{-n-1} = t_{-n} p^{-(n+1)} / x.
    const cplx next_p = tp * x * pw_pos;
    const cplx next_m = tm * pw_neg * xinv;
    const double tail = std::max(std::abs(next_p), std::abs(next_m));
    if (n > std::abs(peak) + 1.0 && tail < p.tail_tol * std::abs(sum)) {
      out.value = sum;
      out.terms = n;
      out.converged = std::isfinite(sum.real()) && std::isfinite(sum.imag());
      out.abs_sum = mass;
      return out;
    }
    sum += next_p + next_m;
    mass += std::abs(next_p) + std::abs(next_m);
    tp = next_p;
    tm = next_m;
    pw_pos *= pinv;
    pw_neg *= pinv;
  }
  out.value = sum;
  out.terms = kCap;
  out.converged = false;
  out.abs_sum = mass;
  return out;
}

cplx theta(const ThetaParams& p, cplx x) {
  const ThetaSum s = theta_partial_sum(p, x);
  if (!s.converged) throw DivergenceError("theta sum did not converge within 500 terms");
  return s.value;
}

cplx theta_reciprocal(const ThetaParams& p, cplx x) {
  p.check();
  if (x == cplx(0.0)) throw DomainError("theta evaluated at x = 0");
  const double lq = std::log(p.q);
  const double j = std::round(p.k * std::log(std::abs(x)) / lq);
  const cplx y = x * std::exp(-j * lq / p.k);
  const ThetaSum s = theta_partial_sum(p, y);
  if (!s.converged) throw DivergenceError("reduced theta sum did not converge");
  const double mod = std::abs(s.value);
  if (mod < 1e-12 * s.abs_sum)
    throw DomainError("theta kernel vanishes near this point");
  const double logmod =
      -j * (j + 1.0) / (2.0 * p.k) * lq - j * std::log(std::abs(y)) - std::log(mod);
  const double phase = -j * std::arg(y) - std::arg(s.value);
  if (logmod < -745.0) return 0.0;
  return std::polar(std::exp(logmod), phase);
}

double pi_q_k(double q, double k) {
  if (!(q > 1.0)) throw DomainError("pi_q_k requires q > 1");
  if (!(k > 0.0)) throw DomainError("pi_q_k requires k > 0");
  double prod = 1.0;
  for (int n = 0; n < 100000; ++n) {
    const double a = std::pow(q, -(n + 1.0) / k);
    const double factor = 1.0 / (1.0 - a);
    if (factor - 1.0 < 1e-16) break;
    prod *= factor;
  }
  return std::log(q) / k * prod;
}

double laplace_normalizer(double q, double k) {
  if (!(q > 1.0)) throw DomainError("q-Laplace requires q > 1");
  if (!(k > 0.0)) throw DomainError("q-Laplace requires k > 0");
  return std::log(q) / k;
}

FormalSeries::FormalSeries(std::vector<GridFunction> coefficients)
    : c_(std::move(coefficients)) {
  for (size_t n = 1; n < c_.size(); ++n)
    if (!(c_[n].grid() == c_[0].grid()))
      throw ShapeError("formal series coefficients on different grids");
}

FormalSeries FormalSeries::scaled(cplx s) const {
  return weighted([s](int) { return s; });
}

FormalSeries FormalSeries::plus(const FormalSeries& o) const {
  const int n = std::max(size(), o.size());
  std::vector<GridFunction> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    if (i < size() && i < o.size())
      out.push_back(c_[i].plus(o.c_[i]));
    else
      out.push_back(i < size() ? c_[i] : o.c_[i]);
  }
  return FormalSeries(std::move(out));
}

FormalSeries FormalSeries::shifted(int sigma) const {
  if (sigma < 0) throw DomainError("negative shift of a formal series");
  if (c_.empty()) return *this;
  std::vector<GridFunction> out;
  out.reserve(c_.size() + sigma);
  for (int i = 0; i < sigma; ++i)
    out.push_back(GridFunction::zeros(c_[0].grid(), c_[0].decay()));
  for (const auto& g : c_) out.push_back(g);
  return FormalSeries(std::move(out));
}

FormalSeries FormalSeries::weighted(const std::function<cplx(int)>& a) const {
  std::vector<GridFunction> out;
  out.reserve(c_.size());
  for (int n = 0; n < size(); ++n) out.push_back(c_[n].scaled(a(n)));
  return FormalSeries(std::move(out));
}

FormalSeries formal_q_borel(const FormalSeries& s, double q, double k) {
  const double lq = std::log(q) / k;
  return s.weighted([lq](int n) { return std::exp(-lq * n * (n - 1) / 2.0); });
}

FormalSeries dilate_formal(const FormalSeries& s, double q, double gamma) {
  const double lq = std::log(q) * gamma;
  return s.weighted([lq](int n) { return std::exp(lq * n); });
}

void RayQuadrature::check() const {
  if (!(r_min > 0.0) || !(r_max > r_min))
    throw DomainError("ray quadrature needs 0 < r_min < r_max");
  if (nodes_per_q_step < 1) throw DomainError("nodes_per_q_step must be positive");
}

LaplaceResult q_laplace_ex(const std::function<cplx(cplx)>& f,
                           const ThetaParams& p, const RayQuadrature& quad,
                           cplx T) {
  p.check();
  quad.check();
  if (T == cplx(0.0)) throw DomainError("q-Laplace target T = 0");
  constexpr int kCap = 400000;
  const double h = std::log(p.q) / (p.k * quad.nodes_per_q_step);
  const cplx e = std::polar(1.0, quad.direction);
  auto integrand = [&](long j) {
    const cplx u = quad.r_min * std::exp(j * h) * e;
    const cplx kern = theta_reciprocal(p, u / T);
    if (kern == cplx(0.0)) return cplx(0.0);
    return f(u) * kern;
  };
  const long j_hi0 = static_cast<long>(std::ceil(std::log(quad.r_max / quad.r_min) / h));
  std::deque<cplx> vals;
  double vmax = 0.0;
  for (long j = 0; j <= j_hi0; ++j) {
    vals.push_back(integrand(j));
    vmax = std::max(vmax, std::abs(vals.back()));
  }
  long lo = 0, hi = j_hi0;
  const double tol = 1e-16;
  while (true) {
    bool grew = false;
    if (std::abs(vals.front()) > tol * vmax || (vmax == 0.0 && lo > -64)) {
      for (int s = 0; s < 64; ++s) {
        vals.push_front(integrand(--lo));
        vmax = std::max(vmax, std::abs(vals.front()));
      }
      grew = true;
    }
    if (std::abs(vals.back()) > tol * vmax || (vmax == 0.0 && hi < j_hi0 + 64)) {
      for (int s = 0; s < 64; ++s) {
        vals.push_back(integrand(++hi));
        vmax = std::max(vmax, std::abs(vals.back()));
      }
      grew = true;
    }
    if (!grew) break;
    if (static_cast<long>(vals.size()) > kCap)
      throw DivergenceError("q-Laplace integrand does not decay along the ray");
    if (vmax == 0.0 && lo <= -64 && hi >= j_hi0 + 64) break;
  }
  cplx sum = 0.0;
  for (const auto& v : vals) sum += v;
  LaplaceResult r;
  r.value = sum * h / laplace_normalizer(p.q, p.k);
  r.nodes = static_cast<int>(vals.size());
  r.r_lo = quad.r_min * std::exp(lo * h);
  r.r_hi = quad.r_min * std::exp(hi * h);
  return r;
}

cplx q_laplace(const std::function<cplx(cplx)>& f, const ThetaParams& p,
               const RayQuadrature& quad, cplx T) {
  return q_laplace_ex(f, p, quad, T).value;
}

Eigen::MatrixXcd family_q_laplace(const TauFamily& w, const ThetaParams& p,
                                  const std::vector<cplx>& targets,
                                  FamilyLaplaceReport* report) {
  p.check();
  const TauRay& ray = w.ray();
  const int n = ray.count;
  const double h = ray.log_step();
  const double scale = h / laplace_normalizer(p.q, p.k);
  // Column magnitudes bound the integrand per node.
  std::vector<double> colmax(n);
  for (int j = 0; j < n; ++j) colmax[j] = w.values().col(j).cwiseAbs().maxCoeff();

  Eigen::MatrixXcd K(n, targets.size());
  Eigen::VectorXcd lower(targets.size());
  double worst_tail = 0.0;
  for (size_t t = 0; t < targets.size(); ++t) {
    const cplx T = targets[t];
    if (T == cplx(0.0)) throw DomainError("q-Laplace target T = 0");
    double imax = 0.0;
    for (int j = 0; j < n; ++j) {
      const cplx kj = theta_reciprocal(p, ray.node(j) / T);
      K(j, t) = kj * scale;
      imax = std::max(imax, std::abs(kj) * colmax[j]);
    }
    // Continuation below r_min by the first column.
    cplx tail = 0.0;
    for (int j = -1;; --j) {
      const cplx u = std::polar(ray.r_min * std::exp(j * h), ray.direction);
      const cplx kj = theta_reciprocal(p, u / T);
      tail += kj;
      if (std::abs(kj) * colmax[0] <= 1e-17 * std::max(imax, 1e-300) || j < -200000) break;
    }
    lower(t) = tail * scale;
    if (imax > 0.0)
      worst_tail = std::max(worst_tail, std::abs(K(n - 1, t)) / scale * colmax[n - 1] / imax);
  }
  if (report) report->upper_tail = worst_tail;
  Eigen::MatrixXcd out = w.values() * K;
  out += w.values().col(0) * lower.transpose();
  return out;
}

std::vector<cplx> q_laplace_on_ray(const std::function<cplx(cplx)>& f,
                                   const ThetaParams& p, const TauRay& ray) {
  p.check();
  const double h = ray.log_step();
  const double lq = std::log(p.q);
  auto kernel = [&](long s) { return theta_reciprocal(p, cplx(std::exp(s * h), 0.0)); };
  // Kernel window from its own decay, widened until the integrand is
  // negligible at both edges for the first and last targets.
  long W = 16;
  const double g0 = std::abs(kernel(0));
  while (std::abs(kernel(W)) > 1e-18 * g0 || std::abs(kernel(-W)) > 1e-18 * g0) W *= 2;
  const cplx e = std::polar(1.0, ray.direction);
  auto node = [&](long j) { return ray.r_min * std::exp(j * h) * e; };
  std::vector<cplx> g;
  std::vector<cplx> fv;
  long base = 0;
  for (int attempt = 0;; ++attempt) {
    g.assign(2 * W + 1, 0.0);
    for (long s = -W; s <= W; ++s) g[s + W] = kernel(s);
    base = -W;
    fv.assign(ray.count + 2 * W, 0.0);
    for (long j = -W; j < ray.count + W; ++j) fv[j - base] = f(node(j));
    auto edge_ok = [&](long i) {
      double mx = 0.0;
      for (long s = -W; s <= W; ++s) mx = std::max(mx, std::abs(fv[i + s - base] * g[s + W]));
      const double lo = std::abs(fv[i - W - base] * g[0]);
      const double hi = std::abs(fv[i + W - base] * g[2 * W]);
      return std::max(lo, hi) <= 1e-16 * mx || mx == 0.0;
    };
    if ((edge_ok(0) && edge_ok(ray.count - 1)) || attempt > 6) break;
    W *= 2;
  }
  (void)lq;
  const double scale = h / laplace_normalizer(p.q, p.k);
  std::vector<cplx> out(ray.count);
  for (long i = 0; i < ray.count; ++i) {
    cplx acc = 0.0;
    for (long s = -W; s <= W; ++s) acc += fv[i + s - base] * g[s + W];
    out[i] = acc * scale;
  }
  return out;
}

double kappa_of(double k1, double k2) {
  if (!(k1 > 0.0) || !(k2 > k1)) throw DomainError("kappa needs 0 < k1 < k2");
  return 1.0 / (1.0 / k1 - 1.0 / k2);
}

double accel_constant_product(double q, double k1, double k2, int d) {
  const double kappa = kappa_of(k1, k2);
  const double a1 = std::pow(q, 1.0 / k1), a2 = std::pow(q, 1.0 / k2),
               ak = std::pow(q, 1.0 / kappa);
  const double num = std::pow(a1, k1 * (k1 - 1.0) / 2.0) * std::pow(ak, d * (d - 1.0) / 2.0);
  const double den = std::pow(a2, k2 * (k2 - 1.0) / 2.0) *
                     std::pow(a1, (d + k1) * (d + k1 - 1.0) / 2.0);
  return num / den;
}

double accel_constant_closed(double q, double k2, int d) {
  return std::pow(std::pow(q, 1.0 / k2), -(d + k2) * (d + k2 - 1.0) / 2.0);
}

}  // namespace qsum
