#pragma once

#include <random>

#include "qsum/solver.hpp"

namespace qsum::testing {

// Amended example on a coarse m-grid: Q = ((x + iA)^2 - c^2)(x + 1),
// R_D = x + 1, two levels, forcing sech(m) with two Borel-plane poles.
inline ProblemSpec small_spec(double A = 10.0, MGrid grid = MGrid{10.0, 101}) {
  ProblemSpec s;
  s.q = 2.0;
  s.k1 = 1;
  s.k2 = 2;
  s.D = 3;
  s.dD = 3;
  const double c = 0.3;
  const cplx iA(0.0, A);
  const cplx a0 = iA * iA - c * c, a1 = 2.0 * iA;
  s.Q = Polynomial({a0, a0 + a1, a1 + 1.0, 1.0});
  s.RD = Polynomial({1.0, 1.0});
  s.grid = grid;
  s.decay = Decay{0.5, 2.5};
  s.epsilon0 = 0.3;
  s.s_qr = QRSector{kPi, 0.2, c * c};
  Level l1;
  l1.delta = 1;
  l1.R = Polynomial({1.0});
  l1.terms.push_back(
      {1, 1, 1, CoefficientMap::gaussian(s.grid, s.decay, 0.5, 1.0, 0.0, {1.0, 0.5})});
  Level l2;
  l2.delta = 2;
  l2.R = Polynomial({0.0, 1.0});
  l2.terms.push_back({1, 2, 3, CoefficientMap::gaussian(s.grid, s.decay, 0.5, 1.0, 0.0, {1.0})});
  s.levels = {l1, l2};
  ForcingTerm f;
  f.G = GridFunction::sample(s.grid, s.decay, [](double m) { return cplx(1.0 / std::cosh(m)); });
  f.phi.poles = {{1.0, std::polar(1.0, 2.0 * kPi / 3.0)}, {0.5, std::polar(1.2, 1.5 * kPi)}};
  s.forcing.terms = {f};
  return s;
}

inline ProblemSpec with_forcing_scaled(ProblemSpec s, cplx c) {
  for (auto& t : s.forcing.terms) t.G = t.G.scaled(c);
  return s;
}

inline double max_abs(const Eigen::MatrixXcd& a) { return a.cwiseAbs().maxCoeff(); }

inline double rel_diff(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  const double s = std::max(max_abs(a), max_abs(b));
  return s == 0.0 ? 0.0 : (a - b).cwiseAbs().maxCoeff() / s;
}

}  // namespace qsum::testing
