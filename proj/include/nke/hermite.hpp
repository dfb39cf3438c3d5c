#pragma once

#include <functional>
#include <span>
#include <vector>

namespace nke {

using ScalarFn = std::function<double(double)>;

// Expansion sigma(nu * t) = sum_j coeffs[j] * h_j(t), probabilists' convention.
struct HermiteCoeffs {
  std::vector<double> coeffs;
  double nu = 1.0;

  int degree() const { return static_cast<int>(coeffs.size()) - 1; }
};

// Nodes/weights for integrals against exp(-x^2).
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

inline constexpr int kMaxHermiteDegree = 200;
inline constexpr int kMaxMonomialDegree = 170;

double hermite_eval(int ell, double t);

// h_0(t) .. h_n(t) in one pass of the recurrence.
std::vector<double> hermite_values(int n, double t);

// mu[l] with t^i = sum_l mu[l] h_l(t).
std::vector<double> monomial_to_hermite(int i);

QuadratureRule gauss_hermite_rule(int q);

// Shared immutable rule; computed once per order.
const QuadratureRule& cached_gauss_hermite_rule(int q);

HermiteCoeffs hermite_expand(const ScalarFn& sigma, int q, double nu, int quad_order);

// sum_j coeffs[j] * h_j(t / nu)
double hermite_series_eval(const HermiteCoeffs& hc, double t);

// E_{t ~ N(0,1)}[f(t)^2] by Gauss-Hermite quadrature.
double gaussian_norm_sq(const ScalarFn& f, int quad_order);

// sum_{j=q+1}^{4q} c_j^2 j!  for sigma(nu t); the squared L2(N(0, nu^2)) truncation error.
double hermite_tail_energy(const ScalarFn& sigma, int q, double nu, int quad_order);

}  // namespace nke
