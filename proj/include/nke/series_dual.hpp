#pragma once

#include <Eigen/Dense>
#include <vector>

#include "nke/hermite.hpp"

namespace nke {

// a_0 + a_1 t + ... + a_q t^q
struct PolyCoeffs {
  std::vector<double> coeffs;

  int degree() const { return static_cast<int>(coeffs.size()) - 1; }
  bool nonnegative() const;
  double operator()(double t) const;
  PolyCoeffs derivative() const;
};

// Radial factor r_l(t) of the polynomial dual kernel.
double radial_factor(const PolyCoeffs& p, int ell, double t);

// sum_l r_l(|x|) r_l(|y|) c^l
double dual_kernel_poly(const PolyCoeffs& p, double x_norm, double y_norm, double c);

// Monomial coefficients of sum_j c_j h_j(t / nu).
PolyCoeffs hermite_to_poly(const HermiteCoeffs& hc);

// E[s(u) s(v)] for the truncated series s, by a Gauss-Hermite rule exact for its degree.
// Stable at high degree where the monomial route loses all precision.
double dual_kernel_hermite_series(const HermiteCoeffs& hc, double a, double b, double c);

// Full matrix [dual_kernel_poly(p, |x_i|, |x_j|, cos)] for the rows of X.
Eigen::MatrixXd dual_kernel_poly_matrix(const PolyCoeffs& p, const Eigen::MatrixXd& X);

double truncation_error_bound_general(double sigma_norm, double eps, double nu, double x_norm,
                                      double y_norm);
double truncation_error_bound_smooth(int k, int q, double nu, double sigma_norm, double sigma_k_norm,
                                     double x_norm, double y_norm);
double truncation_error_bound_relu(int q, double nu, double x_norm, double y_norm);

namespace detail {
// dual_kernel_poly without the positive-norm check; zero norms give the limit value.
double dual_kernel_poly_unchecked(const PolyCoeffs& p, double a, double b, double c);
}  // namespace detail

}  // namespace nke
