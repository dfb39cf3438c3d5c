#include "nke/series_dual.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nke/error.hpp"

namespace nke {

bool PolyCoeffs::nonnegative() const {
  return std::all_of(coeffs.begin(), coeffs.end(), [](double v) { return v >= 0.0; });
}

double PolyCoeffs::operator()(double t) const {
  double acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * t + *it;
  return acc;
}

PolyCoeffs PolyCoeffs::derivative() const {
  PolyCoeffs d;
  if (coeffs.size() <= 1) {
    d.coeffs = {0.0};
    return d;
  }
  d.coeffs.resize(coeffs.size() - 1);
  for (std::size_t j = 1; j < coeffs.size(); ++j) d.coeffs[j - 1] = static_cast<double>(j) * coeffs[j];
  return d;
}

namespace {

void check_poly(const PolyCoeffs& p) {
  if (p.coeffs.empty()) fail(ErrorCode::InvalidArgument, "empty polynomial");
  if (p.degree() > kMaxMonomialDegree)
    fail(ErrorCode::DegreeTooLarge, "polynomial degree above " + std::to_string(kMaxMonomialDegree));
}

double radial_unchecked(const PolyCoeffs& p, int ell, double t) {
  const int q = p.degree();
  if (t == 0.0) return ell == 0 ? p.coeffs[0] : 0.0;
  const double lt = std::log(t);
  const double half_lf = 0.5 * std::lgamma(ell + 1.0);
  double acc = 0.0;
  for (int i = 0; ell + 2 * i <= q; ++i) {
    const double a = p.coeffs[ell + 2 * i];
    if (a == 0.0) continue;
    const double lmag = std::lgamma(ell + 2 * i + 1.0) - i * std::log(2.0) - std::lgamma(i + 1.0) - half_lf +
                        (2 * i + ell) * lt;
    acc += a * std::exp(lmag);
  }
  return acc;
}

void check_norms_against_nu(double nu, double x_norm, double y_norm) {
  if (!(nu >= 1.0)) fail(ErrorCode::DomainError, "nu must be at least 1");
  if (!(x_norm > 0) || !(y_norm > 0) || x_norm > nu || y_norm > nu)
    fail(ErrorCode::DomainError, "norms must lie in (0, nu]");
}

}  // namespace

double radial_factor(const PolyCoeffs& p, int ell, double t) {
  check_poly(p);
  if (ell < 0 || ell > p.degree()) fail(ErrorCode::InvalidArgument, "radial level out of range");
  if (!(t > 0)) fail(ErrorCode::DomainError, "radial factor needs t > 0");
  return radial_unchecked(p, ell, t);
}

namespace detail {

double dual_kernel_poly_unchecked(const PolyCoeffs& p, double a, double b, double c) {
  check_poly(p);
  double acc = 0.0, cp = 1.0;
  for (int ell = 0; ell <= p.degree(); ++ell) {
    acc += radial_unchecked(p, ell, a) * radial_unchecked(p, ell, b) * cp;
    cp *= c;
  }
  return acc;
}

}  // namespace detail

double dual_kernel_poly(const PolyCoeffs& p, double x_norm, double y_norm, double c) {
  if (!(x_norm > 0) || !(y_norm > 0)) fail(ErrorCode::ZeroNormInput, "dual_kernel_poly needs positive norms");
  return detail::dual_kernel_poly_unchecked(p, x_norm, y_norm, c);
}

PolyCoeffs hermite_to_poly(const HermiteCoeffs& hc) {
  const int q = hc.degree();
  if (q > kMaxMonomialDegree) fail(ErrorCode::DegreeTooLarge, "Hermite degree too large for monomial form");
  PolyCoeffs p;
  p.coeffs.assign(q + 1, 0.0);
  const double lnu = std::log(hc.nu);
  for (int j = 0; j <= q; ++j) {
    if (hc.coeffs[j] == 0.0) continue;
    for (int i = 0; 2 * i <= j; ++i) {
      const int pw = j - 2 * i;
      const double lmag = std::lgamma(j + 1.0) - std::lgamma(i + 1.0) - std::lgamma(pw + 1.0) - i * std::log(2.0) -
                          pw * lnu;
      p.coeffs[pw] += (i % 2 ? -1.0 : 1.0) * hc.coeffs[j] * std::exp(lmag);
    }
  }
  return p;
}

double dual_kernel_hermite_series(const HermiteCoeffs& hc, double a, double b, double c) {
  const int nodes = std::max(hc.degree() + 2, 2);
  if (nodes > kMaxHermiteDegree) fail(ErrorCode::DegreeTooLarge, "series degree too large for exact quadrature");
  const QuadratureRule& rule = cached_gauss_hermite_rule(nodes);
  c = std::clamp(c, -1.0, 1.0);
  const double s2 = std::sqrt(2.0), sc = std::sqrt(1 - c * c);
  double total = 0.0;
  for (int i = 0; i < nodes; ++i) {
    const double xi = rule.nodes[i];
    const double u = hermite_series_eval(hc, s2 * a * xi);
    double inner = 0.0;
    for (int j = 0; j < nodes; ++j)
      inner += rule.weights[j] * hermite_series_eval(hc, s2 * b * (c * xi + sc * rule.nodes[j]));
    total += rule.weights[i] * u * inner;
  }
  return total / M_PI;
}

Eigen::MatrixXd dual_kernel_poly_matrix(const PolyCoeffs& p, const Eigen::MatrixXd& X) {
  check_poly(p);
  const Eigen::Index n = X.rows();
  Eigen::VectorXd norms = X.rowwise().norm();
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(norms[i] > 0)) throw Error(ErrorCode::ZeroNormInput, "row " + std::to_string(i) + " has zero norm", i);
  Eigen::MatrixXd C = X * X.transpose();
  C = (C.array() / (norms * norms.transpose()).array()).cwiseMax(-1.0).cwiseMin(1.0).matrix();
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd Cpow = Eigen::MatrixXd::Ones(n, n);
  Eigen::VectorXd r(n);
  for (int ell = 0; ell <= p.degree(); ++ell) {
    for (Eigen::Index i = 0; i < n; ++i) r[i] = radial_unchecked(p, ell, norms[i]);
    K.array() += (r * r.transpose()).array() * Cpow.array();
    Cpow.array() *= C.array();
  }
  return K;
}

double truncation_error_bound_general(double sigma_norm, double eps, double nu, double x_norm, double y_norm) {
  check_norms_against_nu(nu, x_norm, y_norm);
  if (eps < 0 || sigma_norm < 0) fail(ErrorCode::DomainError, "norms and eps must be nonnegative");
  return std::sqrt(nu * nu * eps * (6 * sigma_norm * sigma_norm + 4 * eps) / (x_norm * y_norm));
}

double truncation_error_bound_smooth(int k, int q, double nu, double sigma_norm, double sigma_k_norm, double x_norm,
                                     double y_norm) {
  check_norms_against_nu(nu, x_norm, y_norm);
  if (k < 2 || q < 1) fail(ErrorCode::DomainError, "smooth bound needs k >= 2 and q >= 1");
  const double nk = std::pow(nu, k);
  return 5 * nu * nk * sigma_k_norm * std::max(sigma_norm, nk * sigma_k_norm) /
         std::sqrt(x_norm * y_norm * k * std::pow(static_cast<double>(q), k - 1));
}

double truncation_error_bound_relu(int q, double nu, double x_norm, double y_norm) {
  check_norms_against_nu(nu, x_norm, y_norm);
  if (q < 1) fail(ErrorCode::DomainError, "q must be positive");
  return std::sqrt(2 * std::pow(nu, 6) / (q * x_norm * y_norm));
}

}  // namespace nke
