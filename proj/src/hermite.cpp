#include "nke/hermite.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <mutex>
#include <string>

#include "nke/error.hpp"

namespace nke {

namespace {

void check_degree(int ell, int limit) {
  if (ell < 0) fail(ErrorCode::InvalidArgument, "negative degree " + std::to_string(ell));
  if (ell > limit)
    fail(ErrorCode::DegreeTooLarge,
         "degree " + std::to_string(ell) + " exceeds limit " + std::to_string(limit));
}

// Orthonormal probabilists' Hermite h_j / sqrt(j!) for j = 0..n.
void normalized_hermite(int n, double t, double* out) {
  out[0] = 1.0;
  if (n == 0) return;
  out[1] = t;
  for (int k = 1; k < n; ++k)
    out[k + 1] = (t * out[k] - std::sqrt(static_cast<double>(k)) * out[k - 1]) /
                 std::sqrt(static_cast<double>(k + 1));
}

}  // namespace

double hermite_eval(int ell, double t) {
  check_degree(ell, kMaxHermiteDegree);
  double prev = 1.0;
  if (ell == 0) return prev;
  double cur = t;
  for (int k = 1; k < ell; ++k) {
    double next = t * cur - k * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

std::vector<double> hermite_values(int n, double t) {
  check_degree(n, kMaxHermiteDegree);
  std::vector<double> h(n + 1);
  h[0] = 1.0;
  if (n >= 1) h[1] = t;
  for (int k = 1; k < n; ++k) h[k + 1] = t * h[k] - k * h[k - 1];
  return h;
}

std::vector<double> monomial_to_hermite(int i) {
  check_degree(i, kMaxMonomialDegree);
  std::vector<double> mu(i + 1, 0.0);
  const double lfi = std::lgamma(i + 1.0);
  for (int l = i; l >= 0; l -= 2) {
    int k = (i - l) / 2;
    mu[l] = std::exp(lfi - k * std::log(2.0) - std::lgamma(k + 1.0) - std::lgamma(l + 1.0));
  }
  return mu;
}

QuadratureRule gauss_hermite_rule(int q) {
  if (q < 1) fail(ErrorCode::InvalidArgument, "quadrature order must be positive");
  check_degree(q, kMaxHermiteDegree);
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(q);
  Eigen::VectorXd sub(std::max(q - 1, 0));
  for (int k = 1; k < q; ++k) sub[k - 1] = std::sqrt(k / 2.0);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    fail(ErrorCode::EigenFailure, "tridiagonal eigensolve did not converge for q=" + std::to_string(q));

  std::vector<double> x(es.eigenvalues().data(), es.eigenvalues().data() + q);
  std::sort(x.begin(), x.end());
  for (int i = 0; i < q / 2; ++i) {
    double s = 0.5 * (x[q - 1 - i] - x[i]);
    x[i] = -s;
    x[q - 1 - i] = s;
  }
  if (q % 2 == 1) x[q / 2] = 0.0;

  // w_i = sqrt(pi) / (q * hn_{q-1}(sqrt2 x_i)^2) with hn the orthonormal polynomials;
  // equal to q! sqrt(pi) / (q^2 h_{q-1}(sqrt2 x_i)^2) without the factorial.
  QuadratureRule rule;
  rule.nodes = x;
  rule.weights.resize(q);
  std::vector<double> hn(q);
  for (int i = 0; i < q; ++i) {
    normalized_hermite(q - 1, std::sqrt(2.0) * x[i], hn.data());
    double v = hn[q - 1];
    rule.weights[i] = std::sqrt(M_PI) / (q * v * v);
  }
  for (int i = 0; i < q / 2; ++i) {
    double w = 0.5 * (rule.weights[i] + rule.weights[q - 1 - i]);
    rule.weights[i] = rule.weights[q - 1 - i] = w;
  }
  return rule;
}

const QuadratureRule& cached_gauss_hermite_rule(int q) {
  check_degree(q, kMaxHermiteDegree);
  if (q < 1) fail(ErrorCode::InvalidArgument, "quadrature order must be positive");
  static std::array<std::unique_ptr<QuadratureRule>, kMaxHermiteDegree + 1> cache;
  static std::array<std::once_flag, kMaxHermiteDegree + 1> flags;
  std::call_once(flags[q], [q] { cache[q] = std::make_unique<QuadratureRule>(gauss_hermite_rule(q)); });
  return *cache[q];
}

HermiteCoeffs hermite_expand(const ScalarFn& sigma, int q, double nu, int quad_order) {
  if (q < 0) fail(ErrorCode::InvalidArgument, "expansion degree must be nonnegative");
  if (!(nu > 0)) fail(ErrorCode::InvalidArgument, "scale nu must be positive");
  if (quad_order < 2 * q + 2)
    fail(ErrorCode::InvalidArgument, "quad_order must be at least 2q+2");
  check_degree(q, kMaxMonomialDegree);
  const QuadratureRule& rule = cached_gauss_hermite_rule(quad_order);

  // Work with orthonormal polynomials: c_j = E[sigma(nu t) hn_j(t)] / sqrt(j!).
  std::vector<double> acc(q + 1, 0.0), hn(q + 1);
  for (int i = 0; i < quad_order; ++i) {
    double t = std::sqrt(2.0) * rule.nodes[i];
    double s = sigma(nu * t);
    if (!std::isfinite(s))
      fail(ErrorCode::NonFiniteActivation, "activation is not finite at t=" + std::to_string(nu * t));
    normalized_hermite(q, t, hn.data());
    double ws = rule.weights[i] * s;
    for (int j = 0; j <= q; ++j) acc[j] += ws * hn[j];
  }
  HermiteCoeffs out;
  out.nu = nu;
  out.coeffs.resize(q + 1);
  for (int j = 0; j <= q; ++j)
    out.coeffs[j] = acc[j] / std::sqrt(M_PI) * std::exp(-0.5 * std::lgamma(j + 1.0));
  return out;
}

double hermite_series_eval(const HermiteCoeffs& hc, double t) {
  const double s = t / hc.nu;
  double prev = 1.0, cur = s;
  double sum = hc.coeffs.empty() ? 0.0 : hc.coeffs[0];
  for (int j = 1; j <= hc.degree(); ++j) {
    sum += hc.coeffs[j] * cur;
    double next = s * cur - j * prev;
    prev = cur;
    cur = next;
  }
  return sum;
}

double gaussian_norm_sq(const ScalarFn& f, int quad_order) {
  const QuadratureRule& rule = cached_gauss_hermite_rule(quad_order);
  double acc = 0.0;
  for (int i = 0; i < quad_order; ++i) {
    double v = f(std::sqrt(2.0) * rule.nodes[i]);
    acc += rule.weights[i] * v * v;
  }
  return acc / std::sqrt(M_PI);
}

double hermite_tail_energy(const ScalarFn& sigma, int q, double nu, int quad_order) {
  // Capped so the extended expansion still fits the largest quadrature rule.
  const int top = std::min(4 * std::max(q, 1), (kMaxHermiteDegree - 2) / 2);
  if (q >= top) return 0.0;
  HermiteCoeffs hc = hermite_expand(sigma, top, nu, std::clamp(quad_order, 2 * top + 2, kMaxHermiteDegree));
  double tail = 0.0;
  for (int j = q + 1; j <= top; ++j) {
    double cn = hc.coeffs[j] * std::exp(0.5 * std::lgamma(j + 1.0));
    tail += cn * cn;
  }
  return tail;
}

}  // namespace nke
