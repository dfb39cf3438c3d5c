#include "nke/bench.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "nke/error.hpp"
#include "nke/parallel.hpp"
#include "nke/polysketch.hpp"
#include "nke/series_dual.hpp"

namespace nke {

Eigen::MatrixXd monte_carlo_dual(const ActivationSpec& spec, const Eigen::MatrixXd& X, std::size_t samples,
                                 std::uint64_t seed) {
  if (samples == 0) fail(ErrorCode::InvalidArgument, "Monte Carlo needs at least one sample");
  if (!spec.scalar_fn) fail(ErrorCode::NoScalarForm, spec.name + " has no scalar form");
  const Eigen::Index d = X.cols();
  std::mt19937_64 eng(derive_seed(seed, 7, 0));
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd W(static_cast<Eigen::Index>(samples), d);
  for (Eigen::Index s = 0; s < W.rows(); ++s)
    for (Eigen::Index k = 0; k < d; ++k) W(s, k) = gauss(eng);
  Eigen::MatrixXd Phi = W * X.transpose();
  for (Eigen::Index t = 0; t < Phi.size(); ++t) {
    const double v = spec.scalar_fn(Phi.data()[t]);
    if (!std::isfinite(v)) fail(ErrorCode::NonFiniteActivation, spec.name + " produced a non-finite value");
    Phi.data()[t] = v;
  }
  return Phi.transpose() * Phi / static_cast<double>(samples);
}

Eigen::MatrixXd hermite_dual_matrix(const ActivationSpec& spec, const Eigen::MatrixXd& X, int degree) {
  if (!spec.scalar_fn) fail(ErrorCode::NoScalarForm, spec.name + " has no scalar form");
  const double nu = std::max(1.0, X.rowwise().norm().maxCoeff());
  const int quad = std::min(kMaxHermiteDegree, std::max(2 * degree + 2, 160));
  HermiteCoeffs hc = hermite_expand(spec.scalar_fn, degree, nu, quad);
  return dual_kernel_poly_matrix(hermite_to_poly(hc), X);
}

Eigen::MatrixXd dual_matrix(const DualActivation& dual, const Eigen::MatrixXd& X) {
  const Eigen::Index n = X.rows();
  Eigen::VectorXd norms = X.rowwise().norm();
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(norms[i] > 0)) throw Error(ErrorCode::ZeroNormInput, "row " + std::to_string(i) + " has zero norm", i);
  Eigen::MatrixXd G = X * X.transpose();
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) {
      const double c = std::clamp(G(i, j) / (norms[i] * norms[j]), -1.0, 1.0);
      K(i, j) = K(j, i) = dual.eval(norms[i], norms[j], c);
    }
  return K;
}

double relative_frobenius_error(const Eigen::MatrixXd& approx, const Eigen::MatrixXd& exact) {
  if (approx.rows() != exact.rows() || approx.cols() != exact.cols())
    fail(ErrorCode::ShapeMismatch, "matrices differ in shape");
  const double den = exact.norm();
  if (!(den > 0)) fail(ErrorCode::ZeroDenominator, "reference matrix has zero norm");
  return (approx - exact).norm() / den;
}

std::vector<double> default_lambda_grid() {
  std::vector<double> g(20);
  for (int i = 0; i < 20; ++i) g[i] = std::pow(10.0, -10.0 + 12.0 * i / 19.0);
  return g;
}

double classification_accuracy(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth) {
  if (pred.rows() != truth.rows() || pred.cols() != truth.cols())
    fail(ErrorCode::ShapeMismatch, "prediction and target shapes differ");
  if (pred.rows() == 0) return 0.0;
  Eigen::Index hits = 0;
  for (Eigen::Index i = 0; i < pred.rows(); ++i) {
    if (pred.cols() == 1) {
      hits += (pred(i, 0) >= 0) == (truth(i, 0) >= 0);
    } else {
      Eigen::Index a, b;
      pred.row(i).maxCoeff(&a);
      truth.row(i).maxCoeff(&b);
      hits += a == b;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(pred.rows());
}

namespace {

void check_lambdas(const std::vector<double>& lambdas) {
  if (lambdas.empty()) fail(ErrorCode::InvalidArgument, "empty ridge parameter list");
  for (double l : lambdas)
    if (!(l > 0)) fail(ErrorCode::InvalidArgument, "ridge parameters must be positive");
}

// Solves (G + lambda I) X = B with jitter escalation; records the lambda used.
Eigen::MatrixXd regularized_solve(const Eigen::MatrixXd& G, const Eigen::MatrixXd& B, double lambda, double& used) {
  for (double mult : {1.0, 10.0, 100.0}) {
    Eigen::MatrixXd A = G;
    A.diagonal().array() += lambda * mult;
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() == Eigen::Success) {
      used = lambda * mult;
      Eigen::MatrixXd sol = llt.solve(B);
      if (sol.allFinite()) return sol;
    }
  }
  fail(ErrorCode::SingularSystem, "ridge system is not positive definite even with 100x jitter");
}

RidgeResult finish(RidgeResult r, const Eigen::MatrixXd& Y_test) {
  r.best = 0;
  for (std::size_t i = 0; i < r.lambdas.size(); ++i) {
    r.test_accuracy.push_back(classification_accuracy(r.test_predictions[i], Y_test));
    if (r.test_accuracy[i] > r.test_accuracy[r.best]) r.best = i;
  }
  return r;
}

}  // namespace

RidgeResult ridge_regress_kernel(const Eigen::MatrixXd& K_train, const Eigen::MatrixXd& K_test,
                                 const Eigen::MatrixXd& Y_train, const Eigen::MatrixXd& Y_test,
                                 const std::vector<double>& lambdas) {
  check_lambdas(lambdas);
  if (K_train.rows() != K_train.cols() || K_train.rows() != Y_train.rows() || K_test.cols() != K_train.cols() ||
      K_test.rows() != Y_test.rows() || Y_train.cols() != Y_test.cols())
    fail(ErrorCode::ShapeMismatch, "ridge inputs have inconsistent shapes");
  RidgeResult r;
  r.lambdas = lambdas;
  for (double l : lambdas) {
    double used = l;
    Eigen::MatrixXd alpha = regularized_solve(K_train, Y_train, l, used);
    r.jitter.push_back(used);
    r.test_predictions.push_back(K_test * alpha);
  }
  return finish(std::move(r), Y_test);
}

RidgeResult ridge_regress_features(const Eigen::MatrixXd& F_train, const Eigen::MatrixXd& F_test,
                                   const Eigen::MatrixXd& Y_train, const Eigen::MatrixXd& Y_test,
                                   const std::vector<double>& lambdas) {
  check_lambdas(lambdas);
  if (F_train.rows() != F_test.rows() || F_train.cols() != Y_train.rows() || F_test.cols() != Y_test.rows() ||
      Y_train.cols() != Y_test.cols())
    fail(ErrorCode::ShapeMismatch, "ridge inputs have inconsistent shapes");
  if (F_train.rows() > F_train.cols()) {
    // More features than points: the n x n form gives the same predictions.
    return ridge_regress_kernel(F_train.transpose() * F_train, F_test.transpose() * F_train, Y_train, Y_test,
                                lambdas);
  }
  RidgeResult r;
  r.lambdas = lambdas;
  const Eigen::MatrixXd G = F_train * F_train.transpose();
  const Eigen::MatrixXd B = F_train * Y_train;
  for (double l : lambdas) {
    double used = l;
    Eigen::MatrixXd w = regularized_solve(G, B, l, used);
    r.jitter.push_back(used);
    r.test_predictions.push_back(F_test.transpose() * w);
  }
  return finish(std::move(r), Y_test);
}

double statistical_dimension(const Eigen::MatrixXd& K, double lambda) {
  if (!(lambda > 0)) fail(ErrorCode::InvalidArgument, "lambda must be positive");
  if (K.rows() != K.cols()) fail(ErrorCode::NotSymmetric, "matrix is not square");
  const double scale = std::max(1.0, K.cwiseAbs().maxCoeff());
  if ((K - K.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale) fail(ErrorCode::NotSymmetric, "matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) fail(ErrorCode::EigenFailure, "eigendecomposition failed");
  double s = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double v = std::max(es.eigenvalues()[i], 0.0);
    s += v / (v + lambda);
  }
  return s;
}

}  // namespace nke
