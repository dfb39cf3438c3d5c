#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "nke/dual_catalog.hpp"

namespace nke {

// (1/m) Phi^T Phi with Phi_{s,i} = sigma(<w_s, x_i>), w_s ~ N(0, I); rows of X are points.
Eigen::MatrixXd monte_carlo_dual(const ActivationSpec& spec, const Eigen::MatrixXd& X, std::size_t samples,
                                 std::uint64_t seed);

// Truncated-Hermite dual kernel matrix of sigma at nu = max(1, largest row norm).
Eigen::MatrixXd hermite_dual_matrix(const ActivationSpec& spec, const Eigen::MatrixXd& X, int degree);

// Closed-form dual kernel matrix k(|x_i|, |x_j|, cos).
Eigen::MatrixXd dual_matrix(const DualActivation& dual, const Eigen::MatrixXd& X);

double relative_frobenius_error(const Eigen::MatrixXd& approx, const Eigen::MatrixXd& exact);

std::vector<double> default_lambda_grid();

struct RidgeResult {
  std::vector<double> lambdas;
  std::vector<Eigen::MatrixXd> test_predictions;  // one per lambda, rows = test points
  std::vector<double> test_accuracy;
  std::vector<double> jitter;                      // regularizer actually used
  std::size_t best = 0;
};

// Kernel mode: K_train n x n, K_test t x n, targets one row per point.
RidgeResult ridge_regress_kernel(const Eigen::MatrixXd& K_train, const Eigen::MatrixXd& K_test,
                                 const Eigen::MatrixXd& Y_train, const Eigen::MatrixXd& Y_test,
                                 const std::vector<double>& lambdas);

// Feature mode: columns of F are points.
RidgeResult ridge_regress_features(const Eigen::MatrixXd& F_train, const Eigen::MatrixXd& F_test,
                                   const Eigen::MatrixXd& Y_train, const Eigen::MatrixXd& Y_test,
                                   const std::vector<double>& lambdas);

// Fraction of rows whose argmax matches; single-column targets compare signs.
double classification_accuracy(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth);

double statistical_dimension(const Eigen::MatrixXd& K, double lambda);

}  // namespace nke
