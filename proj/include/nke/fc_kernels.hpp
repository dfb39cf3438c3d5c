#pragma once

#include <Eigen/Dense>
#include <functional>
#include <span>

#include "nke/dual_catalog.hpp"

namespace nke {

struct KernelConfig {
  int depth = 1;
  DualActivation dual;
};

struct NngpNtk {
  double nngp = 0.0;
  double ntk = 0.0;
  // Largest amount by which a layer cosine exceeded 1 in magnitude before clamping.
  double max_cosine_excess = 0.0;
};

enum class KernelKind { Nngp, Ntk };

NngpNtk nngp_ntk_pair(std::span<const double> x, std::span<const double> y, const KernelConfig& cfg);

// Same recursion from the input Gram entries <x,x>, <x,y>, <y,y>.
NngpNtk nngp_ntk_from_gram(double xx, double xy, double yy, const KernelConfig& cfg);

double nngp_homogeneous(std::span<const double> x, std::span<const double> y,
                        const std::function<double(double)>& kappa, int L);

double ntk_homogeneous(std::span<const double> x, std::span<const double> y,
                       const std::function<double(double)>& kappa,
                       const std::function<double(double)>& kappa_prime, int L);

// Rows of X are the data points.
Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& X, const KernelConfig& cfg, KernelKind which);

// Cross kernel between rows of A and rows of B.
Eigen::MatrixXd kernel_matrix_cross(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const KernelConfig& cfg,
                                    KernelKind which);

}  // namespace nke
