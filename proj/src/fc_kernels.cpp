#include "nke/fc_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "nke/error.hpp"
#include "nke/parallel.hpp"

namespace nke {

namespace {

void check_config(const KernelConfig& cfg) {
  if (cfg.depth < 1) fail(ErrorCode::InvalidArgument, "depth must be at least 1");
  if (!cfg.dual.eval) fail(ErrorCode::InvalidArgument, "kernel config has no dual activation");
}

double cosine(double xy, double a, double b, double& excess) {
  const double c = xy / (a * b);
  excess = std::max(excess, std::abs(c) - 1.0);
  return std::clamp(c, -1.0, 1.0);
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) fail(ErrorCode::NonFiniteKernel, std::string("non-finite ") + what + " in recursion");
}

struct Norms {
  double nx, ny, c;
};

Norms cosine_of(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail(ErrorCode::DimensionMismatch, "input vectors differ in length");
  const double xx = std::inner_product(x.begin(), x.end(), x.begin(), 0.0);
  const double yy = std::inner_product(y.begin(), y.end(), y.begin(), 0.0);
  const double xy = std::inner_product(x.begin(), x.end(), y.begin(), 0.0);
  if (!(xx > 0) || !(yy > 0)) fail(ErrorCode::ZeroNormInput, "input vector has zero norm");
  const double nx = std::sqrt(xx), ny = std::sqrt(yy);
  return {nx, ny, std::clamp(xy / (nx * ny), -1.0, 1.0)};
}

}  // namespace

NngpNtk nngp_ntk_from_gram(double xx, double xy, double yy, const KernelConfig& cfg) {
  check_config(cfg);
  if (!(xx > 0) || !(yy > 0)) fail(ErrorCode::ZeroNormInput, "input vector has zero norm");
  NngpNtk out;
  double kxx = xx, kyy = yy, kxy = xy, theta = xy;
  for (int h = 1; h <= cfg.depth; ++h) {
    if (!(kxx > 0) || !(kyy > 0)) fail(ErrorCode::NonFiniteKernel, "layer variance collapsed to zero");
    const double a = std::sqrt(kxx), b = std::sqrt(kyy);
    const double c = cosine(kxy, a, b, out.max_cosine_excess);
    const double nxy = cfg.dual.eval(a, b, c);
    const double dot = derivative_dual(cfg.dual, a, b, c);
    kxx = cfg.dual.eval(a, a, 1.0);
    kyy = cfg.dual.eval(b, b, 1.0);
    kxy = nxy;
    theta = theta * dot + kxy;
    require_finite(kxy, "NNGP value");
    require_finite(kxx, "NNGP variance");
    require_finite(kyy, "NNGP variance");
    require_finite(theta, "NTK value");
  }
  out.nngp = kxy;
  out.ntk = theta;
  return out;
}

NngpNtk nngp_ntk_pair(std::span<const double> x, std::span<const double> y, const KernelConfig& cfg) {
  if (x.size() != y.size()) fail(ErrorCode::DimensionMismatch, "input vectors differ in length");
  return nngp_ntk_from_gram(std::inner_product(x.begin(), x.end(), x.begin(), 0.0),
                            std::inner_product(x.begin(), x.end(), y.begin(), 0.0),
                            std::inner_product(y.begin(), y.end(), y.begin(), 0.0), cfg);
}

double nngp_homogeneous(std::span<const double> x, std::span<const double> y,
                        const std::function<double(double)>& kappa, int L) {
  if (L < 1) fail(ErrorCode::InvalidArgument, "depth must be at least 1");
  Norms n = cosine_of(x, y);
  double t = n.c;
  for (int h = 0; h < L; ++h) t = kappa(t);
  return n.nx * n.ny * t;
}

double ntk_homogeneous(std::span<const double> x, std::span<const double> y,
                       const std::function<double(double)>& kappa,
                       const std::function<double(double)>& kappa_prime, int L) {
  if (L < 1) fail(ErrorCode::InvalidArgument, "depth must be at least 1");
  Norms n = cosine_of(x, y);
  // comp[h] = kappa^{oh}(t), deriv[i] = kappa'(comp[i])
  std::vector<double> comp(L + 1), deriv(L);
  comp[0] = n.c;
  for (int h = 1; h <= L; ++h) comp[h] = kappa(comp[h - 1]);
  for (int i = 0; i < L; ++i) deriv[i] = kappa_prime(comp[i]);
  double sum = 0.0;
  for (int h = 0; h <= L; ++h) {
    double prod = 1.0;
    for (int i = h; i < L; ++i) prod *= deriv[i];
    sum += comp[h] * prod;
  }
  return n.nx * n.ny * sum;
}

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& X, const KernelConfig& cfg, KernelKind which) {
  check_config(cfg);
  const Eigen::Index n = X.rows();
  Eigen::VectorXd sq = X.rowwise().squaredNorm();
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(sq[i] > 0)) throw Error(ErrorCode::ZeroNormInput, "row " + std::to_string(i) + " has zero norm", i);
  Eigen::MatrixXd G = X * X.transpose();
  Eigen::MatrixXd K(n, n);
  parallel_for(static_cast<std::size_t>(n), 8, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i)
      for (Eigen::Index j = static_cast<Eigen::Index>(i); j < n; ++j) {
        NngpNtk r = nngp_ntk_from_gram(sq[i], G(i, j), sq[j], cfg);
        double v = which == KernelKind::Nngp ? r.nngp : r.ntk;
        K(i, j) = v;
        K(j, i) = v;
      }
  });
  return K;
}

Eigen::MatrixXd kernel_matrix_cross(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const KernelConfig& cfg,
                                    KernelKind which) {
  check_config(cfg);
  if (A.cols() != B.cols()) fail(ErrorCode::DimensionMismatch, "feature dimensions differ");
  Eigen::VectorXd sa = A.rowwise().squaredNorm(), sb = B.rowwise().squaredNorm();
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    if (!(sa[i] > 0)) throw Error(ErrorCode::ZeroNormInput, "row " + std::to_string(i) + " has zero norm", i);
  for (Eigen::Index i = 0; i < B.rows(); ++i)
    if (!(sb[i] > 0)) throw Error(ErrorCode::ZeroNormInput, "row " + std::to_string(i) + " has zero norm", i);
  Eigen::MatrixXd G = A * B.transpose();
  Eigen::MatrixXd K(A.rows(), B.rows());
  parallel_for(static_cast<std::size_t>(A.rows()), 8, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i)
      for (Eigen::Index j = 0; j < B.rows(); ++j) {
        NngpNtk r = nngp_ntk_from_gram(sa[i], G(i, j), sb[j], cfg);
        K(i, j) = which == KernelKind::Nngp ? r.nngp : r.ntk;
      }
  });
  return K;
}

}  // namespace nke
