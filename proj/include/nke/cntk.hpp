#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <vector>

#include "nke/dual_catalog.hpp"
#include "nke/polysketch.hpp"
#include "nke/series_dual.hpp"

namespace nke {

struct ImageTensor {
  std::size_t d1 = 0, d2 = 0, c = 0;
  std::vector<double> data;  // row-major (i, j, channel)

  ImageTensor() = default;
  ImageTensor(std::size_t rows, std::size_t cols, std::size_t channels)
      : d1(rows), d2(cols), c(channels), data(rows * cols * channels, 0.0) {}

  double& at(std::size_t i, std::size_t j, std::size_t l) { return data[(i * d2 + j) * c + l]; }
  double at(std::size_t i, std::size_t j, std::size_t l) const { return data[(i * d2 + j) * c + l]; }
};

struct CntkConfig {
  int depth = 2;
  int filter = 3;
  DualActivation dual;
  std::size_t sketch_dim = 1024;        // m
  std::size_t output_sketch_dim = 1024; // m'
  std::uint64_t seed = 0;
  std::size_t pixel_budget = 64 * 64;   // exact mode refuses larger images
};

// d1*d2*d1*d2 array indexed (i, j, i', j').
struct PixelGrid4 {
  std::size_t d1 = 0, d2 = 0;
  std::vector<double> v;

  double& operator()(std::size_t i, std::size_t j, std::size_t k, std::size_t l) {
    return v[((i * d2 + j) * d1 + k) * d2 + l];
  }
  double operator()(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const {
    return v[((i * d2 + j) * d1 + k) * d2 + l];
  }
};

// d1*d2 array.
struct NormGrid {
  std::size_t d1 = 0, d2 = 0;
  std::vector<double> v;

  double operator()(std::size_t i, std::size_t j) const { return v[i * d2 + j]; }
};

// Per-layer state of the homogeneous dynamic program; index h = 0..L.
struct CntkTrace {
  std::vector<NormGrid> norms_y, norms_z;
  std::vector<PixelGrid4> gamma, gamma_dot, pi;  // gamma_dot[0] and pi[0] are unused / zero
  double theta = 0.0;
};

double cntk_exact(const ImageTensor& y, const ImageTensor& z, const CntkConfig& cfg);
double cntk_exact_homogeneous(const ImageTensor& y, const ImageTensor& z, const CntkConfig& cfg);
CntkTrace cntk_homogeneous_trace(const ImageTensor& y, const ImageTensor& z, const CntkConfig& cfg);

// N^(h) for h = 0..L.
std::vector<NormGrid> cntk_norm_grids(const ImageTensor& x, int depth, int filter);

// Sketch feature map; all images share the random sketches fixed by the config seed.
class CntkSketcher {
 public:
  CntkSketcher(const CntkConfig& cfg, const PolyCoeffs& kappa, const PolyCoeffs& kappa_prime, std::size_t channels);

  std::size_t feature_dim() const;
  std::vector<double> features(const ImageTensor& x) const;

 private:
  CntkConfig cfg_;
  std::size_t channels_;
  std::vector<int> blocks_;          // degrees with a nonzero kappa or kappa' coefficient
  std::vector<double> a_sqrt_, b_sqrt_;
  int top_degree_ = 0;
  std::vector<std::size_t> phi_dim_;  // phi_dim_[h], h = 0..L
  // Layer h: patch sketch tree with block leaves, and the Q2 sketch of (patch sum of psi) (x) phi_dot.
  std::vector<std::unique_ptr<PolySketch>> z_tree_;     // index h, 1..L
  std::vector<std::vector<BlockSrht>> z_leaf_;          // z_leaf_[h][j], j < top degree
  std::vector<std::unique_ptr<PolySketch>> q2_tree_;    // index h, 2..L
  std::vector<std::unique_ptr<BlockSrht>> q2_left_;
  std::vector<std::unique_ptr<Srht>> q2_right_;
};

std::vector<double> cntk_sketch_features(const ImageTensor& x, const CntkConfig& cfg, const PolyCoeffs& kappa_poly,
                                         const PolyCoeffs& kappa_prime_poly);

enum class CntkMode { Exact, Sketch };

// Sketch mode needs kappa / kappa_prime polynomials; exact mode uses the homogeneous program
// when the dual is homogeneous and the general one otherwise.
Eigen::MatrixXd cntk_kernel_matrix(const std::vector<ImageTensor>& images, const CntkConfig& cfg, CntkMode mode,
                                   const PolyCoeffs* kappa_poly = nullptr,
                                   const PolyCoeffs* kappa_prime_poly = nullptr);

}  // namespace nke
