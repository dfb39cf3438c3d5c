#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "nke/polysketch.hpp"
#include "nke/series_dual.hpp"

namespace nke {

struct ComposedPoly {
  std::vector<double> coeffs;
  // Upper bound on |exact(c) - truncated(c)| for |c| <= 1.
  double truncation_tail = 0.0;

  int degree() const { return static_cast<int>(coeffs.size()) - 1; }
  double operator()(double t) const { return PolyCoeffs{coeffs}(t); }
};

struct EmbedConfig {
  PolyCoeffs kappa_poly;
  PolyCoeffs kappa_prime_poly;
  int depth = 1;
  std::size_t sketch_dim = 1024;
  int max_degree = 64;
  std::uint64_t seed = 0;

  // Validates kappa and sets kappa_prime to its formal derivative.
  static EmbedConfig make(PolyCoeffs kappa, int depth, std::size_t sketch_dim, int max_degree, std::uint64_t seed);
};

ComposedPoly compose_poly(const PolyCoeffs& kappa, int L, int p_max);

// sum_h kappa^{oh}(t) prod_{i=h}^{L-1} kappa'(kappa^{oi}(t)), truncated at max_degree.
ComposedPoly ntk_poly(const EmbedConfig& cfg);

std::pair<PolyCoeffs, PolyCoeffs> taylor_normalized_gaussian(int q);

// Truncated dot-product factor sum_j c_j^2 j! t^j of a homogeneous activation's Hermite
// expansion; nonnegative by construction.
PolyCoeffs kappa_from_hermite(const HermiteCoeffs& hc);

// (kappa, kappa') truncated at degree q for a degree-1 homogeneous catalog entry.
// normalized_gaussian uses its Taylor series, other entries their Hermite expansion at nu = 1.
std::pair<PolyCoeffs, PolyCoeffs> dot_product_polys(std::string_view name, std::span<const double> params, int q);

struct Embedding {
  std::vector<double> phi;  // NNGP features
  std::vector<double> psi;  // NTK features
};

class HomogeneousEmbedder {
 public:
  HomogeneousEmbedder(const EmbedConfig& cfg, std::size_t input_dim);

  const ComposedPoly& nngp_poly() const { return P_; }
  const ComposedPoly& ntk_poly() const { return R_; }
  std::size_t phi_dim() const { return phi_degrees_.size() * cfg_.sketch_dim; }
  std::size_t psi_dim() const { return psi_degrees_.size() * cfg_.sketch_dim; }
  const std::vector<int>& phi_degrees() const { return phi_degrees_; }
  const std::vector<int>& psi_degrees() const { return psi_degrees_; }

  Embedding embed(std::span<const double> x) const;
  // Columns are points; rows of X are inputs.
  std::pair<Eigen::MatrixXd, Eigen::MatrixXd> embed_rows(const Eigen::MatrixXd& X) const;

 private:
  EmbedConfig cfg_;
  std::size_t input_dim_;
  ComposedPoly P_, R_;
  std::vector<int> phi_degrees_, psi_degrees_;
  int top_degree_ = 0;
  std::unique_ptr<PolySketch> sketch_;
};

Embedding embed_point(std::span<const double> x, const EmbedConfig& cfg);
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> embed_dataset(const Eigen::MatrixXd& X, const EmbedConfig& cfg);

}  // namespace nke
