#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace nke {

// In-place unnormalized Walsh-Hadamard transform; length must be a power of two.
void fwht(std::span<double> a);

std::size_t next_pow2(std::size_t n);

// Keyed 64-bit mix used to derive independent sub-seeds.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t level, std::uint64_t node);

// x -> sqrt(d_pad / m) * (H / sqrt(d_pad)) D x, sampled at m coordinates.
class Srht {
 public:
  Srht(std::size_t input_dim, std::size_t target_dim, std::uint64_t seed);

  std::size_t input_dim() const { return input_dim_; }
  std::size_t target_dim() const { return target_dim_; }
  std::size_t padded_dim() const { return pad_; }
  const std::vector<double>& signs() const { return signs_; }
  const std::vector<std::uint32_t>& sample_indices() const { return indices_; }

  std::vector<double> apply(std::span<const double> x) const;
  // scratch must hold padded_dim() values.
  void apply_into(std::span<const double> x, std::span<double> out, std::span<double> scratch) const;

 private:
  std::size_t input_dim_, target_dim_, pad_;
  std::vector<double> signs_;
  std::vector<std::uint32_t> indices_;
};

// SRHT of y1 (x) y2 with Kronecker-structured signs, never forming the product:
// out_k = (H D1 y1)_{i_k} (H D2 y2)_{j_k} / sqrt(m).
class TensorSrht {
 public:
  TensorSrht(std::size_t dim1, std::size_t dim2, std::size_t target_dim, std::uint64_t seed);

  std::size_t target_dim() const { return left_.target_dim(); }
  void apply_into(std::span<const double> y1, std::span<const double> y2, std::span<double> out) const;

 private:
  Srht left_, right_;  // sign vectors and index streams for each factor
};

// SRHT of a concatenation of `blocks` inputs of length block_dim, each block zero-padded to a
// power of two. Signs factor as d_s * e_t, so a block's transform H diag(e) b is computed once
// and reused by every concatenation that contains it.
class BlockSrht {
 public:
  BlockSrht(std::size_t blocks, std::size_t block_dim, std::size_t target_dim, std::uint64_t seed);
  std::size_t blocks() const { return blocks_; }
  std::size_t block_dim() const { return block_dim_; }
  std::size_t block_padded_dim() const { return block_pad_; }
  std::size_t target_dim() const { return m_; }
  // out holds block_padded_dim() values.
  void transform_block(std::span<const double> b, std::span<double> out) const;
  // Sketch of scale * (b_0 (+) ... (+) b_{S-1}) from transformed blocks; nullptr marks a zero block.
  void combine(std::span<const double* const> transformed, double scale, std::span<double> out) const;

 private:
  std::size_t blocks_, block_dim_, block_pad_, m_;
  std::vector<double> block_signs_;
  std::vector<double> slot_coef_;     // m x blocks: d_s * H[i_k, s]
  std::vector<std::uint32_t> rows_;   // j_k
};

// Binary tree of sketches for degree-p tensor products, shared across degrees.
class PolySketch {
 public:
  PolySketch(int degree, std::size_t input_dim, std::size_t target_dim, std::uint64_t seed);
  // One input dimension per slot.
  PolySketch(std::vector<std::size_t> leaf_dims, std::size_t target_dim, std::uint64_t seed);

  int degree() const { return degree_; }
  int padded_degree() const { return padded_; }
  std::size_t target_dim() const { return m_; }

  // Sketch of v_1 (x) ... (x) v_p' (x) e_1 (x) ... (x) e_1.
  std::vector<double> tensor(std::span<const std::span<const double>> slots) const;
  // Sketch of x^(x)p_eff; p_eff = 0 gives the first standard basis vector.
  std::vector<double> power(std::span<const double> x, int p_eff) const;
  // Sketches of x^(x)l for l = 0..max_degree, sharing the all-x subtrees.
  std::vector<std::vector<double>> powers(std::span<const double> x, int max_degree) const;
  // Same as tensor / powers with leaf sketches supplied by the caller; leaf[j] stands in for leaf j.
  std::vector<double> tensor_from_leaves(std::vector<std::vector<double>> leaf) const;
  std::vector<std::vector<double>> powers_from_leaves(std::vector<std::vector<double>> leaf) const;

 private:
  void build(std::uint64_t seed);
  std::size_t node_count(int level) const { return static_cast<std::size_t>(padded_ >> level); }

  int degree_, padded_, levels_;
  std::size_t m_;
  std::vector<std::size_t> leaf_dims_;
  std::vector<Srht> leaves_;
  std::vector<std::vector<TensorSrht>> internal_;      // internal_[i - 1][j]
  std::vector<std::vector<std::vector<double>>> e1_;  // sketch of e_1 subtrees, e1_[i][j]
};

}  // namespace nke
