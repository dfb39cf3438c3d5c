#include "nke/polysketch.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <string>

#include "nke/error.hpp"

namespace nke {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::vector<double>& scratch(int slot, std::size_t n) {
  thread_local std::vector<double> buf[4];
  if (buf[slot].size() < n) buf[slot].resize(n);
  return buf[slot];
}

void check_dim(std::size_t got, std::size_t want) {
  if (got != want)
    fail(ErrorCode::DimensionMismatch,
         "sketch input has length " + std::to_string(got) + ", expected " + std::to_string(want));
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t level, std::uint64_t node) {
  return splitmix(splitmix(splitmix(master) ^ (level * 0xD6E8FEB86659FD93ULL)) ^ node);
}

Srht::Srht(std::size_t input_dim, std::size_t target_dim, std::uint64_t seed)
    : input_dim_(input_dim), target_dim_(target_dim), pad_(next_pow2(input_dim)) {
  if (input_dim == 0 || target_dim == 0) fail(ErrorCode::InvalidArgument, "sketch dimensions must be positive");
  if (pad_ > (std::size_t{1} << 31)) fail(ErrorCode::InvalidArgument, "sketch input dimension too large");
  std::mt19937_64 eng(seed);
  signs_.resize(pad_);
  for (auto& s : signs_) s = (eng() >> 63) ? -1.0 : 1.0;
  indices_.resize(target_dim_);
  for (auto& i : indices_) i = static_cast<std::uint32_t>(eng() & (pad_ - 1));
}

void Srht::apply_into(std::span<const double> x, std::span<double> out, std::span<double> buf) const {
  check_dim(x.size(), input_dim_);
  for (std::size_t i = 0; i < input_dim_; ++i) buf[i] = signs_[i] * x[i];
  for (std::size_t i = input_dim_; i < pad_; ++i) buf[i] = 0.0;
  fwht(buf.first(pad_));
  const double scale = 1.0 / std::sqrt(static_cast<double>(target_dim_));
  for (std::size_t k = 0; k < target_dim_; ++k) out[k] = scale * buf[indices_[k]];
}

std::vector<double> Srht::apply(std::span<const double> x) const {
  std::vector<double> out(target_dim_);
  apply_into(x, out, scratch(0, pad_));
  return out;
}

TensorSrht::TensorSrht(std::size_t dim1, std::size_t dim2, std::size_t target_dim, std::uint64_t seed)
    : left_(dim1, target_dim, derive_seed(seed, 0, 1)), right_(dim2, target_dim, derive_seed(seed, 0, 2)) {}

void TensorSrht::apply_into(std::span<const double> y1, std::span<const double> y2, std::span<double> out) const {
  const std::size_t m = left_.target_dim();
  std::vector<double>& b1 = scratch(1, left_.padded_dim());
  std::vector<double>& b2 = scratch(2, right_.padded_dim());
  std::vector<double>& u = scratch(3, m);
  // Each factor is an unscaled SRHT; the product carries one 1/sqrt(m).
  left_.apply_into(y1, out, b1);
  right_.apply_into(y2, std::span<double>(u.data(), m), b2);
  const double fix = std::sqrt(static_cast<double>(m));
  for (std::size_t k = 0; k < m; ++k) out[k] *= u[k] * fix;
}

BlockSrht::BlockSrht(std::size_t blocks, std::size_t block_dim, std::size_t target_dim, std::uint64_t seed)
    : blocks_(blocks), block_dim_(block_dim), block_pad_(next_pow2(block_dim)), m_(target_dim) {
  if (blocks == 0 || block_dim == 0 || target_dim == 0) fail(ErrorCode::InvalidArgument, "sketch dimensions must be positive");
  const std::size_t slot_pad = next_pow2(blocks);
  if (slot_pad * block_pad_ > (std::size_t{1} << 31)) fail(ErrorCode::InvalidArgument, "sketch input dimension too large");
  std::mt19937_64 eng(seed);
  std::vector<double> slot_signs(blocks);
  for (auto& v : slot_signs) v = (eng() >> 63) ? -1.0 : 1.0;
  block_signs_.resize(block_pad_);
  for (auto& v : block_signs_) v = (eng() >> 63) ? -1.0 : 1.0;
  slot_coef_.resize(m_ * blocks_);
  rows_.resize(m_);
  for (std::size_t k = 0; k < m_; ++k) {
    const std::uint64_t idx = eng() & (slot_pad * block_pad_ - 1);
    const std::uint64_t i = idx / block_pad_;
    rows_[k] = static_cast<std::uint32_t>(idx % block_pad_);
    for (std::size_t s = 0; s < blocks_; ++s)
      slot_coef_[k * blocks_ + s] = (std::popcount(i & s) & 1 ? -1.0 : 1.0) * slot_signs[s];
  }
}

void BlockSrht::transform_block(std::span<const double> b, std::span<double> out) const {
  check_dim(b.size(), block_dim_);
  check_dim(out.size(), block_pad_);
  for (std::size_t t = 0; t < block_dim_; ++t) out[t] = block_signs_[t] * b[t];
  std::fill(out.begin() + block_dim_, out.end(), 0.0);
  fwht(out);
}

void BlockSrht::combine(std::span<const double* const> transformed, double scale, std::span<double> out) const {
  check_dim(transformed.size(), blocks_);
  check_dim(out.size(), m_);
  const double f = scale / std::sqrt(static_cast<double>(m_));
  for (std::size_t k = 0; k < m_; ++k) {
    const double* coef = slot_coef_.data() + k * blocks_;
    const std::size_t j = rows_[k];
    double acc = 0.0;
    for (std::size_t s = 0; s < blocks_; ++s)
      if (transformed[s]) acc += coef[s] * transformed[s][j];
    out[k] = f * acc;
  }
}

PolySketch::PolySketch(int degree, std::size_t input_dim, std::size_t target_dim, std::uint64_t seed)
    : PolySketch(std::vector<std::size_t>(degree > 0 ? degree : 0, input_dim), target_dim, seed) {
  if (degree < 1) fail(ErrorCode::InvalidArgument, "sketch degree must be at least 1");
}

PolySketch::PolySketch(std::vector<std::size_t> leaf_dims, std::size_t target_dim, std::uint64_t seed)
    : degree_(static_cast<int>(leaf_dims.size())), m_(target_dim), leaf_dims_(std::move(leaf_dims)) {
  if (degree_ < 1) fail(ErrorCode::InvalidArgument, "sketch degree must be at least 1");
  if (m_ == 0) fail(ErrorCode::InvalidArgument, "target dimension must be positive");
  padded_ = static_cast<int>(next_pow2(static_cast<std::size_t>(degree_)));
  levels_ = 0;
  while ((1 << levels_) < padded_) ++levels_;
  build(seed);
}

void PolySketch::build(std::uint64_t seed) {
  // Padding leaves act on R^1; their e_1 image has the same law as any leaf's.
  for (int j = 0; j < padded_; ++j) {
    std::size_t d = j < degree_ ? leaf_dims_[j] : 1;
    leaves_.emplace_back(d, m_, derive_seed(seed, 0, j));
  }
  for (int i = 1; i <= levels_; ++i) {
    internal_.emplace_back();
    for (std::size_t j = 0; j < node_count(i); ++j) internal_.back().emplace_back(m_, m_, m_, derive_seed(seed, i, j));
  }
  e1_.resize(levels_ + 1);
  for (int j = 0; j < padded_; ++j) {
    std::vector<double> e(leaves_[j].input_dim(), 0.0);
    e[0] = 1.0;
    e1_[0].push_back(leaves_[j].apply(e));
  }
  for (int i = 1; i <= levels_; ++i)
    for (std::size_t j = 0; j < node_count(i); ++j) {
      std::vector<double> v(m_);
      internal_[i - 1][j].apply_into(e1_[i - 1][2 * j], e1_[i - 1][2 * j + 1], v);
      e1_[i].push_back(std::move(v));
    }
}

std::vector<double> PolySketch::tensor(std::span<const std::span<const double>> slots) const {
  if (slots.size() > static_cast<std::size_t>(degree_)) fail(ErrorCode::DimensionMismatch, "more tensor slots than sketch degree");
  std::vector<std::vector<double>> leaf(slots.size(), std::vector<double>(m_));
  for (std::size_t j = 0; j < slots.size(); ++j)
    leaves_[j].apply_into(slots[j], leaf[j], scratch(0, leaves_[j].padded_dim()));
  return tensor_from_leaves(std::move(leaf));
}

std::vector<double> PolySketch::tensor_from_leaves(std::vector<std::vector<double>> leaf) const {
  const std::size_t used = leaf.size();
  if (used > static_cast<std::size_t>(degree_)) fail(ErrorCode::DimensionMismatch, "more tensor slots than sketch degree");
  for (const auto& v : leaf) check_dim(v.size(), m_);
  if (used == 0) {
    std::vector<double> e(m_, 0.0);
    e[0] = 1.0;
    return e;
  }
  // Level by level; nodes whose leaves are all padding reuse the precomputed e_1 sketches.
  std::vector<std::vector<double>> cur = std::move(leaf);
  cur.resize(padded_);
  std::size_t live = used;  // nodes [0, live) hold data
  for (int i = 1; i <= levels_; ++i) {
    std::size_t next_live = (live + 1) / 2;
    std::vector<std::vector<double>> nxt(node_count(i));
    for (std::size_t j = 0; j < next_live; ++j) {
      const std::vector<double>& l = cur[2 * j];
      const std::vector<double>& r = (2 * j + 1 < live) ? cur[2 * j + 1] : e1_[i - 1][2 * j + 1];
      nxt[j].resize(m_);
      internal_[i - 1][j].apply_into(l, r, nxt[j]);
    }
    cur = std::move(nxt);
    live = next_live;
  }
  return std::move(cur[0]);
}

std::vector<double> PolySketch::power(std::span<const double> x, int p_eff) const {
  if (p_eff < 0 || p_eff > degree_) fail(ErrorCode::InvalidArgument, "power degree out of range");
  std::vector<std::span<const double>> slots(p_eff, x);
  return tensor(slots);
}

std::vector<std::vector<double>> PolySketch::powers(std::span<const double> x, int max_degree) const {
  if (max_degree < 0 || max_degree > degree_) fail(ErrorCode::InvalidArgument, "power degree out of range");
  std::vector<std::vector<double>> leaf(max_degree, std::vector<double>(m_));
  for (int j = 0; j < max_degree; ++j) leaves_[j].apply_into(x, leaf[j], scratch(0, leaves_[j].padded_dim()));
  return powers_from_leaves(std::move(leaf));
}

std::vector<std::vector<double>> PolySketch::powers_from_leaves(std::vector<std::vector<double>> leaf) const {
  const int max_degree = static_cast<int>(leaf.size());
  if (max_degree > degree_) fail(ErrorCode::InvalidArgument, "power degree out of range");
  for (const auto& v : leaf) check_dim(v.size(), m_);
  std::vector<std::vector<double>> out(max_degree + 1);
  out[0].assign(m_, 0.0);
  out[0][0] = 1.0;
  if (max_degree == 0) return out;

  // full[i][j]: node (i, j) with every leaf holding x.
  std::vector<std::vector<std::vector<double>>> full(levels_ + 1);
  full[0] = std::move(leaf);
  for (int i = 1; i <= levels_; ++i) {
    const std::size_t width = std::size_t{1} << i;
    const std::size_t count = static_cast<std::size_t>(max_degree) / width;
    full[i].resize(count);
    for (std::size_t j = 0; j < count; ++j) {
      full[i][j].resize(m_);
      internal_[i - 1][j].apply_into(full[i - 1][2 * j], full[i - 1][2 * j + 1], full[i][j]);
    }
  }
  if (static_cast<std::size_t>(max_degree) == static_cast<std::size_t>(padded_)) out[max_degree] = full[levels_][0];

  std::vector<std::vector<double>> mixed(levels_ + 1, std::vector<double>(m_));
  for (int ell = 1; ell <= max_degree; ++ell) {
    if (ell == padded_) break;
    // Walk up the single chain of nodes that straddle the x / e_1 boundary.
    const std::vector<double>* below = nullptr;  // mixed node at the previous level, if any
    for (int i = 1; i <= levels_; ++i) {
      const std::size_t width = std::size_t{1} << (i - 1);
      const std::size_t j = static_cast<std::size_t>(ell) >> i;
      auto child = [&](std::size_t c) -> const std::vector<double>& {
        const std::size_t lo = c * width, hi = lo + width;
        if (hi <= static_cast<std::size_t>(ell)) return full[i - 1][c];
        if (lo >= static_cast<std::size_t>(ell)) return e1_[i - 1][c];
        return *below;
      };
      const std::size_t lo = j << i, hi = lo + (width << 1);
      if (hi <= static_cast<std::size_t>(ell) || lo >= static_cast<std::size_t>(ell)) {
        below = nullptr;
        continue;
      }
      internal_[i - 1][j].apply_into(child(2 * j), child(2 * j + 1), mixed[i]);
      below = &mixed[i];
    }
    out[ell] = mixed[levels_];
  }
  return out;
}

}  // namespace nke
