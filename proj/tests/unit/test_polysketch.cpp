#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <random>
#include <span>

#include "nke/error.hpp"
#include "nke/polysketch.hpp"
#include "oracles.hpp"

using namespace nke;

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

std::vector<double> unit(std::vector<double> v) {
  const double n = std::sqrt(dot(v, v));
  for (auto& x : v) x /= n;
  return v;
}

// Dense Walsh-Hadamard matrix product by definition: H_{ij} = (-1)^{popcount(i & j)}.
std::vector<double> hadamard_by_definition(const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<double> y(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) y[i] += (std::popcount(i & j) % 2 ? -1.0 : 1.0) * x[j];
  return y;
}

}  // namespace

TEST(Fwht, MatchesDefinition) {
  std::mt19937_64 eng(1);
  for (std::size_t n : {1u, 2u, 4u, 8u, 64u, 1024u, 8192u}) {
    auto x = oracle::random_vector(eng, n);
    const auto want = hadamard_by_definition(x);
    fwht(x);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(x[i], want[i], 1e-9 * std::sqrt(double(n))) << n;
  }
}

TEST(Fwht, RejectsNonPowerOfTwo) {
  std::vector<double> x(6, 1.0);
  EXPECT_THROW(fwht(x), Error);
}

TEST(Srht, StructureAndDeterminism) {
  const Srht s(10, 32, 123);
  EXPECT_EQ(s.padded_dim(), 16u);
  for (double v : s.signs()) EXPECT_TRUE(v == 1.0 || v == -1.0);
  for (auto i : s.sample_indices()) EXPECT_LT(i, 16u);
  const Srht t(10, 32, 123);
  EXPECT_EQ(s.signs(), t.signs());
  EXPECT_EQ(s.sample_indices(), t.sample_indices());
}

TEST(Srht, MatchesExplicitFormula) {
  std::mt19937_64 eng(2);
  const Srht s(5, 12, 9);
  const auto x = oracle::random_vector(eng, 5);
  std::vector<double> y(8, 0.0);
  for (int i = 0; i < 5; ++i) y[i] = s.signs()[i] * x[i];
  const auto hy = hadamard_by_definition(y);
  const auto out = s.apply(x);
  for (int k = 0; k < 12; ++k) EXPECT_NEAR(out[k], hy[s.sample_indices()[k]] / std::sqrt(12.0), 1e-13);
}

TEST(Srht, LinearAndZero) {
  std::mt19937_64 eng(3);
  const Srht s(20, 64, 5);
  const std::vector<double> z(20, 0.0);
  for (double v : s.apply(z)) EXPECT_EQ(v, 0.0);
  const auto x = oracle::random_vector(eng, 20);
  auto x3 = x;
  for (auto& v : x3) v *= -2.5;
  const auto a = s.apply(x), b = s.apply(x3);
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(b[k], -2.5 * a[k], 1e-12);
  EXPECT_THROW(s.apply(std::vector<double>(19, 1.0)), Error);
}

TEST(Srht, UnbiasedNorm) {
  std::mt19937_64 eng(4);
  const auto x = oracle::random_vector(eng, 30);
  double mean = 0;
  for (int seed = 0; seed < 500; ++seed) {
    const auto y = Srht(30, 64, seed).apply(x);
    mean += dot(y, y);
  }
  mean /= 500;
  EXPECT_NEAR(mean / dot(x, x), 1.0, 0.05);
}

TEST(DeriveSeed, DistinctAndStable) {
  EXPECT_EQ(derive_seed(1, 2, 3), derive_seed(1, 2, 3));
  EXPECT_NE(derive_seed(1, 2, 3), derive_seed(1, 3, 2));
  EXPECT_NE(derive_seed(1, 0, 0), derive_seed(2, 0, 0));
}

TEST(PolySketch, DegreeOneIsTheLeafSketch) {
  std::mt19937_64 eng(5);
  const PolySketch q(1, 12, 64, 77);
  EXPECT_EQ(q.padded_degree(), 1);
  const auto x = oracle::random_vector(eng, 12);
  const auto a = q.power(x, 1);
  const auto b = Srht(12, 64, derive_seed(77, 0, 0)).apply(x);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(a[k], b[k], 1e-14);
}

TEST(PolySketch, DegreeZeroIsFixedUnitVector) {
  const PolySketch q(4, 8, 128, 1);
  const std::vector<double> x(8, 0.3), y(8, -1.7);
  const auto a = q.power(x, 0), b = q.power(y, 0);
  EXPECT_EQ(a, b);
  EXPECT_NEAR(dot(a, a), 1.0, 1e-12);
}

TEST(PolySketch, MultilinearInSlots) {
  std::mt19937_64 eng(6);
  const PolySketch q(3, 6, 64, 3);
  const auto x = oracle::random_vector(eng, 6), y = oracle::random_vector(eng, 6), z = oracle::random_vector(eng, 6);
  auto y2 = y;
  for (auto& v : y2) v *= 3.0;
  const std::vector<std::span<const double>> s1{x, y, z}, s2{x, y2, z};
  const auto a = q.tensor(s1), b = q.tensor(s2);
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_NEAR(b[k], 3 * a[k], 1e-12);
}

TEST(PolySketch, PowersAgreeWithSinglePowers) {
  std::mt19937_64 eng(7);
  const PolySketch q(6, 10, 128, 11);
  const auto x = oracle::random_vector(eng, 10);
  const auto all = q.powers(x, 6);
  ASSERT_EQ(all.size(), 7u);
  for (int l = 0; l <= 6; ++l) {
    const auto one = q.power(x, l);
    for (std::size_t k = 0; k < one.size(); ++k) EXPECT_NEAR(all[l][k], one[k], 1e-12) << l;
  }
}

TEST(PolySketch, PowerUsesPaddingSlots) {
  std::mt19937_64 eng(8);
  const PolySketch q(4, 5, 32, 2);
  const auto x = oracle::random_vector(eng, 5);
  std::vector<double> e1(5, 0.0);
  e1[0] = 1;
  const std::vector<std::span<const double>> slots{x, x, e1, e1};
  const auto a = q.tensor(slots);
  const std::vector<std::span<const double>> short_slots{x, x};
  const auto b = q.tensor(short_slots), c = q.power(x, 2);
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_NEAR(a[k], b[k], 1e-13);
    EXPECT_NEAR(a[k], c[k], 1e-13);
  }
}

TEST(PolySketch, Errors) {
  const PolySketch q(3, 4, 16, 0);
  EXPECT_THROW(q.power(std::vector<double>(5, 1.0), 2), Error);
  EXPECT_THROW(q.power(std::vector<double>(4, 1.0), 4), Error);
}

TEST(PolySketch, SecondMomentUnbiased) {
  std::mt19937_64 eng(9);
  const auto x = oracle::random_vector(eng, 16, 0.3);
  const double nx = dot(x, x);
  for (int p = 1; p <= 4; ++p) {
    double mean = 0;
    const int seeds = 1000;
    for (int s = 0; s < seeds; ++s) {
      const auto y = PolySketch(p, 16, 1024, 5000 + s).power(x, p);
      mean += dot(y, y);
    }
    mean /= seeds;
    EXPECT_NEAR(mean / std::pow(nx, p), 1.0, 0.05) << "p=" << p;
  }
}

TEST(PolySketch, CubicInnerProducts) {
  std::mt19937_64 eng(10);
  const auto x = unit(oracle::random_vector(eng, 32));
  auto y = x;
  const auto noise = oracle::random_vector(eng, 32, 0.5);
  for (int i = 0; i < 32; ++i) y[i] += noise[i];
  y = unit(y);
  const double want = std::pow(dot(x, y), 3);
  int within = 0;
  const int trials = 200;
  for (int s = 0; s < trials; ++s) {
    const PolySketch q(3, 32, 4096, 100 + s);
    if (std::abs(dot(q.power(x, 3), q.power(y, 3)) - want) <= 0.2) ++within;
  }
  EXPECT_GE(within, 0.9 * trials);
}

TEST(PolySketch, ErrorShrinksLikeInverseRootM) {
  std::mt19937_64 eng(11);
  const auto x = unit(oracle::random_vector(eng, 32)), y = unit(oracle::random_vector(eng, 32));
  const double want = std::pow(dot(x, y), 2);
  std::vector<double> sd;
  const std::vector<std::size_t> ms{256, 1024, 4096};
  for (std::size_t m : ms) {
    double ss = 0;
    const int trials = 150;
    for (int s = 0; s < trials; ++s) {
      const PolySketch q(2, 32, m, 900 + s);
      const double e = dot(q.power(x, 2), q.power(y, 2)) - want;
      ss += e * e;
    }
    sd.push_back(std::sqrt(ss / trials));
  }
  const double slope = (std::log(sd[2]) - std::log(sd[0])) / (std::log(4096.0) - std::log(256.0));
  EXPECT_GT(slope, -0.65);
  EXPECT_LT(slope, -0.35);
}

TEST(PolySketch, AllE1InputConcentrates) {
  std::vector<double> e1(8, 0.0);
  e1[0] = 1;
  double mean = 0;
  for (int s = 0; s < 100; ++s) {
    const auto y = PolySketch(4, 8, 1024, s).power(e1, 4);
    mean += dot(y, y);
  }
  EXPECT_NEAR(mean / 100, 1.0, 0.1);
}

TEST(PolySketch, MixedLeafDimensions) {
  std::mt19937_64 eng(12);
  const PolySketch q(std::vector<std::size_t>{3, 7}, 64, 4);
  const auto a = oracle::random_vector(eng, 3), b = oracle::random_vector(eng, 7);
  const std::vector<std::span<const double>> slots{a, b};
  EXPECT_EQ(q.tensor(slots).size(), 64u);
}

namespace {

std::vector<double> block_sketch(const BlockSrht& S, const std::vector<std::vector<double>>& blocks, double scale = 1) {
  std::vector<std::vector<double>> T;
  std::vector<const double*> ptrs;
  for (const auto& b : blocks) {
    T.emplace_back(S.block_padded_dim());
    S.transform_block(b, T.back());
  }
  for (const auto& t : T) ptrs.push_back(t.data());
  std::vector<double> out(S.target_dim());
  S.combine(ptrs, scale, out);
  return out;
}

}  // namespace

TEST(BlockSrht, EveryEntryIsPlusMinusOneOverRootM) {
  const BlockSrht S(3, 5, 16, 1);
  for (std::size_t s = 0; s < 3; ++s)
    for (std::size_t t = 0; t < 5; ++t) {
      std::vector<std::vector<double>> blocks(3, std::vector<double>(5, 0.0));
      blocks[s][t] = 1.0;
      for (double v : block_sketch(S, blocks)) EXPECT_NEAR(std::abs(v), 0.25, 1e-15);
    }
}

TEST(BlockSrht, LinearAndNullBlocks) {
  std::mt19937_64 eng(30);
  const BlockSrht S(4, 6, 32, 2);
  std::vector<std::vector<double>> x, y, sum;
  for (int s = 0; s < 4; ++s) {
    x.push_back(oracle::random_vector(eng, 6));
    y.push_back(oracle::random_vector(eng, 6));
    sum.push_back(x.back());
    for (int t = 0; t < 6; ++t) sum.back()[t] += y.back()[t];
  }
  const auto a = block_sketch(S, x), b = block_sketch(S, y), c = block_sketch(S, sum), a3 = block_sketch(S, x, 3.0);
  for (std::size_t k = 0; k < a.size(); ++k) {
    EXPECT_NEAR(c[k], a[k] + b[k], 1e-12);
    EXPECT_NEAR(a3[k], 3 * a[k], 1e-12);
  }
  auto zeroed = x;
  zeroed[1].assign(6, 0.0);
  std::vector<std::vector<double>> T(4, std::vector<double>(S.block_padded_dim()));
  std::vector<const double*> ptrs;
  for (int s = 0; s < 4; ++s) {
    S.transform_block(x[s], T[s]);
    ptrs.push_back(s == 1 ? nullptr : T[s].data());
  }
  std::vector<double> out(32);
  S.combine(ptrs, 1.0, out);
  const auto want = block_sketch(S, zeroed);
  for (std::size_t k = 0; k < out.size(); ++k) EXPECT_NEAR(out[k], want[k], 1e-12);
}

TEST(BlockSrht, UnbiasedInnerProduct) {
  std::mt19937_64 eng(31);
  std::vector<std::vector<double>> x, y;
  double xx = 0, xy = 0;
  for (int s = 0; s < 3; ++s) {
    x.push_back(oracle::random_vector(eng, 5));
    y.push_back(oracle::random_vector(eng, 5));
    xx += dot(x.back(), x.back());
    xy += dot(x.back(), y.back());
  }
  double mxx = 0, mxy = 0;
  const int seeds = 2000;
  for (int seed = 0; seed < seeds; ++seed) {
    const BlockSrht S(3, 5, 32, 100 + seed);
    const auto a = block_sketch(S, x), b = block_sketch(S, y);
    mxx += dot(a, a);
    mxy += dot(a, b);
  }
  EXPECT_NEAR(mxx / seeds / xx, 1.0, 0.05);
  EXPECT_NEAR(mxy / seeds, xy, 0.05 * xx);
}

TEST(PolySketch, FromLeavesMatchesDirect) {
  std::mt19937_64 eng(32);
  const auto x = oracle::random_vector(eng, 7), y = oracle::random_vector(eng, 7);
  const PolySketch Q(5, 7, 32, 3);
  // Leaf j is the SRHT seeded with derive_seed(seed, 0, j).
  std::vector<std::vector<double>> leaf;
  for (int j = 0; j < 5; ++j) leaf.push_back(Srht(7, 32, derive_seed(3, 0, j)).apply(x));
  EXPECT_EQ(Q.powers_from_leaves(leaf), Q.powers(x, 5));
  const std::vector<std::span<const double>> slots{x, y};
  EXPECT_EQ(Q.tensor_from_leaves({leaf[0], Srht(7, 32, derive_seed(3, 0, 1)).apply(y)}), Q.tensor(slots));
  EXPECT_THROW(Q.powers_from_leaves(std::vector<std::vector<double>>(6, std::vector<double>(32))), Error);
  EXPECT_THROW(Q.tensor_from_leaves({std::vector<double>(31)}), Error);
}
