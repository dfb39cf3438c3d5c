#include <cstddef>
#include <span>
#include <string>

#include "nke/error.hpp"
#include "nke/polysketch.hpp"

namespace nke {

namespace {

constexpr std::size_t kBlock = 4096;

// Stages h and 2h in one sweep.
inline void radix4(double* __restrict a, std::size_t n, std::size_t h) {
  for (std::size_t i = 0; i < n; i += 4 * h) {
    double* p0 = a + i;
    double* p1 = p0 + h;
    double* p2 = p1 + h;
    double* p3 = p2 + h;
    for (std::size_t j = 0; j < h; ++j) {
      const double x0 = p0[j], x1 = p1[j], x2 = p2[j], x3 = p3[j];
      const double s01 = x0 + x1, d01 = x0 - x1, s23 = x2 + x3, d23 = x2 - x3;
      p0[j] = s01 + s23;
      p1[j] = d01 + d23;
      p2[j] = s01 - s23;
      p3[j] = d01 - d23;
    }
  }
}

inline void radix2(double* __restrict a, std::size_t n, std::size_t h) {
  for (std::size_t i = 0; i < n; i += 2 * h) {
    double* p0 = a + i;
    double* p1 = p0 + h;
    for (std::size_t j = 0; j < h; ++j) {
      const double x0 = p0[j], x1 = p1[j];
      p0[j] = x0 + x1;
      p1[j] = x0 - x1;
    }
  }
}

void stages(double* a, std::size_t n, std::size_t h, std::size_t stop) {
  for (; 4 * h <= stop; h *= 4) radix4(a, n, h);
  if (2 * h <= stop) radix2(a, n, h);
}

void small_block(double* a, std::size_t n) {
  if (n >= 4) {
    for (std::size_t i = 0; i < n; i += 4) {
      const double x0 = a[i], x1 = a[i + 1], x2 = a[i + 2], x3 = a[i + 3];
      const double s01 = x0 + x1, d01 = x0 - x1, s23 = x2 + x3, d23 = x2 - x3;
      a[i] = s01 + s23;
      a[i + 1] = d01 + d23;
      a[i + 2] = s01 - s23;
      a[i + 3] = d01 - d23;
    }
    stages(a, n, 4, n);
  } else if (n == 2) {
    radix2(a, n, 1);
  }
}

}  // namespace

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void fwht(std::span<double> a) {
  const std::size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0)
    fail(ErrorCode::InvalidArgument, "Walsh-Hadamard length must be a power of two, got " + std::to_string(n));
  const std::size_t block = n < kBlock ? n : kBlock;
  for (std::size_t b = 0; b < n; b += block) small_block(a.data() + b, block);
  stages(a.data(), n, block, n);
}

}  // namespace nke
