#include "nke/cntk.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "nke/error.hpp"
#include "nke/parallel.hpp"

namespace nke {

namespace {

void check_config(const CntkConfig& cfg) {
  if (cfg.depth < 1) fail(ErrorCode::InvalidArgument, "depth must be at least 1");
  if (cfg.filter < 1 || cfg.filter % 2 == 0) fail(ErrorCode::InvalidArgument, "filter size must be odd and positive");
}

void check_image(const ImageTensor& x) {
  if (x.d1 == 0 || x.d2 == 0 || x.c == 0) fail(ErrorCode::ShapeMismatch, "image has an empty dimension");
  if (x.data.size() != x.d1 * x.d2 * x.c) fail(ErrorCode::ShapeMismatch, "image data size does not match its shape");
  for (double v : x.data)
    if (!std::isfinite(v)) fail(ErrorCode::NonFiniteKernel, "image has non-finite entries");
}

void check_pair(const ImageTensor& y, const ImageTensor& z, const CntkConfig& cfg) {
  check_config(cfg);
  check_image(y);
  check_image(z);
  if (y.d1 != z.d1 || y.d2 != z.d2 || y.c != z.c) fail(ErrorCode::ShapeMismatch, "images differ in shape");
  if (y.d1 * y.d2 > cfg.pixel_budget)
    fail(ErrorCode::BudgetExceeded, "image has " + std::to_string(y.d1 * y.d2) + " pixels, exact mode allows " +
                                        std::to_string(cfg.pixel_budget));
}

PixelGrid4 grid4(std::size_t d1, std::size_t d2) {
  PixelGrid4 g;
  g.d1 = d1;
  g.d2 = d2;
  g.v.assign(d1 * d2 * d1 * d2, 0.0);
  return g;
}

// S(i,j,k,l) = sum_{a,b} G(i+a, j+b, k+a, l+b) over in-range indices.
PixelGrid4 patch_sum(const PixelGrid4& G, int r) {
  const long d1 = static_cast<long>(G.d1), d2 = static_cast<long>(G.d2);
  PixelGrid4 S = grid4(G.d1, G.d2);
  parallel_for(G.d1, 1, [&](std::size_t lo, std::size_t hi) {
    for (long i = static_cast<long>(lo); i < static_cast<long>(hi); ++i)
      for (int a = -r; a <= r; ++a) {
        if (i + a < 0 || i + a >= d1) continue;
        for (long j = 0; j < d2; ++j)
          for (int b = -r; b <= r; ++b) {
            if (j + b < 0 || j + b >= d2) continue;
            for (long k = std::max(0L, -static_cast<long>(a)); k < std::min(d1, d1 - a); ++k) {
              double* out = &S.v[((i * d2 + j) * d1 + k) * d2];
              const double* in = &G.v[(((i + a) * d2 + j + b) * d1 + k + a) * d2];
              const long l0 = std::max(0L, -static_cast<long>(b)), l1 = std::min(d2, d2 - b);
              for (long l = l0; l < l1; ++l) out[l] += in[l + b];
            }
          }
      }
  });
  return S;
}

std::vector<double> patch_sum2(const std::vector<double>& g, std::size_t d1, std::size_t d2, int r) {
  std::vector<double> s(d1 * d2, 0.0);
  for (long i = 0; i < static_cast<long>(d1); ++i)
    for (long j = 0; j < static_cast<long>(d2); ++j)
      for (int a = -r; a <= r; ++a)
        for (int b = -r; b <= r; ++b) {
          const long u = i + a, v = j + b;
          if (u < 0 || v < 0 || u >= static_cast<long>(d1) || v >= static_cast<long>(d2)) continue;
          s[i * d2 + j] += g[u * d2 + v];
        }
  return s;
}

PixelGrid4 input_covariance(const ImageTensor& y, const ImageTensor& z) {
  PixelGrid4 g = grid4(y.d1, y.d2);
  const std::size_t P = y.d1 * y.d2;
  for (std::size_t p = 0; p < P; ++p)
    for (std::size_t q = 0; q < P; ++q) {
      double acc = 0.0;
      for (std::size_t l = 0; l < y.c; ++l) acc += y.data[p * y.c + l] * z.data[q * z.c + l];
      g.v[p * P + q] = acc;
    }
  return g;
}

std::vector<double> pixel_energy(const ImageTensor& x) {
  std::vector<double> e(x.d1 * x.d2, 0.0);
  for (std::size_t p = 0; p < e.size(); ++p)
    for (std::size_t l = 0; l < x.c; ++l) e[p] += x.data[p * x.c + l] * x.data[p * x.c + l];
  return e;
}

double finish_theta(const PixelGrid4& pi) {
  const double P = static_cast<double>(pi.d1 * pi.d2);
  const double total = std::accumulate(pi.v.begin(), pi.v.end(), 0.0);
  if (!std::isfinite(total)) fail(ErrorCode::NonFiniteKernel, "non-finite CNTK value");
  return total / (P * P);
}

}  // namespace

double cntk_exact(const ImageTensor& y, const ImageTensor& z, const CntkConfig& cfg) {
  check_pair(y, z, cfg);
  if (!cfg.dual.eval) fail(ErrorCode::InvalidArgument, "CNTK config has no dual activation");
  const int r = (cfg.filter - 1) / 2;
  const double inv_q2 = 1.0 / (cfg.filter * cfg.filter);
  const std::size_t d1 = y.d1, d2 = y.d2, P = d1 * d2;

  PixelGrid4 K = patch_sum(input_covariance(y, z), r);
  std::vector<double> ky = patch_sum2(pixel_energy(y), d1, d2, r);
  std::vector<double> kz = patch_sum2(pixel_energy(z), d1, d2, r);
  PixelGrid4 pi = grid4(d1, d2);
  const DualActivation& dual = cfg.dual;

  for (int h = 1; h <= cfg.depth; ++h) {
    PixelGrid4 gamma = grid4(d1, d2), gdot = grid4(d1, d2);
    parallel_for(P, 1, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t p = lo; p < hi; ++p) {
        const double a = std::sqrt(std::max(ky[p], 0.0));
        for (std::size_t q = 0; q < P; ++q) {
          const double b = std::sqrt(std::max(kz[q], 0.0));
          const double ab = a * b;
          const double c = ab > 0 ? std::clamp(K.v[p * P + q] / ab, -1.0, 1.0) : 0.0;
          gamma.v[p * P + q] = inv_q2 * dual.eval(a, b, c);
          double d = 0.0;
          if (dual.deriv_eval)
            d = dual.deriv_eval(a, b, c);
          else if (ab > 0)
            d = derivative_dual_numeric(dual, a, b, c);
          gdot.v[p * P + q] = inv_q2 * d;
        }
      }
    });
    if (h < cfg.depth) {
      for (std::size_t t = 0; t < pi.v.size(); ++t) pi.v[t] = pi.v[t] * gdot.v[t] + gamma.v[t];
      pi = patch_sum(pi, r);
      K = patch_sum(gamma, r);
      std::vector<double> gy(P), gz(P);
      for (std::size_t p = 0; p < P; ++p) {
        const double a = std::sqrt(std::max(ky[p], 0.0)), b = std::sqrt(std::max(kz[p], 0.0));
        gy[p] = inv_q2 * dual.eval(a, a, 1.0);
        gz[p] = inv_q2 * dual.eval(b, b, 1.0);
      }
      ky = patch_sum2(gy, d1, d2, r);
      kz = patch_sum2(gz, d1, d2, r);
    } else {
      for (std::size_t t = 0; t < pi.v.size(); ++t) pi.v[t] *= gdot.v[t];
    }
  }
  return finish_theta(pi);
}

std::vector<NormGrid> cntk_norm_grids(const ImageTensor& x, int depth, int filter) {
  check_image(x);
  if (filter < 1 || filter % 2 == 0) fail(ErrorCode::InvalidArgument, "filter size must be odd and positive");
  const int r = (filter - 1) / 2;
  const double q2 = static_cast<double>(filter * filter);
  std::vector<NormGrid> out(depth + 1);
  std::vector<double> n0 = pixel_energy(x);
  for (double& v : n0) v *= q2;
  out[0] = {x.d1, x.d2, n0};
  for (int h = 1; h <= depth; ++h) {
    std::vector<double> s = patch_sum2(out[h - 1].v, x.d1, x.d2, r);
    for (double& v : s) v /= q2;
    out[h] = {x.d1, x.d2, std::move(s)};
  }
  return out;
}

namespace {

double homogeneous_program(const ImageTensor& y, const ImageTensor& z, const CntkConfig& cfg, CntkTrace* trace) {
  check_pair(y, z, cfg);
  if (!cfg.dual.is_homogeneous || !cfg.dual.kappa || !cfg.dual.kappa_prime)
    fail(ErrorCode::NotHomogeneous, cfg.dual.name + " is not a homogeneous dual activation");
  const int r = (cfg.filter - 1) / 2;
  const double inv_q2 = 1.0 / (cfg.filter * cfg.filter);
  const std::size_t d1 = y.d1, d2 = y.d2, P = d1 * d2;
  auto ny = cntk_norm_grids(y, cfg.depth, cfg.filter);
  auto nz = cntk_norm_grids(z, cfg.depth, cfg.filter);
  const auto& kappa = cfg.dual.kappa;
  const auto& kappa_prime = cfg.dual.kappa_prime;

  PixelGrid4 gamma = input_covariance(y, z);
  PixelGrid4 pi = grid4(d1, d2);
  if (trace) {
    trace->norms_y = ny;
    trace->norms_z = nz;
    trace->gamma = {gamma};
    trace->gamma_dot = {grid4(d1, d2)};
    trace->pi = {pi};
  }
  for (int h = 1; h <= cfg.depth; ++h) {
    PixelGrid4 S = patch_sum(gamma, r);
    PixelGrid4 next = grid4(d1, d2), gdot = grid4(d1, d2);
    const std::vector<double>& Ny = ny[h].v;
    const std::vector<double>& Nz = nz[h].v;
    parallel_for(P, 1, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t p = lo; p < hi; ++p)
        for (std::size_t q = 0; q < P; ++q) {
          const double scale = std::sqrt(Ny[p] * Nz[q]);
          const double A = scale > 0 ? std::clamp(S.v[p * P + q] / scale, -1.0, 1.0) : 0.0;
          next.v[p * P + q] = scale * inv_q2 * kappa(A);
          gdot.v[p * P + q] = inv_q2 * kappa_prime(A);
        }
    });
    gamma = std::move(next);
    if (h < cfg.depth) {
      for (std::size_t t = 0; t < pi.v.size(); ++t) pi.v[t] = pi.v[t] * gdot.v[t] + gamma.v[t];
      pi = patch_sum(pi, r);
    } else {
      for (std::size_t t = 0; t < pi.v.size(); ++t) pi.v[t] *= gdot.v[t];
    }
    if (trace) {
      trace->gamma.push_back(gamma);
      trace->gamma_dot.push_back(gdot);
      trace->pi.push_back(pi);
    }
  }
  const double theta = finish_theta(pi);
  if (trace) trace->theta = theta;
  return theta;
}

}  // namespace

double cntk_exact_homogeneous(const ImageTensor& y, const ImageTensor& z, const CntkConfig& cfg) {
  return homogeneous_program(y, z, cfg, nullptr);
}

CntkTrace cntk_homogeneous_trace(const ImageTensor& y, const ImageTensor& z, const CntkConfig& cfg) {
  CntkTrace t;
  homogeneous_program(y, z, cfg, &t);
  return t;
}

CntkSketcher::CntkSketcher(const CntkConfig& cfg, const PolyCoeffs& kappa, const PolyCoeffs& kappa_prime,
                           std::size_t channels)
    : cfg_(cfg), channels_(channels) {
  check_config(cfg);
  if (channels == 0) fail(ErrorCode::InvalidArgument, "image must have at least one channel");
  if (cfg.sketch_dim == 0 || cfg.output_sketch_dim == 0) fail(ErrorCode::InvalidArgument, "sketch dimensions must be positive");
  if (!kappa.nonnegative() || !kappa_prime.nonnegative())
    fail(ErrorCode::InvalidArgument, "sketch polynomials need nonnegative coefficients");
  const int top = std::max(kappa.degree(), kappa_prime.degree());
  for (int l = 0; l <= top; ++l) {
    const double a = l <= kappa.degree() ? kappa.coeffs[l] : 0.0;
    const double b = l <= kappa_prime.degree() ? kappa_prime.coeffs[l] : 0.0;
    if (a > 0 || b > 0) {
      blocks_.push_back(l);
      a_sqrt_.push_back(std::sqrt(a));
      b_sqrt_.push_back(std::sqrt(b));
      top_degree_ = l;
    }
  }
  if (blocks_.empty()) fail(ErrorCode::InvalidArgument, "sketch polynomials are identically zero");
  const std::size_t q2 = static_cast<std::size_t>(cfg.filter * cfg.filter);
  const std::size_t m = cfg.sketch_dim, mp = cfg.output_sketch_dim;
  phi_dim_.resize(cfg.depth + 1);
  phi_dim_[0] = channels;
  for (int h = 1; h <= cfg.depth; ++h) phi_dim_[h] = blocks_.size() * m;
  z_tree_.resize(cfg.depth + 1);
  z_leaf_.resize(cfg.depth + 1);
  q2_tree_.resize(cfg.depth + 1);
  q2_left_.resize(cfg.depth + 1);
  q2_right_.resize(cfg.depth + 1);
  for (int h = 1; h <= cfg.depth; ++h) {
    const std::uint64_t zs = derive_seed(cfg.seed, 1000 + h, 0);
    const int deg = std::max(top_degree_, 1);
    z_tree_[h] = std::make_unique<PolySketch>(std::vector<std::size_t>(deg, 1), m, zs);
    for (int j = 0; j < top_degree_; ++j) z_leaf_[h].emplace_back(q2, phi_dim_[h - 1], m, derive_seed(zs, 0, j));
    if (h >= 2) {
      const std::uint64_t qs = derive_seed(cfg.seed, 2000 + h, 0);
      q2_tree_[h] = std::make_unique<PolySketch>(std::vector<std::size_t>{1, 1}, mp, qs);
      q2_left_[h] = std::make_unique<BlockSrht>(q2, mp + phi_dim_[h - 1], mp, derive_seed(qs, 0, 0));
      q2_right_[h] = std::make_unique<Srht>(phi_dim_[h], mp, derive_seed(qs, 0, 1));
    }
  }
}

std::size_t CntkSketcher::feature_dim() const { return cfg_.output_sketch_dim; }

std::vector<double> CntkSketcher::features(const ImageTensor& x) const {
  check_image(x);
  if (x.c != channels_) fail(ErrorCode::ShapeMismatch, "image channel count does not match the sketcher");
  const int L = cfg_.depth, r = (cfg_.filter - 1) / 2;
  const double q = static_cast<double>(cfg_.filter);
  const std::size_t d1 = x.d1, d2 = x.d2, P = d1 * d2;
  const std::size_t m = cfg_.sketch_dim, mp = cfg_.output_sketch_dim;
  const std::size_t slots = static_cast<std::size_t>(cfg_.filter * cfg_.filter);
  auto norms = cntk_norm_grids(x, L, cfg_.filter);

  // Transformed blocks of the q x q patch around p, nullptr outside the image.
  auto patch = [&](std::size_t p, const std::vector<double>& T, std::size_t stride) {
    const long i = static_cast<long>(p / d2), j = static_cast<long>(p % d2);
    std::vector<const double*> ptrs(slots, nullptr);
    std::size_t s = 0;
    for (int a = -r; a <= r; ++a)
      for (int b = -r; b <= r; ++b, ++s) {
        const long u = i + a, v = j + b;
        if (u >= 0 && v >= 0 && u < static_cast<long>(d1) && v < static_cast<long>(d2))
          ptrs[s] = T.data() + static_cast<std::size_t>(u * static_cast<long>(d2) + v) * stride;
      }
    return ptrs;
  };

  // phi[p] for the previous layer, inner[p] = w (+) phi for the previous layer.
  std::vector<std::vector<double>> phi(P), inner(P);
  for (std::size_t p = 0; p < P; ++p) phi[p].assign(x.data.begin() + p * x.c, x.data.begin() + (p + 1) * x.c);
  std::vector<double> out(mp, 0.0);

  for (int h = 1; h <= L; ++h) {
    const std::size_t dcur = phi_dim_[h];
    const int top = top_degree_;

    std::vector<std::vector<std::vector<double>>> leaf(P);
    for (std::size_t p = 0; p < P; ++p)
      if (norms[h].v[p] > 0) leaf[p].assign(top, std::vector<double>(m));
    if (top > 0) {
      const std::size_t bp = z_leaf_[h][0].block_padded_dim();
      std::vector<double> T(P * bp);
      for (int jl = 0; jl < top; ++jl) {
        const BlockSrht& S = z_leaf_[h][jl];
        parallel_for(P, 1, [&](std::size_t lo, std::size_t hi) {
          for (std::size_t p = lo; p < hi; ++p) S.transform_block(phi[p], std::span<double>(T.data() + p * bp, bp));
        });
        parallel_for(P, 1, [&](std::size_t lo, std::size_t hi) {
          for (std::size_t p = lo; p < hi; ++p) {
            if (leaf[p].empty()) continue;
            const auto ptrs = patch(p, T, bp);
            S.combine(ptrs, 1.0 / std::sqrt(norms[h].v[p]), leaf[p][jl]);
          }
        });
      }
    }

    std::vector<double> T2;
    std::size_t bp2 = 0;
    if (h >= 2) {
      bp2 = q2_left_[h]->block_padded_dim();
      T2.resize(P * bp2);
      parallel_for(P, 1, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t p = lo; p < hi; ++p)
          q2_left_[h]->transform_block(inner[p], std::span<double>(T2.data() + p * bp2, bp2));
      });
    }

    std::vector<std::vector<double>> phi_next(P), inner_next(h < L ? P : 0);
    std::vector<std::vector<double>> w_last(h == L ? P : 0);
    parallel_for(P, 1, [&](std::size_t lo, std::size_t hi) {
      std::vector<double> phid(dcur);
      for (std::size_t p = lo; p < hi; ++p) {
        const double N = norms[h].v[p];
        std::vector<double> ph(dcur, 0.0);
        std::fill(phid.begin(), phid.end(), 0.0);
        if (N > 0) {
          const auto Z = z_tree_[h]->powers_from_leaves(std::move(leaf[p]));
          const double sphi = std::sqrt(N) / q;
          for (std::size_t bl = 0; bl < blocks_.size(); ++bl) {
            const std::vector<double>& zl = Z[blocks_[bl]];
            for (std::size_t k = 0; k < m; ++k) {
              ph[bl * m + k] = sphi * a_sqrt_[bl] * zl[k];
              phid[bl * m + k] = b_sqrt_[bl] * zl[k] / q;
            }
          }
        } else if (blocks_[0] == 0) {
          // Zero patch: only the degree-0 sketch (e_1) survives.
          phid[0] = b_sqrt_[0] / q;
        }
        std::vector<double> w(mp, 0.0);
        if (h >= 2) {
          std::vector<std::vector<double>> parts(2, std::vector<double>(mp));
          q2_left_[h]->combine(patch(p, T2, bp2), 1.0, parts[0]);
          parts[1] = q2_right_[h]->apply(phid);
          w = q2_tree_[h]->tensor_from_leaves(std::move(parts));
        }
        if (h < L) {
          std::vector<double> in(mp + dcur);
          std::copy(w.begin(), w.end(), in.begin());
          std::copy(ph.begin(), ph.end(), in.begin() + mp);
          inner_next[p] = std::move(in);
        } else {
          w_last[p] = std::move(w);
        }
        phi_next[p] = std::move(ph);
      }
    });
    phi = std::move(phi_next);
    inner = std::move(inner_next);
    if (h == L)
      for (std::size_t p = 0; p < P; ++p)
        for (std::size_t k = 0; k < mp; ++k) out[k] += w_last[p][k];
  }
  const double inv_p = 1.0 / static_cast<double>(P);
  for (double& v : out) v *= inv_p;
  return out;
}

std::vector<double> cntk_sketch_features(const ImageTensor& x, const CntkConfig& cfg, const PolyCoeffs& kappa_poly,
                                         const PolyCoeffs& kappa_prime_poly) {
  return CntkSketcher(cfg, kappa_poly, kappa_prime_poly, x.c).features(x);
}

Eigen::MatrixXd cntk_kernel_matrix(const std::vector<ImageTensor>& images, const CntkConfig& cfg, CntkMode mode,
                                   const PolyCoeffs* kappa_poly, const PolyCoeffs* kappa_prime_poly) {
  const std::size_t n = images.size();
  Eigen::MatrixXd K(n, n);
  if (n == 0) return K;
  for (std::size_t i = 1; i < n; ++i)
    if (images[i].d1 != images[0].d1 || images[i].d2 != images[0].d2 || images[i].c != images[0].c)
      throw Error(ErrorCode::ShapeMismatch, "image " + std::to_string(i) + " differs in shape from image 0", i);
  if (mode == CntkMode::Sketch) {
    if (!kappa_poly || !kappa_prime_poly)
      fail(ErrorCode::InvalidArgument, "sketch mode needs kappa and kappa' polynomials");
    CntkSketcher sk(cfg, *kappa_poly, *kappa_prime_poly, images[0].c);
    Eigen::MatrixXd F(sk.feature_dim(), n);
    for (std::size_t i = 0; i < n; ++i) {
      auto f = sk.features(images[i]);
      F.col(i) = Eigen::Map<const Eigen::VectorXd>(f.data(), f.size());
    }
    return F.transpose() * F;
  }
  const bool homog = cfg.dual.is_homogeneous && cfg.dual.kappa;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      const double v = homog ? cntk_exact_homogeneous(images[i], images[j], cfg)
                             : cntk_exact(images[i], images[j], cfg);
      K(i, j) = K(j, i) = v;
    }
  return K;
}

}  // namespace nke
