#include "nke/homogeneous_embed.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "nke/dual_catalog.hpp"
#include "nke/error.hpp"
#include "nke/parallel.hpp"

namespace nke {

namespace {

using Poly = std::vector<double>;

Poly mul_trunc(const Poly& a, const Poly& b, int p_max) {
  const int deg = std::min<int>(static_cast<int>(a.size() + b.size()) - 2, p_max);
  Poly out(deg + 1, 0.0);
  for (std::size_t i = 0; i < a.size() && static_cast<int>(i) <= deg; ++i) {
    if (a[i] == 0.0) continue;
    for (std::size_t j = 0; j < b.size() && static_cast<int>(i + j) <= deg; ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

void add_into(Poly& a, const Poly& b) {
  if (a.size() < b.size()) a.resize(b.size(), 0.0);
  for (std::size_t i = 0; i < b.size(); ++i) a[i] += b[i];
}

// outer(inner(t)) keeping degrees <= p_max. With nonnegative inputs the kept
// coefficients equal those of the untruncated composition.
Poly compose_trunc(const Poly& outer, const Poly& inner, int p_max) {
  Poly acc{outer.back()};
  for (int j = static_cast<int>(outer.size()) - 2; j >= 0; --j) {
    acc = mul_trunc(acc, inner, p_max);
    acc[0] += outer[j];
  }
  return acc;
}

void trim(Poly& p) {
  while (p.size() > 1 && p.back() == 0.0) p.pop_back();
}

void check_nonnegative(Poly& p, const char* what) {
  for (double& v : p) {
    if (v < -1e-14) fail(ErrorCode::InvalidArgument, std::string(what) + " has a negative coefficient");
    if (v < 0) v = 0.0;
  }
}

void validate_kappa(const PolyCoeffs& kappa, int p_max) {
  if (kappa.coeffs.empty()) fail(ErrorCode::InvalidArgument, "empty dot-product polynomial");
  if (p_max < 1) fail(ErrorCode::InvalidArgument, "degree cap must be at least 1");
  if (!kappa.nonnegative()) fail(ErrorCode::InvalidArgument, "dot-product polynomial needs nonnegative coefficients");
  if (kappa.degree() > 10 * p_max)
    fail(ErrorCode::DegreeOverflow, "dot-product polynomial degree exceeds 10x the degree cap");
}

ComposedPoly finish(Poly p, double exact_at_one) {
  trim(p);
  check_nonnegative(p, "composed polynomial");
  ComposedPoly out;
  const double kept = std::accumulate(p.begin(), p.end(), 0.0);
  out.coeffs = std::move(p);
  out.truncation_tail = std::max(0.0, exact_at_one - kept);
  return out;
}

}  // namespace

ComposedPoly compose_poly(const PolyCoeffs& kappa, int L, int p_max) {
  if (L < 1) fail(ErrorCode::InvalidArgument, "depth must be at least 1");
  validate_kappa(kappa, p_max);
  Poly P{0.0, 1.0};
  double at_one = 1.0;
  for (int h = 0; h < L; ++h) {
    P = compose_trunc(kappa.coeffs, P, p_max);
    at_one = kappa(at_one);
  }
  return finish(std::move(P), at_one);
}

ComposedPoly ntk_poly(const EmbedConfig& cfg) {
  if (cfg.depth < 1) fail(ErrorCode::InvalidArgument, "depth must be at least 1");
  validate_kappa(cfg.kappa_poly, cfg.max_degree);
  const Poly& k = cfg.kappa_poly.coeffs;
  const Poly& kd = cfg.kappa_prime_poly.coeffs;
  const int cap = cfg.max_degree;
  Poly P{0.0, 1.0}, R{0.0, 1.0};
  double p1 = 1.0, r1 = 1.0;
  for (int h = 1; h <= cfg.depth; ++h) {
    Poly deriv = compose_trunc(kd, P, cap);
    Poly next = compose_trunc(k, P, cap);
    R = mul_trunc(R, deriv, cap);
    add_into(R, next);
    P = std::move(next);
    r1 = r1 * cfg.kappa_prime_poly(p1) + cfg.kappa_poly(p1);
    p1 = cfg.kappa_poly(p1);
  }
  return finish(std::move(R), r1);
}

std::pair<PolyCoeffs, PolyCoeffs> taylor_normalized_gaussian(int q) {
  if (q < 1) fail(ErrorCode::InvalidArgument, "Taylor degree must be at least 1");
  PolyCoeffs k;
  k.coeffs.resize(q + 1);
  for (int j = 0; j <= q; ++j) k.coeffs[j] = std::exp(-1.0 - std::lgamma(j + 1.0));
  return {k, k.derivative()};
}

PolyCoeffs kappa_from_hermite(const HermiteCoeffs& hc) {
  PolyCoeffs k;
  k.coeffs.resize(hc.coeffs.size());
  for (std::size_t j = 0; j < hc.coeffs.size(); ++j) {
    const double v = hc.coeffs[j] * std::exp(0.5 * std::lgamma(j + 1.0));
    k.coeffs[j] = v * v;
  }
  return k;
}

std::pair<PolyCoeffs, PolyCoeffs> dot_product_polys(std::string_view name, std::span<const double> params, int q) {
  if (name == "normalized_gaussian") return taylor_normalized_gaussian(q);
  const DualActivation dual = catalog_lookup(name, params);
  if (!dual.is_homogeneous || dual.homogeneity_order != 1)
    fail(ErrorCode::NotHomogeneous, std::string(name) + " is not positively homogeneous of degree 1");
  if (q < 1 || 2 * q + 2 > kMaxHermiteDegree)
    fail(ErrorCode::DegreeTooLarge, "dot-product degree must be in [1, " + std::to_string(kMaxHermiteDegree / 2 - 1) + "]");
  const ActivationSpec spec = activation_spec(name, params);
  PolyCoeffs kappa = kappa_from_hermite(hermite_expand(spec.scalar_fn, q, 1.0, kMaxHermiteDegree));
  PolyCoeffs kappa_prime = kappa.derivative();
  return {std::move(kappa), std::move(kappa_prime)};
}

EmbedConfig EmbedConfig::make(PolyCoeffs kappa, int depth, std::size_t sketch_dim, int max_degree,
                              std::uint64_t seed) {
  check_nonnegative(kappa.coeffs, "dot-product polynomial");
  validate_kappa(kappa, max_degree);
  if (depth < 1) fail(ErrorCode::InvalidArgument, "depth must be at least 1");
  if (sketch_dim < 1) fail(ErrorCode::InvalidArgument, "sketch dimension must be positive");
  EmbedConfig cfg;
  cfg.kappa_prime_poly = kappa.derivative();
  cfg.kappa_poly = std::move(kappa);
  cfg.depth = depth;
  cfg.sketch_dim = sketch_dim;
  cfg.max_degree = max_degree;
  cfg.seed = seed;
  return cfg;
}

HomogeneousEmbedder::HomogeneousEmbedder(const EmbedConfig& cfg, std::size_t input_dim)
    : cfg_(cfg), input_dim_(input_dim) {
  if (input_dim == 0) fail(ErrorCode::InvalidArgument, "input dimension must be positive");
  if (cfg.sketch_dim < 1) fail(ErrorCode::InvalidArgument, "sketch dimension must be positive");
  PolyCoeffs expected = cfg.kappa_poly.derivative();
  if (expected.coeffs != cfg.kappa_prime_poly.coeffs)
    fail(ErrorCode::InvalidArgument, "kappa_prime must be the formal derivative of kappa");
  P_ = compose_poly(cfg.kappa_poly, cfg.depth, cfg.max_degree);
  R_ = nke::ntk_poly(cfg);
  for (int j = 0; j <= P_.degree(); ++j)
    if (P_.coeffs[j] > 0) phi_degrees_.push_back(j);
  for (int j = 0; j <= R_.degree(); ++j)
    if (R_.coeffs[j] > 0) psi_degrees_.push_back(j);
  top_degree_ = std::max(phi_degrees_.empty() ? 0 : phi_degrees_.back(),
                         psi_degrees_.empty() ? 0 : psi_degrees_.back());
  sketch_ = std::make_unique<PolySketch>(std::max(top_degree_, 1), input_dim, cfg.sketch_dim, cfg.seed);
}

Embedding HomogeneousEmbedder::embed(std::span<const double> x) const {
  if (x.size() != input_dim_) fail(ErrorCode::DimensionMismatch, "input has the wrong dimension");
  const double norm = std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0));
  if (!(norm > 0)) fail(ErrorCode::ZeroNormInput, "input vector has zero norm");
  std::vector<double> unit(x.begin(), x.end());
  for (double& v : unit) v /= norm;
  auto u = sketch_->powers(unit, top_degree_);
  const std::size_t m = cfg_.sketch_dim;
  auto assemble = [&](const std::vector<int>& degrees, const ComposedPoly& poly) {
    std::vector<double> out(degrees.size() * m);
    for (std::size_t b = 0; b < degrees.size(); ++b) {
      const double s = norm * std::sqrt(poly.coeffs[degrees[b]]);
      const std::vector<double>& src = u[degrees[b]];
      for (std::size_t k = 0; k < m; ++k) out[b * m + k] = s * src[k];
    }
    return out;
  };
  return {assemble(phi_degrees_, P_), assemble(psi_degrees_, R_)};
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> HomogeneousEmbedder::embed_rows(const Eigen::MatrixXd& X) const {
  if (static_cast<std::size_t>(X.cols()) != input_dim_)
    fail(ErrorCode::DimensionMismatch, "data dimension does not match the embedder");
  const Eigen::Index n = X.rows();
  Eigen::MatrixXd Phi(phi_dim(), n), Psi(psi_dim(), n);
  parallel_for(static_cast<std::size_t>(n), 4, [&](std::size_t lo, std::size_t hi) {
    std::vector<double> row(input_dim_);
    for (std::size_t i = lo; i < hi; ++i) {
      for (std::size_t k = 0; k < input_dim_; ++k) row[k] = X(i, k);
      Embedding e;
      try {
        e = embed(row);
      } catch (const Error& err) {
        throw Error(err.code(), "row " + std::to_string(i) + ": " + err.what(), i);
      }
      Phi.col(i) = Eigen::Map<const Eigen::VectorXd>(e.phi.data(), e.phi.size());
      Psi.col(i) = Eigen::Map<const Eigen::VectorXd>(e.psi.data(), e.psi.size());
    }
  });
  return {std::move(Phi), std::move(Psi)};
}

Embedding embed_point(std::span<const double> x, const EmbedConfig& cfg) {
  return HomogeneousEmbedder(cfg, x.size()).embed(x);
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> embed_dataset(const Eigen::MatrixXd& X, const EmbedConfig& cfg) {
  return HomogeneousEmbedder(cfg, static_cast<std::size_t>(X.cols())).embed_rows(X);
}

}  // namespace nke
