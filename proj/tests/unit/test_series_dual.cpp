#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nke/dual_catalog.hpp"
#include "nke/error.hpp"
#include "nke/hermite.hpp"
#include "nke/series_dual.hpp"

using namespace nke;

TEST(RadialFactor, SmallPolynomials) {
  EXPECT_NEAR(radial_factor(PolyCoeffs{{0, 1}}, 1, 2.0), 2.0, 1e-15);
  EXPECT_NEAR(radial_factor(PolyCoeffs{{0, 0, 1}}, 0, 1.0), 1.0, 1e-15);
  EXPECT_NEAR(radial_factor(PolyCoeffs{{0, 0, 1}}, 2, 1.0), std::sqrt(2.0), 1e-15);
  EXPECT_THROW(radial_factor(PolyCoeffs{{0, 1}}, 2, 1.0), Error);
}

TEST(RadialFactor, CubicByHand) {
  // t^3 = h_3 + 3 h_1, so at norm s the radial parts are r_1 = 3 s^3, r_3 = sqrt(6) s^3.
  const PolyCoeffs p{{0, 0, 0, 1}};
  EXPECT_NEAR(radial_factor(p, 1, 1.5), 3 * std::pow(1.5, 3), 1e-12);
  EXPECT_NEAR(radial_factor(p, 3, 1.5), std::sqrt(6.0) * std::pow(1.5, 3), 1e-12);
  EXPECT_NEAR(radial_factor(p, 0, 1.5), 0.0, 1e-15);
}

TEST(DualKernelPoly, ReferenceValues) {
  EXPECT_NEAR(dual_kernel_poly(PolyCoeffs{{0, 1}}, 1, 1, 0.3), 0.3, 1e-15);
  EXPECT_NEAR(dual_kernel_poly(PolyCoeffs{{0, 0, 1}}, 1, 1, 0.5), 1.5, 1e-14);
}

TEST(DualKernelPoly, TruncatedSine) {
  const auto hc = hermite_expand([](double t) { return std::sin(t); }, 9, 1.0, 40);
  const auto p = hermite_to_poly(hc);
  EXPECT_NEAR(dual_kernel_poly(p, 1, 1, 1), std::exp(-1.0) * std::sinh(1.0), 1e-4);
}

TEST(DualKernelPoly, ConstantPolynomial) {
  std::mt19937_64 eng(1);
  std::uniform_real_distribution<double> u(0.1, 3), cc(-1, 1);
  for (int r = 0; r < 20; ++r) EXPECT_NEAR(dual_kernel_poly(PolyCoeffs{{-1.7}}, u(eng), u(eng), cc(eng)), 1.7 * 1.7, 1e-13);
}

TEST(DualKernelPoly, ZeroNormRejected) {
  try {
    dual_kernel_poly(PolyCoeffs{{0, 1}}, 0.0, 1.0, 0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroNormInput);
  }
}

TEST(DualKernelPoly, MatchesQuadratureForRandomPolynomials) {
  std::mt19937_64 eng(7);
  std::uniform_real_distribution<double> coef(-1, 1), ab(0.3, 2), cc(-1, 1);
  std::uniform_int_distribution<int> deg(0, 6);
  for (int r = 0; r < 50; ++r) {
    PolyCoeffs p;
    p.coeffs.resize(deg(eng) + 1);
    for (auto& v : p.coeffs) v = coef(eng);
    const ActivationSpec spec{"poly", [p](double t) { return p(t); }, nullptr};
    const double a = ab(eng), b = ab(eng), c = cc(eng);
    const double want = gauss_hermite_dual(spec, a, b, c, 8);
    EXPECT_NEAR(dual_kernel_poly(p, a, b, c), want, 1e-8 * std::max(1.0, std::abs(want)));
  }
}

TEST(DualKernelPoly, MatrixForm) {
  Eigen::MatrixXd X(3, 2);
  X << 1, 0, 0.5, 0.5, -1, 2;
  const PolyCoeffs p{{0.2, 0.4, 0.3}};
  const auto K = dual_kernel_poly_matrix(p, X);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const double a = X.row(i).norm(), b = X.row(j).norm();
      EXPECT_NEAR(K(i, j), dual_kernel_poly(p, a, b, X.row(i).dot(X.row(j)) / (a * b)), 1e-13);
    }
}

TEST(HermiteToPoly, RecoversMonomials) {
  HermiteCoeffs hc;
  hc.coeffs = {1, 0, 1};  // h_0 + h_2 = t^2
  hc.nu = 1;
  const auto p = hermite_to_poly(hc);
  EXPECT_NEAR(p.coeffs[0], 0.0, 1e-14);
  EXPECT_NEAR(p.coeffs[2], 1.0, 1e-14);
  hc.nu = 2;  // h_0(t/2) + h_2(t/2) = t^2 / 4
  const auto p2 = hermite_to_poly(hc);
  EXPECT_NEAR(p2.coeffs[2], 0.25, 1e-14);
}

TEST(HermiteSeriesDual, AgreesWithMonomialRouteAtLowDegree) {
  const auto hc = hermite_expand([](double t) { return std::erf(t); }, 11, 1.0, 60);
  const auto p = hermite_to_poly(hc);
  for (double c : {-0.9, -0.1, 0.4, 1.0})
    EXPECT_NEAR(dual_kernel_hermite_series(hc, 0.8, 0.6, c), dual_kernel_poly(p, 0.8, 0.6, c), 1e-10);
}

TEST(TruncationBounds, General) {
  EXPECT_DOUBLE_EQ(truncation_error_bound_general(1, 0, 1, 1, 1), 0.0);
  EXPECT_NEAR(truncation_error_bound_general(1, 0.01, 1, 1, 1), std::sqrt(0.01 * 6.04), 1e-12);
  EXPECT_NEAR(truncation_error_bound_general(1, 0.01, 1, 0.5, 1) / truncation_error_bound_general(1, 0.01, 1, 1, 1),
              std::sqrt(2.0), 1e-12);
}

TEST(TruncationBounds, Smooth) {
  EXPECT_NEAR(truncation_error_bound_smooth(2, 16, 1, 1, 1, 1, 1), 5 / std::sqrt(32.0), 1e-12);
  EXPECT_NEAR(truncation_error_bound_smooth(3, 8, 1.5, 1, 0.3, 0.5, 1) / truncation_error_bound_smooth(3, 16, 1.5, 1, 0.3, 0.5, 1),
              2.0, 1e-12);
  EXPECT_DOUBLE_EQ(truncation_error_bound_smooth(3, 8, 1, 1, 0, 1, 1), 0.0);
}

TEST(TruncationBounds, Relu) {
  EXPECT_NEAR(truncation_error_bound_relu(2, 1, 1, 1), 1.0, 1e-14);
  EXPECT_NEAR(truncation_error_bound_relu(200, 1, 1, 1), 0.1, 1e-14);
  EXPECT_NEAR(truncation_error_bound_relu(12, 1.3, 0.4, 0.9) / truncation_error_bound_relu(48, 1.3, 0.4, 0.9), 2.0, 1e-12);
}

TEST(TruncationBounds, Domain) {
  try {
    truncation_error_bound_relu(4, 1, 1.5, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DomainError);
  }
  EXPECT_THROW(truncation_error_bound_general(1, 0.1, 0.5, 0.2, 0.2), Error);
  EXPECT_THROW(truncation_error_bound_smooth(2, 4, 1, 1, 1, 0, 1), Error);
}

TEST(TruncationBounds, HoldEmpirically) {
  std::mt19937_64 eng(99);
  std::uniform_real_distribution<double> norm(1e-3, 1), cc(-1, 1);
  struct Case {
    const char* name;
    std::function<double(double)> f;
  };
  const std::vector<Case> cases{{"relu", [](double t) { return std::max(t, 0.0); }},
                                {"erf", [](double t) { return std::erf(t); }},
                                {"sin", [](double t) { return std::sin(t); }}};
  for (const auto& cs : cases) {
    const auto dual = catalog_lookup(cs.name);
    const double sigma_norm = std::sqrt(gaussian_norm_sq(cs.f, 200));
    for (int q : {4, 16, 64}) {
      const auto hc = hermite_expand(cs.f, q, 1.0, 200);
      const double eps = hermite_tail_energy(cs.f, q, 1.0, 200);
      int violations = 0;
      for (int r = 0; r < 100; ++r) {
        const double a = norm(eng), b = norm(eng), c = cc(eng);
        const double err = std::abs(dual.eval(a, b, c) - dual_kernel_hermite_series(hc, a, b, c));
        const double bound = std::string(cs.name) == "relu" ? truncation_error_bound_relu(q, 1, a, b)
                                                            : truncation_error_bound_general(sigma_norm, eps, 1, a, b);
        if (err > bound) ++violations;
      }
      EXPECT_EQ(violations, 0) << cs.name << " q=" << q;
    }
  }
}

TEST(PolyCoeffs, Basics) {
  const PolyCoeffs p{{1, -2, 3}};
  EXPECT_EQ(p.degree(), 2);
  EXPECT_FALSE(p.nonnegative());
  EXPECT_DOUBLE_EQ(p(2.0), 1 - 4 + 12);
  const auto d = p.derivative();
  EXPECT_EQ(d.coeffs, (std::vector<double>{-2, 6}));
  EXPECT_TRUE(PolyCoeffs({{0, 1, 2}}).nonnegative());
}
