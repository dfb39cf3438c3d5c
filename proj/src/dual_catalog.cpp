#include "nke/dual_catalog.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nke/error.hpp"
#include "nke/series_dual.hpp"
#include "rectified.hpp"

namespace nke {

namespace {

constexpr double kPi = M_PI;
constexpr double kSigmoidScale = 2.4020563531719796;

double clamp_cos(double c) { return std::clamp(c, -1.0, 1.0); }

void expect_params(std::string_view name, std::span<const double> params, std::size_t n) {
  if (params.size() != n)
    fail(ErrorCode::BadParams, std::string(name) + " expects " + std::to_string(n) + " parameter(s), got " +
                                   std::to_string(params.size()));
  for (double v : params)
    if (!std::isfinite(v)) fail(ErrorCode::BadParams, std::string(name) + ": parameters must be finite");
}

int integer_param(std::string_view name, double v) {
  if (v < 0 || v != std::floor(v))
    fail(ErrorCode::BadParams, std::string(name) + ": order must be a nonnegative integer");
  return static_cast<int>(v);
}

DualActivation homogeneous(std::string name, std::vector<double> params, std::function<double(double)> kappa,
                           std::function<double(double)> kappa_prime) {
  DualActivation d;
  d.name = std::move(name);
  d.params = std::move(params);
  d.eval = [kappa](double a, double b, double c) { return a * b * kappa(clamp_cos(c)); };
  d.deriv_eval = [kappa_prime](double, double, double c) { return kappa_prime(clamp_cos(c)); };
  d.is_homogeneous = true;
  d.homogeneity_order = 1;
  d.kappa = std::move(kappa);
  d.kappa_prime = std::move(kappa_prime);
  return d;
}

// A min(t,0) + B max(t,0)
DualActivation abrelu_dual(std::string name, std::vector<double> params, double A, double B) {
  const double s = (B - A) * (B - A) / (2 * kPi);
  auto kappa = [s, A, B](double c) { return s * (std::sqrt(1 - c * c) + (kPi - std::acos(c)) * c) + A * B * c; };
  auto kappa_prime = [s, A, B](double c) { return s * (kPi - std::acos(c)) + A * B; };
  return homogeneous(std::move(name), std::move(params), kappa, kappa_prime);
}

DualActivation rectified_dual(int n) {
  DualActivation d;
  d.name = "rectified_monomial";
  d.params = {static_cast<double>(n)};
  auto terms = detail::rectified_terms(n);
  d.eval = [terms, n](double a, double b, double c) {
    return std::pow(a * b, n) * detail::eval_terms(terms, std::acos(clamp_cos(c))) / (2 * kPi);
  };
  if (n >= 1) {
    auto lower = detail::rectified_terms(n - 1);
    d.deriv_eval = [lower, n](double a, double b, double c) {
      return n * n * std::pow(a * b, n - 1) * detail::eval_terms(lower, std::acos(clamp_cos(c))) / (2 * kPi);
    };
  }
  d.homogeneity_order = n;
  if (n == 1) {
    d.is_homogeneous = true;
    d.kappa = [](double c) { return (std::sqrt(1 - c * c) + (kPi - std::acos(c)) * c) / (2 * kPi); };
    d.kappa_prime = [](double c) { return (kPi - std::acos(c)) / (2 * kPi); };
  }
  return d;
}

double monomial_closed(int n, double a, double b, double c) {
  const double ab = a * b, c2 = c * c;
  switch (n) {
    case 0: return 1.0;
    case 1: return ab * c;
    case 2: return ab * ab * (2 * c2 + 1);
    case 3: return 3 * std::pow(ab, 3) * c * (2 * c2 + 3);
    case 4: return 3 * std::pow(ab, 4) * (8 * c2 * c2 + 24 * c2 + 3);
    case 5: return 15 * std::pow(ab, 5) * c * (8 * c2 * c2 + 40 * c2 + 15);
    default: {
      PolyCoeffs p;
      p.coeffs.assign(n + 1, 0.0);
      p.coeffs[n] = 1.0;
      return detail::dual_kernel_poly_unchecked(p, a, b, c);
    }
  }
}

DualActivation monomial_dual(int n) {
  DualActivation d;
  d.name = "monomial";
  d.params = {static_cast<double>(n)};
  d.eval = [n](double a, double b, double c) { return monomial_closed(n, a, b, clamp_cos(c)); };
  d.deriv_eval = [n](double a, double b, double c) {
    return n == 0 ? 0.0 : n * n * monomial_closed(n - 1, a, b, clamp_cos(c));
  };
  d.homogeneity_order = n;
  if (n == 1) {
    d.is_homogeneous = true;
    d.kappa = [](double c) { return c; };
    d.kappa_prime = [](double) { return 1.0; };
  }
  return d;
}

DualActivation polynomial_dual(std::vector<double> coeffs) {
  if (coeffs.empty()) fail(ErrorCode::BadParams, "polynomial needs at least one coefficient");
  PolyCoeffs p{coeffs};
  PolyCoeffs dp = p.derivative();
  DualActivation d;
  d.name = "polynomial";
  d.params = coeffs;
  d.eval = [p](double a, double b, double c) { return detail::dual_kernel_poly_unchecked(p, a, b, clamp_cos(c)); };
  d.deriv_eval = [dp](double a, double b, double c) {
    return detail::dual_kernel_poly_unchecked(dp, a, b, clamp_cos(c));
  };
  int nonzero = 0, last = -1;
  for (std::size_t j = 0; j < coeffs.size(); ++j)
    if (coeffs[j] != 0.0) ++nonzero, last = static_cast<int>(j);
  if (nonzero == 1) d.homogeneity_order = last;
  return d;
}

// A sin(B t + C)
double sinusoidal_k(double A, double B, double C, double a, double b, double c, double sign) {
  const double x = a * b * c * B * B;
  return 0.5 * A * A * std::exp(-0.5 * B * B * (a * a + b * b)) * (std::exp(x) + sign * std::cos(2 * C) * std::exp(-x));
}

DualActivation sinusoidal_dual(std::string name, std::vector<double> params, double A, double B, double C) {
  DualActivation d;
  d.name = std::move(name);
  d.params = std::move(params);
  d.eval = [=](double a, double b, double c) { return sinusoidal_k(A, B, C, a, b, clamp_cos(c), -1.0); };
  d.deriv_eval = [=](double a, double b, double c) {
    return B * B * sinusoidal_k(A, B, C, a, b, clamp_cos(c), 1.0);
  };
  return d;
}

double erf_k(double a, double b, double c) {
  return 2 / kPi * std::asin(2 * a * b * c / std::sqrt((1 + 2 * a * a) * (1 + 2 * b * b)));
}

double erf_dk(double a, double b, double c) {
  return 4 / (kPi * std::sqrt((1 + 2 * a * a) * (1 + 2 * b * b) - 4 * a * a * b * b * c * c));
}

double gelu_k(double a, double b, double c) {
  const double a2 = a * a, b2 = b * b, abc = a * b * c;
  const double D = 1 + a2 + b2 + a2 * b2 * (1 - c * c);
  const double sD = std::sqrt(D);
  return abc / 4 +
         a2 * b2 / (2 * kPi) * (c * c + 1 + a2 + b2 + a2 * b2 * (1 - c * c)) / ((1 + a2) * (1 + b2) * sD) +
         abc / (2 * kPi) * std::atan(abc / sD);
}

double gelu_dk(double a, double b, double c) {
  const double a2 = a * a, b2 = b * b, abc = a * b * c;
  const double D = 1 + a2 + b2 + a2 * b2 * (1 - c * c);
  const double sD = std::sqrt(D);
  return 0.25 +
         ((2 - a2 * b2) * abc * (1 + a2) * (1 + b2) + (a2 * b2 - 1) * abc * abc * abc) /
             (2 * kPi * (1 + a2) * (1 + b2) * D * sD) +
         std::atan(abc / sD) / (2 * kPi) + abc / (2 * kPi * sD);
}

// Gabor exp(-t^2) sin(t). The expression below is written in variance/covariance form:
// callers pass (a^2, b^2, c / (ab)) and halve the result.
double gabor_raw(double a, double b, double c) {
  const double q = -4 * a * a * b * b * c * c;
  const double E = std::exp(-(q + 2 * a * b * c + 4 * a * b + a + b) / (2 * q + 8 * a * b + 4 * a + 4 * b + 2));
  return E * (std::exp(2 * a * b * c / (q + 4 * a * b + 2 * a + 2 * b + 1)) - 1) /
         std::sqrt(q + a * (4 * b + 2) + 2 * b + 1);
}

double gabor_raw_d(double a, double b, double c) {
  const double q = -4 * a * a * b * b * c * c;
  const double E = std::exp(-(q + 2 * a * b * c + 4 * a * b + a + b) / (2 * q + 8 * a * b + 4 * a + 4 * b + 2));
  const double F = std::exp(2 * a * b * c / (q + 4 * a * b + 2 * a + 2 * b + 1));
  const double num =
      (4 * a * b * c * (q + a * b * c + 3 * b + 2) + 2 * a * (8 * a * b * b * c + 6 * a * b * c + 2 * b + 1) + 2 * b + 1) * F +
      4 * a * b * c * (-q + a * b * c - 3 * b - 2) + 2 * a * (-8 * a * b * b * c - 6 * a * b * c + 2 * b + 1) + 2 * b + 1;
  return E * num / std::pow(q + a * (4 * b + 2) + 2 * b + 1, 2.5);
}

double gabor_cov(double a, double b, double c) { return a * b > 0 ? c / (a * b) : 0.0; }

double erf_mean(double) { return 0.0; }

}  // namespace

std::vector<std::string> catalog_names() {
  return {"relu",     "abrelu",   "leaky_relu", "abs",      "rectified_monomial", "erf",
          "sin",      "cos",      "sinusoidal", "gaussian", "exponential",        "gelu",
          "gabor",    "monomial", "polynomial", "normalized_gaussian",            "rbf",
          "sign",     "step",     "sigmoid_like"};
}

DualActivation catalog_lookup(std::string_view name, std::span<const double> params) {
  std::vector<double> pv(params.begin(), params.end());
  if (name == "relu") {
    expect_params(name, params, 0);
    DualActivation d = abrelu_dual("relu", pv, 0.0, 1.0);
    return d;
  }
  if (name == "abrelu") {
    expect_params(name, params, 2);
    return abrelu_dual("abrelu", pv, params[0], params[1]);
  }
  if (name == "leaky_relu") {
    expect_params(name, params, 1);
    return abrelu_dual("leaky_relu", pv, params[0], 1.0);
  }
  if (name == "abs") {
    expect_params(name, params, 0);
    return homogeneous(
        "abs", pv, [](double c) { return 2 / kPi * (std::sqrt(1 - c * c) + (kPi - std::acos(c)) * c) - c; },
        [](double c) { return 1 - 2 / kPi * std::acos(c); });
  }
  if (name == "rectified_monomial") {
    expect_params(name, params, 1);
    return rectified_dual(integer_param(name, params[0]));
  }
  if (name == "step") {
    expect_params(name, params, 0);
    DualActivation d = rectified_dual(0);
    d.name = "step";
    d.params.clear();
    return d;
  }
  if (name == "sign") {
    expect_params(name, params, 0);
    DualActivation d;
    d.name = "sign";
    d.eval = [](double, double, double c) { return 2 / kPi * std::asin(clamp_cos(c)); };
    d.homogeneity_order = 0;
    return d;
  }
  if (name == "erf") {
    expect_params(name, params, 0);
    DualActivation d;
    d.name = "erf";
    d.eval = [](double a, double b, double c) { return erf_k(a, b, clamp_cos(c)); };
    d.deriv_eval = [](double a, double b, double c) { return erf_dk(a, b, clamp_cos(c)); };
    return d;
  }
  if (name == "sigmoid_like") {
    expect_params(name, params, 0);
    DualActivation d = affine_dual(catalog_lookup("erf"), erf_mean, 0.5, 1.0 / kSigmoidScale, 0.5);
    d.name = "sigmoid_like";
    return d;
  }
  if (name == "sin") {
    expect_params(name, params, 0);
    return sinusoidal_dual("sin", pv, 1.0, 1.0, 0.0);
  }
  if (name == "cos") {
    expect_params(name, params, 0);
    return sinusoidal_dual("cos", pv, 1.0, 1.0, kPi / 2);
  }
  if (name == "sinusoidal") {
    expect_params(name, params, 3);
    return sinusoidal_dual("sinusoidal", pv, params[0], params[1], params[2]);
  }
  if (name == "rbf") {
    expect_params(name, params, 1);
    const double A = params[0];
    if (!(A > 0)) fail(ErrorCode::BadParams, "rbf: bandwidth A must be positive");
    DualActivation d;
    d.name = "rbf";
    d.params = pv;
    d.eval = [A](double a, double b, double c) { return std::exp(-A * (a * a + b * b - 2 * a * b * clamp_cos(c))); };
    d.deriv_eval = [A](double a, double b, double c) {
      return 2 * A * std::exp(-A * (a * a + b * b - 2 * a * b * clamp_cos(c)));
    };
    return d;
  }
  if (name == "gaussian") {
    expect_params(name, params, 1);
    const double A = params[0];
    if (!(A >= 0)) fail(ErrorCode::BadParams, "gaussian: A must be nonnegative");
    DualActivation d;
    d.name = "gaussian";
    d.params = pv;
    auto det = [A](double a, double b, double c) {
      const double x = 2 * A * a * b * c;
      return (2 * A * a * a + 1) * (2 * A * b * b + 1) - x * x;
    };
    d.eval = [det](double a, double b, double c) { return 1 / std::sqrt(det(a, b, clamp_cos(c))); };
    d.deriv_eval = [det, A](double a, double b, double c) {
      c = clamp_cos(c);
      return 4 * A * A * a * b * c / std::pow(det(a, b, c), 1.5);
    };
    return d;
  }
  if (name == "exponential") {
    expect_params(name, params, 1);
    const double A = params[0];
    DualActivation d;
    d.name = "exponential";
    d.params = pv;
    d.eval = [A](double a, double b, double c) {
      return std::exp(0.5 * A * A * (a * a + b * b + 2 * a * b * clamp_cos(c)));
    };
    d.deriv_eval = [A](double a, double b, double c) {
      return A * A * std::exp(0.5 * A * A * (a * a + b * b + 2 * a * b * clamp_cos(c)));
    };
    return d;
  }
  if (name == "gelu") {
    expect_params(name, params, 0);
    DualActivation d;
    d.name = "gelu";
    d.eval = [](double a, double b, double c) { return gelu_k(a, b, clamp_cos(c)); };
    d.deriv_eval = [](double a, double b, double c) { return gelu_dk(a, b, clamp_cos(c)); };
    return d;
  }
  if (name == "gabor") {
    expect_params(name, params, 0);
    DualActivation d;
    d.name = "gabor";
    d.eval = [](double a, double b, double c) {
      return 0.5 * gabor_raw(a * a, b * b, gabor_cov(a, b, clamp_cos(c)));
    };
    d.deriv_eval = [](double a, double b, double c) {
      return 0.5 * gabor_raw_d(a * a, b * b, gabor_cov(a, b, clamp_cos(c)));
    };
    return d;
  }
  if (name == "monomial") {
    expect_params(name, params, 1);
    return monomial_dual(integer_param(name, params[0]));
  }
  if (name == "polynomial") {
    if (params.empty()) fail(ErrorCode::BadParams, "polynomial needs at least one coefficient");
    for (double v : params)
      if (!std::isfinite(v)) fail(ErrorCode::BadParams, "polynomial: coefficients must be finite");
    return polynomial_dual(pv);
  }
  if (name == "normalized_gaussian") {
    expect_params(name, params, 0);
    return homogeneous(
        "normalized_gaussian", pv, [](double c) { return std::exp(c - 1); }, [](double c) { return std::exp(c - 1); });
  }
  fail(ErrorCode::UnknownActivation, "unknown activation '" + std::string(name) + "'");
}

ActivationSpec activation_spec(std::string_view name, std::span<const double> params) {
  ActivationSpec s;
  s.name = std::string(name);
  if (name == "normalized_gaussian")
    fail(ErrorCode::NoScalarForm, "normalized_gaussian is defined only through its dual kernel; no scalar activation");
  if (name == "elu") {
    if (params.size() > 1) fail(ErrorCode::BadParams, "elu expects at most 1 parameter");
    const double A = params.empty() ? 1.0 : params[0];
    s.scalar_fn = [A](double t) { return t > 0 ? t : A * std::expm1(t); };
    s.scalar_deriv = [A](double t) { return t > 0 ? 1.0 : A * std::exp(t); };
    return s;
  }
  // Validates the name and parameter count.
  DualActivation d = catalog_lookup(name, params);
  const std::vector<double>& p = d.params;
  if (name == "relu" || name == "abrelu" || name == "leaky_relu") {
    const double A = name == "relu" ? 0.0 : p[0];
    const double B = name == "abrelu" ? p[1] : 1.0;
    s.scalar_fn = [A, B](double t) { return t > 0 ? B * t : A * t; };
    s.scalar_deriv = [A, B](double t) { return t > 0 ? B : A; };
  } else if (name == "abs") {
    s.scalar_fn = [](double t) { return std::abs(t); };
    s.scalar_deriv = [](double t) { return t > 0 ? 1.0 : (t < 0 ? -1.0 : 0.0); };
  } else if (name == "rectified_monomial" || name == "step") {
    const int n = name == "step" ? 0 : static_cast<int>(p[0]);
    s.scalar_fn = [n](double t) { return t > 0 ? std::pow(t, n) : 0.0; };
    if (n >= 1) s.scalar_deriv = [n](double t) { return t > 0 ? n * std::pow(t, n - 1) : 0.0; };
  } else if (name == "sign") {
    s.scalar_fn = [](double t) { return t > 0 ? 1.0 : (t < 0 ? -1.0 : 0.0); };
  } else if (name == "erf") {
    s.scalar_fn = [](double t) { return std::erf(t); };
    s.scalar_deriv = [](double t) { return 2 / std::sqrt(kPi) * std::exp(-t * t); };
  } else if (name == "sigmoid_like") {
    s.scalar_fn = [](double t) { return 0.5 * (std::erf(t / kSigmoidScale) + 1); };
    s.scalar_deriv = [](double t) {
      const double u = t / kSigmoidScale;
      return std::exp(-u * u) / (std::sqrt(kPi) * kSigmoidScale);
    };
  } else if (name == "sin") {
    s.scalar_fn = [](double t) { return std::sin(t); };
    s.scalar_deriv = [](double t) { return std::cos(t); };
  } else if (name == "cos") {
    s.scalar_fn = [](double t) { return std::cos(t); };
    s.scalar_deriv = [](double t) { return -std::sin(t); };
  } else if (name == "sinusoidal" || name == "rbf") {
    double A, B, C;
    if (name == "rbf") {
      A = std::sqrt(2.0), B = std::sqrt(2 * p[0]), C = kPi / 4;
    } else {
      A = p[0], B = p[1], C = p[2];
    }
    s.scalar_fn = [A, B, C](double t) { return A * std::sin(B * t + C); };
    s.scalar_deriv = [A, B, C](double t) { return A * B * std::cos(B * t + C); };
  } else if (name == "gaussian") {
    const double A = p[0];
    s.scalar_fn = [A](double t) { return std::exp(-A * t * t); };
    s.scalar_deriv = [A](double t) { return -2 * A * t * std::exp(-A * t * t); };
  } else if (name == "exponential") {
    const double A = p[0];
    s.scalar_fn = [A](double t) { return std::exp(A * t); };
    s.scalar_deriv = [A](double t) { return A * std::exp(A * t); };
  } else if (name == "gelu") {
    s.scalar_fn = [](double t) { return 0.5 * t * (1 + std::erf(t / std::sqrt(2.0))); };
    s.scalar_deriv = [](double t) {
      return 0.5 * (1 + std::erf(t / std::sqrt(2.0))) + t * std::exp(-0.5 * t * t) / std::sqrt(2 * kPi);
    };
  } else if (name == "gabor") {
    s.scalar_fn = [](double t) { return std::exp(-t * t) * std::sin(t); };
    s.scalar_deriv = [](double t) { return std::exp(-t * t) * (std::cos(t) - 2 * t * std::sin(t)); };
  } else if (name == "monomial" || name == "polynomial") {
    PolyCoeffs poly;
    if (name == "monomial") {
      poly.coeffs.assign(static_cast<std::size_t>(p[0]) + 1, 0.0);
      poly.coeffs.back() = 1.0;
    } else {
      poly.coeffs = p;
    }
    PolyCoeffs dpoly = poly.derivative();
    s.scalar_fn = [poly](double t) { return poly(t); };
    s.scalar_deriv = [dpoly](double t) { return dpoly(t); };
  }
  return s;
}

double derivative_dual_numeric(const DualActivation& k, double a, double b, double c, double h) {
  if (!(a > 0) || !(b > 0)) fail(ErrorCode::DomainError, "derivative dual needs a, b > 0");
  if (!(h > 0) || h > 1e-3) fail(ErrorCode::InvalidArgument, "finite-difference step must be in (0, 1e-3]");
  if (std::abs(c) > 1) fail(ErrorCode::DomainError, "cosine outside [-1, 1]");
  auto f = [&](double x) { return k.eval(a, b, x); };
  double d;
  if (c + h > 1)
    d = (3 * f(c) - 4 * f(c - h) + f(c - 2 * h)) / (2 * h);
  else if (c - h < -1)
    d = (-3 * f(c) + 4 * f(c + h) - f(c + 2 * h)) / (2 * h);
  else
    d = (f(c + h) - f(c - h)) / (2 * h);
  return d / (a * b);
}

double derivative_dual(const DualActivation& k, double a, double b, double c) {
  if (k.deriv_eval) return k.deriv_eval(a, b, c);
  return derivative_dual_numeric(k, a, b, std::clamp(c, -1.0, 1.0));
}

double gauss_hermite_dual(const ActivationSpec& spec, double a, double b, double c, int q) {
  if (q < 2) fail(ErrorCode::InvalidArgument, "quadrature order must be at least 2");
  if (!spec.scalar_fn) fail(ErrorCode::NoScalarForm, spec.name + " has no scalar form");
  const QuadratureRule& rule = cached_gauss_hermite_rule(q);
  c = std::clamp(c, -1.0, 1.0);
  const double s2 = std::sqrt(2.0), sc = std::sqrt(1 - c * c);
  auto sig = [&](double t) {
    double v = spec.scalar_fn(t);
    if (!std::isfinite(v))
      fail(ErrorCode::NonFiniteActivation, spec.name + " is not finite at t=" + std::to_string(t));
    return v;
  };
  double total = 0.0;
  for (int i = 0; i < q; ++i) {
    const double xi = rule.nodes[i];
    const double u = sig(s2 * a * xi);
    double inner = 0.0;
    for (int j = 0; j < q; ++j) inner += rule.weights[j] * sig(s2 * b * c * xi + s2 * b * sc * rule.nodes[j]);
    total += rule.weights[i] * u * inner;
  }
  return total / kPi;
}

DualActivation affine_dual(const DualActivation& k, std::function<double(double)> mean_fn, double A, double B,
                           double C) {
  DualActivation d;
  d.name = k.name;
  d.params = k.params;
  auto base = k.eval;
  d.eval = [=](double a, double b, double c) {
    double v = A * A * base(B * a, B * b, c) + C * C;
    if (C != 0.0) v += A * C * (mean_fn(B * a) + mean_fn(B * b));
    return v;
  };
  if (k.deriv_eval) {
    auto dbase = k.deriv_eval;
    d.deriv_eval = [=](double a, double b, double c) { return A * A * B * B * dbase(B * a, B * b, c); };
  }
  if (C == 0.0) {
    d.homogeneity_order = k.homogeneity_order;
    if (k.is_homogeneous && B > 0) {
      const double s = A * A * B * B;
      auto kap = k.kappa, kapp = k.kappa_prime;
      d.is_homogeneous = true;
      d.kappa = [=](double c) { return s * kap(c); };
      d.kappa_prime = [=](double c) { return s * kapp(c); };
    }
  }
  return d;
}

AbReluSlopes abrelu_fit_normalized_gaussian() {
  const double e2 = std::exp(-2.0);
  const double diff = std::sqrt(2 + 2 * e2);  // B - A
  const double sum = std::sqrt(2 - 2 * e2);   // B + A
  return {(sum - diff) / 2, (sum + diff) / 2};
}

DualActivation normalize(const DualActivation& k) {
  const double s = k.eval(1.0, 1.0, 1.0);
  if (!(s > 0) || !std::isfinite(s))
    fail(ErrorCode::DomainError, "cannot normalize " + k.name + ": eval(1,1,1) is not positive");
  DualActivation d = k;
  auto base = k.eval;
  d.eval = [=](double a, double b, double c) { return base(a, b, c) / s; };
  if (k.deriv_eval) {
    auto dbase = k.deriv_eval;
    d.deriv_eval = [=](double a, double b, double c) { return dbase(a, b, c) / s; };
  }
  if (k.is_homogeneous) {
    auto kap = k.kappa, kapp = k.kappa_prime;
    d.kappa = [=](double c) { return kap(c) / s; };
    d.kappa_prime = [=](double c) { return kapp(c) / s; };
  }
  return d;
}

}  // namespace nke
