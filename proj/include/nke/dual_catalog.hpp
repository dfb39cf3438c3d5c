#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nke/hermite.hpp"

namespace nke {

// k(a, b, c) = E[sigma(u) sigma(v)] for (u, v) ~ N(0, [[a^2, abc], [abc, b^2]]).
using DualFn = std::function<double(double, double, double)>;

struct DualActivation {
  std::string name;
  std::vector<double> params;
  DualFn eval;
  DualFn deriv_eval;  // dual of sigma'; empty when no closed form is known
  bool is_homogeneous = false;
  // Order n with eval(s a, s b, c) = s^(2n) eval(a, b, c); -1 when not positively homogeneous.
  int homogeneity_order = -1;
  std::function<double(double)> kappa;
  std::function<double(double)> kappa_prime;

  bool has_deriv() const { return static_cast<bool>(deriv_eval); }
};

struct ActivationSpec {
  std::string name;
  ScalarFn scalar_fn;
  ScalarFn scalar_deriv;  // optional
};

DualActivation catalog_lookup(std::string_view name, std::span<const double> params = {});

// Scalar form of a catalog activation (plus "elu", quadrature only).
ActivationSpec activation_spec(std::string_view name, std::span<const double> params = {});

std::vector<std::string> catalog_names();

// (1/(ab)) d/dc k(a, b, c) by finite differences; one-sided near c = +-1.
double derivative_dual_numeric(const DualActivation& k, double a, double b, double c, double h = 1e-5);

// Derivative dual: closed form when present, finite differences otherwise.
double derivative_dual(const DualActivation& k, double a, double b, double c);

double gauss_hermite_dual(const ActivationSpec& spec, double a, double b, double c, int q);

// Dual of A sigma(B t) + C; mean_fn(s) = E[sigma(s t)], t ~ N(0, 1).
DualActivation affine_dual(const DualActivation& k, std::function<double(double)> mean_fn,
                           double A, double B, double C);

struct AbReluSlopes {
  double A;
  double B;
};

// Slopes with kappa(1) = 1 and kappa(-1) = e^-2, matching exp(c - 1) at both ends.
AbReluSlopes abrelu_fit_normalized_gaussian();

// Rescales so eval(1, 1, 1) = 1.
DualActivation normalize(const DualActivation& k);

// Arc-cosine kernel angular part J_n(theta).
double rectified_J(int n, double theta);

}  // namespace nke
