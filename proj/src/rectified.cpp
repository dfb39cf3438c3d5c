#include "rectified.hpp"

#include <cmath>
#include <map>
#include <string>
#include <tuple>

#include "nke/dual_catalog.hpp"
#include "nke/error.hpp"

namespace nke::detail {

// J_n(theta) = (-1)^n sin^(2n+1) (sin^-1 d/dtheta)^n ((pi - theta) / sin).
// Terms are tracked symbolically as (cos power, inverse sin power, linear flag).
std::vector<AngularTerm> rectified_terms(int n) {
  if (n < 0) fail(ErrorCode::BadParams, "rectified monomial order must be nonnegative");
  if (n > 20) fail(ErrorCode::DegreeTooLarge, "rectified monomial order above 20");
  using Key = std::tuple<int, int, int>;
  std::map<Key, double> cur{{{0, 1, 1}, 1.0}};
  for (int step = 0; step < n; ++step) {
    std::map<Key, double> next;
    for (const auto& [key, coef] : cur) {
      auto [i, k, e] = key;
      if (i > 0) next[{i - 1, k, e}] += -i * coef;
      if (k > 0) next[{i + 1, k + 2, e}] += -k * coef;
      if (e == 1) next[{i, k + 1, 0}] += -coef;
    }
    cur = std::move(next);
  }
  const double sign = (n % 2 == 0) ? 1.0 : -1.0;
  std::vector<AngularTerm> out;
  for (const auto& [key, coef] : cur) {
    if (coef == 0.0) continue;
    auto [i, k, e] = key;
    out.push_back({sign * coef, i, 2 * n + 1 - k, e});
  }
  return out;
}

double eval_terms(const std::vector<AngularTerm>& terms, double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  double acc = 0.0;
  for (const auto& t : terms) {
    double v = t.coef * std::pow(c, t.cos_pow) * std::pow(s, t.sin_pow);
    if (t.linear) v *= (M_PI - theta);
    acc += v;
  }
  return acc;
}

}  // namespace nke::detail

namespace nke {

double rectified_J(int n, double theta) {
  return detail::eval_terms(detail::rectified_terms(n), theta);
}

}  // namespace nke
