#pragma once

#include <vector>

namespace nke::detail {

// coef * cos^cos_pow * sin^sin_pow * (pi - theta)^linear
struct AngularTerm {
  double coef;
  int cos_pow;
  int sin_pow;
  int linear;
};

std::vector<AngularTerm> rectified_terms(int n);

double eval_terms(const std::vector<AngularTerm>& terms, double theta);

}  // namespace nke::detail
