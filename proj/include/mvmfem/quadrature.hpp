#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace mvmfem {

// Quadrature node on a reference simplex, stored in barycentric coordinates
// (dim+1 entries). Weights are normalized so they sum to 1; an integral over a
// physical cell is measure(cell) * sum_i w_i f(x_i).
struct QuadRule {
  int dim = 0;
  int degree = 0;                          // highest total degree integrated exactly
  std::vector<std::array<double, 4>> bary; // only the first dim+1 entries are used
  std::vector<double> weights;
};

namespace detail {

inline double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

// Enumerate nonnegative integer tuples of length `parts` summing to `total`.
inline void compositions(int total, int parts, std::array<int, 4>& cur, int pos,
                         std::vector<std::array<int, 4>>& out) {
  if (pos == parts - 1) {
    cur[pos] = total;
    out.push_back(cur);
    return;
  }
  for (int first = 0; first <= total; ++first) {
    cur[pos] = first;
    compositions(total - first, parts, cur, pos + 1, out);
  }
}

}  // namespace detail

// Grundmann-Moller rule of index s on the dim-simplex, exact for total degree
// 2s+1. The closed-form weights alternate in sign; exactness is what matters
// here and is covered by the monomial tests.
inline QuadRule grundmann_moller(int dim, int s) {
  if (dim < 1 || dim > 3 || s < 0) throw std::invalid_argument("grundmann_moller: bad dim/s");
  const int d = 2 * s + 1;
  QuadRule rule;
  rule.dim = dim;
  rule.degree = d;
  for (int i = 0; i <= s; ++i) {
    const int denom = d + dim - 2 * i;
    double coef = 1.0;
    for (int k = 0; k < d; ++k) coef *= denom;
    coef /= detail::factorial(i) * detail::factorial(d + dim - i);
    coef *= std::pow(2.0, -2.0 * s) * ((i % 2 == 0) ? 1.0 : -1.0);
    coef *= detail::factorial(dim);  // normalize: reference simplex volume 1/dim!
    std::vector<std::array<int, 4>> betas;
    std::array<int, 4> cur{0, 0, 0, 0};
    detail::compositions(s - i, dim + 1, cur, 0, betas);
    for (const auto& beta : betas) {
      std::array<double, 4> lam{0.0, 0.0, 0.0, 0.0};
      for (int k = 0; k <= dim; ++k) lam[k] = double(2 * beta[k] + 1) / denom;
      rule.bary.push_back(lam);
      rule.weights.push_back(coef);
    }
  }
  return rule;
}

// Smallest Grundmann-Moller rule exact for (at least) the requested degree.
inline QuadRule simplex_rule(int dim, int min_degree) {
  int s = 0;
  while (2 * s + 1 < min_degree) ++s;
  return grundmann_moller(dim, s);
}

}  // namespace mvmfem
