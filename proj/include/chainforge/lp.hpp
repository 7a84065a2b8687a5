#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "errors.hpp"
#include "rational.hpp"

namespace chainforge {

enum class LpStatus { optimal, unbounded };

struct LpResult {
  LpStatus status = LpStatus::optimal;
  Rational objective;
  std::vector<Rational> x;  // primal solution
  std::vector<Rational> y;  // dual solution (one value per constraint row)
  std::size_t pivots = 0;
};

/// Exact dense-tableau simplex for  max c.x  s.t.  A x <= b, x >= 0  with b >= 0, so the
/// origin is a feasible start and no phase 1 is needed. Bland's rule (smallest index
/// enters, smallest basic index leaves on ratio ties) guarantees termination.
inline LpResult solve_lp(const std::vector<std::vector<Rational>>& a, const std::vector<Rational>& b,
                         const std::vector<Rational>& c, std::size_t max_cells = 4'000'000) {
  const std::size_t m = a.size();
  const std::size_t n = c.size();
  for (const auto& row : a)
    if (row.size() != n) throw ParameterError("constraint row width differs from objective length");
  if (b.size() != m) throw ParameterError("right-hand side length differs from row count");
  for (const auto& bi : b)
    if (bi < 0) throw ParameterError("solve_lp needs b >= 0 (origin feasible)");
  const std::size_t width = n + m + 1;  // variables, slacks, rhs
  if ((m + 1) * width > max_cells) throw BudgetExceeded("LP tableau exceeds the size budget");

  std::vector<std::vector<Rational>> t(m, std::vector<Rational>(width));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) t[i][j] = a[i][j];
    t[i][n + i] = 1;
    t[i][width - 1] = b[i];
  }
  // Reduced costs; the last entry holds minus the current objective value.
  std::vector<Rational> z(width);
  for (std::size_t j = 0; j < n; ++j) z[j] = c[j];
  std::vector<std::size_t> basis(m);
  for (std::size_t i = 0; i < m; ++i) basis[i] = n + i;

  LpResult result;
  while (true) {
    std::size_t enter = width;
    for (std::size_t j = 0; j + 1 < width; ++j)
      if (z[j] > 0) {
        enter = j;
        break;
      }
    if (enter == width) break;
    std::size_t leave = m;
    Rational best;
    for (std::size_t i = 0; i < m; ++i) {
      if (t[i][enter] <= 0) continue;
      Rational ratio = t[i][width - 1] / t[i][enter];
      if (leave == m || ratio < best || (ratio == best && basis[i] < basis[leave])) {
        leave = i;
        best = ratio;
      }
    }
    if (leave == m) {
      result.status = LpStatus::unbounded;
      return result;
    }
    const Rational pivot = t[leave][enter];
    for (auto& v : t[leave]) v /= pivot;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == leave || t[i][enter] == 0) continue;
      const Rational f = t[i][enter];
      for (std::size_t j = 0; j < width; ++j)
        if (t[leave][j] != 0) t[i][j] -= f * t[leave][j];
    }
    if (z[enter] != 0) {
      const Rational f = z[enter];
      for (std::size_t j = 0; j < width; ++j)
        if (t[leave][j] != 0) z[j] -= f * t[leave][j];
    }
    basis[leave] = enter;
    ++result.pivots;
  }
  result.x.assign(n, Rational(0));
  for (std::size_t i = 0; i < m; ++i)
    if (basis[i] < n) result.x[basis[i]] = t[i][width - 1];
  result.y.resize(m);
  for (std::size_t i = 0; i < m; ++i) result.y[i] = -z[n + i];
  result.objective = -z[width - 1];
  return result;
}

}  // namespace chainforge
