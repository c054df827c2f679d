#include "layoutcot/assignment.hpp"

#include <limits>

#include "layoutcot/error.hpp"

namespace layoutcot {

Assignment max_weight_assignment(std::span<const double> weights, std::size_t rows, std::size_t cols) {
  if (weights.size() != rows * cols) {
    throw Error(ErrorCode::DimensionMismatch, "assignment matrix size does not match rows x cols");
  }
  Assignment result;
  result.row_to_col.assign(rows, -1);
  if (rows == 0 || cols == 0) return result;

  // Potentials-based Hungarian for n <= m on cost = -weight; transpose when
  // there are more rows than columns.
  const bool transposed = rows > cols;
  const std::size_t n = transposed ? cols : rows;
  const std::size_t m = transposed ? rows : cols;
  const auto cost = [&](std::size_t i, std::size_t j) {
    return transposed ? -weights[j * cols + i] : -weights[i * cols + j];
  };

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, kInf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = p[j0];
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j] == 0) continue;
    const std::size_t small = p[j] - 1;
    const std::size_t large = j - 1;
    const std::size_t row = transposed ? large : small;
    const std::size_t col = transposed ? small : large;
    result.row_to_col[row] = static_cast<int>(col);
    result.total += weights[row * cols + col];
  }
  return result;
}

}  // namespace layoutcot
