#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace layoutcot {

struct Assignment {
  // row -> matched column, or -1 when the row is left unmatched.
  std::vector<int> row_to_col;
  double total = 0.0;
};

/// Hungarian method on a rows x cols row-major matrix. Matches
/// min(rows, cols) pairs so that the summed weight is maximal.
Assignment max_weight_assignment(std::span<const double> weights, std::size_t rows, std::size_t cols);

}  // namespace layoutcot
