#include "mnlrl/exact_rank.hpp"

#include "mnlrl/common.hpp"

#include <utility>

namespace mnlrl {

IntMatrix to_int_matrix(const std::vector<std::vector<std::int64_t>>& rows) {
  IntMatrix m;
  m.reserve(rows.size());
  for (const auto& row : rows) m.emplace_back(row.begin(), row.end());
  return m;
}

std::size_t exact_rank(IntMatrix m) {
  if (m.empty()) return 0;
  const std::size_t n_rows = m.size();
  const std::size_t n_cols = m.front().size();
  for (const auto& row : m) {
    if (row.size() != n_cols) throw DimensionError("ragged integer matrix");
  }

  std::size_t rank = 0;
  BigInt previous_pivot = 1;
  for (std::size_t col = 0; col < n_cols && rank < n_rows; ++col) {
    std::size_t pivot = rank;
    while (pivot < n_rows && m[pivot][col] == 0) ++pivot;
    if (pivot == n_rows) continue;
    std::swap(m[pivot], m[rank]);

    const BigInt& p = m[rank][col];
    for (std::size_t i = rank + 1; i < n_rows; ++i) {
      for (std::size_t j = col + 1; j < n_cols; ++j) {
        m[i][j] = (p * m[i][j] - m[i][col] * m[rank][j]) / previous_pivot;
      }
      m[i][col] = 0;
    }
    previous_pivot = p;
    ++rank;
  }
  return rank;
}

IntMatrix augment(const IntMatrix& m, const std::vector<BigInt>& column) {
  if (m.size() != column.size()) throw DimensionError("augmenting column has wrong length");
  IntMatrix out = m;
  for (std::size_t i = 0; i < out.size(); ++i) out[i].push_back(column[i]);
  return out;
}

}  // namespace mnlrl
