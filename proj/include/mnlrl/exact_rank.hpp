#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <vector>

namespace mnlrl {

using BigInt = boost::multiprecision::cpp_int;
using IntMatrix = std::vector<std::vector<BigInt>>;

IntMatrix to_int_matrix(const std::vector<std::vector<std::int64_t>>& rows);

/// Rank by fraction-free (Bareiss) elimination. Every intermediate division
/// is exact, so the result is free of rounding.
std::size_t exact_rank(IntMatrix m);

/// [m | column]
IntMatrix augment(const IntMatrix& m, const std::vector<BigInt>& column);

}  // namespace mnlrl
