#include "sigdiag/linalg.hpp"

#include <algorithm>

namespace sigdiag {

double median_of(Vector values) {
  if (values.empty()) {
    throw SchemaError("median_of: empty input");
  }
  const std::size_t n = values.size();
  const std::size_t mid = n / 2;
  std::nth_element(values.begin(), values.begin() + mid, values.end());
  const double upper = values[mid];
  if (n % 2 == 1) {
    return upper;
  }
  // Even count: mean of the two middle order statistics.
  const double lower = *std::max_element(values.begin(), values.begin() + mid);
  return 0.5 * (lower + upper);
}

}  // namespace sigdiag
