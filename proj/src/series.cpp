#include "extremal/series.hpp"

#include <cmath>
#include <string>

#include "extremal/error.hpp"

namespace extremal {

Series::Series(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw Error(ErrorCode::invalid_series, "series is empty");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw Error(ErrorCode::invalid_series, "non-finite value at index " + std::to_string(i));
    }
  }
}

}  // namespace extremal
