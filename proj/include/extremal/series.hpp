#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace extremal {

// A complete, regularly spaced sequence of finite observations.
class Series {
 public:
  explicit Series(std::vector<double> values);

  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
  [[nodiscard]] double operator[](std::size_t i) const { return values_[i]; }

  friend bool operator==(const Series&, const Series&) = default;

 private:
  std::vector<double> values_;
};

}  // namespace extremal
