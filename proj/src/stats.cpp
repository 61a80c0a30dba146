#include "extremal/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "extremal/error.hpp"

namespace extremal::stats {

double mean(std::span<const double> x) {
  if (x.empty()) throw Error(ErrorCode::empty_sample, "mean of an empty sample");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double sd(std::span<const double> x) {
  if (x.size() < 2) throw Error(ErrorCode::empty_sample, "standard deviation needs two values");
  const double m = mean(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

double median(std::vector<double> x) { return quantile_type7(std::move(x), 0.5); }

double quantile_type7(std::vector<double> x, double q) {
  if (x.empty()) throw Error(ErrorCode::empty_sample, "quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw Error(ErrorCode::domain_error, "quantile level must lie in [0, 1]");
  std::sort(x.begin(), x.end());
  const double h = static_cast<double>(x.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, x.size() - 1);
  return x[lo] + (h - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

double ecdf(std::span<const double> x, double u) {
  if (x.empty()) throw Error(ErrorCode::empty_sample, "ECDF of an empty sample");
  const auto count = std::count_if(x.begin(), x.end(), [u](double v) { return v <= u; });
  return static_cast<double>(count) / static_cast<double>(x.size());
}

}  // namespace extremal::stats
