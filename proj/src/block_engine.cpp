#include "extremal/block_engine.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

#include "extremal/error.hpp"

namespace extremal {

std::string_view to_string(BlockKind kind) {
  return kind == BlockKind::disjoint ? "disjoint" : "sliding";
}

BlockKind parse_block_kind(std::string_view name) {
  if (name == "disjoint") return BlockKind::disjoint;
  if (name == "sliding") return BlockKind::sliding;
  throw Error(ErrorCode::usage_error, "unknown block scheme '" + std::string(name) + "'");
}

std::string_view to_string(FloorConvention convention) {
  return convention == FloorConvention::scheme_count ? "scheme_count" : "sliding_count";
}

std::size_t block_count(BlockScheme scheme, std::size_t m) {
  if (scheme.b == 0 || scheme.b > m) return 0;
  return scheme.kind == BlockKind::disjoint ? m / scheme.b : m - scheme.b + 1;
}

namespace {

void check_block_size(BlockScheme scheme, std::size_t m) {
  if (scheme.b < 1 || scheme.b > m) {
    throw Error(ErrorCode::invalid_block_size,
                "block size " + std::to_string(scheme.b) + " outside [1, " + std::to_string(m) + "]");
  }
}

// Running maximum over a window of width b, O(m).
std::vector<double> sliding_maxima(std::span<const double> x, std::size_t b) {
  std::vector<double> out;
  out.reserve(x.size() - b + 1);
  std::deque<std::size_t> window;
  for (std::size_t k = 0; k < x.size(); ++k) {
    while (!window.empty() && x[window.back()] <= x[k]) window.pop_back();
    window.push_back(k);
    if (window.front() + b <= k) window.pop_front();
    if (k + 1 >= b) out.push_back(x[window.front()]);
  }
  return out;
}

}  // namespace

BlockMaximaSample block_maxima(const Series& series, BlockScheme scheme) {
  const std::size_t m = series.size();
  check_block_size(scheme, m);
  const auto x = series.values();
  const std::size_t b = scheme.b;

  BlockMaximaSample sample;
  sample.scheme = scheme;
  if (scheme.kind == BlockKind::disjoint) {
    const std::size_t n = m / b;
    sample.maxima.reserve(n);
    sample.ranges.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto first = x.begin() + static_cast<std::ptrdiff_t>(i * b);
      sample.maxima.push_back(*std::max_element(first, first + static_cast<std::ptrdiff_t>(b)));
      sample.ranges.push_back({i * b, (i + 1) * b});
    }
  } else {
    sample.maxima = sliding_maxima(x, b);
    sample.ranges.reserve(sample.maxima.size());
    for (std::size_t i = 0; i < sample.maxima.size(); ++i) sample.ranges.push_back({i, i + b});
  }
  return sample;
}

VHatSample compute_vhat(const Series& series, BlockScheme scheme, VHatOptions options) {
  const std::size_t m = series.size();
  if (scheme.b >= m) {
    throw Error(ErrorCode::insufficient_out_of_block_data,
                "block size " + std::to_string(scheme.b) + " leaves no out-of-block data for m = " +
                    std::to_string(m));
  }
  const BlockMaximaSample blocks = block_maxima(series, scheme);
  const std::size_t b = scheme.b;
  const std::size_t n = blocks.n();

  std::vector<double> sorted(series.values().begin(), series.values().end());
  std::sort(sorted.begin(), sorted.end());

  const auto denom = static_cast<double>(m - b + 1);
  const std::size_t floor_n =
      options.floor == FloorConvention::scheme_count ? n : m - b + 1;
  const double floor_value = 1.0 / static_cast<double>(m - b + floor_n + 1);
  const auto bd = static_cast<double>(b);

  VHatSample out;
  out.scheme = scheme;
  out.m = m;
  out.floor_convention = options.floor;
  out.floor_block_count = floor_n;
  out.maxima = blocks.maxima;
  out.vhat.resize(n);
  out.ranks.resize(n);

  for (std::size_t i = 0; i < n; ++i) {
    const double y = blocks.maxima[i];
    const auto le_total =
        static_cast<std::size_t>(std::upper_bound(sorted.begin(), sorted.end(), y) - sorted.begin());
    const std::size_t le_outside = le_total - b;
    out.ranks[i] = static_cast<std::int64_t>(m - b + 1 - le_outside);
    if (le_outside == 0) {
      out.vhat[i] = -bd * std::log(floor_value);
      out.floor_hits.push_back(i);
    } else {
      out.vhat[i] = -bd * std::log(static_cast<double>(le_outside) / denom);
    }
  }
  return out;
}

}  // namespace extremal
