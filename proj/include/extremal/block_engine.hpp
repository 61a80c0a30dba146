#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "extremal/series.hpp"

namespace extremal {

enum class BlockKind { disjoint, sliding };

std::string_view to_string(BlockKind kind);
BlockKind parse_block_kind(std::string_view name);

struct BlockScheme {
  BlockKind kind = BlockKind::disjoint;
  std::size_t b = 1;

  friend bool operator==(const BlockScheme&, const BlockScheme&) = default;
};

// Number of blocks the scheme yields on a series of length m (0 when b > m).
std::size_t block_count(BlockScheme scheme, std::size_t m);

// Half-open 0-based index interval [begin, end); corresponds to the 1-based
// block (begin, end].
struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

struct BlockMaximaSample {
  std::vector<double> maxima;
  std::vector<IndexRange> ranges;
  BlockScheme scheme;

  [[nodiscard]] std::size_t n() const noexcept { return maxima.size(); }
};

// Which block count enters the positivity floor 1/(m - b + n + 1).
//   scheme_count:  n of the scheme in use (n_d or n_s).
//   sliding_count: always n_s = m - b + 1, so disjoint values are an exact
//                  subsample of the sliding ones, floored entries included.
enum class FloorConvention { scheme_count, sliding_count };

std::string_view to_string(FloorConvention convention);

struct VHatOptions {
  FloorConvention floor = FloorConvention::scheme_count;
};

struct VHatSample {
  std::vector<double> vhat;
  std::vector<std::int64_t> ranks;  // R_i in {1, ..., m - b + 1}
  std::vector<double> maxima;       // Y_i the values were computed from
  BlockScheme scheme;
  std::size_t m = 0;
  std::vector<std::size_t> floor_hits;
  FloorConvention floor_convention = FloorConvention::scheme_count;
  std::size_t floor_block_count = 0;  // the n used in the floor

  [[nodiscard]] std::size_t n() const noexcept { return vhat.size(); }

  friend bool operator==(const VHatSample&, const VHatSample&) = default;
};

BlockMaximaSample block_maxima(const Series& series, BlockScheme scheme);

// Leave-one-block-out pseudo-observations V_i = -b log F_{-i}(Y_i).
//
// F_{-i}(Y_i) counts the m - b out-of-block observations that are <= Y_i
// over the denominator m - b + 1. Since every in-block value is <= Y_i this
// equals (#{k : X_k <= Y_i} - b) / (m - b + 1), so a single sort of the
// series serves all blocks. If no out-of-block value is <= Y_i the floor
// 1/(m - b + n + 1) is used and the index is recorded in floor_hits.
VHatSample compute_vhat(const Series& series, BlockScheme scheme, VHatOptions options = {});

}  // namespace extremal
