#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace extremal {

enum class ErrorCode {
  invalid_series,
  invalid_block_size,
  insufficient_out_of_block_data,
  empty_sample,
  insufficient_blocks,
  degenerate_threshold,
  insufficient_exceedances,
  unstable_xi_tilde,
  fit_failure,
  insufficient_maxima,
  undefined_variance,
  non_positive_variance,
  root_finding_failure,
  bootstrap_unstable,
  degenerate_series,
  domain_error,
  regularity_error,
  profile_failure,
  parse_error,
  usage_error,
  study_failure,
};

std::string_view to_string(ErrorCode code);

// All library failures are reported through this type; `code()` is stable
// across releases and is what the CLI maps to exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace extremal
