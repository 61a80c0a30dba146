#include "extremal/error.hpp"

namespace extremal {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_series: return "invalid-series";
    case ErrorCode::invalid_block_size: return "invalid-block-size";
    case ErrorCode::insufficient_out_of_block_data: return "insufficient-out-of-block-data";
    case ErrorCode::empty_sample: return "empty-sample";
    case ErrorCode::insufficient_blocks: return "insufficient-blocks";
    case ErrorCode::degenerate_threshold: return "degenerate-threshold";
    case ErrorCode::insufficient_exceedances: return "insufficient-exceedances";
    case ErrorCode::unstable_xi_tilde: return "unstable-xi-tilde";
    case ErrorCode::fit_failure: return "fit-failure";
    case ErrorCode::insufficient_maxima: return "insufficient-maxima";
    case ErrorCode::undefined_variance: return "undefined-variance";
    case ErrorCode::non_positive_variance: return "non-positive-variance";
    case ErrorCode::root_finding_failure: return "root-finding-failure";
    case ErrorCode::bootstrap_unstable: return "bootstrap-unstable";
    case ErrorCode::degenerate_series: return "degenerate-series";
    case ErrorCode::domain_error: return "domain-error";
    case ErrorCode::regularity_error: return "regularity-error";
    case ErrorCode::profile_failure: return "profile-failure";
    case ErrorCode::parse_error: return "parse-error";
    case ErrorCode::usage_error: return "usage-error";
    case ErrorCode::study_failure: return "study-failure";
  }
  return "unknown";
}

}  // namespace extremal
