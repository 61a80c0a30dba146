#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "extremal/block_engine.hpp"
#include "extremal/gev.hpp"
#include "extremal/series.hpp"

namespace extremal {

enum class Method { sp_disjoint, sp_sliding, ratio_blocks, blocks, intervals, kgaps, gomes, at_joint };

std::string_view to_string(Method method);
Method parse_method(std::string_view name);

struct Tuning {
  std::optional<std::size_t> b;
  std::optional<BlockKind> scheme;
  std::optional<double> threshold;           // resolved absolute threshold
  std::optional<double> threshold_quantile;  // when specified as a quantile level
  std::optional<int> K;
  std::optional<std::uint64_t> seed;
};

struct ThetaEstimate {
  double theta = 0.0;
  Method method = Method::sp_disjoint;
  Tuning tuning;
  std::size_t n_used = 0;
  bool capped = false;        // raw value exceeded 1 and was capped
  bool out_of_range = false;  // uncapped estimator above 1
  bool degenerate = false;
  bool regularity_warning = false;
  double raw_theta = 0.0;     // value before capping
};

// A threshold given as an absolute level, as an empirical (type 7) quantile
// level of the series, or as the median of the block maxima in use (blocks
// estimator only).
class Threshold {
 public:
  enum class Kind { absolute, quantile, maxima_median };

  static Threshold absolute(double u) { return Threshold(u, Kind::absolute); }
  static Threshold quantile(double level);
  static Threshold maxima_median() { return Threshold(0.5, Kind::maxima_median); }

  [[nodiscard]] double resolve(const Series& series) const;
  [[nodiscard]] Kind kind() const noexcept { return kind_; }
  [[nodiscard]] bool is_quantile() const noexcept { return kind_ == Kind::quantile; }
  [[nodiscard]] double value() const noexcept { return value_; }

 private:
  Threshold(double v, Kind k) : value_(v), kind_(k) {}
  double value_;
  Kind kind_;
};

ThetaEstimate sp_estimate(const VHatSample& vhat);

ThetaEstimate ratio_blocks_estimate(const Series& series, std::size_t b, VHatOptions options = {});

// Numerator of the ratio-blocks estimator: mean of log G_hat(Y_i) over the
// disjoint maxima, with G_hat the empirical CDF of those maxima.
double ratio_blocks_numerator(std::span<const double> maxima);

ThetaEstimate blocks_estimate(const Series& series, BlockScheme scheme, const Threshold& u);

struct ExceedanceGaps {
  double threshold = 0.0;
  std::size_t exceedance_count = 0;
  std::vector<std::int64_t> gaps;
  double rescale = 0.0;  // estimated exceedance probability 1 - F(u)
};

ExceedanceGaps extract_gaps(const Series& series, const Threshold& u);

ThetaEstimate intervals_estimate(const ExceedanceGaps& gaps);
ThetaEstimate kgaps_estimate(const ExceedanceGaps& gaps, int K);

// Maximizer on (0, 1] of n0 log(1 - t) + 2 n1 log(t) - t s.
double kgaps_mle(std::size_t n0, std::size_t n1, double s);

// Plug-in value (s/s_theta)^(-1/xi~), xi~ = (s - s_theta)/(m - m_theta), before clamping.
double gomes_formula(const GevParams& randomized, const GevParams& original);

// Uniform random permutation of the series driven by `seed`.
Series randomize_index(const Series& series, std::uint64_t seed);

ThetaEstimate gomes_estimate(const Series& series, std::size_t b, std::uint64_t seed);

struct AtResult {
  ThetaEstimate estimate;
  GevFit fit;  // (mu, sigma, xi) of the index-randomized maxima from the joint fit
  double theta_se = std::numeric_limits<double>::quiet_NaN();
  double loglik = 0.0;
};

// Joint log-likelihood of the randomized-series maxima under GEV(mu, sigma, xi)
// and the original-series maxima under GEV(mu_theta, sigma_theta, xi).
double at_joint_loglik(std::span<const double> randomized, std::span<const double> original,
                       const GevParams& p, double theta);

AtResult at_estimate(const Series& series, std::size_t b, std::uint64_t seed);

}  // namespace extremal
