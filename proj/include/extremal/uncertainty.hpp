#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "extremal/block_engine.hpp"
#include "extremal/series.hpp"

namespace extremal {

// n theta (n - 2)^(-1/2) (n - 1)^(-1): standard error of n / sum(V) for an
// exponential sample, ignoring dependence.
double naive_se(double theta_hat, std::size_t n);

struct ScoreDecomposition {
  std::vector<double> u_terms;        // U_i = 1/theta - V_i
  double first_term = 0.0;            // sum (1 - theta V_i)^2 over retained i
  double overlap_term = 0.0;          // 2 sum_k sum_i (1 - theta V_i)(1 - theta V_{i+k}), sliding only
  double disjoint_pair_term = 0.0;    // covariance correction for non-overlapping pairs (<= 0)
  std::vector<std::size_t> removed;   // indices whose V_i is deterministic (series maximum)
};

struct SandwichOptions {
  bool remove_largest = true;    // drop the deterministic contribution of the largest maximum
  bool pair_correction = true;   // include the non-overlapping pair covariance term
  bool overlap_correction = true;
};

struct SandwichResult {
  double adjusted_se = 0.0;
  double score_variance = 0.0;  // estimated var(U(theta)) at theta_hat
  double information = 0.0;     // J = n / theta^2
  bool fallback_to_naive = false;
  ScoreDecomposition decomposition;
};

SandwichResult sandwich_variance(const VHatSample& vhat, double theta_hat,
                                 const SandwichOptions& options = {});

enum class CiMethod { likelihood, adjusted_likelihood, bootstrap_basic_log_scale, bootstrap_percentile };

std::string_view to_string(CiMethod method);

struct VarianceBundle {
  double point = 0.0;
  double naive_se = 0.0;
  std::optional<double> adjusted_se;
  std::optional<double> bootstrap_se;
  std::optional<double> bootstrap_bias_adjusted_theta;
  CiMethod ci_method = CiMethod::likelihood;
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.95;
  bool naive_fallback = false;
  std::size_t bootstrap_failures = 0;
  std::size_t bootstrap_reps = 0;
  std::optional<double> mean_block_length;
};

// Exponential pseudo-log-likelihood n log(theta) - theta sum(V), vertically
// scaled about its maximum: l(t_hat) + k (l(t) - l(t_hat)).
class ScaledLogLikelihood {
 public:
  ScaledLogLikelihood(const VHatSample& vhat, double scale);

  [[nodiscard]] double operator()(double theta) const;
  [[nodiscard]] double theta_hat() const noexcept { return n_ / sum_; }
  [[nodiscard]] double scale() const noexcept { return scale_; }
  [[nodiscard]] double at_max() const;

 private:
  double n_;
  double sum_;
  double scale_;
};

// Vertical scale k = J / V that makes -l_adj''(theta_hat) equal the inverse
// sandwich variance; 1 when the sandwich estimate is unusable.
double adjustment_scale(const VHatSample& vhat, double theta_hat);

VarianceBundle likelihood_ci(const VHatSample& vhat, double theta_hat, double level);
VarianceBundle adjusted_loglik_ci(const VHatSample& vhat, double theta_hat, double level);

// Interval {theta : 2 (l_adj(max) - l_adj(theta)) <= chi2_{1, level}} for a given scale.
std::pair<double, double> scaled_likelihood_interval(const VHatSample& vhat, double scale, double level);

using ThetaPipeline = std::function<double(const Series&)>;

// Semiparametric estimator pipeline (compute_vhat followed by n / sum V).
ThetaPipeline sp_pipeline(BlockScheme scheme, VHatOptions options = {});

struct BootstrapOptions {
  std::size_t reps = 100;
  std::optional<double> mean_block_length;  // automatic selection when empty
  std::uint64_t seed = 0;
  double level = 0.95;
  bool percentile = false;
  std::size_t workers = 1;
};

// Index stream of one stationary-bootstrap resample: blocks start uniformly,
// wrap circularly and have geometric lengths with the given mean.
std::vector<std::size_t> stationary_bootstrap_indices(std::size_t m, double mean_block_length,
                                                      std::uint64_t seed);

VarianceBundle stationary_bootstrap(const Series& series, const ThetaPipeline& estimator,
                                    const BootstrapOptions& options);

// Automatic stationary-bootstrap block length from the flat-top lag-window
// plug-in rule (Politis-White with the Patton-Politis-White correction).
double optimal_block_length(const Series& series);

}  // namespace extremal
