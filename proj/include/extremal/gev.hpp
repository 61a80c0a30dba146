#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "extremal/block_engine.hpp"

namespace extremal {

// Shapes with |xi| below this use the analytic Gumbel expressions.
inline constexpr double kGumbelShapeThreshold = 1e-8;

struct GevParams {
  double mu = 0.0;
  double sigma = 1.0;
  double xi = 0.0;

  friend bool operator==(const GevParams&, const GevParams&) = default;
};

double gev_cdf(double x, const GevParams& p);
double gev_log_density(double x, const GevParams& p);  // -inf outside the support
double gev_quantile(double q, const GevParams& p);
double gev_loglik(std::span<const double> x, const GevParams& p);

// Per-observation score (d/dmu, d/dsigma, d/dxi) of the log density.
Eigen::Vector3d gev_score(double x, const GevParams& p);

// Parameters of G^factor for G ~ GEV(p), factor > 0 (max-stability).
GevParams max_stable_power(const GevParams& p, double factor);

// (mu, sigma, xi) -> (mu_theta, sigma_theta, xi) for an extremal index theta in (0, 1].
GevParams theta_scale_params(const GevParams& p, double theta);

// d(mu_theta, sigma_theta, xi) / d(theta, mu, sigma, xi).
Eigen::Matrix<double, 3, 4> theta_scale_jacobian(const GevParams& p, double theta);

struct GevFit {
  GevParams params;
  Eigen::Matrix3d cov = Eigen::Matrix3d::Constant(std::numeric_limits<double>::quiet_NaN());
  double loglik = 0.0;
  double start_loglik = 0.0;
  std::size_t n = 0;
  std::size_t b = 1;
  bool converged = false;
  bool regularity_warning = false;  // xi <= -1/2, covariance not trustworthy

  [[nodiscard]] Eigen::Vector3d standard_errors() const { return cov.diagonal().cwiseSqrt(); }
};

inline constexpr std::size_t kMinGevSample = 15;

// Probability-weighted-moment estimates, used as optimizer starting values.
GevParams gev_pwm_start(std::span<const double> x);

GevFit gev_fit(std::span<const double> maxima, std::size_t b);
GevFit gev_fit(const BlockMaximaSample& maxima);

// Marginal (block size 1) parameters implied by a block-b fit and theta.
GevParams implied_marginal_params(const GevFit& fit, double theta, std::size_t b);

// x_p with F(x_p) = 1 - p, via GEV(x_p; fit) = (1 - p)^(b theta).
double marginal_quantile(const GevFit& fit, double theta, std::size_t b, double p);

// Expected information for one observation, by adaptive quadrature of the
// score outer product. Requires xi > -1/2.
Eigen::Matrix3d gev_fisher_information(const GevParams& p);

struct EfficiencyResult {
  double theta = 1.0;
  double xi = 0.0;
  double precision_sp = 1.0;
  double precision_at = 0.0;
  double rel_eff = 0.0;
};

struct EfficiencyReference {
  double mu = 0.0;
  double sigma = 1.0;
};

// Asymptotic efficiency of the joint two-sample GEV estimator of theta
// relative to the exponential pseudo-likelihood estimator, disjoint blocks.
EfficiencyResult asymptotic_relative_efficiency(double theta, double xi,
                                                EfficiencyReference ref = {});

struct QuantileProfileOptions {
  std::optional<double> theta_fixed;  // hold theta at this value instead of profiling it
  bool adjust = true;                 // false: use the unadjusted exponential log-likelihood
  double relative_tolerance = 1e-6;
};

struct QuantileInterval {
  double estimate = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.95;
  double theta_hat = 1.0;
  double max_objective = 0.0;
};

// Profile-likelihood interval for a marginal quantile, combining the
// (adjusted) exponential log-likelihood for theta from `vhat` with the GEV
// log-likelihood of `maxima`. Both must come from the same series and b.
QuantileInterval quantile_profile_ci(const VHatSample& vhat, const BlockMaximaSample& maxima,
                                     double p, double level,
                                     const QuantileProfileOptions& options = {});

// The profiled objective at a fixed quantile value, exposed for diagnostics.
double quantile_profile_objective(const VHatSample& vhat, const BlockMaximaSample& maxima,
                                  double p, double x_p, const QuantileProfileOptions& options = {});

}  // namespace extremal
