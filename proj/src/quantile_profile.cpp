#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <limits>
#include <string>

#include "extremal/error.hpp"
#include "extremal/estimators.hpp"
#include "extremal/gev.hpp"
#include "extremal/optim.hpp"
#include "extremal/uncertainty.hpp"

namespace extremal {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Standardized GEV quantile offset ((y)^(-xi) - 1)/xi with y = -b theta log(1 - p).
double quantile_offset(double theta, double xi, double b, double p) {
  const double log_y = std::log(-b * theta * std::log1p(-p));
  if (std::abs(xi) < kGumbelShapeThreshold) return -log_y;
  return std::expm1(-xi * log_y) / xi;
}

class QuantileProfiler {
 public:
  QuantileProfiler(const VHatSample& vhat, const BlockMaximaSample& maxima, double p,
                   const QuantileProfileOptions& options)
      : maxima_(maxima.maxima),
        b_(static_cast<double>(maxima.scheme.b)),
        p_(p),
        options_(options),
        theta_ll_(vhat, 1.0),
        fit_(gev_fit(maxima)) {
    if (vhat.scheme.b != maxima.scheme.b) {
      throw Error(ErrorCode::usage_error, "pseudo-observations and maxima use different block sizes");
    }
    if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::domain_error, "tail probability must lie in (0, 1)");
    n_ = static_cast<double>(vhat.n());
    theta_hat_ = theta_ll_.theta_hat();
    if (options.theta_fixed) {
      if (!(*options.theta_fixed > 0.0)) throw Error(ErrorCode::domain_error, "theta must be positive");
      theta_hat_ = *options.theta_fixed;
    } else if (options.adjust) {
      theta_ll_ = ScaledLogLikelihood(vhat, adjustment_scale(vhat, theta_hat_));
    }
    max_objective_ = theta_part(theta_hat_) + fit_.loglik;
  }

  [[nodiscard]] double theta_hat() const { return theta_hat_; }
  [[nodiscard]] double max_objective() const { return max_objective_; }
  [[nodiscard]] const GevFit& fit() const { return fit_; }

  [[nodiscard]] double x_at(double theta, const GevParams& g) const {
    return g.mu + g.sigma * quantile_offset(theta, g.xi, b_, p_);
  }

  [[nodiscard]] double estimate() const { return x_at(theta_hat_, fit_.params); }

  // Delta-method standard error of the quantile, used only to size search steps.
  [[nodiscard]] double rough_se() const {
    const double var_theta = options_.theta_fixed ? 0.0 : theta_hat_ * theta_hat_ / (theta_ll_.scale() * n_);
    const double h = 1e-6;
    const GevParams& g = fit_.params;
    const double base = estimate();
    const double d_theta = options_.theta_fixed ? 0.0 : (x_at(theta_hat_ * (1 + h), g) - base) / (theta_hat_ * h);
    Eigen::Vector3d grad;
    grad(0) = 1.0;
    grad(1) = quantile_offset(theta_hat_, g.xi, b_, p_);
    grad(2) = (x_at(theta_hat_, {g.mu, g.sigma, g.xi + h}) - x_at(theta_hat_, {g.mu, g.sigma, g.xi - h})) / (2 * h);
    double var = d_theta * d_theta * var_theta;
    if (fit_.cov.allFinite()) var += grad.dot(fit_.cov * grad);
    const double se = std::sqrt(var);
    return std::isfinite(se) && se > 0.0 ? se : 0.1 * std::abs(g.sigma);
  }

  // Maximized objective with the quantile held at x; `start` is updated to the optimum.
  double profile(double x, Eigen::VectorXd& start) const {
    const bool free_theta = !options_.theta_fixed.has_value();
    const auto unpack = [&](const Eigen::VectorXd& v, double& theta, double& sigma, double& xi) {
      sigma = std::exp(v(0));
      xi = v(1);
      theta = free_theta ? std::exp(v(2)) : theta_hat_;
    };
    const auto objective = [&](const Eigen::VectorXd& v) {
      double theta, sigma, xi;
      unpack(v, theta, sigma, xi);
      const double mu = x - sigma * quantile_offset(theta, xi, b_, p_);
      const double total = theta_part(theta) + gev_loglik(maxima_, {mu, sigma, xi});
      return std::isfinite(total) ? -total : std::numeric_limits<double>::infinity();
    };
    optim::NelderMeadOptions nm;
    nm.initial_step = 0.05;
    nm.f_tolerance = 1e-13;
    nm.x_tolerance = 1e-10;
    const auto result = optim::minimize(objective, start, nm, 3);
    if (!std::isfinite(result.value)) {
      throw Error(ErrorCode::profile_failure, "profile objective infeasible at x = " + std::to_string(x));
    }
    start = result.x;
    return -result.value;
  }

  [[nodiscard]] Eigen::VectorXd initial_point() const {
    const bool free_theta = !options_.theta_fixed.has_value();
    Eigen::VectorXd v(free_theta ? 3 : 2);
    v(0) = std::log(fit_.params.sigma);
    v(1) = fit_.params.xi;
    if (free_theta) v(2) = std::log(theta_hat_);
    return v;
  }

 private:
  [[nodiscard]] double theta_part(double theta) const {
    if (options_.theta_fixed) return 0.0;
    if (!(theta > 0.0)) return kNegInf;
    return theta_ll_(theta);
  }

  std::vector<double> maxima_;
  double b_;
  double p_;
  QuantileProfileOptions options_;
  ScaledLogLikelihood theta_ll_;
  GevFit fit_;
  double theta_hat_ = 1.0;
  double max_objective_ = 0.0;
  double n_ = 0.0;
};

}  // namespace

double quantile_profile_objective(const VHatSample& vhat, const BlockMaximaSample& maxima, double p,
                                  double x_p, const QuantileProfileOptions& options) {
  QuantileProfiler prof(vhat, maxima, p, options);
  Eigen::VectorXd start = prof.initial_point();
  return prof.profile(x_p, start);
}

QuantileInterval quantile_profile_ci(const VHatSample& vhat, const BlockMaximaSample& maxima, double p,
                                     double level, const QuantileProfileOptions& options) {
  if (!(level > 0.0 && level < 1.0)) throw Error(ErrorCode::usage_error, "level must lie in (0, 1)");
  QuantileProfiler prof(vhat, maxima, p, options);
  const double cutoff = boost::math::quantile(boost::math::chi_squared(1.0), level);
  const double x_hat = prof.estimate();
  const double top = prof.max_objective();
  const double step = prof.rough_se();
  const double tol = options.relative_tolerance * std::max(std::abs(x_hat), step);

  QuantileInterval out;
  out.estimate = x_hat;
  out.level = level;
  out.theta_hat = prof.theta_hat();
  out.max_objective = top;

  const auto endpoint = [&](double direction) {
    Eigen::VectorXd start = prof.initial_point();
    double inside = x_hat;
    Eigen::VectorXd inside_start = start;
    double outside = x_hat;
    bool found = false;
    for (int k = 1; k <= 200; ++k) {
      const double x = x_hat + direction * step * 0.5 * k;
      Eigen::VectorXd s = inside_start;
      const double dev = 2.0 * (top - prof.profile(x, s));
      if (dev > cutoff) {
        outside = x;
        found = true;
        break;
      }
      inside = x;
      inside_start = s;
    }
    if (!found) throw Error(ErrorCode::profile_failure, "profile deviance never crossed the cutoff");
    // Bisection on the deviance, warm-starting from the inner bracket.
    for (int it = 0; it < 200 && std::abs(outside - inside) > tol; ++it) {
      const double mid = 0.5 * (inside + outside);
      Eigen::VectorXd s = inside_start;
      const double dev = 2.0 * (top - prof.profile(mid, s));
      if (dev > cutoff) {
        outside = mid;
      } else {
        inside = mid;
        inside_start = s;
      }
    }
    return 0.5 * (inside + outside);
  };
  out.lower = endpoint(-1.0);
  out.upper = endpoint(1.0);
  return out;
}

}  // namespace extremal
