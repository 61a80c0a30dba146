#include "extremal/gev.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "extremal/error.hpp"
#include "extremal/optim.hpp"

namespace extremal {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool gumbel(double xi) { return std::abs(xi) < kGumbelShapeThreshold; }

void check_scale(const GevParams& p) {
  if (!(p.sigma > 0.0) || !std::isfinite(p.sigma)) {
    throw Error(ErrorCode::domain_error, "GEV scale must be positive and finite");
  }
}

}  // namespace

double gev_cdf(double x, const GevParams& p) {
  check_scale(p);
  const double z = (x - p.mu) / p.sigma;
  if (gumbel(p.xi)) return std::exp(-std::exp(-z));
  const double xz = p.xi * z;
  if (xz <= -1.0) return p.xi > 0.0 ? 0.0 : 1.0;
  return std::exp(-std::exp(-std::log1p(xz) / p.xi));
}

double gev_log_density(double x, const GevParams& p) {
  const double z = (x - p.mu) / p.sigma;
  if (gumbel(p.xi)) return -std::log(p.sigma) - z - std::exp(-z);
  const double xz = p.xi * z;
  if (xz <= -1.0) return -kInf;
  const double log_t = std::log1p(xz);
  return -std::log(p.sigma) - (1.0 + 1.0 / p.xi) * log_t - std::exp(-log_t / p.xi);
}

double gev_quantile(double q, const GevParams& p) {
  check_scale(p);
  if (!(q > 0.0 && q < 1.0)) throw Error(ErrorCode::domain_error, "quantile level must lie in (0, 1)");
  const double log_y = std::log(-std::log(q));
  if (gumbel(p.xi)) return p.mu - p.sigma * log_y;
  return p.mu + p.sigma * std::expm1(-p.xi * log_y) / p.xi;
}

double gev_loglik(std::span<const double> x, const GevParams& p) {
  if (!(p.sigma > 0.0)) return -kInf;
  const double log_sigma = std::log(p.sigma);
  double total = 0.0;
  if (gumbel(p.xi)) {
    for (double v : x) {
      const double z = (v - p.mu) / p.sigma;
      total += -log_sigma - z - std::exp(-z);
    }
    return total;
  }
  const double inv_xi = 1.0 / p.xi;
  for (double v : x) {
    const double xz = p.xi * (v - p.mu) / p.sigma;
    if (xz <= -1.0) return -kInf;
    const double log_t = std::log1p(xz);
    total += -log_sigma - (1.0 + inv_xi) * log_t - std::exp(-log_t * inv_xi);
  }
  return total;
}

Eigen::Vector3d gev_score(double x, const GevParams& p) {
  const double z = (x - p.mu) / p.sigma;
  const double s = p.sigma;
  if (std::abs(p.xi) < 1e-6) {
    const double y = std::exp(-z);
    return {(1.0 - y) / s, (-1.0 + z * (1.0 - y)) / s, 0.5 * z * z * (1.0 - y) - z};
  }
  const double xi = p.xi;
  const double t = 1.0 + xi * z;
  if (t <= 0.0) return Eigen::Vector3d::Constant(std::numeric_limits<double>::quiet_NaN());
  const double log_t = std::log(t);
  const double y = std::exp(-log_t / xi);
  const double w = (1.0 + xi - y) / t;
  return {w / s, (-1.0 + w * z) / s, (1.0 - y) * log_t / (xi * xi) - z * w / xi};
}

GevParams max_stable_power(const GevParams& p, double factor) {
  if (!(factor > 0.0)) throw Error(ErrorCode::domain_error, "max-stable power must be positive");
  const double log_f = std::log(factor);
  if (gumbel(p.xi)) return {p.mu + p.sigma * log_f, p.sigma, p.xi};
  return {p.mu + p.sigma * std::expm1(p.xi * log_f) / p.xi, p.sigma * std::exp(p.xi * log_f), p.xi};
}

GevParams theta_scale_params(const GevParams& p, double theta) {
  if (!(theta > 0.0 && theta <= 1.0)) {
    throw Error(ErrorCode::domain_error, "theta must lie in (0, 1]");
  }
  return max_stable_power(p, theta);
}

Eigen::Matrix<double, 3, 4> theta_scale_jacobian(const GevParams& p, double theta) {
  const double xi = p.xi, s = p.sigma;
  const double log_t = std::log(theta);
  const double t_xi = std::exp(xi * log_t);  // theta^xi
  Eigen::Matrix<double, 3, 4> d = Eigen::Matrix<double, 3, 4>::Zero();
  d(0, 0) = s * t_xi / theta;
  d(0, 1) = 1.0;
  if (std::abs(xi) < 1e-5) {
    d(0, 2) = log_t + 0.5 * xi * log_t * log_t;
    d(0, 3) = s * (0.5 * log_t * log_t + xi * log_t * log_t * log_t / 3.0);
  } else {
    const double em1 = std::expm1(xi * log_t);
    d(0, 2) = em1 / xi;
    d(0, 3) = s * (xi * t_xi * log_t - em1) / (xi * xi);
  }
  d(1, 0) = s * xi * t_xi / theta;
  d(1, 2) = t_xi;
  d(1, 3) = s * t_xi * log_t;
  d(2, 3) = 1.0;
  return d;
}

GevParams gev_pwm_start(std::span<const double> x) {
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  double b0 = 0.0, b1 = 0.0, b2 = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const auto j = static_cast<double>(i);
    b0 += sorted[i];
    b1 += j / (n - 1.0) * sorted[i];
    b2 += j * (j - 1.0) / ((n - 1.0) * (n - 2.0)) * sorted[i];
  }
  b0 /= n;
  b1 /= n;
  b2 /= n;
  const double l2 = 2.0 * b1 - b0;
  if (!(l2 > 0.0)) return {b0, 1.0, 0.0};

  const double c = l2 / (3.0 * b2 - b0) - std::numbers::ln2 / std::log(3.0);
  double k = 7.8590 * c + 2.9554 * c * c;
  if (!std::isfinite(k)) k = 0.0;
  k = std::clamp(k, -0.95, 0.9);
  if (std::abs(k) < 1e-6) {
    const double sigma = l2 / std::numbers::ln2;
    return {b0 - std::numbers::egamma * sigma, sigma, 0.0};
  }
  const double g = std::tgamma(1.0 + k);
  const double sigma = l2 * k / (g * (1.0 - std::pow(2.0, -k)));
  const double mu = b0 + sigma * (g - 1.0) / k;
  return {mu, sigma, -k};
}

namespace {

Eigen::Vector3d to_internal(const GevParams& p) { return {p.mu, std::log(p.sigma), p.xi}; }
GevParams from_internal(const Eigen::VectorXd& v) { return {v(0), std::exp(v(1)), v(2)}; }

}  // namespace

GevFit gev_fit(std::span<const double> maxima, std::size_t b) {
  if (maxima.size() < kMinGevSample) {
    throw Error(ErrorCode::insufficient_maxima,
                "GEV fit needs at least " + std::to_string(kMinGevSample) + " maxima, got " +
                    std::to_string(maxima.size()));
  }
  const auto objective = [&](const Eigen::VectorXd& v) {
    return -gev_loglik(maxima, from_internal(v));
  };

  // Candidate starts: PWM, and its Gumbel counterpart, whichever is feasible and better.
  const GevParams pwm = gev_pwm_start(maxima);
  std::vector<GevParams> starts{pwm, GevParams{pwm.mu, pwm.sigma, 0.0}, GevParams{pwm.mu, pwm.sigma, 0.1}};
  GevParams start = starts.front();
  double start_value = kInf;
  for (const auto& s : starts) {
    const double v = objective(to_internal(s));
    if (std::isfinite(v) && v < start_value) {
      start = s;
      start_value = v;
    }
  }
  if (!std::isfinite(start_value)) {
    throw Error(ErrorCode::fit_failure, "no feasible GEV starting value");
  }

  optim::NelderMeadOptions options;
  options.initial_step = 0.1;
  options.f_tolerance = 1e-12;
  options.x_tolerance = 1e-9;
  optim::MinimizeResult best = optim::minimize(objective, to_internal(start), options, 2);
  // Retries from perturbed starts when the simplex did not settle.
  for (int retry = 0; retry < 2 && !best.converged; ++retry) {
    Eigen::VectorXd perturbed = to_internal(start);
    perturbed(1) += 0.3 * (retry + 1);
    perturbed(2) = (retry == 0) ? 0.05 : -0.05;
    auto again = optim::minimize(objective, perturbed, options, 2);
    if (again.value < best.value || (again.converged && again.value <= best.value + 1e-8)) best = again;
  }
  if (!best.converged || !std::isfinite(best.value)) {
    throw Error(ErrorCode::fit_failure, "GEV likelihood maximization did not converge");
  }

  GevFit fit;
  fit.params = from_internal(best.x);
  fit.loglik = -best.value;
  fit.start_loglik = -start_value;
  fit.n = maxima.size();
  fit.b = b;
  fit.converged = true;
  fit.regularity_warning = fit.params.xi <= -0.5;

  const auto natural = [&](const Eigen::VectorXd& v) {
    return -gev_loglik(maxima, GevParams{v(0), v(1), v(2)});
  };
  const Eigen::Vector3d at{fit.params.mu, fit.params.sigma, fit.params.xi};
  const Eigen::Matrix3d info = optim::numerical_hessian(natural, at, 1e-4);
  Eigen::LLT<Eigen::Matrix3d> llt(info);
  if (llt.info() == Eigen::Success) fit.cov = llt.solve(Eigen::Matrix3d::Identity());
  return fit;
}

GevFit gev_fit(const BlockMaximaSample& maxima) { return gev_fit(maxima.maxima, maxima.scheme.b); }

namespace {

void check_theta(double theta) {
  if (!(theta > 0.0 && theta <= 1.0)) throw Error(ErrorCode::domain_error, "theta must lie in (0, 1]");
}

}  // namespace

GevParams implied_marginal_params(const GevFit& fit, double theta, std::size_t b) {
  check_theta(theta);
  return max_stable_power(fit.params, 1.0 / (static_cast<double>(b) * theta));
}

double marginal_quantile(const GevFit& fit, double theta, std::size_t b, double p) {
  check_theta(theta);
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::domain_error, "tail probability must lie in (0, 1)");
  return gev_quantile(std::pow(1.0 - p, static_cast<double>(b) * theta), fit.params);
}

}  // namespace extremal
