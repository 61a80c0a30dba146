#include "extremal/uncertainty.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <atomic>

#include "extremal/error.hpp"
#include "extremal/estimators.hpp"
#include "extremal/optim.hpp"
#include "extremal/rng.hpp"
#include "extremal/stats.hpp"

namespace extremal {

std::string_view to_string(CiMethod method) {
  switch (method) {
    case CiMethod::likelihood: return "likelihood";
    case CiMethod::adjusted_likelihood: return "adjusted_likelihood";
    case CiMethod::bootstrap_basic_log_scale: return "bootstrap_basic_log_scale";
    case CiMethod::bootstrap_percentile: return "bootstrap_percentile";
  }
  return "unknown";
}

double naive_se(double theta_hat, std::size_t n) {
  if (n < 3) throw Error(ErrorCode::undefined_variance, "naive standard error needs n >= 3");
  const auto nd = static_cast<double>(n);
  return nd * theta_hat / (std::sqrt(nd - 2.0) * (nd - 1.0));
}

SandwichResult sandwich_variance(const VHatSample& vhat, double theta_hat, const SandwichOptions& options) {
  const std::size_t n = vhat.n();
  if (n < 2) throw Error(ErrorCode::undefined_variance, "sandwich variance needs n >= 2");
  const auto b = static_cast<double>(vhat.scheme.b);
  const auto m = static_cast<double>(vhat.m);
  const double t = theta_hat;

  SandwichResult out;
  ScoreDecomposition& dec = out.decomposition;
  dec.u_terms.resize(n);
  std::vector<double> a(n);  // 1 - theta V_i
  std::vector<char> keep(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    dec.u_terms[i] = 1.0 / t - vhat.vhat[i];
    a[i] = 1.0 - t * vhat.vhat[i];
    // Rank 1 means Y_i is the series maximum, so V_i = -b log((m-b)/(m-b+1)) is not random.
    if (options.remove_largest && vhat.ranks[i] == 1) {
      keep[i] = 0;
      dec.removed.push_back(i);
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (keep[i]) dec.first_term += a[i] * a[i];
  }

  const double pair_constant =
      t * t * std::pow(b, 4) / (std::pow(m - b + 1.0, 2) * std::pow(b * t + 1.0, 2));
  const auto nd = static_cast<double>(n);
  if (vhat.scheme.kind == BlockKind::disjoint) {
    if (options.pair_correction) dec.disjoint_pair_term = -nd * (nd - 1.0) * pair_constant;
  } else {
    if (options.overlap_correction) {
      double overlap = 0.0;
      const std::size_t lags = std::min<std::size_t>(vhat.scheme.b - 1, n - 1);
      for (std::size_t k = 1; k <= lags; ++k) {
        for (std::size_t i = 0; i + k < n; ++i) {
          if (keep[i] && keep[i + k]) overlap += a[i] * a[i + k];
        }
      }
      dec.overlap_term = 2.0 * overlap;
    }
    if (options.pair_correction && nd > b) dec.disjoint_pair_term = -(nd - b) * (nd - b + 1.0) * pair_constant;
  }

  out.information = nd / (t * t);
  out.score_variance = (dec.first_term + dec.overlap_term + dec.disjoint_pair_term) / (t * t);
  if (!(out.score_variance > 0.0)) {
    out.fallback_to_naive = true;
    out.adjusted_se = n >= 3 ? naive_se(t, n) : std::sqrt(1.0 / out.information);
    return out;
  }
  out.adjusted_se = std::sqrt(out.score_variance) / out.information;
  return out;
}

ScaledLogLikelihood::ScaledLogLikelihood(const VHatSample& vhat, double scale)
    : n_(static_cast<double>(vhat.n())),
      sum_(std::accumulate(vhat.vhat.begin(), vhat.vhat.end(), 0.0)),
      scale_(scale) {
  if (vhat.n() == 0) throw Error(ErrorCode::empty_sample, "no pseudo-observations");
}

double ScaledLogLikelihood::at_max() const {
  const double t = theta_hat();
  return n_ * std::log(t) - t * sum_;
}

double ScaledLogLikelihood::operator()(double theta) const {
  const double raw = n_ * std::log(theta) - theta * sum_;
  const double top = at_max();
  return top + scale_ * (raw - top);
}

double adjustment_scale(const VHatSample& vhat, double theta_hat) {
  const SandwichResult s = sandwich_variance(vhat, theta_hat);
  if (s.fallback_to_naive) return 1.0;
  return s.information / s.score_variance;
}

std::pair<double, double> scaled_likelihood_interval(const VHatSample& vhat, double scale, double level) {
  if (!(level > 0.0 && level < 1.0)) throw Error(ErrorCode::usage_error, "level must lie in (0, 1)");
  const ScaledLogLikelihood ll(vhat, scale);
  const double t_hat = ll.theta_hat();
  const double cutoff = boost::math::quantile(boost::math::chi_squared(1.0), level);
  const double top = ll.at_max();
  const auto excess = [&](double theta) { return 2.0 * (top - ll(theta)) - cutoff; };

  double lo = t_hat * 0.5;
  for (int it = 0; excess(lo) < 0.0; ++it) {
    lo *= 0.5;
    if (it > 200) throw Error(ErrorCode::root_finding_failure, "lower interval endpoint not bracketed");
  }
  double hi = t_hat * 2.0;
  for (int it = 0; excess(hi) < 0.0; ++it) {
    hi *= 2.0;
    if (it > 200) throw Error(ErrorCode::root_finding_failure, "upper interval endpoint not bracketed");
  }
  const double tol = 1e-13 * t_hat;
  return {optim::bisect(excess, lo, t_hat, tol), optim::bisect(excess, t_hat, hi, tol)};
}

VarianceBundle likelihood_ci(const VHatSample& vhat, double theta_hat, double level) {
  VarianceBundle out;
  out.point = theta_hat;
  out.naive_se = naive_se(theta_hat, vhat.n());
  out.ci_method = CiMethod::likelihood;
  out.level = level;
  std::tie(out.lower, out.upper) = scaled_likelihood_interval(vhat, 1.0, level);
  return out;
}

VarianceBundle adjusted_loglik_ci(const VHatSample& vhat, double theta_hat, double level) {
  const SandwichResult s = sandwich_variance(vhat, theta_hat);
  VarianceBundle out;
  out.point = theta_hat;
  out.naive_se = naive_se(theta_hat, vhat.n());
  out.adjusted_se = s.adjusted_se;
  out.naive_fallback = s.fallback_to_naive;
  out.ci_method = CiMethod::adjusted_likelihood;
  out.level = level;
  const double scale = s.fallback_to_naive ? 1.0 : s.information / s.score_variance;
  std::tie(out.lower, out.upper) = scaled_likelihood_interval(vhat, scale, level);
  return out;
}

ThetaPipeline sp_pipeline(BlockScheme scheme, VHatOptions options) {
  return [scheme, options](const Series& s) { return sp_estimate(compute_vhat(s, scheme, options)).theta; };
}

std::vector<std::size_t> stationary_bootstrap_indices(std::size_t m, double mean_block_length,
                                                      std::uint64_t seed) {
  if (m == 0) return {};
  if (!(mean_block_length >= 1.0)) throw Error(ErrorCode::usage_error, "mean block length must be >= 1");
  Rng rng(seed);
  const double p = 1.0 / mean_block_length;
  std::vector<std::size_t> idx;
  idx.reserve(m);
  while (idx.size() < m) {
    const std::size_t start = rng.below(m);
    const std::uint64_t len = rng.geometric(p);
    for (std::uint64_t j = 0; j < len && idx.size() < m; ++j) idx.push_back((start + j) % m);
  }
  return idx;
}

VarianceBundle stationary_bootstrap(const Series& series, const ThetaPipeline& estimator,
                                    const BootstrapOptions& options) {
  if (options.reps < 2) throw Error(ErrorCode::usage_error, "bootstrap needs at least two resamples");
  const double block_length = options.mean_block_length.value_or(0.0) > 0.0
                                  ? *options.mean_block_length
                                  : optimal_block_length(series);
  const double point = estimator(series);
  const std::size_t m = series.size();
  const auto x = series.values();

  std::vector<std::optional<double>> replicates(options.reps);
  const auto run = [&](std::size_t r) {
    const auto idx = stationary_bootstrap_indices(m, block_length, substream_seed(options.seed, r));
    std::vector<double> resample(m);
    for (std::size_t k = 0; k < m; ++k) resample[k] = x[idx[k]];
    try {
      const double v = estimator(Series(std::move(resample)));
      if (std::isfinite(v) && v > 0.0) replicates[r] = v;
    } catch (const Error&) {
    }
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(options.workers, options.reps));
  if (workers == 1) {
    for (std::size_t r = 0; r < options.reps; ++r) run(r);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t r = next++; r < options.reps; r = next++) run(r);
      });
    }
    for (auto& th : pool) th.join();
  }

  std::vector<double> values;
  values.reserve(options.reps);
  for (const auto& v : replicates) {
    if (v) values.push_back(*v);
  }
  const std::size_t failures = options.reps - values.size();
  if (static_cast<double>(failures) > 0.2 * static_cast<double>(options.reps) || values.size() < 2) {
    throw Error(ErrorCode::bootstrap_unstable,
                std::to_string(failures) + " of " + std::to_string(options.reps) + " resamples failed");
  }

  VarianceBundle out;
  out.point = point;
  out.level = options.level;
  out.bootstrap_reps = options.reps;
  out.bootstrap_failures = failures;
  out.mean_block_length = block_length;
  out.bootstrap_se = stats::sd(values);
  out.bootstrap_bias_adjusted_theta = 2.0 * point - stats::mean(values);
  const double alpha = 1.0 - options.level;
  if (options.percentile) {
    out.ci_method = CiMethod::bootstrap_percentile;
    out.lower = stats::quantile_type7(values, alpha / 2.0);
    out.upper = stats::quantile_type7(values, 1.0 - alpha / 2.0);
  } else {
    out.ci_method = CiMethod::bootstrap_basic_log_scale;
    std::vector<double> logs(values.size());
    std::transform(values.begin(), values.end(), logs.begin(), [](double v) { return std::log(v); });
    const double centre = 2.0 * std::log(point);
    out.lower = std::exp(centre - stats::quantile_type7(logs, 1.0 - alpha / 2.0));
    out.upper = std::exp(centre - stats::quantile_type7(logs, alpha / 2.0));
  }
  return out;
}

double optimal_block_length(const Series& series) {
  const std::size_t n = series.size();
  if (n < 50) throw Error(ErrorCode::usage_error, "automatic block length needs at least 50 observations");
  const auto x = series.values();
  const double mu = stats::mean(x);
  const auto nd = static_cast<double>(n);

  const auto autocov = [&](std::size_t k) {
    double s = 0.0;
    for (std::size_t i = 0; i + k < n; ++i) s += (x[i] - mu) * (x[i + k] - mu);
    return s / nd;
  };
  const double gamma0 = autocov(0);
  if (!(gamma0 > 0.0)) throw Error(ErrorCode::degenerate_series, "series is constant");

  const auto kn = static_cast<std::size_t>(std::max(5.0, std::ceil(std::log10(nd))));
  const auto mmax = static_cast<std::size_t>(std::ceil(std::sqrt(nd))) + kn;
  const double b_max = std::ceil(std::min(3.0 * std::sqrt(nd), nd / 3.0));
  const double c = 1.959963984540054;  // standard normal 0.975 quantile
  const double critical = c * std::sqrt(std::log10(nd) / nd);

  std::vector<double> rho(mmax + 1);
  for (std::size_t k = 1; k <= mmax && k < n; ++k) rho[k] = autocov(k) / gamma0;

  // First lag starting a run of kn insignificant autocorrelations.
  std::size_t m_hat = 0;
  for (std::size_t j = 1; j + kn - 1 <= mmax; ++j) {
    bool all_small = true;
    for (std::size_t k = j; k < j + kn; ++k) all_small = all_small && std::abs(rho[k]) < critical;
    if (all_small) {
      m_hat = j;
      break;
    }
  }
  if (m_hat == 0) {
    m_hat = 1;
    for (std::size_t k = mmax; k >= 1; --k) {
      if (std::abs(rho[k]) > critical) {
        m_hat = k;
        break;
      }
    }
  }
  const std::size_t big_m = std::min(2 * m_hat, mmax);

  const auto flat_top = [](double t) {
    t = std::abs(t);
    if (t <= 0.5) return 1.0;
    if (t <= 1.0) return 2.0 * (1.0 - t);
    return 0.0;
  };
  double g_hat = 0.0, long_run = gamma0;
  for (std::size_t k = 1; k <= big_m; ++k) {
    const double lam = flat_top(static_cast<double>(k) / static_cast<double>(big_m));
    const double r = autocov(k);
    g_hat += 2.0 * lam * static_cast<double>(k) * r;
    long_run += 2.0 * lam * r;
  }
  const double d_sb = 2.0 * long_run * long_run;
  double length = std::pow(2.0 * g_hat * g_hat / d_sb, 1.0 / 3.0) * std::cbrt(nd);
  if (!std::isfinite(length)) length = 1.0;
  return std::clamp(length, 1.0, b_max);
}

}  // namespace extremal
