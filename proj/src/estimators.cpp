#include "extremal/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "extremal/error.hpp"
#include "extremal/optim.hpp"
#include "extremal/rng.hpp"
#include "extremal/stats.hpp"

namespace extremal {

std::string_view to_string(Method method) {
  switch (method) {
    case Method::sp_disjoint: return "sp_disjoint";
    case Method::sp_sliding: return "sp_sliding";
    case Method::ratio_blocks: return "ratio_blocks";
    case Method::blocks: return "blocks";
    case Method::intervals: return "intervals";
    case Method::kgaps: return "kgaps";
    case Method::gomes: return "gomes";
    case Method::at_joint: return "at_joint";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  for (Method m : {Method::sp_disjoint, Method::sp_sliding, Method::ratio_blocks, Method::blocks,
                   Method::intervals, Method::kgaps, Method::gomes, Method::at_joint}) {
    if (name == to_string(m)) return m;
  }
  throw Error(ErrorCode::usage_error, "unknown estimator '" + std::string(name) + "'");
}

Threshold Threshold::quantile(double level) {
  if (!(level > 0.0 && level < 1.0)) {
    throw Error(ErrorCode::usage_error, "threshold quantile level must lie in (0, 1)");
  }
  return Threshold(level, Kind::quantile);
}

double Threshold::resolve(const Series& series) const {
  if (kind_ == Kind::absolute) return value_;
  if (kind_ == Kind::maxima_median) {
    throw Error(ErrorCode::usage_error, "a block-maxima median threshold needs a block scheme");
  }
  const auto x = series.values();
  return stats::quantile_type7(std::vector<double>(x.begin(), x.end()), value_);
}

namespace {

void apply_cap(ThetaEstimate& est) {
  est.raw_theta = est.theta;
  if (est.theta > 1.0) {
    est.theta = 1.0;
    est.capped = true;
  }
}

Tuning threshold_tuning(const Threshold& u, double resolved) {
  Tuning t;
  t.threshold = resolved;
  if (u.is_quantile()) t.threshold_quantile = u.value();
  return t;
}

}  // namespace

ThetaEstimate sp_estimate(const VHatSample& vhat) {
  if (vhat.n() == 0) throw Error(ErrorCode::empty_sample, "no pseudo-observations");
  const double total = std::accumulate(vhat.vhat.begin(), vhat.vhat.end(), 0.0);
  ThetaEstimate est;
  est.theta = static_cast<double>(vhat.n()) / total;
  est.raw_theta = est.theta;
  est.method = vhat.scheme.kind == BlockKind::disjoint ? Method::sp_disjoint : Method::sp_sliding;
  est.tuning.b = vhat.scheme.b;
  est.tuning.scheme = vhat.scheme.kind;
  est.n_used = vhat.n();
  est.out_of_range = est.theta > 1.0;
  return est;
}

double ratio_blocks_numerator(std::span<const double> maxima) {
  std::vector<double> sorted(maxima.begin(), maxima.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  double total = 0.0;
  for (double y : maxima) {
    const auto le = std::upper_bound(sorted.begin(), sorted.end(), y) - sorted.begin();
    total += std::log(static_cast<double>(le) / n);
  }
  return total / n;
}

ThetaEstimate ratio_blocks_estimate(const Series& series, std::size_t b, VHatOptions options) {
  const BlockScheme scheme{BlockKind::disjoint, b};
  if (block_count(scheme, series.size()) < 2) {
    throw Error(ErrorCode::insufficient_blocks, "ratio-blocks estimator needs at least two disjoint blocks");
  }
  const VHatSample vhat = compute_vhat(series, scheme, options);
  const double mean_v = stats::mean(vhat.vhat);
  ThetaEstimate est;
  est.method = Method::ratio_blocks;
  est.theta = ratio_blocks_numerator(vhat.maxima) / -mean_v;
  est.raw_theta = est.theta;
  est.out_of_range = est.theta > 1.0;
  est.tuning.b = b;
  est.tuning.scheme = BlockKind::disjoint;
  est.n_used = vhat.n();
  return est;
}

ThetaEstimate blocks_estimate(const Series& series, BlockScheme scheme, const Threshold& u) {
  const BlockMaximaSample blocks = block_maxima(series, scheme);
  const double level = u.kind() == Threshold::Kind::maxima_median ? stats::median(blocks.maxima) : u.resolve(series);
  const double g = stats::ecdf(blocks.maxima, level);
  const double f = stats::ecdf(series.values(), level);
  if (!(g > 0.0 && g < 1.0) || !(f > 0.0 && f < 1.0)) {
    throw Error(ErrorCode::degenerate_threshold,
                "threshold gives G = " + std::to_string(g) + ", F = " + std::to_string(f));
  }
  ThetaEstimate est;
  est.method = Method::blocks;
  est.tuning = threshold_tuning(u, level);
  est.tuning.b = scheme.b;
  est.tuning.scheme = scheme.kind;
  est.theta = std::log(g) / (static_cast<double>(scheme.b) * std::log(f));
  est.n_used = blocks.n();
  apply_cap(est);
  return est;
}

ExceedanceGaps extract_gaps(const Series& series, const Threshold& u) {
  ExceedanceGaps out;
  out.threshold = u.resolve(series);
  const auto x = series.values();
  std::int64_t previous = -1;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (x[k] > out.threshold) {
      const auto pos = static_cast<std::int64_t>(k);
      if (previous >= 0) out.gaps.push_back(pos - previous);
      previous = pos;
      ++out.exceedance_count;
    }
  }
  if (out.exceedance_count < 2) {
    throw Error(ErrorCode::insufficient_exceedances,
                std::to_string(out.exceedance_count) + " exceedance(s) of the threshold");
  }
  out.rescale = static_cast<double>(out.exceedance_count) / static_cast<double>(x.size());
  return out;
}

ThetaEstimate intervals_estimate(const ExceedanceGaps& gaps) {
  if (gaps.exceedance_count < 2 || gaps.gaps.empty()) {
    throw Error(ErrorCode::insufficient_exceedances, "intervals estimator needs two exceedances");
  }
  const auto n_gaps = static_cast<double>(gaps.gaps.size());
  const std::int64_t longest = *std::max_element(gaps.gaps.begin(), gaps.gaps.end());
  double s1 = 0.0, s2 = 0.0;
  if (longest <= 2) {
    for (auto t : gaps.gaps) {
      s1 += static_cast<double>(t);
      s2 += static_cast<double>(t * t);
    }
  } else {
    for (auto t : gaps.gaps) {
      s1 += static_cast<double>(t - 1);
      s2 += static_cast<double>((t - 1) * (t - 2));
    }
  }
  ThetaEstimate est;
  est.method = Method::intervals;
  est.tuning.threshold = gaps.threshold;
  est.tuning.K = 0;
  est.theta = 2.0 * s1 * s1 / (n_gaps * s2);
  est.n_used = gaps.gaps.size();
  apply_cap(est);
  return est;
}

double kgaps_mle(std::size_t n0, std::size_t n1, double s) {
  if (n1 == 0) return 0.0;
  const auto a0 = static_cast<double>(n0);
  const auto a1 = static_cast<double>(n1);
  if (n0 == 0) return std::min(1.0, 2.0 * a1 / s);
  // Smaller root of s t^2 - (s + n0 + 2 n1) t + 2 n1 = 0, in a cancellation-free form.
  const double a = s + a0 + 2.0 * a1;
  return 4.0 * a1 / (a + std::sqrt(a * a - 8.0 * s * a1));
}

ThetaEstimate kgaps_estimate(const ExceedanceGaps& gaps, int K) {
  if (gaps.exceedance_count < 2 || gaps.gaps.empty()) {
    throw Error(ErrorCode::insufficient_exceedances, "K-gaps estimator needs two exceedances");
  }
  if (K < 0) throw Error(ErrorCode::usage_error, "K must be non-negative");
  std::size_t n0 = 0, n1 = 0;
  double s = 0.0;
  for (auto t : gaps.gaps) {
    const double c = gaps.rescale * static_cast<double>(std::max<std::int64_t>(t - K, 0));
    if (c > 0.0) {
      ++n1;
      s += c;
    } else {
      ++n0;
    }
  }
  ThetaEstimate est;
  est.method = Method::kgaps;
  est.tuning.threshold = gaps.threshold;
  est.tuning.K = K;
  est.n_used = gaps.gaps.size();
  if (n1 == 0) {
    est.theta = 0.0;
    est.degenerate = true;
  } else {
    est.capped = n0 == 0 && 2.0 * static_cast<double>(n1) / s > 1.0;
    est.theta = kgaps_mle(n0, n1, s);
  }
  est.raw_theta = est.theta;
  return est;
}

double gomes_formula(const GevParams& randomized, const GevParams& original) {
  const double d_mu = randomized.mu - original.mu;
  if (std::abs(d_mu) <= 1e-10 * original.sigma) {
    throw Error(ErrorCode::unstable_xi_tilde, "location estimates coincide");
  }
  const double xi_tilde = (randomized.sigma - original.sigma) / d_mu;
  if (std::abs(xi_tilde) < 1e-12) return std::exp(-d_mu / original.sigma);
  return std::exp(-std::log(randomized.sigma / original.sigma) / xi_tilde);
}

Series randomize_index(const Series& series, std::uint64_t seed) {
  std::vector<double> x(series.values().begin(), series.values().end());
  Rng rng(seed);
  for (std::size_t i = x.size(); i > 1; --i) {
    std::swap(x[i - 1], x[rng.below(i)]);
  }
  return Series(std::move(x));
}

namespace {

struct MaximaPair {
  std::vector<double> original;
  std::vector<double> randomized;
};

MaximaPair parametric_maxima(const Series& series, std::size_t b, std::uint64_t seed) {
  const BlockScheme scheme{BlockKind::disjoint, b};
  if (block_count(scheme, series.size()) < kMinGevSample) {
    throw Error(ErrorCode::insufficient_maxima, "parametric estimators need at least " +
                                                    std::to_string(kMinGevSample) + " disjoint blocks");
  }
  return {block_maxima(series, scheme).maxima, block_maxima(randomize_index(series, seed), scheme).maxima};
}

}  // namespace

ThetaEstimate gomes_estimate(const Series& series, std::size_t b, std::uint64_t seed) {
  const MaximaPair maxima = parametric_maxima(series, b, seed);
  const GevFit original = gev_fit(maxima.original, b);
  const GevFit randomized = gev_fit(maxima.randomized, b);
  ThetaEstimate est;
  est.method = Method::gomes;
  est.tuning.b = b;
  est.tuning.scheme = BlockKind::disjoint;
  est.tuning.seed = seed;
  est.n_used = maxima.original.size();
  est.theta = gomes_formula(randomized.params, original.params);
  est.regularity_warning = original.regularity_warning || randomized.regularity_warning;
  apply_cap(est);
  return est;
}

double at_joint_loglik(std::span<const double> randomized, std::span<const double> original,
                       const GevParams& p, double theta) {
  if (!(theta > 0.0 && theta <= 1.0) || !(p.sigma > 0.0)) return -std::numeric_limits<double>::infinity();
  return gev_loglik(randomized, p) + gev_loglik(original, theta_scale_params(p, theta));
}

AtResult at_estimate(const Series& series, std::size_t b, std::uint64_t seed) {
  const MaximaPair maxima = parametric_maxima(series, b, seed);
  const GevFit start_fit = gev_fit(maxima.randomized, b);

  // Coarse theta scan at the randomized-sample fit gives the starting value.
  double theta0 = 1.0;
  double best_ll = -std::numeric_limits<double>::infinity();
  for (int k = 1; k <= 50; ++k) {
    const double t = 0.02 * k;
    const double ll = at_joint_loglik(maxima.randomized, maxima.original, start_fit.params, t);
    if (ll > best_ll) {
      best_ll = ll;
      theta0 = t;
    }
  }
  theta0 = std::min(theta0, 0.99);

  const auto objective = [&](const Eigen::VectorXd& v) {
    return -at_joint_loglik(maxima.randomized, maxima.original, GevParams{v(0), std::exp(v(1)), v(2)}, v(3));
  };
  Eigen::Vector4d x0{start_fit.params.mu, std::log(start_fit.params.sigma), start_fit.params.xi, theta0};
  optim::NelderMeadOptions options;
  options.initial_step = 0.05;
  options.f_tolerance = 1e-12;
  options.x_tolerance = 1e-9;
  options.max_evaluations = 40000;
  const optim::MinimizeResult result = optim::minimize(objective, x0, options, 3);
  if (!result.converged || !std::isfinite(result.value)) {
    throw Error(ErrorCode::fit_failure, "joint GEV likelihood maximization did not converge");
  }

  AtResult out;
  const GevParams p{result.x(0), std::exp(result.x(1)), result.x(2)};
  const double theta = result.x(3);
  out.loglik = -result.value;
  out.estimate.method = Method::at_joint;
  out.estimate.theta = theta;
  out.estimate.raw_theta = theta;
  out.estimate.tuning.b = b;
  out.estimate.tuning.scheme = BlockKind::disjoint;
  out.estimate.tuning.seed = seed;
  out.estimate.n_used = maxima.original.size();
  out.estimate.regularity_warning = p.xi <= -0.5;
  out.fit.params = p;
  out.fit.loglik = out.loglik;
  out.fit.n = maxima.randomized.size();
  out.fit.b = b;
  out.fit.converged = true;
  out.fit.regularity_warning = p.xi <= -0.5;

  // Observed information in natural coordinates; only meaningful off the theta = 1 boundary.
  const auto natural = [&](const Eigen::VectorXd& v) {
    return -at_joint_loglik(maxima.randomized, maxima.original, GevParams{v(0), v(1), v(2)}, v(3));
  };
  const Eigen::Vector4d at{p.mu, p.sigma, p.xi, theta};
  if (theta < 1.0 - 1e-3) {
    const Eigen::Matrix4d info = optim::numerical_hessian(natural, at, 1e-4);
    Eigen::LLT<Eigen::Matrix4d> llt(info);
    if (llt.info() == Eigen::Success) {
      const Eigen::Matrix4d cov = llt.solve(Eigen::Matrix4d::Identity());
      out.fit.cov = cov.topLeftCorner<3, 3>();
      out.theta_se = std::sqrt(cov(3, 3));
    }
  }
  return out;
}

}  // namespace extremal
