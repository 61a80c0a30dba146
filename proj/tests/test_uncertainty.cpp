#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/special_functions/lambert_w.hpp>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "extremal/block_engine.hpp"
#include "extremal/error.hpp"
#include "extremal/estimators.hpp"
#include "extremal/processes.hpp"
#include "extremal/rng.hpp"
#include "extremal/uncertainty.hpp"
#include "support.hpp"

using namespace extremal;
using testing::code_of;

namespace {

// Sample with n values summing to n / theta.
VHatSample flat_sample(std::size_t n, double theta) {
  VHatSample s;
  s.vhat.assign(n, 1.0 / theta);
  s.ranks.assign(n, 2);
  s.scheme = {BlockKind::disjoint, 1};
  s.m = n;
  return s;
}

Series maxar(double theta, std::size_t m, std::uint64_t seed) { return simulate(MaxAr{theta}, m, seed); }

// Direct evaluation of the sandwich formula.
double brute_sandwich_se(const VHatSample& v, double t) {
  const std::size_t n = v.n();
  const double b = static_cast<double>(v.scheme.b);
  const double m = static_cast<double>(v.m);
  double first = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (v.ranks[i] != 1) first += std::pow(1.0 - t * v.vhat[i], 2);
  double overlap = 0.0;
  double pairs = static_cast<double>(n) * (n - 1.0);
  if (v.scheme.kind == BlockKind::sliding) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n && j < i + v.scheme.b; ++j)
        if (v.ranks[i] != 1 && v.ranks[j] != 1) overlap += 2.0 * (1.0 - t * v.vhat[i]) * (1.0 - t * v.vhat[j]);
    pairs = n > v.scheme.b ? (n - b) * (n - b + 1.0) : 0.0;
  }
  const double corr = pairs * t * t * std::pow(b, 4) / (std::pow(m - b + 1, 2) * std::pow(b * t + 1, 2));
  const double score_var = (first + overlap - corr) / (t * t);
  const double J = static_cast<double>(n) / (t * t);
  return std::sqrt(score_var) / J;
}

}  // namespace

TEST_CASE("naive standard error") {
  CHECK(naive_se(0.5, 100) == doctest::Approx(50.0 / (std::sqrt(98.0) * 99.0)));
  CHECK(naive_se(0.5, 100) == doctest::Approx(0.05102).epsilon(1e-4));
  CHECK(naive_se(1.0, 3) == doctest::Approx(1.5));
  CHECK(naive_se(0.6, 57) == doctest::Approx(2.0 * naive_se(0.3, 57)));
  CHECK(code_of([] { (void)naive_se(0.5, 2); }) == ErrorCode::undefined_variance);
}

TEST_CASE("score sums to zero at the estimate") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Series x = maxar(0.5, 1500, seed);
    for (BlockKind kind : {BlockKind::disjoint, BlockKind::sliding}) {
      const VHatSample v = compute_vhat(x, {kind, 15});
      const double t = sp_estimate(v).theta;
      const auto d = sandwich_variance(v, t).decomposition;
      const double total = std::accumulate(d.u_terms.begin(), d.u_terms.end(), 0.0);
      const double scale = std::accumulate(v.vhat.begin(), v.vhat.end(), 0.0);
      CHECK(std::abs(total) <= 1e-10 * scale);
    }
  }
}

TEST_CASE("sandwich variance matches the direct formula") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Series x = maxar(0.5, 2000 + 37 * seed, 20 + seed);
    for (BlockKind kind : {BlockKind::disjoint, BlockKind::sliding}) {
      for (std::size_t b : {5u, 20u}) {
        const VHatSample v = compute_vhat(x, {kind, b});
        const double t = sp_estimate(v).theta;
        const SandwichResult r = sandwich_variance(v, t);
        REQUIRE_FALSE(r.fallback_to_naive);
        CHECK(r.adjusted_se == doctest::Approx(brute_sandwich_se(v, t)).epsilon(1e-10));
        CHECK(r.information == doctest::Approx(v.n() / (t * t)));
        // The series maximum always has rank 1 and is removed.
        REQUIRE_FALSE(r.decomposition.removed.empty());
        for (std::size_t i : r.decomposition.removed) {
          CHECK(v.vhat[i] == doctest::Approx(-static_cast<double>(b) * std::log((x.size() - b) / (x.size() - b + 1.0))));
        }
      }
    }
  }
}

TEST_CASE("sandwich reduces when corrections are off") {
  const VHatSample v = compute_vhat(maxar(0.5, 600, 4), {BlockKind::sliding, 6});
  const double t = sp_estimate(v).theta;
  SandwichOptions off;
  off.remove_largest = false;
  off.pair_correction = false;
  off.overlap_correction = false;
  const SandwichResult r = sandwich_variance(v, t, off);
  double first = 0.0;
  for (double x : v.vhat) first += std::pow(1.0 - t * x, 2);
  const double J = v.n() / (t * t);
  CHECK(r.adjusted_se * r.adjusted_se == doctest::Approx((first / (t * t)) / (J * J)).epsilon(1e-12));
  CHECK(r.decomposition.overlap_term == 0.0);
  CHECK(r.decomposition.disjoint_pair_term == 0.0);
}

TEST_CASE("disjoint pair constant") {
  const double c = 245.0 * 244.0 * 0.25 * std::pow(20.0, 4) / (std::pow(4881.0, 2) * std::pow(11.0, 2));
  CHECK(c == doctest::Approx(0.8295).epsilon(1e-4));
  VHatSample v = flat_sample(245, 0.5);
  v.scheme = {BlockKind::disjoint, 20};
  v.m = 4900;
  const auto d = sandwich_variance(v, 0.5).decomposition;
  CHECK(d.disjoint_pair_term == doctest::Approx(-c).epsilon(1e-12));
}

TEST_CASE("non-positive sandwich variance falls back to the naive SE") {
  VHatSample v = flat_sample(245, 0.5);
  v.scheme = {BlockKind::disjoint, 20};
  v.m = 4900;
  const SandwichResult r = sandwich_variance(v, 0.5);
  CHECK(r.fallback_to_naive);
  CHECK(r.adjusted_se == doctest::Approx(naive_se(0.5, 245)));
  CHECK(adjustment_scale(v, 0.5) == 1.0);
}

TEST_CASE("likelihood interval matches the Lambert W solution") {
  const double level = 0.95;
  const double c = boost::math::quantile(boost::math::chi_squared(1.0), level);
  for (std::size_t n : {10u, 100u, 1000u}) {
    for (double t : {0.2, 0.5, 0.9}) {
      const VHatSample v = flat_sample(n, t);
      const VarianceBundle ci = likelihood_ci(v, t, level);
      // 2n(r - 1 - log r) = c with r = theta / theta_hat.
      const double z = -std::exp(-(1.0 + c / (2.0 * n)));
      const double r_lo = -boost::math::lambert_w0(z);
      const double r_hi = -boost::math::lambert_wm1(z);
      CHECK(ci.lower == doctest::Approx(t * r_lo).epsilon(1e-10));
      CHECK(ci.upper == doctest::Approx(t * r_hi).epsilon(1e-10));
      CHECK(ci.naive_se == doctest::Approx(naive_se(t, n)));
    }
  }
}

TEST_CASE("published naive and adjusted intervals are reproduced from their summaries") {
  const std::size_t n = 144;
  const double t = 0.241;
  const VHatSample v = flat_sample(n, t);
  const VarianceBundle naive = likelihood_ci(v, t, 0.95);
  CHECK(std::round(naive.lower * 1000) / 1000 == doctest::Approx(0.204));
  CHECK(std::round(naive.upper * 1000) / 1000 == doctest::Approx(0.283));
  CHECK(std::round(naive.naive_se * 1000) / 1000 == doctest::Approx(0.020));
  // Scale implied by an adjusted SE of 0.026: -l_adj'' = k n / t^2 = 1 / se^2.
  const double k = t * t / (n * 0.026 * 0.026);
  const auto [lo, hi] = scaled_likelihood_interval(v, k, 0.95);
  CHECK(std::abs(lo - 0.194) < 0.002);
  CHECK(std::abs(hi - 0.295) < 0.002);
}

TEST_CASE("adjusted interval curvature equals the inverse sandwich variance") {
  const VHatSample v = compute_vhat(maxar(0.5, 4900, 8), {BlockKind::sliding, 20});
  const double t = sp_estimate(v).theta;
  const SandwichResult s = sandwich_variance(v, t);
  const double k = adjustment_scale(v, t);
  const ScaledLogLikelihood ll(v, k);
  const double h = 1e-4;
  const double curv = -(ll(t + h) - 2 * ll(t) + ll(t - h)) / (h * h);
  CHECK(curv == doctest::Approx(1.0 / (s.adjusted_se * s.adjusted_se)).epsilon(1e-5));
  const VarianceBundle ci = adjusted_loglik_ci(v, t, 0.95);
  CHECK(ci.lower < t);
  CHECK(t < ci.upper);
  const VarianceBundle plain = likelihood_ci(v, t, 0.95);
  CHECK(ci.upper - ci.lower > plain.upper - plain.lower);
  CHECK(ci.adjusted_se.value() == doctest::Approx(s.adjusted_se));
  // Scale 1 reproduces the unadjusted interval.
  const auto [lo, hi] = scaled_likelihood_interval(v, 1.0, 0.95);
  CHECK(lo == plain.lower);
  CHECK(hi == plain.upper);
}

TEST_CASE("stationary bootstrap index streams") {
  const auto a = stationary_bootstrap_indices(1000, 5.0, 3);
  CHECK(a == stationary_bootstrap_indices(1000, 5.0, 3));
  CHECK(a != stationary_bootstrap_indices(1000, 5.0, 4));
  CHECK(a.size() == 1000);
  std::size_t continued = 0;
  for (std::size_t k = 1; k < a.size(); ++k) {
    CHECK(a[k] < 1000);
    continued += a[k] == (a[k - 1] + 1) % 1000;
  }
  // Continuation probability 1 - 1/L.
  CHECK(static_cast<double>(continued) / 999.0 == doctest::Approx(0.8).epsilon(0.08));
  // Mean block length 1: no continuation beyond chance coincidence.
  const auto one = stationary_bootstrap_indices(5000, 1.0, 9);
  std::size_t runs = 0;
  for (std::size_t k = 1; k < one.size(); ++k) runs += one[k] == (one[k - 1] + 1) % 5000;
  CHECK(runs < 10);
}

TEST_CASE("bootstrap with unit block length resamples the marginal") {
  const Series x = testing::random_series(3000, 31);
  const auto idx = stationary_bootstrap_indices(3000, 1.0, 5);
  std::vector<double> r(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) r[k] = x[idx[k]];
  const double p = testing::ks_pvalue(r, [](double v) { return 0.5 * std::erfc(-v / std::sqrt(2.0)); });
  CHECK(p > 0.001);
}

TEST_CASE("bootstrap results are independent of worker count") {
  const Series x = maxar(0.5, 2000, 12);
  BootstrapOptions o;
  o.reps = 41;  // 2.5% and 97.5% quantiles land on order statistics
  o.seed = 77;
  o.mean_block_length = 20.0;
  const auto pipeline = sp_pipeline({BlockKind::sliding, 20});
  const VarianceBundle one = stationary_bootstrap(x, pipeline, o);
  o.workers = 4;
  const VarianceBundle four = stationary_bootstrap(x, pipeline, o);
  CHECK(one.bootstrap_se.value() == four.bootstrap_se.value());
  CHECK(one.lower == four.lower);
  CHECK(one.upper == four.upper);
  CHECK(one.bootstrap_bias_adjusted_theta.value() == four.bootstrap_bias_adjusted_theta.value());
  CHECK(one.point == sp_estimate(compute_vhat(x, {BlockKind::sliding, 20})).theta);
  CHECK(one.lower < one.upper);
  CHECK(one.ci_method == CiMethod::bootstrap_basic_log_scale);
  o.percentile = true;
  const VarianceBundle pct = stationary_bootstrap(x, pipeline, o);
  CHECK(pct.ci_method == CiMethod::bootstrap_percentile);
  CHECK(pct.bootstrap_se.value() == one.bootstrap_se.value());
  // Basic log-scale interval is the percentile interval reflected about log(point).
  CHECK(std::log(one.lower) == doctest::Approx(2 * std::log(one.point) - std::log(pct.upper)).epsilon(1e-10));
  CHECK(std::log(one.upper) == doctest::Approx(2 * std::log(one.point) - std::log(pct.lower)).epsilon(1e-10));
}

TEST_CASE("bootstrap failure handling") {
  const Series x = testing::random_series(200, 2);
  BootstrapOptions o;
  o.reps = 20;
  o.mean_block_length = 3.0;
  int calls = 0;
  const ThetaPipeline flaky = [&calls](const Series&) -> double {
    if (calls++ % 3 == 1) throw Error(ErrorCode::fit_failure, "nope");
    return 0.5;
  };
  CHECK(code_of([&] { stationary_bootstrap(x, flaky, o); }) == ErrorCode::bootstrap_unstable);
  o.reps = 1;
  CHECK(code_of([&] { stationary_bootstrap(x, sp_pipeline({BlockKind::disjoint, 5}), o); }) == ErrorCode::usage_error);
}

TEST_CASE("automatic block length") {
  CHECK(optimal_block_length(testing::random_series(10000, 3)) <= 5.0);
  const double low = optimal_block_length(simulate(GaussianAr1{0.1}, 5000, 1));
  const double high = optimal_block_length(simulate(GaussianAr1{0.9}, 5000, 1));
  CHECK(high > low);
  CHECK(low >= 1.0);
  CHECK(code_of([] { (void)optimal_block_length(testing::random_series(40, 1)); }) == ErrorCode::usage_error);
  CHECK(code_of([] { (void)optimal_block_length(Series(std::vector<double>(100, 2.0))); }) ==
        ErrorCode::degenerate_series);
}
