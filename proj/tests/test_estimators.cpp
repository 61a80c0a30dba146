#include <algorithm>
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

const Series kSix{{5, 3, 4, 1, 2, 6}};

VHatSample sample_of(std::vector<double> v, BlockKind kind = BlockKind::disjoint) {
  VHatSample s;
  s.vhat = std::move(v);
  s.scheme = {kind, 1};
  return s;
}

ExceedanceGaps gaps_of(std::vector<std::int64_t> t, double rescale = 1.0) {
  ExceedanceGaps g;
  g.exceedance_count = t.size() + 1;
  g.gaps = std::move(t);
  g.rescale = rescale;
  return g;
}

Series transformed(const Series& x) {
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::log(x[i]) + 0.1 * std::cbrt(x[i]);
  return Series(std::move(y));
}

Series maxar(double theta, std::size_t m, std::uint64_t seed) { return simulate(MaxAr{theta}, m, seed); }

}  // namespace

TEST_CASE("sp estimate on the six-point series") {
  const ThetaEstimate e = sp_estimate(compute_vhat(kSix, {BlockKind::sliding, 2}));
  CHECK(e.theta == doctest::Approx(5.0 / 9.7384).epsilon(1e-4));
  CHECK(e.theta == doctest::Approx(0.5134).epsilon(1e-3));
  CHECK(e.method == Method::sp_sliding);
  CHECK(e.n_used == 5);
  CHECK(sp_estimate(compute_vhat(kSix, {BlockKind::disjoint, 2})).method == Method::sp_disjoint);
}

TEST_CASE("sp estimate basics") {
  CHECK(sp_estimate(sample_of({2.5, 2.5, 2.5})).theta == doctest::Approx(0.4));
  const ThetaEstimate big = sp_estimate(sample_of({0.5, 0.5}));
  CHECK(big.theta == doctest::Approx(2.0));
  CHECK(big.out_of_range);
  CHECK_FALSE(big.capped);
  CHECK(code_of([] { sp_estimate(sample_of({})); }) == ErrorCode::empty_sample);
  Rng rng(5);
  std::vector<double> v(100000);
  for (auto& x : v) x = 2.0 * rng.exponential();
  const ThetaEstimate e = sp_estimate(sample_of(v));
  CHECK(std::abs(e.theta - 0.5) < 3.0 * naive_se(e.theta, v.size()));
}

TEST_CASE("rank and threshold-quantile estimators are invariant under increasing transforms") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Series x = maxar(0.5, 3000, seed);
    const Series y = transformed(x);
    for (std::size_t b : {5u, 30u}) {
      for (BlockKind kind : {BlockKind::disjoint, BlockKind::sliding}) {
        CHECK(sp_estimate(compute_vhat(x, {kind, b})).theta == sp_estimate(compute_vhat(y, {kind, b})).theta);
        CHECK(blocks_estimate(x, {kind, b}, Threshold::maxima_median()).theta ==
              blocks_estimate(y, {kind, b}, Threshold::maxima_median()).theta);
        CHECK(blocks_estimate(x, {kind, b}, Threshold::quantile(0.97)).theta ==
              blocks_estimate(y, {kind, b}, Threshold::quantile(0.97)).theta);
      }
      CHECK(ratio_blocks_estimate(x, b).theta == ratio_blocks_estimate(y, b).theta);
    }
    for (double q : {0.9, 0.98}) {
      const auto gx = extract_gaps(x, Threshold::quantile(q));
      const auto gy = extract_gaps(y, Threshold::quantile(q));
      CHECK(gx.gaps == gy.gaps);
      CHECK(intervals_estimate(gx).theta == intervals_estimate(gy).theta);
      for (int K : {0, 1, 3}) CHECK(kgaps_estimate(gx, K).theta == kgaps_estimate(gy, K).theta);
    }
  }
}

TEST_CASE("ratio-blocks numerator and agreement with the disjoint sp estimator") {
  std::vector<double> y(245);
  std::iota(y.begin(), y.end(), 0.0);
  std::reverse(y.begin(), y.end());
  double direct = 0.0;
  for (int i = 1; i <= 245; ++i) direct += std::log(i / 245.0);
  direct /= 245.0;
  CHECK(ratio_blocks_numerator(y) == doctest::Approx(direct).epsilon(1e-13));
  CHECK(std::abs(ratio_blocks_numerator(y) + 1.0) < 0.02);
  // Ties share the largest index.
  CHECK(ratio_blocks_numerator(std::vector<double>{1, 1, 2}) == doctest::Approx((2 * std::log(2.0 / 3)) / 3));

  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Series x = maxar(0.5, 20000, 40 + seed);
    const double rb = ratio_blocks_estimate(x, 50).theta;
    const double sp = sp_estimate(compute_vhat(x, {BlockKind::disjoint, 50})).theta;
    CHECK(std::abs(rb - sp) <= 0.02 * sp);
  }
  CHECK(code_of([] { ratio_blocks_estimate(kSix, 4); }) == ErrorCode::insufficient_blocks);
}

TEST_CASE("blocks estimator") {
  const Series x = maxar(0.5, 2000, 3);
  for (BlockKind kind : {BlockKind::disjoint, BlockKind::sliding}) {
    const BlockScheme scheme{kind, 20};
    const double u = Threshold::quantile(0.95).resolve(x);
    const auto mx = block_maxima(x, scheme).maxima;
    const double g = static_cast<double>(std::count_if(mx.begin(), mx.end(), [&](double v) { return v <= u; })) /
                     static_cast<double>(mx.size());
    const auto xs = x.values();
    const double f = static_cast<double>(std::count_if(xs.begin(), xs.end(), [&](double v) { return v <= u; })) /
                     static_cast<double>(xs.size());
    const ThetaEstimate e = blocks_estimate(x, scheme, Threshold::absolute(u));
    CHECK(e.theta == doctest::Approx(std::min(1.0, std::log(g) / (20.0 * std::log(f)))).epsilon(1e-14));
    CHECK(e.theta > 0.0);
    CHECK(e.theta <= 1.0);
    // Median of the maxima in use.
    std::vector<double> sorted = mx;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    const double med = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    CHECK(blocks_estimate(x, scheme, Threshold::maxima_median()).theta ==
          blocks_estimate(x, scheme, Threshold::absolute(med)).theta);
  }
  CHECK(code_of([&] { blocks_estimate(x, {BlockKind::disjoint, 20}, Threshold::absolute(1e9)); }) ==
        ErrorCode::degenerate_threshold);
  CHECK(code_of([&] { blocks_estimate(x, {BlockKind::disjoint, 20}, Threshold::absolute(-1e9)); }) ==
        ErrorCode::degenerate_threshold);
  CHECK(code_of([&] { (void)Threshold::maxima_median().resolve(x); }) == ErrorCode::usage_error);

  double total = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Series iid = testing::random_series(5000, 900 + seed);
    total += blocks_estimate(iid, {BlockKind::disjoint, 25}, Threshold::maxima_median()).theta;
  }
  CHECK(total / 20 > 0.93);
}

TEST_CASE("exceedance gaps") {
  std::vector<double> v(40, 0.0);
  for (int p : {1, 11, 21, 31}) v[p - 1] = 1.0;
  const auto g = extract_gaps(Series(v), Threshold::absolute(0.5));
  CHECK(g.gaps == std::vector<std::int64_t>{10, 10, 10});
  CHECK(g.exceedance_count == 4);
  CHECK(g.rescale == doctest::Approx(0.1));
  std::vector<double> w(10, 0.0);
  for (int p : {5, 6, 7}) w[p - 1] = 1.0;
  CHECK(extract_gaps(Series(w), Threshold::absolute(0.5)).gaps == std::vector<std::int64_t>{1, 1});
  std::vector<double> one(10, 0.0);
  one[3] = 1.0;
  CHECK(code_of([&] { extract_gaps(Series(one), Threshold::absolute(0.5)); }) == ErrorCode::insufficient_exceedances);
}

TEST_CASE("intervals estimator") {
  CHECK(intervals_estimate(gaps_of({1, 1, 10})).theta == doctest::Approx(0.75));
  const ThetaEstimate capped = intervals_estimate(gaps_of({10, 10, 10}));
  CHECK(capped.theta == 1.0);
  CHECK(capped.capped);
  CHECK(capped.raw_theta == doctest::Approx(2.25));
  // First branch: all gaps at most 2.
  CHECK(intervals_estimate(gaps_of({1, 2, 1})).theta == doctest::Approx(std::min(1.0, 2.0 * 16 / (3.0 * 6))));
  CHECK(intervals_estimate(gaps_of({1, 1, 1})).raw_theta == doctest::Approx(2.0));
  CHECK(code_of([] { intervals_estimate(ExceedanceGaps{}); }) == ErrorCode::insufficient_exceedances);
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const Series x = maxar(0.5, 30000, 70 + seed);
    CHECK(std::abs(intervals_estimate(extract_gaps(x, Threshold::quantile(0.95))).theta - 0.5) < 0.1);
  }
}

TEST_CASE("K-gaps likelihood maximizer") {
  CHECK(kgaps_mle(0, 2, 5.0) == doctest::Approx(0.8));
  CHECK(kgaps_mle(1, 1, 1.0) == doctest::Approx(2.0 - std::sqrt(2.0)));
  CHECK(kgaps_mle(0, 3, 1.0) == 1.0);
  CHECK(kgaps_mle(4, 0, 0.0) == 0.0);
  Rng rng(8);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n0 = 1 + rng.below(50);
    const std::size_t n1 = 1 + rng.below(50);
    const double s = 0.01 + 30.0 * rng.uniform();
    const double t = kgaps_mle(n0, n1, s);
    REQUIRE(t > 0.0);
    REQUIRE(t <= 1.0);
    // Root of the quadratic; the other root lies outside (0, 1].
    const double a = s + n0 + 2.0 * n1;
    CHECK(s * t * t - a * t + 2.0 * n1 == doctest::Approx(0.0).scale(a));
    const double other = 2.0 * n1 / (s * t);
    CHECK(other > 1.0);
    // Brute grid of the log-likelihood.
    const auto ll = [&](double th) { return n0 * std::log1p(-th) + 2.0 * n1 * std::log(th) - th * s; };
    double best = 0.0, best_ll = -INFINITY;
    for (int k = 1; k < 100000; ++k) {
      const double th = k / 100000.0;
      if (ll(th) > best_ll) {
        best_ll = ll(th);
        best = th;
      }
    }
    CHECK(std::abs(t - best) < 2e-5);
  }
}

TEST_CASE("K-gaps estimator") {
  const ThetaEstimate e = kgaps_estimate(gaps_of({3, 4}, 1.0), 1);
  CHECK(e.theta == doctest::Approx(0.8));
  const ThetaEstimate all_zero = kgaps_estimate(gaps_of({1, 2, 1}, 0.1), 2);
  CHECK(all_zero.theta == 0.0);
  CHECK(all_zero.degenerate);
  CHECK(kgaps_estimate(gaps_of({1, 2}, 1.0), 1).theta == doctest::Approx(2.0 - std::sqrt(2.0)));
  CHECK(code_of([] { kgaps_estimate(gaps_of({3}), -1); }) == ErrorCode::usage_error);

  // K = 0 and the intervals estimator agree on average for independent data.
  double sum_k = 0.0, sum_i = 0.0;
  const int reps = 500;
  for (int r = 0; r < reps; ++r) {
    const Series x = testing::random_series(2000, 5000 + r);
    const auto g = extract_gaps(x, Threshold::quantile(0.95));
    sum_k += kgaps_estimate(g, 0).theta;
    sum_i += intervals_estimate(g).theta;
  }
  CHECK(std::abs(sum_k - sum_i) / reps < 0.05);
}

TEST_CASE("Gomes formula and estimator") {
  CHECK(gomes_formula({1.0, 1.2, 0.0}, {0.5, 1.0, 0.0}) == doctest::Approx(std::pow(1.2, -2.5)));
  CHECK(gomes_formula({1.0, 1.2, 0.0}, {0.5, 1.0, 0.0}) == doctest::Approx(0.6339).epsilon(1e-4));
  CHECK(code_of([] { gomes_formula({1.0, 1.0, 0.1}, {1.0, 1.0, 0.1}); }) == ErrorCode::unstable_xi_tilde);
  // Equal scales: the Gumbel limit exp(-(mu - mu_theta)/sigma).
  CHECK(gomes_formula({1.0, 1.0, 0.0}, {0.5, 1.0, 0.0}) == doctest::Approx(std::exp(-0.5)));
  CHECK(gomes_formula({1.0, 1.0 + 1e-9, 0.0}, {0.5, 1.0, 0.0}) == doctest::Approx(std::exp(-0.5)).epsilon(1e-6));

  const Series x = transform_margins(maxar(0.5, 4900, 2), {Margin::frechet}, Margin::gumbel);
  const ThetaEstimate a = gomes_estimate(x, 70, 9);
  const ThetaEstimate b = gomes_estimate(x, 70, 9);
  CHECK(a.theta == b.theta);
  CHECK(a.theta > 0.0);
  CHECK(a.theta <= 1.0);
  CHECK(a.n_used == 70);
  CHECK(code_of([&] { gomes_estimate(x, 400, 1); }) == ErrorCode::insufficient_maxima);
}

TEST_CASE("index randomization is a seeded permutation") {
  const Series x = testing::random_series(500, 3);
  const Series a = randomize_index(x, 11);
  const Series b = randomize_index(x, 11);
  const Series c = randomize_index(x, 12);
  CHECK(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
  CHECK_FALSE(std::equal(a.values().begin(), a.values().end(), c.values().begin()));
  std::vector<double> s1(x.values().begin(), x.values().end()), s2(a.values().begin(), a.values().end());
  std::sort(s1.begin(), s1.end());
  std::sort(s2.begin(), s2.end());
  CHECK(s1 == s2);
}

TEST_CASE("joint GEV estimator") {
  const Series x = transform_margins(maxar(0.5, 4900, 4), {Margin::frechet}, Margin::gumbel);
  const auto r = block_maxima(randomize_index(x, 3), {BlockKind::disjoint, 20}).maxima;
  const auto o = block_maxima(x, {BlockKind::disjoint, 20}).maxima;
  std::vector<double> pooled = r;
  pooled.insert(pooled.end(), o.begin(), o.end());
  for (GevParams p : {GevParams{3, 1, 0}, GevParams{3.2, 0.9, 0.1}, GevParams{2.8, 1.1, -0.1}}) {
    CHECK(at_joint_loglik(r, o, p, 1.0) == doctest::Approx(gev_loglik(pooled, p)).epsilon(1e-13));
  }
  CHECK(std::isinf(at_joint_loglik(r, o, {3, 1, 0}, 1.5)));

  const AtResult a = at_estimate(x, 20, 3);
  CHECK(a.estimate.method == Method::at_joint);
  CHECK(a.estimate.theta > 0.3);
  CHECK(a.estimate.theta < 0.75);
  CHECK(std::isfinite(a.theta_se));
  CHECK(a.loglik >= at_joint_loglik(r, o, a.fit.params, 1.0));
  CHECK(a.loglik == doctest::Approx(at_joint_loglik(r, o, a.fit.params, a.estimate.theta)).epsilon(1e-12));
  const AtResult again = at_estimate(x, 20, 3);
  CHECK(again.estimate.theta == a.estimate.theta);

  int within = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng rng(seed);
    std::vector<double> g(10000);
    for (auto& v : g) v = -std::log(rng.exponential());
    const AtResult iid = at_estimate(Series(g), 50, seed);
    const double se = std::isfinite(iid.theta_se) ? iid.theta_se : 0.05;
    within += std::abs(iid.estimate.theta - 1.0) < 3.0 * se;
  }
  CHECK(within >= 4);
}

TEST_CASE("method names round trip") {
  for (Method m : {Method::sp_disjoint, Method::sp_sliding, Method::ratio_blocks, Method::blocks, Method::intervals,
                   Method::kgaps, Method::gomes, Method::at_joint}) {
    CHECK(parse_method(to_string(m)) == m);
  }
  CHECK(code_of([] { parse_method("bogus"); }) == ErrorCode::usage_error);
  CHECK(code_of([] { Threshold::quantile(1.0); }) == ErrorCode::usage_error);
}
