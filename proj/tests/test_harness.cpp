#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "extremal/csv_io.hpp"
#include "extremal/error.hpp"
#include "extremal/harness.hpp"
#include "extremal/rng.hpp"
#include "support.hpp"

using namespace extremal;
using testing::code_of;

namespace {

Series parse(const std::string& text) {
  std::istringstream in(text);
  return read_series(in);
}

std::string error_text(const std::string& text) {
  try {
    parse(text);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::parse_error);
    return e.what();
  }
  FAIL("expected a parse error");
  return {};
}

StudyConfig small_config() {
  StudyConfig c;
  c.processes = {MaxAr{0.5}, MovingMaxima{{0.3, 0.2, 0.2, 0.3}}};
  c.m = 1500;
  c.reps = 6;
  c.estimators = {Method::sp_disjoint, Method::sp_sliding, Method::ratio_blocks, Method::blocks, Method::intervals,
                  Method::kgaps};
  c.block_sizes = {10, 25};
  c.threshold_quantiles = {0.95};
  c.K_values = {0, 1};
  c.seed = 99;
  c.keep_replications = true;
  return c;
}

std::string csv_of(const StudyReport& r) {
  std::ostringstream out;
  write_study_csv(out, r);
  return out.str();
}

Series iid_gumbel(std::size_t m, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x(m);
  for (auto& v : x) v = -std::log(rng.exponential());
  return Series(std::move(x));
}

}  // namespace

TEST_CASE("csv reader") {
  const Series a = parse("value\n1.5\n\n  2\n-3e2\n+4\n");
  CHECK(std::vector<double>(a.values().begin(), a.values().end()) == std::vector<double>{1.5, 2, -300, 4});
  CHECK(parse("1\n2\r\n3\n").size() == 3);
  CHECK(error_text("x\n1\nabc\n").find("line 3") != std::string::npos);
  CHECK(error_text("1\n2\n3,4\n").find("line 3") != std::string::npos);
  CHECK(error_text("").find("parse-error") == 0);
  CHECK(error_text("header\n\n").size() > 0);
  CHECK(error_text("h1\nh2\n1\n").find("line 2") != std::string::npos);
  CHECK(code_of([] { read_series_file("/nonexistent/file.csv"); }) == ErrorCode::parse_error);
  std::ostringstream out;
  write_series(out, Series{{0.1, 2.0}});
  CHECK(parse(out.str()).size() == 2);
  CHECK(parse(out.str())[0] == 0.1);
}

TEST_CASE("study config parsing") {
  const StudyConfig c = parse_study_config(R"({"processes": ["maxar:0.5"], "estimators": ["sp_sliding"],
      "block_sizes": [20], "reps": 3, "m": 500, "target": "theta_b", "margin": "gumbel"})");
  CHECK(c.reps == 3);
  CHECK(c.m == 500);
  CHECK(c.target == Target::theta_b);
  CHECK(c.margin == Margin::gumbel);
  const StudyConfig again = parse_study_config(to_json(c));
  CHECK(to_json(again) == to_json(c));
  CHECK(config_digest(again) == config_digest(c));
  StudyConfig other = c;
  other.seed = 2;
  CHECK(config_digest(other) != config_digest(c));
  // Worker count does not change results and is left out of the digest.
  other = c;
  other.workers = 8;
  CHECK(config_digest(other) == config_digest(c));

  CHECK(code_of([] { parse_study_config("{not json"); }) == ErrorCode::usage_error);
  CHECK(code_of([] { parse_study_config(R"({"processes": ["maxar:0.5"], "estimators": ["sp_sliding"],
      "block_sizes": [20], "bogus": 1})"); }) == ErrorCode::usage_error);
  CHECK(code_of([] { parse_study_config(R"({"processes": ["maxar:0.5"], "estimators": ["nope"]})"); }) ==
        ErrorCode::usage_error);
  StudyConfig bad = c;
  bad.reps = 1;
  CHECK(code_of([&] { validate(bad); }) == ErrorCode::usage_error);
  bad = c;
  bad.block_sizes.clear();
  CHECK(code_of([&] { validate(bad); }) == ErrorCode::usage_error);
}

TEST_CASE("cell expansion") {
  const StudyConfig c = small_config();
  const auto cells = expand_cells(c);
  // Per process: 2 + 2 + 2 + 2 (blocks, one scheme) + 1 + 2.
  CHECK(cells.size() == 2 * 11);
  CHECK(cells.front().process == 0);
  CHECK(cells.back().process == 1);
  CHECK(cells.back().method == Method::kgaps);
}

TEST_CASE("study summaries satisfy the consistency identity") {
  StudyConfig c = small_config();
  c.reps = 2;
  const StudyReport r = run_study(c);
  for (const CellSummary& s : r.cells) {
    REQUIRE(s.n_ok == 2);
    const double lhs = s.rmse * s.rmse;
    const double rhs = s.sd * s.sd * (s.n_ok - 1.0) / s.n_ok + std::pow(s.mean - s.target, 2);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
  }
  const StudyReport full = run_study(small_config());
  for (const CellSummary& s : full.cells) {
    if (s.n_ok < 2) continue;
    const double rhs = s.sd * s.sd * (s.n_ok - 1.0) / s.n_ok + std::pow(s.mean - s.target, 2);
    CHECK(s.rmse * s.rmse == doctest::Approx(rhs).epsilon(1e-10));
  }
}

TEST_CASE("study summaries match replication records") {
  const StudyReport r = run_study(small_config());
  REQUIRE(r.replications.size() == 6);
  for (std::size_t c = 0; c < r.cells.size(); ++c) {
    std::vector<double> v;
    for (const auto& rep : r.replications)
      if (rep[c].ok) v.push_back(rep[c].theta);
    REQUIRE(v.size() == r.cells[c].n_ok);
    if (v.empty()) continue;
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= v.size();
    CHECK(r.cells[c].mean == doctest::Approx(mean).epsilon(1e-12));
    std::vector<double> rel(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) rel[i] = (v[i] - r.cells[c].target) / r.cells[c].target;
    std::sort(rel.begin(), rel.end());
    const std::size_t n = rel.size();
    const double med = n % 2 ? rel[n / 2] : 0.5 * (rel[n / 2 - 1] + rel[n / 2]);
    CHECK(r.cells[c].mrb == doctest::Approx(med).epsilon(1e-12));
  }
}

TEST_CASE("studies are deterministic and independent of worker count") {
  StudyConfig c = small_config();
  const std::string one = csv_of(run_study(c));
  CHECK(one == csv_of(run_study(c)));
  c.workers = 3;
  CHECK(one == csv_of(run_study(c)));
  c.seed = 100;
  CHECK(one != csv_of(run_study(c)));
  std::ostringstream a, b;
  c.workers = 1;
  write_replications_csv(a, run_study(c));
  c.workers = 4;
  write_replications_csv(b, run_study(c));
  CHECK(a.str() == b.str());
}

TEST_CASE("all cells of a replication see the same series") {
  const StudyReport r = run_study(small_config());
  const std::size_t per_process = r.cells.size() / 2;
  std::set<std::uint64_t> seen;
  for (const auto& rep : r.replications) {
    for (std::size_t c = 0; c < rep.size(); ++c) {
      const std::size_t first = (c / per_process) * per_process;
      CHECK(rep[c].series_digest == rep[first].series_digest);
    }
    seen.insert(rep.front().series_digest);
  }
  CHECK(seen.size() == r.replications.size());
}

TEST_CASE("study csv layout") {
  const std::string text = csv_of(run_study(small_config()));
  std::istringstream in(text);
  std::string header;
  std::getline(in, header);
  CHECK(header.rfind("process,estimator,b,scheme,threshold_quantile,K,matched_quantile,matched_block", 0) == 0);
  CHECK(header.find("config_digest") != std::string::npos);
  std::size_t rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  CHECK(rows == 22);
}

TEST_CASE("block-size matching annotation") {
  StudyConfig c = small_config();
  c.reps = 2;
  const StudyReport r = run_study(c);
  for (const CellSummary& s : r.cells) {
    if (s.cell.b) CHECK(s.matched_quantile.value() == doctest::Approx(1.0 - 2.0 / *s.cell.b));
    if (s.cell.threshold_quantile) CHECK(s.matched_block.value() == doctest::Approx(2.0 / (1.0 - *s.cell.threshold_quantile)));
  }
}

TEST_CASE("relative bias of sp estimators decreases in b") {
  StudyConfig c;
  c.processes = {MaxAr{0.5}};
  c.m = 6000;
  c.reps = 60;
  c.estimators = {Method::sp_disjoint, Method::sp_sliding};
  c.block_sizes = {4, 10, 30};
  c.sandwich = false;
  const StudyReport r = run_study(c);
  REQUIRE(r.cells.size() == 6);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(r.cells[3 * k].mrb > r.cells[3 * k + 1].mrb);
    CHECK(r.cells[3 * k + 1].mrb > r.cells[3 * k + 2].mrb);
  }
}

TEST_CASE("theta_b target uses the closed form") {
  StudyConfig c;
  c.processes = {MaxAr{0.5}};
  c.m = 1000;
  c.reps = 2;
  c.estimators = {Method::sp_sliding, Method::intervals};
  c.block_sizes = {20};
  c.threshold_quantiles = {0.9};
  c.target = Target::theta_b;
  const StudyReport r = run_study(c);
  CHECK(r.cells[0].target == doctest::Approx(0.525));
  CHECK(r.cells[1].target == doctest::Approx(0.5 + 0.5 / 20));
}

TEST_CASE("failing cells are counted, not fatal") {
  StudyConfig c;
  c.processes = {MaxAr{0.5}};
  c.m = 300;
  c.reps = 3;
  c.estimators = {Method::sp_sliding, Method::gomes};
  c.block_sizes = {25};  // 12 disjoint blocks: too few for a GEV fit
  const StudyReport r = run_study(c);
  CHECK(r.cells[0].n_ok == 3);
  CHECK(r.cells[1].n_ok == 0);
  CHECK(r.cells[1].failures == 3);
  c.estimators = {Method::gomes};
  CHECK(code_of([&] { run_study(c); }) == ErrorCode::study_failure);
}

TEST_CASE("block-size scan on independent Gumbel data") {
  const Series x = iid_gumbel(20000, 4);
  const auto rows = block_size_scan(x, {10, 25, 50, 100});
  REQUIRE(rows.size() == 4);
  for (const ScanRow& row : rows) {
    CAPTURE(row.b);
    CHECK(row.errors.empty());
    CHECK(std::abs(row.sliding->point - 1.0) < 0.1);
    CHECK(std::abs(row.disjoint->point - 1.0) < 0.15);
    CHECK(row.disjoint->lower < row.disjoint->point);
    CHECK(row.disjoint->point < row.disjoint->upper);
    const GevParams f = *row.implied_disjoint;
    CHECK(std::abs(f.mu) < 0.3);
    CHECK(std::abs(f.sigma - 1.0) < 0.25);
    CHECK(std::abs(f.xi) < 0.2);
  }
  const auto single = block_size_scan(x, {25});
  REQUIRE(single.size() == 1);
  CHECK(single[0].sliding->point == rows[1].sliding->point);
  CHECK(code_of([&] { block_size_scan(x, {10001}); }) == ErrorCode::usage_error);
  CHECK(code_of([&] { block_size_scan(x, {}); }) == ErrorCode::usage_error);
  std::ostringstream out;
  write_scan_csv(out, rows);
  std::size_t lines = 0;
  for (char ch : out.str()) lines += ch == '\n';
  CHECK(lines == 5);
}

TEST_CASE("marginal quantiles exceed the theta = 1 values") {
  const Series x = transform_margins(simulate(MaxAr{0.5}, 4900, 6), {Margin::frechet}, Margin::gumbel);
  const QuantileTable t = marginal_quantiles(x, 20, {0.01, 0.001, 0.0001});
  CHECK(t.theta_hat < 1.0);
  for (const QuantileRow& row : t.rows) {
    CHECK(row.with_theta > row.theta_one);
    REQUIRE(row.interval.has_value());
    CHECK(row.interval->lower < row.interval->estimate);
    CHECK(row.interval->estimate < row.interval->upper);
  }
  CHECK(t.rows[0].with_theta < t.rows[1].with_theta);
  CHECK(t.rows[1].with_theta < t.rows[2].with_theta);
  std::ostringstream out;
  write_quantiles_csv(out, t);
  CHECK(out.str().find("p,") == 0);
}

TEST_CASE("efficiency curve rows") {
  const auto rows = efficiency_curve({0.2, 0.6, 1.0}, {-0.2, 0.0, 0.3});
  REQUIRE(rows.size() == 9);
  for (const auto& r : rows) {
    CHECK(r.rel_eff > 0.0);
    CHECK(r.rel_eff <= 0.5 + 1e-9);
    if (r.theta == 1.0) CHECK(r.rel_eff == doctest::Approx(0.5).epsilon(1e-3));
  }
  CHECK(code_of([] { efficiency_curve({}, {0.0}); }) == ErrorCode::usage_error);
  CHECK(code_of([] { efficiency_curve({0.5}, {-0.6}); }) == ErrorCode::domain_error);
  CHECK(code_of([] { efficiency_curve({1.5}, {0.0}); }) == ErrorCode::domain_error);
  std::ostringstream out;
  write_efficiency_csv(out, rows);
  CHECK(out.str().rfind("theta,xi,", 0) == 0);
}
