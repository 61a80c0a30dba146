#include "extremal/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstring>
#include <exception>
#include <limits>
#include <mutex>
#include <ostream>
#include <thread>

#include "extremal/block_engine.hpp"
#include "extremal/error.hpp"
#include "extremal/rng.hpp"
#include "extremal/stats.hpp"
#include "json.hpp"

namespace extremal {

namespace {

using json = nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double v) {
  if (!std::isfinite(v)) return "NA";
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string num(const std::optional<double>& v) { return v ? num(*v) : "NA"; }

template <class T>
std::string opt_int(const std::optional<T>& v) {
  return v ? std::to_string(*v) : "NA";
}

[[noreturn]] void usage(const std::string& what) { throw Error(ErrorCode::usage_error, what); }

bool needs_block(Method m) {
  return m == Method::sp_disjoint || m == Method::sp_sliding || m == Method::ratio_blocks ||
         m == Method::blocks || m == Method::gomes || m == Method::at_joint;
}

bool needs_threshold(Method m) { return m == Method::intervals || m == Method::kgaps; }

std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::string_view to_string(Target target) {
  return target == Target::theta_limit ? "theta_limit" : "theta_b";
}

Target parse_target(std::string_view name) {
  if (name == "theta_limit") return Target::theta_limit;
  if (name == "theta_b") return Target::theta_b;
  usage("unknown target '" + std::string(name) + "'");
}

void validate(const StudyConfig& c) {
  if (c.processes.empty()) usage("study needs at least one process");
  if (c.estimators.empty()) usage("study needs at least one estimator");
  if (c.reps < 2) usage("study needs reps >= 2");
  if (c.m < 2) usage("series length must be at least 2");
  if (c.workers < 1) usage("workers must be positive");
  for (const auto& p : c.processes) validate(p);
  bool want_b = false, want_q = false;
  for (Method m : c.estimators) {
    want_b = want_b || needs_block(m);
    want_q = want_q || needs_threshold(m) || (m == Method::blocks && !c.blocks_median_threshold);
    if (m == Method::blocks && c.blocks_schemes.empty()) usage("blocks needs blocks_schemes");
    if (m == Method::kgaps && c.K_values.empty()) usage("kgaps needs K_values");
  }
  if (want_b && c.block_sizes.empty()) usage("selected estimators need block_sizes");
  if (want_q && c.threshold_quantiles.empty()) usage("selected estimators need threshold_quantiles");
  for (auto b : c.block_sizes) {
    if (b < 1 || b >= c.m) usage("block size " + std::to_string(b) + " outside [1, m)");
  }
  for (double q : c.threshold_quantiles) {
    if (!(q > 0.0 && q < 1.0)) usage("threshold quantiles must lie in (0, 1)");
  }
  for (int k : c.K_values) {
    if (k < 0) usage("K must be non-negative");
  }
  if (c.bootstrap_block_length && !(*c.bootstrap_block_length >= 1.0)) usage("bootstrap block length must be >= 1");
  if (c.parametric_margin == Margin::empirical) usage("parametric_margin cannot be empirical");
  if (c.margin && *c.margin == Margin::empirical) usage("margin cannot be empirical");
}

StudyConfig parse_study_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    usage(std::string("study config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) usage("study config must be a JSON object");
  static const std::vector<std::string> known = {
      "processes", "m", "reps", "estimators", "block_sizes", "threshold_quantiles", "K_values", "blocks_schemes",
      "blocks_median_threshold", "target",
      "seed", "workers", "margin", "parametric_margin", "sandwich", "bootstrap_reps", "bootstrap_block_length",
      "keep_replications"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) usage("unknown study config key '" + key + "'");
  }
  StudyConfig c;
  try {
    for (const auto& p : j.at("processes")) c.processes.push_back(parse_process(p.get<std::string>()));
    for (const auto& e : j.at("estimators")) c.estimators.push_back(parse_method(e.get<std::string>()));
    if (j.contains("m")) c.m = j["m"].get<std::size_t>();
    if (j.contains("reps")) c.reps = j["reps"].get<std::size_t>();
    if (j.contains("block_sizes")) c.block_sizes = j["block_sizes"].get<std::vector<std::size_t>>();
    if (j.contains("threshold_quantiles")) c.threshold_quantiles = j["threshold_quantiles"].get<std::vector<double>>();
    if (j.contains("K_values")) c.K_values = j["K_values"].get<std::vector<int>>();
    if (j.contains("blocks_schemes")) {
      c.blocks_schemes.clear();
      for (const auto& k : j["blocks_schemes"]) c.blocks_schemes.push_back(parse_block_kind(k.get<std::string>()));
    }
    if (j.contains("blocks_median_threshold")) c.blocks_median_threshold = j["blocks_median_threshold"].get<bool>();
    if (j.contains("target")) c.target = parse_target(j["target"].get<std::string>());
    if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("workers")) c.workers = j["workers"].get<std::size_t>();
    if (j.contains("margin") && !j["margin"].is_null()) c.margin = parse_margin(j["margin"].get<std::string>());
    if (j.contains("parametric_margin")) c.parametric_margin = parse_margin(j["parametric_margin"].get<std::string>());
    if (j.contains("sandwich")) c.sandwich = j["sandwich"].get<bool>();
    if (j.contains("bootstrap_reps")) c.bootstrap_reps = j["bootstrap_reps"].get<std::size_t>();
    if (j.contains("bootstrap_block_length") && !j["bootstrap_block_length"].is_null()) {
      c.bootstrap_block_length = j["bootstrap_block_length"].get<double>();
    }
    if (j.contains("keep_replications")) c.keep_replications = j["keep_replications"].get<bool>();
  } catch (const json::exception& e) {
    usage(std::string("bad study config: ") + e.what());
  }
  validate(c);
  return c;
}

std::string to_json(const StudyConfig& c) {
  json j;
  j["processes"] = json::array();
  for (const auto& p : c.processes) j["processes"].push_back(to_string(p));
  j["estimators"] = json::array();
  for (Method m : c.estimators) j["estimators"].push_back(std::string(to_string(m)));
  j["m"] = c.m;
  j["reps"] = c.reps;
  j["block_sizes"] = c.block_sizes;
  j["threshold_quantiles"] = c.threshold_quantiles;
  j["K_values"] = c.K_values;
  j["blocks_schemes"] = json::array();
  for (BlockKind k : c.blocks_schemes) j["blocks_schemes"].push_back(std::string(to_string(k)));
  j["blocks_median_threshold"] = c.blocks_median_threshold;
  j["target"] = std::string(to_string(c.target));
  j["seed"] = c.seed;
  j["margin"] = c.margin ? json(std::string(to_string(*c.margin))) : json(nullptr);
  j["parametric_margin"] = std::string(to_string(c.parametric_margin));
  j["sandwich"] = c.sandwich;
  j["bootstrap_reps"] = c.bootstrap_reps;
  j["bootstrap_block_length"] = c.bootstrap_block_length ? json(*c.bootstrap_block_length) : json(nullptr);
  j["keep_replications"] = c.keep_replications;
  // workers is omitted: it never changes results.
  return j.dump();
}

std::string config_digest(const StudyConfig& c) {
  const std::string s = to_json(c);
  return hex(fnv1a(s.data(), s.size()));
}

std::uint64_t series_digest(const Series& series) {
  const auto v = series.values();
  return fnv1a(v.data(), v.size() * sizeof(double));
}

std::vector<StudyCell> expand_cells(const StudyConfig& c) {
  std::vector<StudyCell> cells;
  for (std::size_t p = 0; p < c.processes.size(); ++p) {
    for (Method m : c.estimators) {
      switch (m) {
        case Method::blocks:
          for (auto b : c.block_sizes)
            for (BlockKind kind : c.blocks_schemes) {
              if (c.blocks_median_threshold) {
                cells.push_back({p, m, b, kind, std::nullopt, std::nullopt});
              } else {
                for (double q : c.threshold_quantiles) cells.push_back({p, m, b, kind, q, std::nullopt});
              }
            }
          break;
        case Method::intervals:
          for (double q : c.threshold_quantiles) cells.push_back({p, m, std::nullopt, std::nullopt, q, std::nullopt});
          break;
        case Method::kgaps:
          for (double q : c.threshold_quantiles)
            for (int k : c.K_values) cells.push_back({p, m, std::nullopt, std::nullopt, q, k});
          break;
        default:
          for (auto b : c.block_sizes) cells.push_back({p, m, b, std::nullopt, std::nullopt, std::nullopt});
      }
    }
  }
  return cells;
}

namespace {

struct PreparedSeries {
  Series series;
  Series parametric;
  std::uint64_t digest;
};

PreparedSeries prepare(const StudyConfig& c, std::size_t process, std::uint64_t rep_seed) {
  const ProcessSpec& spec = c.processes[process];
  Series raw = simulate(spec, c.m, substream_seed(rep_seed, process));
  const auto source = known_margin(spec).value_or(SourceMargin{Margin::empirical});
  Series parametric = transform_margins(raw, source, c.parametric_margin);
  Series used = c.margin ? transform_margins(raw, source, *c.margin) : raw;
  const auto digest = series_digest(used);
  return {std::move(used), std::move(parametric), digest};
}

CellOutcome run_cell(const StudyConfig& c, const StudyCell& cell, const PreparedSeries& data,
                     std::uint64_t rep_seed, std::size_t cell_index) {
  CellOutcome out;
  out.series_digest = data.digest;
  const Series& x = data.series;
  const std::uint64_t randomize_seed = substream_seed(rep_seed, 1'000'000 + cell.process);
  try {
    switch (cell.method) {
      case Method::sp_disjoint:
      case Method::sp_sliding: {
        const BlockScheme scheme{cell.method == Method::sp_disjoint ? BlockKind::disjoint : BlockKind::sliding,
                                 *cell.b};
        const VHatSample vhat = compute_vhat(x, scheme);
        out.theta = sp_estimate(vhat).theta;
        out.naive_se = vhat.n() >= 3 ? naive_se(out.theta, vhat.n()) : kNaN;
        if (c.sandwich) out.adjusted_se = sandwich_variance(vhat, out.theta).adjusted_se;
        if (c.bootstrap_reps > 0) {
          BootstrapOptions opts;
          opts.reps = c.bootstrap_reps;
          opts.mean_block_length = c.bootstrap_block_length;
          opts.seed = substream_seed(rep_seed, 2'000'000 + cell_index);
          out.bootstrap_se = stationary_bootstrap(x, sp_pipeline(scheme), opts).bootstrap_se;
        }
        break;
      }
      case Method::ratio_blocks:
        out.theta = ratio_blocks_estimate(x, *cell.b).theta;
        break;
      case Method::blocks:
        out.theta = blocks_estimate(x, {*cell.scheme, *cell.b},
                                    cell.threshold_quantile ? Threshold::quantile(*cell.threshold_quantile)
                                                            : Threshold::maxima_median())
                        .theta;
        break;
      case Method::intervals:
        out.theta = intervals_estimate(extract_gaps(x, Threshold::quantile(*cell.threshold_quantile))).theta;
        break;
      case Method::kgaps:
        out.theta = kgaps_estimate(extract_gaps(x, Threshold::quantile(*cell.threshold_quantile)), *cell.K).theta;
        break;
      case Method::gomes:
        out.theta = gomes_estimate(data.parametric, *cell.b, randomize_seed).theta;
        break;
      case Method::at_joint: {
        const AtResult at = at_estimate(data.parametric, *cell.b, randomize_seed);
        out.theta = at.estimate.theta;
        out.naive_se = at.theta_se;
        break;
      }
    }
    out.ok = std::isfinite(out.theta);
    if (!out.ok) out.error = "non-finite-estimate";
  } catch (const Error& e) {
    out.ok = false;
    out.error = std::string(to_string(e.code()));
  }
  return out;
}

std::string scheme_name(const StudyCell& cell) {
  if (cell.scheme) return std::string(to_string(*cell.scheme));
  if (cell.method == Method::sp_disjoint) return "disjoint";
  if (cell.method == Method::sp_sliding) return "sliding";
  return "NA";
}

std::optional<double> mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  return stats::mean(v);
}

}  // namespace

StudyReport run_study(const StudyConfig& config) {
  validate(config);
  const std::vector<StudyCell> cells = expand_cells(config);
  std::vector<std::vector<CellOutcome>> results(config.reps);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto worker = [&] {
    for (;;) {
      const std::size_t r = next.fetch_add(1);
      if (r >= config.reps) return;
      try {
        const std::uint64_t rep_seed = substream_seed(config.seed, r);
        std::vector<CellOutcome> row(cells.size());
        for (std::size_t p = 0; p < config.processes.size(); ++p) {
          const PreparedSeries data = prepare(config, p, rep_seed);
          for (std::size_t ci = 0; ci < cells.size(); ++ci) {
            if (cells[ci].process == p) row[ci] = run_cell(config, cells[ci], data, rep_seed, ci);
          }
        }
        results[r] = std::move(row);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = config.reps;
        return;
      }
    }
  };
  const std::size_t nthreads = std::min(config.workers, config.reps);
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  StudyReport report;
  report.config = config;
  report.digest = config_digest(config);
  std::size_t total_ok = 0;
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    const StudyCell& cell = cells[ci];
    CellSummary s;
    s.cell = cell;
    s.process_label = to_string(config.processes[cell.process]);
    if (cell.b) s.matched_quantile = 1.0 - 2.0 / static_cast<double>(*cell.b);
    if (cell.threshold_quantile) s.matched_block = 2.0 / (1.0 - *cell.threshold_quantile);

    const ThetaOracle oracle = theta_oracle(config.processes[cell.process]);
    s.target = oracle.theta_limit;
    s.target_kind = Target::theta_limit;
    if (config.target == Target::theta_b && oracle.theta_b) {
      const auto b = cell.b ? *cell.b
                            : static_cast<std::size_t>(std::max(1.0, std::round(*s.matched_block)));
      s.target = oracle.theta_b(b);
      s.target_kind = Target::theta_b;
    }

    std::vector<double> theta, rel, naive, adj, boot;
    for (const auto& row : results) {
      const CellOutcome& o = row[ci];
      if (!o.ok) {
        ++s.failures;
        continue;
      }
      theta.push_back(o.theta);
      rel.push_back((o.theta - s.target) / s.target);
      if (std::isfinite(o.naive_se)) naive.push_back(o.naive_se);
      if (o.adjusted_se) adj.push_back(*o.adjusted_se);
      if (o.bootstrap_se) boot.push_back(*o.bootstrap_se);
    }
    s.n_ok = theta.size();
    total_ok += s.n_ok;
    if (s.n_ok > 0) {
      s.mean = stats::mean(theta);
      s.median = stats::median(theta);
      s.sd = s.n_ok >= 2 ? stats::sd(theta) : kNaN;
      double sq = 0.0;
      for (double t : theta) sq += (t - s.target) * (t - s.target);
      s.rmse = std::sqrt(sq / static_cast<double>(s.n_ok));
      s.mrb = stats::median(rel);
      s.mean_relative_bias = stats::mean(rel);
      s.mean_naive_se = naive.empty() ? kNaN : stats::mean(naive);
      s.mean_adjusted_se = mean_of(adj);
      s.mean_bootstrap_se = mean_of(boot);
    } else {
      s.mean = s.median = s.sd = s.rmse = s.mrb = s.mean_relative_bias = s.mean_naive_se = kNaN;
    }
    report.cells.push_back(std::move(s));
  }
  if (total_ok == 0) throw Error(ErrorCode::study_failure, "every estimator cell failed in every replication");
  if (config.keep_replications) report.replications = std::move(results);
  return report;
}

void write_study_csv(std::ostream& out, const StudyReport& report) {
  out << "process,estimator,b,scheme,threshold_quantile,K,matched_quantile,matched_block,target_kind,target,"
         "n_ok,failures,mean,median,sd,rmse,mrb,mean_relative_bias,mean_naive_se,mean_adjusted_se,"
         "mean_bootstrap_se,m,reps,seed,config_digest\n";
  for (const auto& s : report.cells) {
    out << '"' << s.process_label << "\"," << to_string(s.cell.method) << ',' << opt_int(s.cell.b) << ','
        << scheme_name(s.cell) << ',' << num(s.cell.threshold_quantile) << ',' << opt_int(s.cell.K) << ',' << num(s.matched_quantile) << ','
        << num(s.matched_block) << ',' << to_string(s.target_kind) << ',' << num(s.target) << ',' << s.n_ok << ','
        << s.failures << ',' << num(s.mean) << ',' << num(s.median) << ',' << num(s.sd) << ',' << num(s.rmse)
        << ',' << num(s.mrb) << ',' << num(s.mean_relative_bias) << ',' << num(s.mean_naive_se) << ','
        << num(s.mean_adjusted_se) << ',' << num(s.mean_bootstrap_se) << ',' << report.config.m << ','
        << report.config.reps << ',' << report.config.seed << ',' << report.digest << '\n';
  }
}

void write_replications_csv(std::ostream& out, const StudyReport& report) {
  out << "replication,process,estimator,b,scheme,threshold_quantile,K,ok,theta,naive_se,adjusted_se,bootstrap_se,"
         "error,series_digest\n";
  for (std::size_t r = 0; r < report.replications.size(); ++r) {
    const auto& row = report.replications[r];
    for (std::size_t ci = 0; ci < row.size(); ++ci) {
      const CellSummary& s = report.cells[ci];
      const CellOutcome& o = row[ci];
      out << r << ",\"" << s.process_label << "\"," << to_string(s.cell.method) << ',' << opt_int(s.cell.b) << ','
          << scheme_name(s.cell) << ',' << num(s.cell.threshold_quantile) << ',' << opt_int(s.cell.K) << ',' << (o.ok ? 1 : 0) << ','
          << (o.ok ? num(o.theta) : "NA") << ',' << num(o.naive_se) << ',' << num(o.adjusted_se) << ','
          << num(o.bootstrap_se) << ',' << o.error << ',' << hex(o.series_digest) << '\n';
    }
  }
}

std::vector<ScanRow> block_size_scan(const Series& series, const std::vector<std::size_t>& block_sizes,
                                     double level) {
  if (block_sizes.empty()) usage("block size list is empty");
  for (auto b : block_sizes) {
    if (b < 1 || 2 * b > series.size()) usage("block size " + std::to_string(b) + " outside [1, m/2]");
  }
  std::vector<ScanRow> rows;
  for (auto b : block_sizes) {
    ScanRow row;
    row.b = b;
    const auto attempt = [&](const char* what, auto&& body) {
      try {
        body();
      } catch (const Error& e) {
        row.errors.push_back(std::string(what) + ":" + std::string(to_string(e.code())));
      }
    };
    for (BlockKind kind : {BlockKind::disjoint, BlockKind::sliding}) {
      const bool dj = kind == BlockKind::disjoint;
      attempt(dj ? "theta_disjoint" : "theta_sliding", [&] {
        const VHatSample vhat = compute_vhat(series, {kind, b});
        const double theta = sp_estimate(vhat).theta;
        (dj ? row.disjoint : row.sliding) = adjusted_loglik_ci(vhat, theta, level);
      });
      attempt(dj ? "gev_disjoint" : "gev_sliding", [&] {
        GevFit fit = gev_fit(block_maxima(series, {kind, b}));
        const auto& bundle = dj ? row.disjoint : row.sliding;
        if (bundle) (dj ? row.implied_disjoint : row.implied_sliding) = implied_marginal_params(fit, bundle->point, b);
        (dj ? row.gev_disjoint : row.gev_sliding) = std::move(fit);
      });
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_scan_csv(std::ostream& out, const std::vector<ScanRow>& rows) {
  out << "b,theta_d,lower_d,upper_d,adjusted_se_d,naive_se_d,theta_s,lower_s,upper_s,adjusted_se_s,naive_se_s,"
         "mu_d,sigma_d,xi_d,se_mu_d,se_sigma_d,se_xi_d,mu1_d,sigma1_d,xi1_d,mu_s,sigma_s,xi_s,mu1_s,sigma1_s,xi1_s,"
         "errors\n";
  const auto bundle = [&](const std::optional<VarianceBundle>& v) {
    if (!v) return std::string("NA,NA,NA,NA,NA");
    return num(v->point) + ',' + num(v->lower) + ',' + num(v->upper) + ',' + num(v->adjusted_se) + ',' +
           num(v->naive_se);
  };
  const auto params = [&](const std::optional<GevParams>& p) {
    if (!p) return std::string("NA,NA,NA");
    return num(p->mu) + ',' + num(p->sigma) + ',' + num(p->xi);
  };
  for (const auto& r : rows) {
    out << r.b << ',' << bundle(r.disjoint) << ',' << bundle(r.sliding) << ',';
    out << params(r.gev_disjoint ? std::optional<GevParams>(r.gev_disjoint->params) : std::nullopt) << ',';
    if (r.gev_disjoint) {
      const Eigen::Vector3d se = r.gev_disjoint->standard_errors();
      out << num(se(0)) << ',' << num(se(1)) << ',' << num(se(2)) << ',';
    } else {
      out << "NA,NA,NA,";
    }
    out << params(r.implied_disjoint) << ','
        << params(r.gev_sliding ? std::optional<GevParams>(r.gev_sliding->params) : std::nullopt) << ','
        << params(r.implied_sliding) << ',';
    for (std::size_t i = 0; i < r.errors.size(); ++i) out << (i ? ";" : "") << r.errors[i];
    out << '\n';
  }
}

QuantileTable marginal_quantiles(const Series& series, std::size_t b, const std::vector<double>& ps, double level,
                                 bool profile) {
  if (ps.empty()) usage("tail probability list is empty");
  for (double p : ps) {
    if (!(p > 0.0 && p < 1.0)) usage("tail probabilities must lie in (0, 1)");
  }
  const VHatSample vhat = compute_vhat(series, {BlockKind::sliding, b});
  const BlockMaximaSample maxima = block_maxima(series, {BlockKind::disjoint, b});
  QuantileTable table;
  table.b = b;
  table.theta_hat = sp_estimate(vhat).theta;
  table.fit = gev_fit(maxima);
  for (double p : ps) {
    QuantileRow row;
    row.p = p;
    row.with_theta = marginal_quantile(table.fit, table.theta_hat, b, p);
    row.theta_one = marginal_quantile(table.fit, 1.0, b, p);
    if (profile) {
      try {
        row.interval = quantile_profile_ci(vhat, maxima, p, level);
      } catch (const Error& e) {
        row.error = std::string(to_string(e.code()));
      }
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_quantiles_csv(std::ostream& out, const QuantileTable& table) {
  out << "p,b,theta_hat,quantile,quantile_theta1,profile_estimate,lower,upper,level,error\n";
  for (const auto& r : table.rows) {
    out << num(r.p) << ',' << table.b << ',' << num(table.theta_hat) << ',' << num(r.with_theta) << ','
        << num(r.theta_one) << ',';
    if (r.interval) {
      out << num(r.interval->estimate) << ',' << num(r.interval->lower) << ',' << num(r.interval->upper) << ','
          << num(r.interval->level);
    } else {
      out << "NA,NA,NA,NA";
    }
    out << ',' << r.error << '\n';
  }
}

std::vector<EfficiencyResult> efficiency_curve(const std::vector<double>& thetas, const std::vector<double>& xis) {
  if (thetas.empty() || xis.empty()) usage("efficiency grid is empty");
  for (double t : thetas) {
    if (!(t > 0.0 && t <= 1.0)) throw Error(ErrorCode::domain_error, "theta grid values must lie in (0, 1]");
  }
  for (double xi : xis) {
    if (!(xi > -0.5)) throw Error(ErrorCode::domain_error, "xi must exceed -1/2");
  }
  std::vector<EfficiencyResult> out;
  for (double xi : xis)
    for (double t : thetas) out.push_back(asymptotic_relative_efficiency(t, xi));
  return out;
}

void write_efficiency_csv(std::ostream& out, const std::vector<EfficiencyResult>& rows) {
  out << "theta,xi,rel_eff,precision_sp,precision_at\n";
  for (const auto& r : rows) {
    out << num(r.theta) << ',' << num(r.xi) << ',' << num(r.rel_eff) << ',' << num(r.precision_sp) << ','
        << num(r.precision_at) << '\n';
  }
}

}  // namespace extremal
