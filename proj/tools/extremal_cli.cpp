#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "extremal/block_engine.hpp"
#include "extremal/csv_io.hpp"
#include "extremal/error.hpp"
#include "extremal/estimators.hpp"
#include "extremal/harness.hpp"
#include "extremal/processes.hpp"
#include "extremal/rng.hpp"
#include "extremal/uncertainty.hpp"
#include "json.hpp"

namespace {

using namespace extremal;
using json = nlohmann::json;

constexpr int kExitData = 2;
constexpr int kExitUsage = 64;
constexpr int kExitNumeric = 70;

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::usage_error:
    case ErrorCode::domain_error:
      return kExitUsage;
    case ErrorCode::parse_error:
    case ErrorCode::invalid_series:
    case ErrorCode::invalid_block_size:
    case ErrorCode::insufficient_out_of_block_data:
    case ErrorCode::empty_sample:
    case ErrorCode::insufficient_blocks:
    case ErrorCode::degenerate_threshold:
    case ErrorCode::insufficient_exceedances:
    case ErrorCode::insufficient_maxima:
    case ErrorCode::degenerate_series:
      return kExitData;
    default:
      return kExitNumeric;
  }
}

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// Writes to the named file, or stdout for "" and "-".
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::usage_error, "cannot write '" + path + "'");
  out << text;
}

struct Common {
  std::optional<std::uint64_t> seed;
  std::string output;

  std::uint64_t resolve_seed() const {
    const std::uint64_t s = seed ? *seed : (std::uint64_t{std::random_device{}()} << 32) ^ std::random_device{}();
    std::cerr << "seed: " << s << '\n';
    return s;
  }
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Master random seed (drawn and printed when omitted)");
  cmd->add_option("-o,--output", c.output, "Output file (default stdout)");
}

struct EstimateArgs {
  std::string input;
  std::string method = "sp_sliding";
  std::optional<std::size_t> b;
  std::optional<double> threshold;
  std::optional<double> quantile;
  int K = 1;
  std::string ci = "auto";
  std::size_t bootstrap_reps = 1000;
  std::optional<double> block_length;
  double level = 0.95;
  std::size_t workers = 1;
  std::string margin = "gumbel";
  std::string scheme = "sliding";
};

int run_estimate(const EstimateArgs& a, const Common& common) {
  const std::uint64_t seed = common.resolve_seed();
  const Method method = parse_method(a.method);
  const bool sp = method == Method::sp_disjoint || method == Method::sp_sliding;
  const bool block_method = sp || method == Method::ratio_blocks || method == Method::blocks ||
                            method == Method::gomes || method == Method::at_joint;
  const bool threshold_method = method == Method::blocks || method == Method::intervals || method == Method::kgaps;
  std::string ci = a.ci;
  if (ci == "auto") ci = sp ? "adjusted" : "none";
  if (ci != "none" && ci != "likelihood" && ci != "adjusted" && ci != "bootstrap" && ci != "bootstrap_percentile") {
    throw Error(ErrorCode::usage_error, "unknown --ci '" + ci + "'");
  }
  if (block_method && !a.b) throw Error(ErrorCode::usage_error, "--b is required for " + a.method);
  if (!block_method && a.b) throw Error(ErrorCode::usage_error, "--b does not apply to " + a.method);
  if (threshold_method && method != Method::blocks && !a.threshold && !a.quantile) {
    throw Error(ErrorCode::usage_error, "--threshold or --quantile is required for " + a.method);
  }
  if (!threshold_method && (a.threshold || a.quantile)) {
    throw Error(ErrorCode::usage_error, "thresholds do not apply to " + a.method);
  }
  if ((ci == "likelihood" || ci == "adjusted") && !sp) {
    throw Error(ErrorCode::usage_error, "likelihood intervals need an sp method");
  }
  if (!(a.level > 0.0 && a.level < 1.0)) throw Error(ErrorCode::usage_error, "--level must lie in (0, 1)");
  const Margin margin = parse_margin(a.margin);
  if (method != Method::blocks && a.scheme != "sliding") {
    throw Error(ErrorCode::usage_error, "--scheme applies to the blocks method; use sp_disjoint or sp_sliding");
  }

  const Series series = read_series_file(a.input);
  const BlockKind blocks_kind = parse_block_kind(a.scheme);
  const std::optional<Threshold> u = a.threshold     ? std::optional(Threshold::absolute(*a.threshold))
                                     : a.quantile   ? std::optional(Threshold::quantile(*a.quantile))
                                     : method == Method::blocks ? std::optional(Threshold::maxima_median())
                                                                : std::nullopt;
  const std::size_t b = a.b.value_or(1);
  const std::uint64_t randomize_seed = substream_seed(seed, 1);
  const auto parametric = [&](const Series& x) {
    return transform_margins(x, SourceMargin{Margin::empirical}, margin);
  };

  const ThetaPipeline pipeline = [&](const Series& x) -> double {
    switch (method) {
      case Method::sp_disjoint: return sp_estimate(compute_vhat(x, {BlockKind::disjoint, b})).theta;
      case Method::sp_sliding: return sp_estimate(compute_vhat(x, {BlockKind::sliding, b})).theta;
      case Method::ratio_blocks: return ratio_blocks_estimate(x, b).theta;
      case Method::blocks: return blocks_estimate(x, {blocks_kind, b}, *u).theta;
      case Method::intervals: return intervals_estimate(extract_gaps(x, *u)).theta;
      case Method::kgaps: return kgaps_estimate(extract_gaps(x, *u), a.K).theta;
      case Method::gomes: return gomes_estimate(parametric(x), b, randomize_seed).theta;
      case Method::at_joint: return at_estimate(parametric(x), b, randomize_seed).estimate.theta;
    }
    return 0.0;
  };

  json out;
  out["version"] = std::string(kVersion);
  out["seed"] = seed;
  out["input"] = {{"path", a.input}, {"m", series.size()}};
  out["method"] = std::string(to_string(method));
  json tuning = json::object();
  if (block_method) tuning["b"] = b;
  if (sp) tuning["scheme"] = method == Method::sp_disjoint ? "disjoint" : "sliding";
  if (u && u->kind() == Threshold::Kind::maxima_median) {
    tuning["threshold_rule"] = "median_of_block_maxima";
  } else if (u) {
    tuning[u->is_quantile() ? "threshold_quantile" : "threshold"] = u->value();
    tuning["threshold_resolved"] = u->resolve(series);
  }
  if (method == Method::kgaps) tuning["K"] = a.K;
  if (method == Method::gomes || method == Method::at_joint) tuning["margin"] = std::string(to_string(margin));
  out["tuning"] = tuning;

  ThetaEstimate est;
  if (sp) {
    const VHatSample vhat = compute_vhat(series, {method == Method::sp_disjoint ? BlockKind::disjoint
                                                                                 : BlockKind::sliding, b});
    est = sp_estimate(vhat);
    out["n_used"] = vhat.n();
    out["floor_hits"] = vhat.floor_hits.size();
    if (vhat.n() >= 3) out["naive_se"] = naive_se(est.theta, vhat.n());
    const SandwichResult sw = sandwich_variance(vhat, est.theta);
    out["adjusted_se"] = sw.adjusted_se;
    out["adjusted_se_fallback"] = sw.fallback_to_naive;
    if (ci == "likelihood" || ci == "adjusted") {
      const VarianceBundle v = ci == "likelihood" ? likelihood_ci(vhat, est.theta, a.level)
                                                  : adjusted_loglik_ci(vhat, est.theta, a.level);
      out["ci"] = {{"method", std::string(to_string(v.ci_method))}, {"lower", v.lower}, {"upper", v.upper},
                   {"level", v.level}};
    }
  } else if (method == Method::ratio_blocks) {
    est = ratio_blocks_estimate(series, b);
  } else if (method == Method::blocks) {
    est = blocks_estimate(series, {blocks_kind, b}, *u);
    out["tuning"]["scheme"] = std::string(to_string(blocks_kind));
    out["tuning"]["threshold_resolved"] = *est.tuning.threshold;
  } else if (method == Method::intervals) {
    est = intervals_estimate(extract_gaps(series, *u));
  } else if (method == Method::kgaps) {
    est = kgaps_estimate(extract_gaps(series, *u), a.K);
  } else if (method == Method::gomes) {
    est = gomes_estimate(parametric(series), b, randomize_seed);
  } else {
    const std::optional<AtResult> at = at_estimate(parametric(series), b, randomize_seed);
    est = at->estimate;
    out["theta_se"] = std::isfinite(at->theta_se) ? json(at->theta_se) : json(nullptr);
    const GevParams& g = at->fit.params;
    out["gev"] = {{"mu", g.mu}, {"sigma", g.sigma}, {"xi", g.xi}};
  }
  out["theta"] = est.theta;
  out["raw_theta"] = est.raw_theta;
  out["capped"] = est.capped;
  out["out_of_range"] = est.out_of_range;
  if (!sp) out["n_used"] = est.n_used;

  if (ci == "bootstrap" || ci == "bootstrap_percentile") {
    BootstrapOptions opts;
    opts.reps = a.bootstrap_reps;
    opts.mean_block_length = a.block_length;
    opts.seed = substream_seed(seed, 2);
    opts.level = a.level;
    opts.percentile = ci == "bootstrap_percentile";
    opts.workers = a.workers;
    const VarianceBundle v = stationary_bootstrap(series, pipeline, opts);
    out["bootstrap"] = {{"se", opt(v.bootstrap_se)},
                        {"bias_adjusted_theta", opt(v.bootstrap_bias_adjusted_theta)},
                        {"reps", v.bootstrap_reps},
                        {"failures", v.bootstrap_failures},
                        {"mean_block_length", opt(v.mean_block_length)}};
    out["ci"] = {{"method", std::string(to_string(v.ci_method))}, {"lower", v.lower}, {"upper", v.upper},
                 {"level", v.level}};
  }
  emit(common.output, out.dump(2) + "\n");
  return 0;
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::usage_error, "bad list entry '" + item + "'");
    }
  }
  return out;
}

std::vector<std::size_t> parse_sizes(const std::string& text) {
  std::vector<std::size_t> out;
  for (double v : parse_list(text)) {
    if (!(v >= 1.0) || v != std::floor(v)) throw Error(ErrorCode::usage_error, "block sizes must be positive integers");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

int dispatch(int argc, char** argv) {
  CLI::App app{"Extremal index estimation from block maxima"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  Common sim_common, est_common, study_common, scan_common, eff_common, q_common;

  auto* sim = app.add_subcommand("simulate", "Simulate a process and write it as CSV");
  std::string process;
  std::size_t length = 0;
  std::string sim_margin;
  sim->add_option("--process", process, "e.g. maxar:0.5, moving_maxima:0.3,0.2,0.2,0.3")->required();
  sim->add_option("-m,--length", length, "Series length")->required()->check(CLI::PositiveNumber);
  sim->add_option("--margin", sim_margin, "Transform to frechet, gumbel, gaussian or exponential margins");
  add_common(sim, sim_common);

  auto* est = app.add_subcommand("estimate", "Estimate theta from a CSV series (JSON output)");
  EstimateArgs ea;
  est->add_option("-i,--input", ea.input, "CSV with one observation per line")->required();
  est->add_option("--method", ea.method,
                  "sp_disjoint, sp_sliding, ratio_blocks, blocks, intervals, kgaps, gomes, at_joint");
  est->add_option("-b,--block-size", ea.b, "Block size");
  auto* thr = est->add_option("--threshold", ea.threshold, "Absolute threshold");
  auto* qth = est->add_option("--quantile", ea.quantile, "Threshold as an empirical quantile level");
  thr->excludes(qth);
  qth->excludes(thr);
  est->add_option("-K", ea.K, "K-gaps run parameter");
  est->add_option("--scheme", ea.scheme, "Block scheme of the blocks method (disjoint or sliding)");
  est->add_option("--ci", ea.ci, "none, likelihood, adjusted, bootstrap, bootstrap_percentile");
  est->add_option("--bootstrap-reps", ea.bootstrap_reps, "Bootstrap resamples")->check(CLI::PositiveNumber);
  est->add_option("--block-length", ea.block_length, "Mean stationary-bootstrap block length");
  est->add_option("--level", ea.level, "Confidence level");
  est->add_option("--workers", ea.workers, "Bootstrap threads")->check(CLI::PositiveNumber);
  est->add_option("--margin", ea.margin, "Margin for the gomes and at_joint methods");
  add_common(est, est_common);

  auto* study = app.add_subcommand("study", "Run a simulation study from a JSON config (CSV output)");
  std::string config_path, replications_path;
  std::optional<std::size_t> study_workers;
  study->add_option("-c,--config", config_path, "Study config (JSON)")->required();
  study->add_option("--replications", replications_path, "Also write per-replication records here");
  study->add_option("--workers", study_workers, "Worker threads")->check(CLI::PositiveNumber);
  add_common(study, study_common);

  auto* scan = app.add_subcommand("scan", "Block-size scan of theta and GEV parameters (CSV output)");
  std::string scan_input, scan_sizes;
  double scan_level = 0.95;
  scan->add_option("-i,--input", scan_input, "CSV series")->required();
  scan->add_option("--block-sizes", scan_sizes, "Comma-separated block sizes")->required();
  scan->add_option("--level", scan_level, "Confidence level");
  add_common(scan, scan_common);

  auto* eff = app.add_subcommand("efficiency", "Asymptotic relative efficiency curves (CSV output)");
  std::string eff_theta = "0.05,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1";
  std::string eff_xi = "-0.4,0,0.4";
  eff->add_option("--theta", eff_theta, "Comma-separated theta grid in (0, 1]");
  eff->add_option("--xi", eff_xi, "Comma-separated shape values > -0.5");
  add_common(eff, eff_common);

  auto* q = app.add_subcommand("quantiles", "Marginal quantiles with profile intervals (CSV output)");
  std::string q_input, q_ps = "0.01,0.001,0.0001";
  std::size_t q_b = 0;
  double q_level = 0.95;
  bool q_no_profile = false;
  q->add_option("-i,--input", q_input, "CSV series")->required();
  q->add_option("-b,--block-size", q_b, "Block size")->required()->check(CLI::PositiveNumber);
  q->add_option("--p", q_ps, "Comma-separated tail probabilities");
  q->add_option("--level", q_level, "Confidence level");
  q->add_flag("--no-profile", q_no_profile, "Skip profile-likelihood intervals");
  add_common(q, q_common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  if (sim->parsed()) {
    const std::uint64_t seed = sim_common.resolve_seed();
    const ProcessSpec spec = parse_process(process);
    Series x = simulate(spec, length, seed);
    if (!sim_margin.empty()) {
      const auto source = known_margin(spec).value_or(SourceMargin{Margin::empirical});
      x = transform_margins(x, source, parse_margin(sim_margin));
    }
    std::ostringstream out;
    write_series(out, x);
    emit(sim_common.output, out.str());
  } else if (est->parsed()) {
    return run_estimate(ea, est_common);
  } else if (study->parsed()) {
    std::ifstream in(config_path);
    if (!in) throw Error(ErrorCode::usage_error, "cannot read '" + config_path + "'");
    std::stringstream text;
    text << in.rdbuf();
    StudyConfig config = parse_study_config(text.str());
    if (study_common.seed) config.seed = *study_common.seed;
    if (study_workers) config.workers = *study_workers;
    if (!replications_path.empty()) config.keep_replications = true;
    std::cerr << "seed: " << config.seed << '\n';
    const StudyReport report = run_study(config);
    std::ostringstream out;
    write_study_csv(out, report);
    emit(study_common.output, out.str());
    if (!replications_path.empty()) {
      std::ostringstream reps;
      write_replications_csv(reps, report);
      emit(replications_path, reps.str());
    }
  } else if (scan->parsed()) {
    scan_common.resolve_seed();
    const auto sizes = parse_sizes(scan_sizes);
    const Series x = read_series_file(scan_input);
    std::ostringstream out;
    write_scan_csv(out, block_size_scan(x, sizes, scan_level));
    emit(scan_common.output, out.str());
  } else if (eff->parsed()) {
    eff_common.resolve_seed();
    std::ostringstream out;
    write_efficiency_csv(out, efficiency_curve(parse_list(eff_theta), parse_list(eff_xi)));
    emit(eff_common.output, out.str());
  } else if (q->parsed()) {
    q_common.resolve_seed();
    const auto ps = parse_list(q_ps);
    const Series x = read_series_file(q_input);
    std::ostringstream out;
    write_quantiles_csv(out, marginal_quantiles(x, q_b, ps, q_level, !q_no_profile));
    emit(q_common.output, out.str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const extremal::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitNumeric;
  }
}
