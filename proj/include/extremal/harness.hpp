#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "extremal/estimators.hpp"
#include "extremal/gev.hpp"
#include "extremal/processes.hpp"
#include "extremal/uncertainty.hpp"

namespace extremal {

inline constexpr std::string_view kVersion = "0.1.0";

enum class Target { theta_limit, theta_b };

std::string_view to_string(Target target);
Target parse_target(std::string_view name);

struct StudyConfig {
  std::vector<ProcessSpec> processes;
  std::size_t m = 4900;
  std::size_t reps = 100;
  std::vector<Method> estimators;
  std::vector<std::size_t> block_sizes;
  std::vector<double> threshold_quantiles;
  std::vector<int> K_values{1};
  std::vector<BlockKind> blocks_schemes{BlockKind::sliding};
  bool blocks_median_threshold = true;  // threshold = median of the block maxima, else each quantile
  Target target = Target::theta_limit;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  std::optional<Margin> margin;                // applied to every simulated series
  Margin parametric_margin = Margin::gumbel;  // extra transform before gomes / at_joint
  bool sandwich = true;
  std::size_t bootstrap_reps = 0;
  std::optional<double> bootstrap_block_length;
  bool keep_replications = false;
};

// JSON object with the field names above; processes use the textual form
// accepted by parse_process, estimators the method names.
StudyConfig parse_study_config(std::string_view json_text);
std::string to_json(const StudyConfig& config);
void validate(const StudyConfig& config);

// FNV-1a digest of the canonical JSON form of the config.
std::string config_digest(const StudyConfig& config);

// FNV-1a digest of the bytes of a series.
std::uint64_t series_digest(const Series& series);

struct StudyCell {
  std::size_t process = 0;
  Method method = Method::sp_disjoint;
  std::optional<std::size_t> b;
  std::optional<BlockKind> scheme;  // blocks estimator only
  std::optional<double> threshold_quantile;
  std::optional<int> K;
};

// Cells in report order: process, then estimator, then tuning.
std::vector<StudyCell> expand_cells(const StudyConfig& config);

struct CellOutcome {
  double theta = 0.0;
  bool ok = false;
  std::string error;  // error code when !ok
  double naive_se = 0.0;
  std::optional<double> adjusted_se;
  std::optional<double> bootstrap_se;
  std::uint64_t series_digest = 0;
};

struct CellSummary {
  StudyCell cell;
  std::string process_label;
  double target = 0.0;
  Target target_kind = Target::theta_limit;
  std::optional<double> matched_quantile;  // 1 - 2/b
  std::optional<double> matched_block;     // 2/(1 - q)
  std::size_t n_ok = 0;
  std::size_t failures = 0;
  double mean = 0.0;
  double median = 0.0;
  double sd = 0.0;
  double rmse = 0.0;
  double mrb = 0.0;                 // median relative bias
  double mean_relative_bias = 0.0;
  double mean_naive_se = 0.0;
  std::optional<double> mean_adjusted_se;
  std::optional<double> mean_bootstrap_se;
};

struct StudyReport {
  StudyConfig config;
  std::string digest;
  std::vector<CellSummary> cells;
  // replications[r][c] for cell c of replication r; empty unless requested.
  std::vector<std::vector<CellOutcome>> replications;
};

StudyReport run_study(const StudyConfig& config);

void write_study_csv(std::ostream& out, const StudyReport& report);
void write_replications_csv(std::ostream& out, const StudyReport& report);

struct ScanRow {
  std::size_t b = 0;
  std::optional<VarianceBundle> disjoint;  // adjusted-likelihood interval
  std::optional<VarianceBundle> sliding;
  std::optional<GevFit> gev_disjoint;
  std::optional<GevParams> implied_disjoint;
  std::optional<GevFit> gev_sliding;
  std::optional<GevParams> implied_sliding;
  std::vector<std::string> errors;
};

std::vector<ScanRow> block_size_scan(const Series& series, const std::vector<std::size_t>& block_sizes,
                                     double level = 0.95);

void write_scan_csv(std::ostream& out, const std::vector<ScanRow>& rows);

struct QuantileRow {
  double p = 0.0;
  double with_theta = 0.0;  // marginal quantile using theta_hat
  double theta_one = 0.0;   // assuming theta = 1
  std::optional<QuantileInterval> interval;
  std::string error;
};

struct QuantileTable {
  std::size_t b = 0;
  double theta_hat = 1.0;  // sliding-block estimate
  GevFit fit;              // disjoint maxima
  std::vector<QuantileRow> rows;
};

QuantileTable marginal_quantiles(const Series& series, std::size_t b, const std::vector<double>& ps,
                                 double level = 0.95, bool profile = true);

void write_quantiles_csv(std::ostream& out, const QuantileTable& table);

std::vector<EfficiencyResult> efficiency_curve(const std::vector<double>& thetas, const std::vector<double>& xis);

void write_efficiency_csv(std::ostream& out, const std::vector<EfficiencyResult>& rows);

}  // namespace extremal
