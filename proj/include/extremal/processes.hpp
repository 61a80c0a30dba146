#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "extremal/series.hpp"

namespace extremal {

// X_i = max{(1 - theta) X_{i-1}, theta Z_i}, Z_i unit Frechet.
struct MaxAr {
  double theta = 0.5;
};

// X_i = max_j alpha_j Z_{i+j}, Z unit Frechet, sum(alpha) = 1.
struct MovingMaxima {
  std::vector<double> alpha;
};

// X_i = phi X_{i-1} + Z_i, Z standard Cauchy.
struct CauchyAr1 {
  double phi = 0.7;
};

// X_i = phi1 X_{i-1} + phi2 X_{i-2} + Z_i, P(Z > z) = z^-2 for z >= 1.
struct ParetoAr2 {
  double phi1 = 0.95;
  double phi2 = -0.89;
};

// Markov chain with Gumbel margins and symmetric logistic dependence
// exp(-(x^-r + y^-r)^(1/r)) (unit Frechet scale) between consecutive values.
struct LogisticMarkov {
  double r = 2.0;
};

// X_i = alpha X_{i-1} + e_i, e_i ~ N(0, 1 - alpha^2).
struct GaussianAr1 {
  double alpha = 0.5;
};

using ProcessSpec = std::variant<MaxAr, MovingMaxima, CauchyAr1, ParetoAr2, LogisticMarkov, GaussianAr1>;

inline constexpr std::size_t kBurnIn = 1000;

void validate(const ProcessSpec& spec);

// "maxar:0.5", "moving_maxima:0.3,0.2,0.2,0.3", "cauchy_ar1:0.7",
// "pareto_ar2:0.95,-0.89", "logistic_markov:2", "gaussian_ar1:0.9".
ProcessSpec parse_process(std::string_view text);
std::string to_string(const ProcessSpec& spec);

Series simulate(const ProcessSpec& spec, std::size_t m, std::uint64_t seed);

enum class OracleSource { closed_form, literature_value, approximate };

std::string_view to_string(OracleSource source);

struct ThetaOracle {
  double theta_limit = 1.0;
  std::function<double(std::size_t)> theta_b;  // empty when no closed form is known
  OracleSource source = OracleSource::literature_value;
};

ThetaOracle theta_oracle(const ProcessSpec& spec);

// theta_b for moving maxima computed directly as -log G(u_b)/log 2 by summing,
// for each latent Z_k, the largest coefficient it receives within one block.
double moving_maxima_theta_b_direct(const std::vector<double>& alpha, std::size_t b);

// Marginal distributions with an analytic CDF.
enum class Margin { frechet, gumbel, gaussian, exponential, cauchy, empirical };

std::string_view to_string(Margin margin);
Margin parse_margin(std::string_view name);

struct SourceMargin {
  Margin kind = Margin::empirical;
  double scale = 1.0;  // Cauchy and Gaussian scale
};

// Known stationary margin of a simulated process, if analytic.
std::optional<SourceMargin> known_margin(const ProcessSpec& spec);

// -log F(x) for the source margin; kept on this scale to preserve tail precision.
double neg_log_cdf(const SourceMargin& margin, double x);

// Probability integral transform to `target` margins; strictly increasing.
// An empirical source uses ranks / (m + 1).
Series transform_margins(const Series& series, const SourceMargin& source, Margin target);

}  // namespace extremal
