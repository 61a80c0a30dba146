#include "extremal/processes.hpp"

#include <algorithm>
#include <charconv>
#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "extremal/error.hpp"
#include "extremal/rng.hpp"

namespace extremal {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

[[noreturn]] void domain(const std::string& what) { throw Error(ErrorCode::domain_error, what); }

std::vector<double> parse_numbers(std::string_view text) {
  std::vector<double> out;
  std::string item;
  std::istringstream in{std::string(text)};
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::usage_error, "bad process parameter '" + item + "'");
    }
  }
  return out;
}

}  // namespace

void validate(const ProcessSpec& spec) {
  std::visit(Overloaded{
                 [](const MaxAr& p) {
                   if (!(p.theta > 0.0 && p.theta <= 1.0)) domain("maxAR theta must lie in (0, 1]");
                 },
                 [](const MovingMaxima& p) {
                   if (p.alpha.size() < 2) domain("moving maxima needs at least two coefficients");
                   if (!(p.alpha.front() > 0.0) || !(p.alpha.back() > 0.0)) {
                     domain("moving maxima end coefficients must be positive");
                   }
                   for (double a : p.alpha) {
                     if (!(a >= 0.0)) domain("moving maxima coefficients must be non-negative");
                   }
                   const double total = std::accumulate(p.alpha.begin(), p.alpha.end(), 0.0);
                   if (std::abs(total - 1.0) > 1e-12) domain("moving maxima coefficients must sum to 1");
                 },
                 [](const CauchyAr1& p) {
                   if (!(std::abs(p.phi) < 1.0)) domain("Cauchy AR(1) needs |phi| < 1");
                 },
                 [](const ParetoAr2& p) {
                   // Causal stationarity triangle for AR(2).
                   if (!(p.phi1 + p.phi2 < 1.0 && p.phi2 - p.phi1 < 1.0 && std::abs(p.phi2) < 1.0)) {
                     domain("Pareto AR(2) coefficients are not stationary");
                   }
                 },
                 [](const LogisticMarkov& p) {
                   if (!(p.r >= 1.0)) domain("logistic dependence parameter must be >= 1");
                 },
                 [](const GaussianAr1& p) {
                   if (!(std::abs(p.alpha) < 1.0)) domain("Gaussian AR(1) needs |alpha| < 1");
                 },
             },
             spec);
}

ProcessSpec parse_process(std::string_view text) {
  const auto colon = text.find(':');
  const std::string_view name = text.substr(0, colon);
  const std::vector<double> v =
      colon == std::string_view::npos ? std::vector<double>{} : parse_numbers(text.substr(colon + 1));
  const auto need = [&](std::size_t k) {
    if (v.size() != k) {
      throw Error(ErrorCode::usage_error,
                  "process '" + std::string(name) + "' takes " + std::to_string(k) + " parameter(s)");
    }
  };
  ProcessSpec spec;
  if (name == "maxar") {
    need(1);
    spec = MaxAr{v[0]};
  } else if (name == "moving_maxima") {
    spec = MovingMaxima{v};
  } else if (name == "cauchy_ar1") {
    need(1);
    spec = CauchyAr1{v[0]};
  } else if (name == "pareto_ar2") {
    need(2);
    spec = ParetoAr2{v[0], v[1]};
  } else if (name == "logistic_markov") {
    need(1);
    spec = LogisticMarkov{v[0]};
  } else if (name == "gaussian_ar1") {
    need(1);
    spec = GaussianAr1{v[0]};
  } else {
    throw Error(ErrorCode::usage_error, "unknown process '" + std::string(name) + "'");
  }
  validate(spec);
  return spec;
}

namespace {

std::string shortest(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

std::string to_string(const ProcessSpec& spec) {
  std::ostringstream out;
  std::visit(Overloaded{
                 [&](const MaxAr& p) { out << "maxar:" << shortest(p.theta); },
                 [&](const MovingMaxima& p) {
                   out << "moving_maxima:";
                   for (std::size_t i = 0; i < p.alpha.size(); ++i) out << (i ? "," : "") << shortest(p.alpha[i]);
                 },
                 [&](const CauchyAr1& p) { out << "cauchy_ar1:" << shortest(p.phi); },
                 [&](const ParetoAr2& p) { out << "pareto_ar2:" << shortest(p.phi1) << "," << shortest(p.phi2); },
                 [&](const LogisticMarkov& p) { out << "logistic_markov:" << shortest(p.r); },
                 [&](const GaussianAr1& p) { out << "gaussian_ar1:" << shortest(p.alpha); },
             },
             spec);
  return out.str();
}

namespace {

// log of the conditional CDF P(Y <= y | X = x) for the symmetric logistic
// bivariate extreme value distribution on unit Frechet margins.
double logistic_log_conditional(double log_x, double log_y, double r) {
  const double a = -r * log_x, c = -r * log_y;
  const double hi = std::max(a, c);
  const double log_s = hi + std::log1p(std::exp(std::min(a, c) - hi));
  return -std::exp(log_s / r) + std::exp(-log_x) + (1.0 / r - 1.0) * log_s + (1.0 - r) * log_x;
}

double logistic_next(double log_x, double r, Rng& rng) {
  const double target = std::log(rng.uniform());
  double lo = -60.0, hi = 60.0;
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    if (logistic_log_conditional(log_x, mid, r) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

Series simulate(const ProcessSpec& spec, std::size_t m, std::uint64_t seed) {
  validate(spec);
  if (m < 1) domain("series length must be positive");
  Rng rng(seed);
  std::vector<double> x(m);
  std::visit(Overloaded{
                 [&](const MaxAr& p) {
                   double prev = rng.unit_frechet();
                   for (auto& v : x) {
                     prev = std::max((1.0 - p.theta) * prev, p.theta * rng.unit_frechet());
                     v = prev;
                   }
                 },
                 [&](const MovingMaxima& p) {
                   const std::size_t order = p.alpha.size() - 1;
                   std::vector<double> z(m + order);
                   for (auto& v : z) v = rng.unit_frechet();
                   for (std::size_t i = 0; i < m; ++i) {
                     double best = 0.0;
                     for (std::size_t j = 0; j <= order; ++j) best = std::max(best, p.alpha[j] * z[i + j]);
                     x[i] = best;
                   }
                 },
                 [&](const CauchyAr1& p) {
                   double prev = rng.cauchy();
                   for (std::size_t k = 0; k < kBurnIn; ++k) prev = p.phi * prev + rng.cauchy();
                   for (auto& v : x) v = prev = p.phi * prev + rng.cauchy();
                 },
                 [&](const ParetoAr2& p) {
                   const auto pareto = [&] { return 1.0 / std::sqrt(rng.uniform()); };
                   double x1 = 0.0, x2 = 0.0;
                   for (std::size_t k = 0; k < kBurnIn; ++k) {
                     const double next = p.phi1 * x1 + p.phi2 * x2 + pareto();
                     x2 = x1;
                     x1 = next;
                   }
                   for (auto& v : x) {
                     const double next = p.phi1 * x1 + p.phi2 * x2 + pareto();
                     x2 = x1;
                     x1 = v = next;
                   }
                 },
                 [&](const LogisticMarkov& p) {
                   double log_prev = std::log(rng.unit_frechet());
                   for (std::size_t k = 0; k < kBurnIn; ++k) log_prev = logistic_next(log_prev, p.r, rng);
                   for (auto& v : x) v = log_prev = logistic_next(log_prev, p.r, rng);
                 },
                 [&](const GaussianAr1& p) {
                   const double innovation_sd = std::sqrt(1.0 - p.alpha * p.alpha);
                   double prev = rng.normal();
                   for (std::size_t k = 0; k < kBurnIn; ++k) prev = p.alpha * prev + innovation_sd * rng.normal();
                   for (auto& v : x) v = prev = p.alpha * prev + innovation_sd * rng.normal();
                 },
             },
             spec);
  return Series(std::move(x));
}

std::string_view to_string(OracleSource source) {
  switch (source) {
    case OracleSource::closed_form: return "closed_form";
    case OracleSource::literature_value: return "literature_value";
    case OracleSource::approximate: return "approximate";
  }
  return "unknown";
}

double moving_maxima_theta_b_direct(const std::vector<double>& alpha, std::size_t b) {
  const std::size_t order = alpha.size() - 1;
  // X_i (i = 1..b) uses Z_{i+j}; Z_k receives the largest alpha_{k-i} over i in the block.
  double total = 0.0;
  for (std::size_t k = 1; k <= b + order; ++k) {
    double best = 0.0;
    for (std::size_t i = 1; i <= b; ++i) {
      if (k >= i && k - i <= order) best = std::max(best, alpha[k - i]);
    }
    total += best;
  }
  return total / static_cast<double>(b);
}

ThetaOracle theta_oracle(const ProcessSpec& spec) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  return std::visit(
      Overloaded{
          [](const MaxAr& p) {
            const double t = p.theta;
            return ThetaOracle{t, [t](std::size_t b) { return t + (1.0 - t) / static_cast<double>(b); },
                               OracleSource::closed_form};
          },
          [](const MovingMaxima& p) {
            const std::vector<double>& a = p.alpha;
            const std::size_t order = a.size() - 1;
            std::vector<double> plus(a.size()), minus(a.size());
            for (std::size_t i = 0; i <= order; ++i) plus[i] = std::max(i ? plus[i - 1] : 0.0, a[i]);
            for (std::size_t i = order + 1; i-- > 0;) minus[i] = std::max(i < order ? minus[i + 1] : 0.0, a[i]);
            double c = 0.0;
            for (std::size_t i = 0; i < order; ++i) c += plus[i];
            for (std::size_t i = 1; i <= order; ++i) c += minus[i];
            c -= static_cast<double>(order) * plus[order];
            const double limit = plus[order];
            return ThetaOracle{limit,
                               [limit, c, a, order](std::size_t b) {
                                 if (b < order) return moving_maxima_theta_b_direct(a, b);
                                 return limit + c / static_cast<double>(b);
                               },
                               OracleSource::closed_form};
          },
          [](const CauchyAr1& p) {
            const double t = p.phi >= 0.0 ? 1.0 - p.phi : 1.0 - p.phi * p.phi;
            return ThetaOracle{t, {}, OracleSource::literature_value};
          },
          [nan](const ParetoAr2& p) {
            if (p.phi1 == 0.95 && p.phi2 == -0.89) return ThetaOracle{0.25, {}, OracleSource::literature_value};
            return ThetaOracle{nan, {}, OracleSource::approximate};
          },
          [nan](const LogisticMarkov& p) {
            if (p.r == 2.0) return ThetaOracle{0.328, {}, OracleSource::approximate};
            if (p.r == 1.0) return ThetaOracle{1.0, {}, OracleSource::closed_form};
            return ThetaOracle{nan, {}, OracleSource::approximate};
          },
          [](const GaussianAr1&) { return ThetaOracle{1.0, {}, OracleSource::literature_value}; },
      },
      spec);
}

std::string_view to_string(Margin margin) {
  switch (margin) {
    case Margin::frechet: return "frechet";
    case Margin::gumbel: return "gumbel";
    case Margin::gaussian: return "gaussian";
    case Margin::exponential: return "exponential";
    case Margin::cauchy: return "cauchy";
    case Margin::empirical: return "empirical";
  }
  return "unknown";
}

Margin parse_margin(std::string_view name) {
  for (Margin m : {Margin::frechet, Margin::gumbel, Margin::gaussian, Margin::exponential, Margin::cauchy,
                   Margin::empirical}) {
    if (name == to_string(m)) return m;
  }
  throw Error(ErrorCode::usage_error, "unknown margin '" + std::string(name) + "'");
}

std::optional<SourceMargin> known_margin(const ProcessSpec& spec) {
  return std::visit(Overloaded{
                        [](const MaxAr&) -> std::optional<SourceMargin> { return SourceMargin{Margin::frechet}; },
                        [](const MovingMaxima&) -> std::optional<SourceMargin> {
                          return SourceMargin{Margin::frechet};
                        },
                        // A Cauchy AR(1) is Cauchy with scale sum |phi|^j.
                        [](const CauchyAr1& p) -> std::optional<SourceMargin> {
                          return SourceMargin{Margin::cauchy, 1.0 / (1.0 - std::abs(p.phi))};
                        },
                        [](const ParetoAr2&) -> std::optional<SourceMargin> { return std::nullopt; },
                        [](const LogisticMarkov&) -> std::optional<SourceMargin> {
                          return SourceMargin{Margin::gumbel};
                        },
                        [](const GaussianAr1&) -> std::optional<SourceMargin> {
                          return SourceMargin{Margin::gaussian};
                        },
                    },
                    spec);
}

double neg_log_cdf(const SourceMargin& margin, double x) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  switch (margin.kind) {
    case Margin::frechet:
      return x > 0.0 ? 1.0 / x : inf;
    case Margin::gumbel:
      return std::exp(-x);
    case Margin::exponential:
      return x > 0.0 ? -std::log(-std::expm1(-x)) : inf;
    case Margin::gaussian: {
      const double z = x / margin.scale / std::numbers::sqrt2;
      return z > 0.0 ? -std::log1p(-0.5 * std::erfc(z)) : -std::log(0.5 * std::erfc(-z));
    }
    case Margin::cauchy: {
      const double s = margin.scale;
      if (x > 0.0) return -std::log1p(-std::atan(s / x) / std::numbers::pi);
      if (x == 0.0) return std::numbers::ln2;
      return -std::log(std::atan(-s / x) / std::numbers::pi);
    }
    case Margin::empirical:
      break;
  }
  throw Error(ErrorCode::usage_error, "empirical margins need the whole series");
}

namespace {

double from_neg_log_cdf(Margin target, double e) {
  switch (target) {
    case Margin::frechet: return 1.0 / e;
    case Margin::gumbel: return -std::log(e);
    case Margin::exponential: return -std::log(-std::expm1(-e));
    case Margin::gaussian: {
      if (e > std::numbers::ln2) return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * std::exp(-e));
      return std::numbers::sqrt2 * boost::math::erfc_inv(-2.0 * std::expm1(-e));
    }
    case Margin::cauchy: return std::tan(std::numbers::pi * (std::exp(-e) - 0.5));
    case Margin::empirical: break;
  }
  throw Error(ErrorCode::usage_error, "cannot transform to empirical margins");
}

}  // namespace

Series transform_margins(const Series& series, const SourceMargin& source, Margin target) {
  const auto x = series.values();
  std::vector<double> e(x.size());
  if (source.kind == Margin::empirical) {
    std::vector<double> sorted(x.begin(), x.end());
    std::sort(sorted.begin(), sorted.end());
    const auto denom = static_cast<double>(x.size() + 1);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const auto rank = std::upper_bound(sorted.begin(), sorted.end(), x[i]) - sorted.begin();
      e[i] = -std::log(static_cast<double>(rank) / denom);
    }
  } else {
    for (std::size_t i = 0; i < x.size(); ++i) {
      e[i] = neg_log_cdf(source, x[i]);
      if (!(e[i] > 0.0 && std::isfinite(e[i]))) {
        throw Error(ErrorCode::domain_error, "value outside the source margin's support at index " + std::to_string(i));
      }
    }
  }
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = from_neg_log_cdf(target, e[i]);
  return Series(std::move(out));
}

}  // namespace extremal
