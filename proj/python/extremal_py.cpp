#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/functional.h>

#include <sstream>

#include "extremal/block_engine.hpp"
#include "extremal/error.hpp"
#include "extremal/estimators.hpp"
#include "extremal/gev.hpp"
#include "extremal/harness.hpp"
#include "extremal/processes.hpp"
#include "extremal/uncertainty.hpp"

namespace py = pybind11;
using namespace extremal;

namespace {

Series to_series(const std::vector<double>& x) { return Series(x); }

std::vector<double> to_list(const Series& s) { return {s.values().begin(), s.values().end()}; }

py::dict estimate_dict(const ThetaEstimate& e) {
  py::dict d;
  d["theta"] = e.theta;
  d["raw_theta"] = e.raw_theta;
  d["method"] = std::string(to_string(e.method));
  d["n_used"] = e.n_used;
  d["capped"] = e.capped;
  d["out_of_range"] = e.out_of_range;
  if (e.tuning.b) d["b"] = *e.tuning.b;
  if (e.tuning.threshold) d["threshold"] = *e.tuning.threshold;
  if (e.tuning.K) d["K"] = *e.tuning.K;
  return d;
}

py::dict bundle_dict(const VarianceBundle& v) {
  py::dict d;
  d["point"] = v.point;
  d["naive_se"] = v.naive_se;
  d["adjusted_se"] = v.adjusted_se;
  d["bootstrap_se"] = v.bootstrap_se;
  d["bootstrap_bias_adjusted_theta"] = v.bootstrap_bias_adjusted_theta;
  d["ci_method"] = std::string(to_string(v.ci_method));
  d["lower"] = v.lower;
  d["upper"] = v.upper;
  d["level"] = v.level;
  d["bootstrap_failures"] = v.bootstrap_failures;
  d["mean_block_length"] = v.mean_block_length;
  return d;
}

Threshold make_threshold(std::optional<double> threshold, std::optional<double> quantile) {
  if (threshold && quantile) throw Error(ErrorCode::usage_error, "give either threshold or quantile, not both");
  if (threshold) return Threshold::absolute(*threshold);
  if (quantile) return Threshold::quantile(*quantile);
  throw Error(ErrorCode::usage_error, "a threshold or quantile level is required");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Extremal index estimation from block maxima";
  m.attr("__version__") = std::string(kVersion);

  // Held for the lifetime of the interpreter.
  static py::handle error_type = py::exception<Error>(m, "ExtremalError").release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object inst = error_type(e.what());
      inst.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error_type.ptr(), inst.ptr());
    }
  });

  py::class_<GevParams>(m, "GevParams")
      .def(py::init<double, double, double>(), py::arg("mu") = 0.0, py::arg("sigma") = 1.0, py::arg("xi") = 0.0)
      .def_readwrite("mu", &GevParams::mu)
      .def_readwrite("sigma", &GevParams::sigma)
      .def_readwrite("xi", &GevParams::xi)
      .def("__repr__", [](const GevParams& p) {
        std::ostringstream o;
        o << "GevParams(mu=" << p.mu << ", sigma=" << p.sigma << ", xi=" << p.xi << ")";
        return o.str();
      });

  py::class_<GevFit>(m, "GevFit")
      .def_readonly("params", &GevFit::params)
      .def_readonly("loglik", &GevFit::loglik)
      .def_readonly("n", &GevFit::n)
      .def_readonly("b", &GevFit::b)
      .def_readonly("converged", &GevFit::converged)
      .def_readonly("regularity_warning", &GevFit::regularity_warning)
      .def("standard_errors", [](const GevFit& f) {
        const Eigen::Vector3d se = f.standard_errors();
        return std::vector<double>{se(0), se(1), se(2)};
      })
      .def("cov", [](const GevFit& f) {
        std::vector<std::vector<double>> c(3, std::vector<double>(3));
        for (int i = 0; i < 3; ++i)
          for (int j = 0; j < 3; ++j) c[i][j] = f.cov(i, j);
        return c;
      });

  py::class_<VHatSample>(m, "VHatSample")
      .def_readonly("vhat", &VHatSample::vhat)
      .def_readonly("ranks", &VHatSample::ranks)
      .def_readonly("maxima", &VHatSample::maxima)
      .def_readonly("m", &VHatSample::m)
      .def_readonly("floor_hits", &VHatSample::floor_hits)
      .def_property_readonly("b", [](const VHatSample& v) { return v.scheme.b; })
      .def_property_readonly("scheme", [](const VHatSample& v) { return std::string(to_string(v.scheme.kind)); })
      .def_property_readonly("n", &VHatSample::n);

  m.def(
      "block_maxima",
      [](const std::vector<double>& x, std::size_t b, const std::string& scheme) {
        const BlockMaximaSample s = block_maxima(to_series(x), {parse_block_kind(scheme), b});
        return s.maxima;
      },
      py::arg("x"), py::arg("b"), py::arg("scheme") = "sliding", "Block maxima of a series.");

  m.def(
      "compute_vhat",
      [](const std::vector<double>& x, std::size_t b, const std::string& scheme) {
        return compute_vhat(to_series(x), {parse_block_kind(scheme), b});
      },
      py::arg("x"), py::arg("b"), py::arg("scheme") = "sliding",
      "Leave-one-block-out pseudo-observations V_i.");

  m.def(
      "sp_estimate",
      [](const std::vector<double>& x, std::size_t b, const std::string& scheme) {
        return estimate_dict(sp_estimate(compute_vhat(to_series(x), {parse_block_kind(scheme), b})));
      },
      py::arg("x"), py::arg("b"), py::arg("scheme") = "sliding", "Semiparametric block-maxima estimate of theta.");

  m.def(
      "ratio_blocks_estimate",
      [](const std::vector<double>& x, std::size_t b) { return estimate_dict(ratio_blocks_estimate(to_series(x), b)); },
      py::arg("x"), py::arg("b"));

  m.def(
      "blocks_estimate",
      [](const std::vector<double>& x, std::size_t b, const std::string& scheme, std::optional<double> threshold,
         std::optional<double> quantile) {
        const Threshold u = threshold || quantile ? make_threshold(threshold, quantile) : Threshold::maxima_median();
        return estimate_dict(blocks_estimate(to_series(x), {parse_block_kind(scheme), b}, u));
      },
      py::arg("x"), py::arg("b"), py::arg("scheme") = "sliding", py::arg("threshold") = py::none(),
      py::arg("quantile") = py::none(), "Blocks estimator; the default threshold is the median block maximum.");

  m.def(
      "intervals_estimate",
      [](const std::vector<double>& x, std::optional<double> threshold, std::optional<double> quantile) {
        return estimate_dict(intervals_estimate(extract_gaps(to_series(x), make_threshold(threshold, quantile))));
      },
      py::arg("x"), py::arg("threshold") = py::none(), py::arg("quantile") = py::none());

  m.def(
      "kgaps_estimate",
      [](const std::vector<double>& x, int K, std::optional<double> threshold, std::optional<double> quantile) {
        return estimate_dict(kgaps_estimate(extract_gaps(to_series(x), make_threshold(threshold, quantile)), K));
      },
      py::arg("x"), py::arg("K") = 1, py::arg("threshold") = py::none(), py::arg("quantile") = py::none());

  m.def(
      "gomes_estimate",
      [](const std::vector<double>& x, std::size_t b, std::uint64_t seed) {
        return estimate_dict(gomes_estimate(to_series(x), b, seed));
      },
      py::arg("x"), py::arg("b"), py::arg("seed"));

  m.def(
      "at_estimate",
      [](const std::vector<double>& x, std::size_t b, std::uint64_t seed) {
        const AtResult r = at_estimate(to_series(x), b, seed);
        py::dict d = estimate_dict(r.estimate);
        d["theta_se"] = r.theta_se;
        d["gev"] = r.fit.params;
        d["loglik"] = r.loglik;
        return d;
      },
      py::arg("x"), py::arg("b"), py::arg("seed"));

  m.def("naive_se", &naive_se, py::arg("theta"), py::arg("n"));

  m.def(
      "sandwich_se",
      [](const std::vector<double>& x, std::size_t b, const std::string& scheme) {
        const VHatSample v = compute_vhat(to_series(x), {parse_block_kind(scheme), b});
        const double t = sp_estimate(v).theta;
        const SandwichResult r = sandwich_variance(v, t);
        py::dict d;
        d["theta"] = t;
        d["adjusted_se"] = r.adjusted_se;
        d["naive_se"] = v.n() >= 3 ? naive_se(t, v.n()) : std::numeric_limits<double>::quiet_NaN();
        d["fallback_to_naive"] = r.fallback_to_naive;
        return d;
      },
      py::arg("x"), py::arg("b"), py::arg("scheme") = "sliding");

  m.def(
      "theta_ci",
      [](const std::vector<double>& x, std::size_t b, const std::string& scheme, bool adjusted, double level) {
        const VHatSample v = compute_vhat(to_series(x), {parse_block_kind(scheme), b});
        const double t = sp_estimate(v).theta;
        return bundle_dict(adjusted ? adjusted_loglik_ci(v, t, level) : likelihood_ci(v, t, level));
      },
      py::arg("x"), py::arg("b"), py::arg("scheme") = "sliding", py::arg("adjusted") = true,
      py::arg("level") = 0.95, "Likelihood interval for theta, optionally sandwich-adjusted.");

  m.def(
      "bootstrap",
      [](const std::vector<double>& x, std::size_t b, const std::string& scheme, std::size_t reps,
         std::uint64_t seed, std::optional<double> mean_block_length, double level, bool percentile,
         std::size_t workers) {
        BootstrapOptions o;
        o.reps = reps;
        o.seed = seed;
        o.mean_block_length = mean_block_length;
        o.level = level;
        o.percentile = percentile;
        o.workers = workers;
        py::gil_scoped_release release;
        return stationary_bootstrap(to_series(x), sp_pipeline({parse_block_kind(scheme), b}), o);
      },
      py::arg("x"), py::arg("b"), py::arg("scheme") = "sliding", py::arg("reps") = 100, py::arg("seed") = 0,
      py::arg("mean_block_length") = py::none(), py::arg("level") = 0.95, py::arg("percentile") = false,
      py::arg("workers") = 1);

  m.def(
      "optimal_block_length", [](const std::vector<double>& x) { return optimal_block_length(to_series(x)); },
      py::arg("x"));

  m.def(
      "simulate",
      [](const std::string& process, std::size_t m, std::uint64_t seed, std::optional<std::string> margin) {
        const ProcessSpec spec = parse_process(process);
        Series s = simulate(spec, m, seed);
        if (margin) {
          s = transform_margins(s, known_margin(spec).value_or(SourceMargin{Margin::empirical}),
                                parse_margin(*margin));
        }
        return to_list(s);
      },
      py::arg("process"), py::arg("m"), py::arg("seed"), py::arg("margin") = py::none(),
      "Simulate a process such as 'maxar:0.5'.");

  m.def(
      "theta_oracle",
      [](const std::string& process, std::optional<std::size_t> b) {
        const ThetaOracle o = theta_oracle(parse_process(process));
        py::dict d;
        d["theta_limit"] = o.theta_limit;
        d["source"] = std::string(to_string(o.source));
        if (b && o.theta_b) d["theta_b"] = o.theta_b(*b);
        return d;
      },
      py::arg("process"), py::arg("b") = py::none());

  m.def(
      "transform_margins",
      [](const std::vector<double>& x, const std::string& source, const std::string& target, double scale) {
        return to_list(transform_margins(to_series(x), {parse_margin(source), scale}, parse_margin(target)));
      },
      py::arg("x"), py::arg("source"), py::arg("target"), py::arg("scale") = 1.0);

  m.def("gev_cdf", &gev_cdf, py::arg("x"), py::arg("params"));
  m.def("gev_quantile", &gev_quantile, py::arg("q"), py::arg("params"));
  m.def(
      "gev_loglik", [](const std::vector<double>& x, const GevParams& p) { return gev_loglik(x, p); }, py::arg("x"),
      py::arg("params"));
  m.def(
      "gev_fit", [](const std::vector<double>& maxima, std::size_t b) { return gev_fit(maxima, b); },
      py::arg("maxima"), py::arg("b") = 1);
  m.def("implied_marginal_params", &implied_marginal_params, py::arg("fit"), py::arg("theta"), py::arg("b"));
  m.def("marginal_quantile", &marginal_quantile, py::arg("fit"), py::arg("theta"), py::arg("b"), py::arg("p"));

  m.def(
      "relative_efficiency",
      [](double theta, double xi) {
        const EfficiencyResult r = asymptotic_relative_efficiency(theta, xi);
        return r.rel_eff;
      },
      py::arg("theta"), py::arg("xi"), "Asymptotic efficiency of the parametric joint estimator, disjoint blocks.");

  m.def(
      "quantile_ci",
      [](const std::vector<double>& x, std::size_t b, double p, double level) {
        const Series s = to_series(x);
        const QuantileInterval q = quantile_profile_ci(compute_vhat(s, {BlockKind::sliding, b}),
                                                       block_maxima(s, {BlockKind::disjoint, b}), p, level);
        py::dict d;
        d["estimate"] = q.estimate;
        d["lower"] = q.lower;
        d["upper"] = q.upper;
        d["theta_hat"] = q.theta_hat;
        return d;
      },
      py::arg("x"), py::arg("b"), py::arg("p"), py::arg("level") = 0.95,
      "Profile-likelihood interval for the marginal quantile exceeded with probability p.");

  m.def(
      "run_study",
      [](const std::string& config_json) {
        const StudyConfig c = parse_study_config(config_json);
        StudyReport r;
        {
          py::gil_scoped_release release;
          r = run_study(c);
        }
        std::ostringstream out;
        write_study_csv(out, r);
        return out.str();
      },
      py::arg("config_json"), "Run a simulation study; returns the report as CSV text.");

  m.def(
      "block_size_scan",
      [](const std::vector<double>& x, const std::vector<std::size_t>& sizes, double level) {
        std::ostringstream out;
        write_scan_csv(out, block_size_scan(to_series(x), sizes, level));
        return out.str();
      },
      py::arg("x"), py::arg("block_sizes"), py::arg("level") = 0.95, "Block-size scan; returns CSV text.");

  py::class_<VarianceBundle>(m, "VarianceBundle")
      .def_readonly("point", &VarianceBundle::point)
      .def_readonly("bootstrap_se", &VarianceBundle::bootstrap_se)
      .def_readonly("bootstrap_bias_adjusted_theta", &VarianceBundle::bootstrap_bias_adjusted_theta)
      .def_readonly("lower", &VarianceBundle::lower)
      .def_readonly("upper", &VarianceBundle::upper)
      .def_readonly("level", &VarianceBundle::level)
      .def_readonly("bootstrap_failures", &VarianceBundle::bootstrap_failures)
      .def_readonly("mean_block_length", &VarianceBundle::mean_block_length)
      .def_property_readonly("ci_method", [](const VarianceBundle& v) { return std::string(to_string(v.ci_method)); });
}
