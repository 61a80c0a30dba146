#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <functional>

namespace extremal::optim {

using Objective = std::function<double(const Eigen::VectorXd&)>;

struct NelderMeadOptions {
  double initial_step = 0.1;   // relative to max(|x0_i|, 1)
  double f_tolerance = 1e-10;  // on the spread of simplex values
  double x_tolerance = 1e-8;   // on the simplex diameter
  std::size_t max_evaluations = 20000;
};

struct MinimizeResult {
  Eigen::VectorXd x;
  double value = 0.0;
  std::size_t evaluations = 0;
  bool converged = false;
};

// Derivative-free minimization. Non-finite objective values are treated as
// +infinity, which is how callers express box or support constraints.
MinimizeResult nelder_mead(const Objective& f, const Eigen::VectorXd& x0,
                           const NelderMeadOptions& options = {});

// Repeated Nelder-Mead runs, each restarted from the previous optimum, until
// the value stops improving (or `restarts` is exhausted).
MinimizeResult minimize(const Objective& f, const Eigen::VectorXd& x0,
                        const NelderMeadOptions& options = {}, int restarts = 2);

// Central finite-difference Hessian with per-coordinate steps
// h_i = relative_step * max(|x_i|, 1).
Eigen::MatrixXd numerical_hessian(const Objective& f, const Eigen::VectorXd& x,
                                  double relative_step = 1e-4);

Eigen::VectorXd numerical_gradient(const Objective& f, const Eigen::VectorXd& x,
                                   double relative_step = 1e-6);

// Root of a continuous function on [lo, hi] with f(lo), f(hi) of opposite sign.
double bisect(const std::function<double(double)>& f, double lo, double hi, double x_tolerance,
              int max_iterations = 200);

}  // namespace extremal::optim
