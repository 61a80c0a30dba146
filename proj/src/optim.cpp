#include "extremal/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace extremal::optim {

namespace {

double safe_eval(const Objective& f, const Eigen::VectorXd& x) {
  const double v = f(x);
  return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

}  // namespace

MinimizeResult nelder_mead(const Objective& f, const Eigen::VectorXd& x0,
                           const NelderMeadOptions& options) {
  const auto dim = static_cast<std::size_t>(x0.size());
  constexpr double alpha = 1.0, gamma = 2.0, rho = 0.5, shrink = 0.5;

  std::vector<Eigen::VectorXd> simplex(dim + 1, x0);
  for (std::size_t i = 0; i < dim; ++i) {
    const auto j = static_cast<Eigen::Index>(i);
    simplex[i + 1](j) += options.initial_step * std::max(std::abs(x0(j)), 1.0);
  }
  std::vector<double> values(dim + 1);
  std::size_t evals = 0;
  for (std::size_t i = 0; i <= dim; ++i) {
    values[i] = safe_eval(f, simplex[i]);
    ++evals;
  }

  std::vector<std::size_t> order(dim + 1);
  bool converged = false;
  while (evals < options.max_evaluations) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second_worst = order[dim - (dim > 0 ? 1 : 0)];

    double diameter = 0.0;
    for (std::size_t i = 0; i <= dim; ++i) {
      diameter = std::max(diameter, (simplex[i] - simplex[best]).lpNorm<Eigen::Infinity>());
    }
    const double spread = values[worst] - values[best];
    if (std::isfinite(values[worst]) &&
        spread <= options.f_tolerance * (std::abs(values[best]) + options.f_tolerance) &&
        diameter <= options.x_tolerance * (simplex[best].lpNorm<Eigen::Infinity>() + 1.0)) {
      converged = true;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(x0.size());
    for (std::size_t i = 0; i <= dim; ++i) {
      if (i != worst) centroid += simplex[i];
    }
    centroid /= static_cast<double>(dim);

    const Eigen::VectorXd reflected = centroid + alpha * (centroid - simplex[worst]);
    const double f_reflected = safe_eval(f, reflected);
    ++evals;
    if (f_reflected < values[best]) {
      const Eigen::VectorXd expanded = centroid + gamma * (reflected - centroid);
      const double f_expanded = safe_eval(f, expanded);
      ++evals;
      if (f_expanded < f_reflected) {
        simplex[worst] = expanded;
        values[worst] = f_expanded;
      } else {
        simplex[worst] = reflected;
        values[worst] = f_reflected;
      }
      continue;
    }
    if (f_reflected < values[second_worst]) {
      simplex[worst] = reflected;
      values[worst] = f_reflected;
      continue;
    }
    const bool outside = f_reflected < values[worst];
    const Eigen::VectorXd contracted =
        outside ? Eigen::VectorXd(centroid + rho * (reflected - centroid))
                : Eigen::VectorXd(centroid + rho * (simplex[worst] - centroid));
    const double f_contracted = safe_eval(f, contracted);
    ++evals;
    if (f_contracted < (outside ? f_reflected : values[worst])) {
      simplex[worst] = contracted;
      values[worst] = f_contracted;
      continue;
    }
    for (std::size_t i = 0; i <= dim; ++i) {
      if (i == best) continue;
      simplex[i] = simplex[best] + shrink * (simplex[i] - simplex[best]);
      values[i] = safe_eval(f, simplex[i]);
      ++evals;
    }
  }

  const auto best_it = std::min_element(values.begin(), values.end());
  const auto best = static_cast<std::size_t>(best_it - values.begin());
  return {simplex[best], values[best], evals, converged};
}

MinimizeResult minimize(const Objective& f, const Eigen::VectorXd& x0,
                        const NelderMeadOptions& options, int restarts) {
  MinimizeResult result = nelder_mead(f, x0, options);
  std::size_t evals = result.evaluations;
  for (int r = 0; r < restarts; ++r) {
    NelderMeadOptions again = options;
    again.initial_step = options.initial_step * 0.5;
    MinimizeResult next = nelder_mead(f, result.x, again);
    evals += next.evaluations;
    const bool improved = next.value < result.value - options.f_tolerance * (std::abs(result.value) + 1.0);
    if (next.value <= result.value) {
      next.converged = next.converged || result.converged;
      result = next;
    }
    if (!improved && result.converged) break;
  }
  result.evaluations = evals;
  return result;
}

Eigen::MatrixXd numerical_hessian(const Objective& f, const Eigen::VectorXd& x,
                                  double relative_step) {
  const Eigen::Index d = x.size();
  Eigen::VectorXd h(d);
  for (Eigen::Index i = 0; i < d; ++i) h(i) = relative_step * std::max(std::abs(x(i)), 1.0);

  Eigen::MatrixXd hess(d, d);
  const double f0 = f(x);
  for (Eigen::Index i = 0; i < d; ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp(i) += h(i);
    xm(i) -= h(i);
    hess(i, i) = (f(xp) - 2.0 * f0 + f(xm)) / (h(i) * h(i));
    for (Eigen::Index j = 0; j < i; ++j) {
      Eigen::VectorXd xpp = x, xpm = x, xmp = x, xmm = x;
      xpp(i) += h(i), xpp(j) += h(j);
      xpm(i) += h(i), xpm(j) -= h(j);
      xmp(i) -= h(i), xmp(j) += h(j);
      xmm(i) -= h(i), xmm(j) -= h(j);
      hess(i, j) = hess(j, i) = (f(xpp) - f(xpm) - f(xmp) + f(xmm)) / (4.0 * h(i) * h(j));
    }
  }
  return hess;
}

Eigen::VectorXd numerical_gradient(const Objective& f, const Eigen::VectorXd& x,
                                   double relative_step) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = relative_step * std::max(std::abs(x(i)), 1.0);
    Eigen::VectorXd xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    g(i) = (f(xp) - f(xm)) / (2.0 * h);
  }
  return g;
}

double bisect(const std::function<double(double)>& f, double lo, double hi, double x_tolerance,
              int max_iterations) {
  double f_lo = f(lo);
  for (int it = 0; it < max_iterations && hi - lo > x_tolerance; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = f(mid);
    if ((f_mid < 0) == (f_lo < 0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace extremal::optim
