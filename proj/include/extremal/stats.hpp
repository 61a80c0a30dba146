#pragma once

#include <span>
#include <vector>

namespace extremal::stats {

double mean(std::span<const double> x);

// Sample standard deviation (denominator n - 1).
double sd(std::span<const double> x);

double median(std::vector<double> x);

// Hyndman-Fan type 7 quantile: linear interpolation between order statistics
// at h = (n - 1) q.
double quantile_type7(std::vector<double> x, double q);

// Fraction of x that is <= u.
double ecdf(std::span<const double> x, double u);

}  // namespace extremal::stats
