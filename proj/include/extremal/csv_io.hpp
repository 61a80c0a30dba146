#pragma once

#include <iosfwd>
#include <string>

#include "extremal/series.hpp"

namespace extremal {

// One observation per line. A single non-numeric first line is taken as a
// header; blank lines are skipped. Failures carry the offending line number.
Series read_series(std::istream& in);
Series read_series_file(const std::string& path);

void write_series(std::ostream& out, const Series& series, const std::string& header = "x");

}  // namespace extremal
