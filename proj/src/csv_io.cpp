#include "extremal/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <string_view>
#include <vector>

#include "extremal/error.hpp"

namespace extremal {

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto first = s.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  return s.substr(first, s.find_last_not_of(ws) - first + 1);
}

std::optional<double> parse_number(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

}  // namespace

Series read_series(std::istream& in) {
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  bool first_content = true;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view field = trim(line);
    if (field.empty()) continue;
    const auto v = parse_number(field);
    if (!v) {
      if (first_content) {
        first_content = false;
        continue;
      }
      throw Error(ErrorCode::parse_error,
                  "line " + std::to_string(line_no) + ": not a number: '" + std::string(field) + "'");
    }
    if (!std::isfinite(*v)) {
      throw Error(ErrorCode::parse_error, "line " + std::to_string(line_no) + ": non-finite value");
    }
    first_content = false;
    values.push_back(*v);
  }
  if (values.empty()) throw Error(ErrorCode::parse_error, "input contains no observations");
  return Series(std::move(values));
}

Series read_series_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::parse_error, "cannot open '" + path + "'");
  return read_series(in);
}

void write_series(std::ostream& out, const Series& series, const std::string& header) {
  char buf[32];
  out << header << '\n';
  for (double v : series.values()) {
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out.write(buf, ptr - buf);
    out << '\n';
  }
}

}  // namespace extremal
