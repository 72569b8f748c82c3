#pragma once

#include "dynkde/dynsys.hpp"
#include "dynkde/error.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace dynkde::io {

/// 17 significant digits, enough to round-trip any double.
inline std::string format_double(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(std::string_view text)
{
  const std::string s(text);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE)
    throw InvalidArgument("not a number: '" + s + "'");
  return v;
}

inline std::vector<std::string> split(std::string_view line, char sep)
{
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.emplace_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos)
      break;
    start = pos + 1;
  }
  return out;
}

inline std::string trim(std::string_view s)
{
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos)
    return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

inline std::string read_text(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw InvalidArgument("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::string& path, const std::string& text)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw InvalidArgument("cannot open '" + path + "' for writing");
  out << text;
  if (!out)
    throw InvalidArgument("failed writing '" + path + "'");
}

/// CSV with header `i,x` and one observation per row.
inline std::string sample_to_csv(const Sample& sample)
{
  std::string out = "i,x\n";
  for (std::size_t i = 0; i < sample.size(); ++i)
    out += std::to_string(i + 1) + ',' + format_double(sample.values[i]) + '\n';
  return out;
}

/// Reads the last column of every data row. A header row is skipped when its
/// last field is not numeric.
inline Sample sample_from_csv(const std::string& text)
{
  Sample sample;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    const std::string row = trim(line);
    if (row.empty() || row.front() == '#')
      continue;
    const auto fields = split(row, ',');
    const std::string value = trim(fields.back());
    if (first) {
      first = false;
      try {
        sample.values.push_back(parse_double(value));
      } catch (const InvalidArgument&) {
        // header
      }
      continue;
    }
    sample.values.push_back(parse_double(value));
  }
  return sample;
}

inline void write_sample(const std::string& path, const Sample& sample)
{
  write_text(path, sample_to_csv(sample));
}

inline Sample read_sample(const std::string& path)
{
  auto sample = sample_from_csv(read_text(path));
  if (sample.empty())
    throw InvalidArgument("'" + path + "' holds no observations");
  return sample;
}

} // namespace dynkde::io
