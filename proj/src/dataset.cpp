#include "tdr/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cctype>
#include <cstring>
#include <fstream>
#include <sstream>

#include "tdr/error.hpp"

namespace tdr {

namespace {

void fnv_bytes(std::uint64_t& h, const void* data, size_t size) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (size_t k = 0; k < size; ++k) {
    h ^= bytes[k];
    h *= 0x100000001b3ULL;
  }
}

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
      field.push_back(c);
    } else if (c == ',' && !quoted) {
      fields.push_back(trim(field));
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  fields.push_back(trim(field));
  return fields;
}

bool parse_double(const std::string& text, double* out) {
  if (text.empty()) return false;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, *out);
  return ec == std::errc() && ptr == last && std::isfinite(*out);
}

}  // namespace

std::uint64_t dataset_hash(const Dataset& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const Index n = data.X.rows();
  const Index p = data.X.cols();
  fnv_bytes(h, &n, sizeof n);
  fnv_bytes(h, &p, sizeof p);
  for (Index i = 0; i < data.y.size(); ++i) fnv_bytes(h, &data.y(i), sizeof(double));
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) fnv_bytes(h, &data.X(i, j), sizeof(double));
  }
  return h;
}

Dataset ingest_csv(const std::string& path, const std::string& response,
                   const std::vector<std::string>& predictors) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::FileNotFound, "cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::ParseError, "'" + path + "' has no header row");
  const std::vector<std::string> header = split_csv_line(line);

  const auto column_of = [&](const std::string& name) -> size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      fail(ErrorCode::ParseError, "column '" + name + "' not found in header");
    }
    return static_cast<size_t>(it - header.begin());
  };

  const size_t response_col = column_of(response);
  std::vector<std::string> names = predictors;
  if (names.empty()) {
    for (const auto& h : header) {
      if (h != response) names.push_back(h);
    }
  }
  if (names.empty()) fail(ErrorCode::ParseError, "no predictor columns selected");
  std::vector<size_t> cols;
  for (const auto& name : names) cols.push_back(column_of(name));

  std::vector<double> ys;
  std::vector<std::vector<double>> rows;
  std::size_t row_number = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row_number;
    const std::vector<std::string> fields = split_csv_line(line);
    const auto value_at = [&](size_t col, const std::string& name) {
      if (col >= fields.size()) {
        fail(ErrorCode::ParseError, "row " + std::to_string(row_number) + ", column '" + name +
                                        "': missing field");
      }
      double v = 0.0;
      if (!parse_double(fields[col], &v)) {
        fail(ErrorCode::ParseError, "row " + std::to_string(row_number) + ", column '" + name +
                                        "': non-numeric value '" + fields[col] + "'");
      }
      return v;
    };
    ys.push_back(value_at(response_col, response));
    std::vector<double> row;
    for (size_t k = 0; k < cols.size(); ++k) row.push_back(value_at(cols[k], names[k]));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) fail(ErrorCode::ParseError, "'" + path + "' has no data rows");

  Dataset data;
  data.response_name = response;
  data.predictor_names = names;
  data.y = Eigen::Map<const Vector>(ys.data(), static_cast<Index>(ys.size()));
  data.X.resize(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  for (size_t i = 0; i < rows.size(); ++i) {
    for (size_t j = 0; j < cols.size(); ++j) {
      data.X(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
    }
  }
  return data;
}

}  // namespace tdr
