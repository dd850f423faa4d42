#include "coxbo_cli/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "coxbo/error.hpp"

namespace coxbo::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

/// Every comma-separated field parsed as a double, or nullopt.
std::optional<std::vector<double>> parse_row(const std::string& line) {
  std::vector<double> row;
  std::stringstream in(line);
  std::string field;
  while (std::getline(in, field, ',')) {
    field = trim(field);
    double v = 0.0;
    const auto [end, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc() || end != field.data() + field.size() || !std::isfinite(v)) {
      return std::nullopt;
    }
    row.push_back(v);
  }
  if (row.empty()) return std::nullopt;
  return row;
}

}  // namespace

EventSet parse_events(const std::string& text, const std::vector<double>& lower, const std::vector<double>& upper) {
  std::vector<std::pair<std::size_t, std::string>> lines;
  {
    std::stringstream in(text);
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
      ++number;
      if (!trim(line).empty()) lines.emplace_back(number, line);
    }
  }
  require(!lines.empty(), ErrorCategory::kInput, "event file is empty");

  std::size_t first = 0;
  if (!parse_row(lines[0].second) && lines.size() > 1) first = 1;  // header

  std::vector<double> flat;
  std::size_t d = 0;
  for (std::size_t i = first; i < lines.size(); ++i) {
    const auto& [number, line] = lines[i];
    const auto row = parse_row(line);
    require(row.has_value(), ErrorCategory::kParse,
            "line " + std::to_string(number) + ": expected numeric columns, got '" + trim(line) + "'");
    if (d == 0) d = row->size();
    require(row->size() == d, ErrorCategory::kParse,
            "line " + std::to_string(number) + ": expected " + std::to_string(d) + " columns");
    flat.insert(flat.end(), row->begin(), row->end());
  }
  require(d > 0, ErrorCategory::kInput, "event file has no data rows");

  const auto n = static_cast<Eigen::Index>(flat.size() / d);
  Eigen::MatrixXd events(n, static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < events.cols(); ++k) events(i, k) = flat[static_cast<std::size_t>(i) * d + k];
  }

  std::vector<double> lo = lower;
  std::vector<double> hi = upper;
  if (lo.empty() && hi.empty()) {
    for (Eigen::Index k = 0; k < events.cols(); ++k) {
      const double a = events.col(k).minCoeff();
      const double b = events.col(k).maxCoeff();
      const double pad = b > a ? 0.01 * (b - a) : 0.01 * std::max(std::abs(a), 1.0);
      lo.push_back(a - pad);
      hi.push_back(b + pad);
    }
  }
  require(lo.size() == d && hi.size() == d, ErrorCategory::kInput,
          "domain dimension does not match the " + std::to_string(d) + "-column event file");
  return EventSet(std::move(events), std::move(lo), std::move(hi));
}

EventSet ingest_events(const std::string& path, const std::vector<double>& lower, const std::vector<double>& upper) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCategory::kIo, "cannot open event file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_events(buf.str(), lower, upper);
}

std::string format_events(const EventSet& events) {
  std::string out;
  char buf[32];
  for (Eigen::Index i = 0; i < events.events().rows(); ++i) {
    for (Eigen::Index k = 0; k < events.events().cols(); ++k) {
      if (k > 0) out += ',';
      const auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), events.events()(i, k));
      out.append(buf, end);
    }
    out += '\n';
  }
  return out;
}

void write_atomic(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    require(static_cast<bool>(out), ErrorCategory::kIo, "cannot write '" + tmp + "'");
    out << contents;
    out.flush();
    require(static_cast<bool>(out), ErrorCategory::kIo, "write to '" + tmp + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::remove(tmp.c_str());
    fail(ErrorCategory::kIo, "cannot move '" + tmp + "' to '" + path + "': " + ec.message());
  }
}

}  // namespace coxbo::cli
