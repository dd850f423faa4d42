#pragma once

#include <string>
#include <vector>

#include "coxbo/inference.hpp"

namespace coxbo::cli {

/// Reads one event per row. The first non-blank line is a header when it is
/// not numeric and data rows follow it. Without an explicit domain the bounds
/// are the data min/max padded by 1% of the range.
EventSet ingest_events(const std::string& path, const std::vector<double>& lower = {},
                       const std::vector<double>& upper = {});
EventSet parse_events(const std::string& text, const std::vector<double>& lower = {},
                      const std::vector<double>& upper = {});

/// Full-precision CSV, so parsing it back reproduces the events exactly.
std::string format_events(const EventSet& events);

/// Writes to a temporary sibling, then renames over `path`.
void write_atomic(const std::string& path, const std::string& contents);

}  // namespace coxbo::cli
