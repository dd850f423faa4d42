#pragma once

#include <string>

#include <json.hpp>

#include "coxbo_cli/config.hpp"

namespace coxbo::cli {

/// Every result document carries exactly these keys; unused ones are null.
/// Wall-clock numbers live only under timing_seconds.
using Json = nlohmann::ordered_json;

Json cmd_fit(ExperimentConfig cfg);
Json cmd_bo(ExperimentConfig cfg);
/// Writes one CSV per replicate: `out` itself for replicate 0, `out` with a
/// ".rK" infix before the extension for the rest.
Json cmd_synth(ExperimentConfig cfg, const std::string& out);
Json cmd_metrics(ExperimentConfig cfg);

/// Path of the CSV for replicate r (see cmd_synth).
std::string replicate_path(const std::string& out, std::size_t r);

/// Serialized document without timing_seconds, for determinism checks.
std::string dump_without_timing(const Json& result);

}  // namespace coxbo::cli
