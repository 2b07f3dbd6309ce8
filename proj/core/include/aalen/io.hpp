#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <variant>

#include <nlohmann/json.hpp>

#include "aalen/intensity.hpp"
#include "aalen/posterior.hpp"
#include "aalen/processes.hpp"
#include "aalen/record.hpp"

namespace aalen {

using Json = nlohmann::json;

using PriorSpec = std::variant<DpmPriorSpec, SplinePriorSpec, LogLinearPriorSpec>;

/// {variant, params, domain}
Json to_json(const IntensityModel& lambda);
IntensityModel intensity_from_json(const Json& j);

/// {model, n, T, events, exposure_breakpoints, exposure_values, seed,
/// spec_digest} plus marks / audit when present.
Json to_json(const CountingRecord& record);
CountingRecord record_from_json(const Json& j);

Json to_json(const ModelSpec& spec);
ModelSpec model_from_json(const Json& j);

Json to_json(const ScalePrior& p);
ScalePrior scale_prior_from_json(const Json& j);
Json to_json(const PriorSpec& p);
PriorSpec prior_from_json(const Json& j);
Json to_json(const McmcSettings& m);
McmcSettings mcmc_from_json(const Json& j);

/// 16 hex digits of FNV-1a over the compact dump.
std::string digest(const Json& j);
std::string model_digest(const ModelSpec& spec);

/**
 * Flat `a.b.c = value` lines into a nested object. Values are JSON literals
 * (numbers, true/false, "strings", [arrays]); anything else is a bare
 * string. `#` starts a comment.
 */
Json parse_flat_config(std::string_view text);

/// Reads a `.json` file as JSON and anything else as flat config.
Json load_config(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace aalen
