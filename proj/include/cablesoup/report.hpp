#pragma once

#include <string>

#include "json.hpp"

namespace cablesoup {

// UTC wall-clock stamp, the one field excluded from byte-identity checks.
std::string iso8601_now();

// Adds generated_at and writes with two-space indentation.
void write_report(nlohmann::ordered_json report, const std::string& path);

}  // namespace cablesoup
