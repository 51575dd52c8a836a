#pragma once
#include <string>

#include "qsum/scenario.hpp"

namespace qsum {

// Scenario files are JSON with a schema_version field. Complex numbers are
// [re, im] pairs (a bare number is read as real), polynomials are ascending
// coefficient lists and angles carry a _deg suffix. Throws ConfigError on
// malformed input; hypotheses are checked separately by validate_scenario.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::string& path);

// Scenario file of the built-in example; parses to example_scenario(A).
std::string example_config_text(double A = 10.0);

}  // namespace qsum
