// Scenario file format: self-describing JSON with a schema_version field.
#pragma once

#include <stdexcept>
#include <string>

#include "coexsim/scenario.hpp"

namespace coexsim {

// Thrown for malformed files; message names the offending field path.
struct ScenarioError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Parse a scenario document.  Missing optional fields take the bundled
// defaults; validation violations are reported as an error listing every
// offending field.
Scenario load_scenario_text(const std::string& json_text);

// Load from a file path, or from the bundled registry if `ref` names a
// built-in scenario (e.g. "fig1").
Scenario load_scenario(const std::string& ref);

// Serialize; load_scenario_text(serialize_scenario(sc)) round-trips.
std::string serialize_scenario(const Scenario& sc);

// Bundled default scenario: two STAs, eNB 20 m from the AP.
const std::string& builtin_fig1_json();
bool is_builtin_scenario(const std::string& name);

}  // namespace coexsim
