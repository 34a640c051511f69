#pragma once

#include <string>

#include <json.hpp>

#include "qhhg/scenario.hpp"

namespace qhhg {

/// Shared between the runner and the validator; implemented in scenario.cpp.
nlohmann::json config_echo(const ScenarioConfig& config);
std::string utc_now();

} // namespace qhhg
