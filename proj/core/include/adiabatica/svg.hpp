#pragma once

#include <string>

#include "adiabatica/harness.hpp"

namespace adiabatica {

// Self-contained log-log figure: data points, fitted line, expected-rate guide.
// Coordinates are printed with two decimals so output is byte-stable.
std::string render_svg(const ExperimentReport& r);

}  // namespace adiabatica
