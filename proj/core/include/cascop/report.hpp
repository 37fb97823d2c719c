#pragma once

#include <string>

#include "cascop/regimes.hpp"

namespace cascop {

// {config, per_k: [{k, n, median, mean, q25, q75, target, pass}], diagnostics}
// with insertion-ordered keys, so identical runs serialize to identical bytes.
std::string report_to_json(const RegimeReport& report);

// per_k table with a header row and a trailing metadata comment line.
std::string report_to_csv(const RegimeReport& report, const std::string& invocation);

}  // namespace cascop
