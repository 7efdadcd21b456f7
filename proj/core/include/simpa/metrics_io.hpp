#pragma once

#include <string>

#include "json.hpp"
#include "simpa/calibration.hpp"
#include "simpa/pac_bound.hpp"

namespace simpa {

// One JSON-lines metrics record. Field names are part of the output
// contract: bound, r0, ri, kl_hyper, kl_task, emp_loss, delta0, delta_i,
// plus iter and nll. The reported nll includes likelihood normalisation
// constants (the optimised losses drop them).
nlohmann::json bound_report_json(std::size_t iteration, const BoundReport& report, double nll);

// Atomic file write: temp file in the same directory, then rename.
void write_file_atomic(const std::string& path, const std::string& content);

// CSV with header "level,observed,weight".
std::string reliability_csv(const ReliabilityCurve& curve);
ReliabilityCurve reliability_from_csv(const std::string& content);

}  // namespace simpa
