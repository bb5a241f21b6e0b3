#pragma once

#include "bumpkit/report.hpp"

#include <string>
#include <vector>

namespace bumpkit {

// orlicz, eqlog, dual2, commutator, calc, example, sufficiency, lsu, neccond
const std::vector<std::string>& experiment_names();

// Runs a named experiment from a (possibly partial) config. Unknown names or keys throw
// std::invalid_argument. The report carries the fully resolved config and the wall time.
ExperimentReport run_experiment(const std::string& name, const nlohmann::ordered_json& config);

struct ReplayResult {
    ExperimentReport fresh;
    bool json_identical = false; // wall_time excluded
    bool csv_identical = false;
};

// Re-runs the experiment embedded in <name>.report.json and compares with that file and the
// sibling <name>.table.csv byte for byte.
ReplayResult replay_report(const std::string& report_path);

} // namespace bumpkit
