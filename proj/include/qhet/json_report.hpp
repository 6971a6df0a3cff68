#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "qhet/pipeline.hpp"
#include "qhet/simlab.hpp"

namespace qhet {

struct BootstrapInfo {
    std::uint64_t reps = 0;
    std::uint64_t seed = 0;
};

/// Machine-readable homogeneity-test report. Field names and types are
/// schema-stable (schema_version bumps on change); absent quantities are null.
nlohmann::json report_to_json(const QTestReport& report, const std::string& input_path,
                              const std::optional<BootstrapInfo>& bootstrap = std::nullopt);

nlohmann::json sim_result_to_json(const SimConfig& config, const SimResult& result);

}  // namespace qhet
