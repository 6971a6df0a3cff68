#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qhet/smd.hpp"

namespace qhet {

struct InputDataset {
    std::string path;
    std::vector<StudySummary> studies;
};

/// Parse a study CSV. Format: header `study,n_t,mean_t,sd_t,n_c,mean_c,sd_c`,
/// one row per study, `#` comment lines and blank lines ignored, decimal
/// points locale-independent. Every rejection names the offending line.
InputDataset parse_csv(const std::string& path);

/// Same parser over an in-memory buffer (the file loader delegates here).
InputDataset parse_csv_text(std::string_view text, const std::string& path_label);

/// Serialize studies in the exact format parse_csv accepts; numeric fields
/// round-trip bit-exactly.
std::string to_csv(std::span<const StudySummary> studies);

}  // namespace qhet
