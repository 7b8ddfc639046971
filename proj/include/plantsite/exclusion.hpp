#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "plantsite/landscape.hpp"

namespace plantsite {

/// Thresholds for the guardrail rules. Defaults follow the forestry conventions
/// the engine is calibrated to (tree line ~3800 m, FSI very-dense boundary 70%).
struct ExclusionPolicy {
    double treeline_m = 3800.0;
    double blank_threshold_pct = 5.0;
    double vdf_threshold = 70.0;
    double scrub_threshold = 50.0;
    int resource_threshold = 3;

    friend bool operator==(const ExclusionPolicy&, const ExclusionPolicy&) = default;
};

enum class ExclusionKind : std::uint8_t {
    landuse_flag,
    above_treeline,
    natural_blank,
    very_dense,
    scrub_dominated,
    high_resource_use,
};

struct ExclusionReason {
    ExclusionKind kind = ExclusionKind::landuse_flag;
    LanduseFlag flag = LanduseFlag::grassland;  // meaningful for landuse_flag only

    /// "landuse_flag:<name>" or the bare kind name.
    std::string to_string() const;
    static ExclusionReason parse(std::string_view text);

    friend bool operator==(const ExclusionReason&, const ExclusionReason&) = default;
};

struct ExclusionResult {
    /// Land-use flags first (declaration order), then the rule-derived reasons.
    std::vector<ExclusionReason> reasons;

    bool excluded() const { return !reasons.empty(); }
    std::string joined() const;  // `|`-separated
    static ExclusionResult parse(std::string_view joined);

    friend bool operator==(const ExclusionResult&, const ExclusionResult&) = default;
};

ExclusionResult apply_exclusions(const GridCell& cell, const ExclusionPolicy& policy = {});

}  // namespace plantsite
