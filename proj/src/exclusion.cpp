#include "plantsite/exclusion.hpp"

#include <algorithm>

#include "plantsite/io_util.hpp"

namespace plantsite {

namespace {

constexpr std::string_view kFlagPrefix = "landuse_flag:";

std::string_view kind_name(ExclusionKind kind)
{
    switch (kind) {
    case ExclusionKind::landuse_flag: return "landuse_flag";
    case ExclusionKind::above_treeline: return "above_treeline";
    case ExclusionKind::natural_blank: return "natural_blank";
    case ExclusionKind::very_dense: return "very_dense";
    case ExclusionKind::scrub_dominated: return "scrub_dominated";
    case ExclusionKind::high_resource_use: return "high_resource_use";
    }
    return "?";
}

}  // namespace

std::string ExclusionReason::to_string() const
{
    if (kind == ExclusionKind::landuse_flag) return std::string(kFlagPrefix) + std::string(plantsite::to_string(flag));
    return std::string(kind_name(kind));
}

ExclusionReason ExclusionReason::parse(std::string_view text)
{
    text = trim(text);
    if (text.starts_with(kFlagPrefix)) {
        auto flag = parse_landuse_flag(text.substr(kFlagPrefix.size()));
        if (!flag) throw ValidationError("unknown exclusion reason '" + std::string(text) + "'");
        return {ExclusionKind::landuse_flag, *flag};
    }
    for (auto k : {ExclusionKind::above_treeline, ExclusionKind::natural_blank, ExclusionKind::very_dense,
                   ExclusionKind::scrub_dominated, ExclusionKind::high_resource_use})
        if (kind_name(k) == text) return {k, LanduseFlag::grassland};
    throw ValidationError("unknown exclusion reason '" + std::string(text) + "'");
}

std::string ExclusionResult::joined() const
{
    std::string out;
    for (const auto& r : reasons) {
        if (!out.empty()) out += '|';
        out += r.to_string();
    }
    return out;
}

ExclusionResult ExclusionResult::parse(std::string_view joined)
{
    ExclusionResult result;
    joined = trim(joined);
    if (joined.empty()) return result;
    for (auto part : split(joined, '|')) result.reasons.push_back(ExclusionReason::parse(part));
    return result;
}

ExclusionResult apply_exclusions(const GridCell& cell, const ExclusionPolicy& policy)
{
    ExclusionResult result;
    for (auto f : kAllLanduseFlags)
        if (cell.landuse_flags.has(f)) result.reasons.push_back({ExclusionKind::landuse_flag, f});

    if (cell.terrain.elevation_m > policy.treeline_m) result.reasons.push_back({ExclusionKind::above_treeline});

    const bool blank = std::all_of(cell.covers.begin(), cell.covers.end(), [&](const CoverSnapshot& s) {
        return s.tree_cover_pct() < policy.blank_threshold_pct;
    });
    if (blank) result.reasons.push_back({ExclusionKind::natural_blank});

    const auto& now = cell.latest();
    if (now.vdf_pct >= policy.vdf_threshold) result.reasons.push_back({ExclusionKind::very_dense});
    if (now.scrub_pct >= policy.scrub_threshold) result.reasons.push_back({ExclusionKind::scrub_dominated});
    if (cell.villages_within_1km >= policy.resource_threshold)
        result.reasons.push_back({ExclusionKind::high_resource_use});
    return result;
}

}  // namespace plantsite
