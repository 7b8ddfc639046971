#pragma once

#include <array>
#include <bitset>
#include <span>
#include <string_view>

#include <nlohmann/json_fwd.hpp>

#include "plantsite/landscape.hpp"

namespace plantsite {

enum class RuleId : std::uint8_t {
    cover_now,
    slope,
    aspect,
    elevation,
    inorg_c,
    org_c,
    soil_depth,
    village,
    chg_2015,
    chg_2013,
    chg_2009,
    chg_2005,
    chg_2003,
    chg_2001,
};
inline constexpr std::size_t kRuleCount = 14;

/// Static description of one rubric row.
struct RuleSpec {
    RuleId id;
    std::string_view name;
    double weight_pct;  // nominal share of the 90-point expert budget
    double max_raw;     // largest point value the row can award
};

/// All rows in RuleId order. Weights sum to 90.
const std::array<RuleSpec, kRuleCount>& rubric_rules();
const RuleSpec& rule_spec(RuleId id);
std::string_view to_string(RuleId id);
std::optional<RuleId> parse_rule_id(std::string_view name);

inline constexpr double kExpertBudget = 90.0;

struct RuleContribution {
    RuleId rule_id = RuleId::cover_now;
    double raw_points = 0.0;
    double max_raw = 0.0;
    double weight_pct = 0.0;
    double contribution = 0.0;  // weight_pct * clamp(raw, 0, max_raw) / max_raw
};

struct ExpertScore {
    std::array<RuleContribution, kRuleCount> per_rule{};
    double s_raw = 0.0;  // in [0, 90]
    double s = 0.0;      // s_raw * 100 / 90, in [0, 100]
};

// Band schedules. Each is a step function of one cell attribute.
double cover_now_points(const CoverSnapshot& latest);
double slope_points(double slope_deg);
double aspect_points(double aspect_deg);
double elevation_points(double elevation_m);
double inorganic_carbon_points(double inorg_c);
double organic_carbon_points(double org_c);
double soil_depth_points(double depth_cm);
double village_points(double nearest_km);

/// The nine change sub-rules of one window, evaluated on 2019 minus year-Y percentages.
enum class ChangeSubRule : std::uint8_t {
    mdf_gain,              // +  dMDF > 0
    of_gain,               // +  dOF > 0
    vdf_gain,              // +  dVDF > 0
    open_over_dense,       // +  dOF+dMDF > dVDF+dWater+dScrub
    nonforest_over_open,   // +  dNF > dOF+dMDF
    vdf_over_open,         // +  dVDF > dOF+dMDF
    water_gain,            // -  dWater > 0
    scrub_gain,            // -  dScrub > 0
    dense_over_open,       // -  dVDF+dWater+dScrub > dOF+dMDF
};
inline constexpr std::size_t kChangeSubRuleCount = 9;
inline constexpr std::size_t kPositiveSubRules = 6;

using ChangeFlags = std::bitset<kChangeSubRuleCount>;

ChangeFlags change_sub_rules(const CoverSnapshot& then, const CoverSnapshot& now);

/// Per-sub-rule point value of a change window (0.3 for 2015 down to 0.06 for 2001).
double change_unit_points(RuleId window);
int change_window_year(RuleId window);

/// Signed sum of fired sub-rules, clamped to [0, 6 * unit].
double change_points(RuleId window, const ChangeFlags& fired);

/// Raw points of one rule for one cell, as printed in the rubric schedule.
double rule_points(RuleId rule, const GridCell& cell);

/// Normalizes raw points into contributions and aggregates them.
ExpertScore aggregate_points(std::span<const double, kRuleCount> raw_points);

ExpertScore expert_score(const GridCell& cell);

/// {grid_id, rules:[{rule_id, raw, max_raw, weight, contribution}], s_raw, s}
nlohmann::json breakdown_json(GridId grid_id, const ExpertScore& score);

}  // namespace plantsite
