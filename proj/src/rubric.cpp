#include "plantsite/rubric.hpp"

#include <algorithm>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace plantsite {

namespace {

constexpr std::array<RuleSpec, kRuleCount> kRules{{
    {RuleId::cover_now, "cover_now", 50.0, 50.0},
    {RuleId::slope, "slope", 3.0, 1.5},
    {RuleId::aspect, "aspect", 3.0, 1.5},
    {RuleId::elevation, "elevation", 3.0, 1.2},
    {RuleId::inorg_c, "inorg_c", 2.0, 1.0},
    {RuleId::org_c, "org_c", 2.0, 1.0},
    {RuleId::soil_depth, "soil_depth", 6.0, 3.0},
    {RuleId::village, "village", 5.0, 3.0},
    {RuleId::chg_2015, "chg_2015", 5.0, 6 * 0.3},
    {RuleId::chg_2013, "chg_2013", 4.0, 6 * 0.26},
    {RuleId::chg_2009, "chg_2009", 3.0, 6 * 0.2},
    {RuleId::chg_2005, "chg_2005", 2.0, 6 * 0.13},
    {RuleId::chg_2003, "chg_2003", 1.0, 6 * 0.06},
    {RuleId::chg_2001, "chg_2001", 1.0, 6 * 0.06},
}};

bool is_change_window(RuleId id) { return static_cast<std::size_t>(id) >= static_cast<std::size_t>(RuleId::chg_2015); }

}  // namespace

const std::array<RuleSpec, kRuleCount>& rubric_rules() { return kRules; }

const RuleSpec& rule_spec(RuleId id) { return kRules[static_cast<std::size_t>(id)]; }

std::string_view to_string(RuleId id) { return rule_spec(id).name; }

std::optional<RuleId> parse_rule_id(std::string_view name)
{
    for (const auto& r : kRules)
        if (r.name == name) return r.id;
    return std::nullopt;
}

double cover_now_points(const CoverSnapshot& latest) { return 0.5 * (latest.mdf_pct + latest.of_pct); }

double slope_points(double slope_deg)
{
    if (slope_deg <= 30.0) return 1.5;
    if (slope_deg <= 50.0) return 1.0;
    return 0.5;
}

double aspect_points(double aspect_deg)
{
    if (aspect_deg >= 315.0 || aspect_deg < 45.0) return 1.5;  // north
    if (aspect_deg < 135.0) return 1.0;                          // east
    if (aspect_deg < 225.0) return 0.5;                          // south
    return 1.0;                                                  // west, scored like east
}

double elevation_points(double elevation_m)
{
    if (elevation_m <= 1000.0) return 1.2;
    if (elevation_m <= 2000.0) return 0.8;
    if (elevation_m <= 2500.0) return 0.6;
    return 0.4;
}

double inorganic_carbon_points(double inorg_c)
{
    if (inorg_c <= 1.5) return 0.4;
    if (inorg_c <= 4.5) return 0.6;
    return 1.0;
}

double organic_carbon_points(double org_c)
{
    if (org_c <= 5.0) return 0.4;
    if (org_c <= 15.0) return 0.6;
    return 1.0;
}

double soil_depth_points(double depth_cm)
{
    if (depth_cm < 50.0) return 1.0;
    if (depth_cm < 100.0) return 2.0;
    return 3.0;
}

double village_points(double nearest_km)
{
    if (nearest_km < 1.0) return 1.0;
    if (nearest_km < 3.0) return 2.0;
    return 3.0;
}

ChangeFlags change_sub_rules(const CoverSnapshot& then, const CoverSnapshot& now)
{
    const double d_of = now.of_pct - then.of_pct;
    const double d_mdf = now.mdf_pct - then.mdf_pct;
    const double d_vdf = now.vdf_pct - then.vdf_pct;
    const double d_nf = now.nf_pct - then.nf_pct;
    const double d_scrub = now.scrub_pct - then.scrub_pct;
    const double d_water = now.water_pct - then.water_pct;
    const double open = d_of + d_mdf;
    const double dense = d_vdf + d_water + d_scrub;

    ChangeFlags fired;
    fired[static_cast<std::size_t>(ChangeSubRule::mdf_gain)] = d_mdf > 0.0;
    fired[static_cast<std::size_t>(ChangeSubRule::of_gain)] = d_of > 0.0;
    fired[static_cast<std::size_t>(ChangeSubRule::vdf_gain)] = d_vdf > 0.0;
    fired[static_cast<std::size_t>(ChangeSubRule::open_over_dense)] = open > dense;
    fired[static_cast<std::size_t>(ChangeSubRule::nonforest_over_open)] = d_nf > open;
    fired[static_cast<std::size_t>(ChangeSubRule::vdf_over_open)] = d_vdf > open;
    fired[static_cast<std::size_t>(ChangeSubRule::water_gain)] = d_water > 0.0;
    fired[static_cast<std::size_t>(ChangeSubRule::scrub_gain)] = d_scrub > 0.0;
    fired[static_cast<std::size_t>(ChangeSubRule::dense_over_open)] = dense > open;
    return fired;
}

double change_unit_points(RuleId window)
{
    switch (window) {
    case RuleId::chg_2015: return 0.3;
    case RuleId::chg_2013: return 0.26;
    case RuleId::chg_2009: return 0.2;
    case RuleId::chg_2005: return 0.13;
    case RuleId::chg_2003: return 0.06;
    case RuleId::chg_2001: return 0.06;
    default: throw std::invalid_argument("not a change window: " + std::string(to_string(window)));
    }
}

int change_window_year(RuleId window)
{
    switch (window) {
    case RuleId::chg_2015: return 2015;
    case RuleId::chg_2013: return 2013;
    case RuleId::chg_2009: return 2009;
    case RuleId::chg_2005: return 2005;
    case RuleId::chg_2003: return 2003;
    case RuleId::chg_2001: return 2001;
    default: throw std::invalid_argument("not a change window: " + std::string(to_string(window)));
    }
}

double change_points(RuleId window, const ChangeFlags& fired)
{
    const double unit = change_unit_points(window);
    double raw = 0.0;
    for (std::size_t k = 0; k < kChangeSubRuleCount; ++k) {
        if (!fired[k]) continue;
        raw += k < kPositiveSubRules ? unit : -unit;
    }
    return std::clamp(raw, 0.0, rule_spec(window).max_raw);
}

double rule_points(RuleId rule, const GridCell& cell)
{
    switch (rule) {
    case RuleId::cover_now: return cover_now_points(cell.latest());
    case RuleId::slope: return slope_points(cell.terrain.slope_deg);
    case RuleId::aspect: return aspect_points(cell.terrain.aspect_deg);
    case RuleId::elevation: return elevation_points(cell.terrain.elevation_m);
    case RuleId::inorg_c: return inorganic_carbon_points(cell.soil.inorg_c);
    case RuleId::org_c: return organic_carbon_points(cell.soil.org_c);
    case RuleId::soil_depth: return soil_depth_points(cell.soil.depth_cm);
    case RuleId::village: return village_points(cell.village_dist_km);
    default: break;
    }
    if (!is_change_window(rule) || static_cast<std::size_t>(rule) >= kRuleCount)
        throw std::invalid_argument("unknown rule id");
    return change_points(rule, change_sub_rules(cell.cover(change_window_year(rule)), cell.latest()));
}

ExpertScore aggregate_points(std::span<const double, kRuleCount> raw_points)
{
    ExpertScore score;
    for (std::size_t i = 0; i < kRuleCount; ++i) {
        const auto& spec = kRules[i];
        auto& c = score.per_rule[i];
        c.rule_id = spec.id;
        c.raw_points = raw_points[i];
        c.max_raw = spec.max_raw;
        c.weight_pct = spec.weight_pct;
        // ratio first, so a rule at its cap contributes exactly its weight
        c.contribution = spec.weight_pct * (std::clamp(raw_points[i], 0.0, spec.max_raw) / spec.max_raw);
        score.s_raw += c.contribution;
    }
    score.s = score.s_raw * 100.0 / kExpertBudget;
    return score;
}

ExpertScore expert_score(const GridCell& cell)
{
    std::array<double, kRuleCount> raw{};
    for (std::size_t i = 0; i < kRuleCount; ++i) raw[i] = rule_points(kRules[i].id, cell);
    return aggregate_points(raw);
}

nlohmann::json breakdown_json(GridId grid_id, const ExpertScore& score)
{
    auto rules = nlohmann::json::array();
    for (const auto& c : score.per_rule) {
        rules.push_back({{"rule_id", to_string(c.rule_id)},
                         {"raw", c.raw_points},
                         {"max_raw", c.max_raw},
                         {"weight", c.weight_pct},
                         {"contribution", c.contribution}});
    }
    return {{"grid_id", grid_id}, {"rules", std::move(rules)}, {"s_raw", score.s_raw}, {"s", score.s}};
}

}  // namespace plantsite
