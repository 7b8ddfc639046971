#include "plantsite/landscape.hpp"

#include <algorithm>
#include <cmath>

#include "plantsite/io_util.hpp"

namespace plantsite {

const std::array<std::string_view, kFeatureCount> kFeatureNames{
    "households",   "population",   "farmers",      "sc_population", "literates",   "marginal_workers",
    "nightlights",  "road_density", "small_holdings", "grazing_density", "area_ha",  "crop_area_ha",
    "grass_area_ha", "bare_area_ha", "soil_depth_cm", "awc_code",    "topsoil_c",    "subsoil_c",
    "topsoil_oc",   "subsoil_oc",   "ph_topsoil",   "bulk_density", "cec_topsoil",  "cec_subsoil",
    "elevation_m",  "slope_deg",    "fc_2003_ha",   "fire_count",   "temperature_c", "precipitation_mm",
    "lst_k"};

std::optional<std::size_t> feature_index(std::string_view name)
{
    auto it = std::find(kFeatureNames.begin(), kFeatureNames.end(), name);
    if (it == kFeatureNames.end()) return std::nullopt;
    return static_cast<std::size_t>(it - kFeatureNames.begin());
}

std::optional<std::size_t> snapshot_index(int year)
{
    auto it = std::find(kSnapshotYears.begin(), kSnapshotYears.end(), year);
    if (it == kSnapshotYears.end()) return std::nullopt;
    return static_cast<std::size_t>(it - kSnapshotYears.begin());
}

std::string_view to_string(LanduseFlag flag)
{
    switch (flag) {
    case LanduseFlag::grassland: return "grassland";
    case LanduseFlag::alpine_pasture: return "alpine_pasture";
    case LanduseFlag::trans_himalayan: return "trans_himalayan";
    case LanduseFlag::snow: return "snow";
    case LanduseFlag::agriculture: return "agriculture";
    case LanduseFlag::road: return "road";
    }
    return "?";
}

std::optional<LanduseFlag> parse_landuse_flag(std::string_view name)
{
    for (auto f : kAllLanduseFlags)
        if (to_string(f) == name) return f;
    return std::nullopt;
}

std::string LanduseFlags::to_string() const
{
    std::string out;
    for (auto f : kAllLanduseFlags) {
        if (!has(f)) continue;
        if (!out.empty()) out += '|';
        out += plantsite::to_string(f);
    }
    return out;
}

LanduseFlags LanduseFlags::parse(std::string_view text)
{
    LanduseFlags flags;
    text = trim(text);
    if (text.empty()) return flags;
    for (auto part : split(text, '|')) {
        auto f = parse_landuse_flag(trim(part));
        if (!f) throw ValidationError("unknown land-use flag '" + std::string(part) + "'");
        flags.set(*f);
    }
    return flags;
}

const CoverSnapshot& GridCell::cover(int year) const
{
    auto idx = snapshot_index(year);
    if (!idx) throw std::out_of_range("no snapshot for year " + std::to_string(year));
    return covers[*idx];
}

double signed_area(const std::vector<Point>& polygon)
{
    double twice = 0.0;
    const std::size_t n = polygon.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point a = polygon[i];
        const Point b = polygon[(i + 1) % n];
        twice += a.x * b.y - b.x * a.y;
    }
    return twice / 2.0;
}

bool point_in_polygon(Point p, const std::vector<Point>& polygon)
{
    bool inside = false;
    const std::size_t n = polygon.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Point a = polygon[i];
        const Point b = polygon[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double x_cross = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
            if (p.x < x_cross) inside = !inside;
        }
    }
    return inside;
}

namespace {

bool in_range(double v, double lo, double hi) { return std::isfinite(v) && v >= lo && v <= hi; }

bool segments_cross(Point a, Point b, Point c, Point d)
{
    auto orient = [](Point p, Point q, Point r) {
        const double v = (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
        return (v > 0) - (v < 0);
    };
    const int o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a), o4 = orient(c, d, b);
    return o1 * o2 < 0 && o3 * o4 < 0;
}

}  // namespace

void validate(const CoverSnapshot& s)
{
    const std::string year = std::to_string(s.year);
    if (!snapshot_index(s.year)) throw ValidationError("unexpected snapshot year " + year);
    for (double v : {s.of_pct, s.mdf_pct, s.vdf_pct, s.nf_pct, s.scrub_pct, s.water_pct})
        if (!in_range(v, 0.0, 100.0))
            throw ValidationError("cover fraction " + format_number(v) + " outside [0,100] in year " + year);
    const double sum = s.sum();
    if (std::abs(sum - 100.0) > kCoverSumTolerance)
        throw ValidationError("cover sum " + format_number(sum) + " in year " + year + " is not 100 +/- 0.01");
}

void validate(const GridCell& cell)
{
    if (!(cell.size_m > 0.0)) throw ValidationError("cell size must be positive");
    for (std::size_t i = 0; i < kSnapshotCount; ++i) {
        if (cell.covers[i].year != kSnapshotYears[i])
            throw ValidationError("snapshot " + std::to_string(i) + " has year " + std::to_string(cell.covers[i].year) +
                                  ", expected " + std::to_string(kSnapshotYears[i]));
        validate(cell.covers[i]);
    }
    if (!std::isfinite(cell.terrain.elevation_m)) throw ValidationError("elevation is not finite");
    if (!in_range(cell.terrain.slope_deg, 0.0, 90.0))
        throw ValidationError("slope " + format_number(cell.terrain.slope_deg) + " outside [0,90]");
    if (!(cell.terrain.aspect_deg >= 0.0 && cell.terrain.aspect_deg < 360.0))
        throw ValidationError("aspect " + format_number(cell.terrain.aspect_deg) + " outside [0,360)");
    if (!(cell.soil.depth_cm >= 0.0) || !(cell.soil.org_c >= 0.0) || !(cell.soil.inorg_c >= 0.0))
        throw ValidationError("soil values must be non-negative");
    if (!(cell.village_dist_km >= 0.0)) throw ValidationError("village distance must be non-negative");
    if (cell.villages_within_1km < 0) throw ValidationError("village count must be non-negative");
}

void validate(const Compartment& c)
{
    const std::string id = "compartment " + std::to_string(c.compartment_id);
    if (c.polygon.size() < 3) throw ValidationError(id + ": polygon needs at least 3 vertices");
    for (auto p : c.polygon)
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw ValidationError(id + ": non-finite vertex");
    if (!(std::abs(signed_area(c.polygon)) > 0.0)) throw ValidationError(id + ": polygon has zero area");
    const std::size_t n = c.polygon.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (j == i + 1 || (i == 0 && j == n - 1)) continue;
            if (segments_cross(c.polygon[i], c.polygon[(i + 1) % n], c.polygon[j], c.polygon[(j + 1) % n]))
                throw ValidationError(id + ": polygon is self-intersecting");
        }
    }
    const double awc = c.features[Feature::awc_code];
    if (!(awc >= 1.0 && awc <= 7.0) || awc != std::floor(awc))
        throw ValidationError(id + ": awc_code must be an integer in 1..7");
    for (std::size_t i = 0; i < kFeatureCount; ++i)
        if (!std::isfinite(c.features.values[i]))
            throw ValidationError(id + ": feature " + std::string(kFeatureNames[i]) + " is not finite");
    if (c.label && *c.label != 0 && *c.label != 1) throw ValidationError(id + ": label must be 0, 1 or null");
    if (c.label && c.fc_2015_ha) {
        const int derived = (*c.fc_2015_ha - c.features[Feature::fc_2003_ha] < 0.0) ? 1 : 0;
        if (derived != *c.label) throw ValidationError(id + ": label disagrees with the 2003-2015 cover change");
    }
}

std::string_view to_string(Profile profile)
{
    switch (profile) {
    case Profile::uniform: return "uniform";
    case Profile::himalayan_gradient: return "himalayan-gradient";
    case Profile::separable_loss: return "separable-loss";
    }
    return "?";
}

Profile parse_profile(std::string_view name)
{
    for (auto p : {Profile::uniform, Profile::himalayan_gradient, Profile::separable_loss})
        if (to_string(p) == name) return p;
    throw ValidationError("unknown profile '" + std::string(name) + "'");
}

bool separable_loss_rule(const CompartmentFeatures& features)
{
    return features[Feature::grazing_density] > kSeparableGrazingThreshold &&
           features[Feature::fire_count] >= kSeparableFireThreshold;
}

}  // namespace plantsite
