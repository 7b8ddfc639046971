#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace plantsite {

using GridId = std::int64_t;
using CompartmentId = std::int64_t;

/// Raised when ingested or synthesized data breaks a type invariant.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Point {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Point&, const Point&) = default;
};

/// Axis-aligned planar extent in meters.
struct Region {
    double x_min = 0.0;
    double y_min = 0.0;
    double x_max = 0.0;
    double y_max = 0.0;

    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    bool valid() const { return x_max > x_min && y_max > y_min; }
    bool contains(Point p) const { return p.x >= x_min && p.x < x_max && p.y >= y_min && p.y < y_max; }
    friend bool operator==(const Region&, const Region&) = default;
};

inline constexpr std::size_t kSnapshotCount = 7;
inline constexpr std::array<int, kSnapshotCount> kSnapshotYears{2001, 2003, 2005, 2009, 2013, 2015, 2019};
inline constexpr double kCoverSumTolerance = 0.01;

/// Index of `year` in kSnapshotYears, or nullopt if it is not a rubric year.
std::optional<std::size_t> snapshot_index(int year);

/// Six-way cover decomposition of a cell for one year, in percent of cell area.
struct CoverSnapshot {
    int year = 0;
    double of_pct = 0.0;
    double mdf_pct = 0.0;
    double vdf_pct = 0.0;
    double nf_pct = 0.0;
    double scrub_pct = 0.0;
    double water_pct = 0.0;

    double sum() const { return of_pct + mdf_pct + vdf_pct + nf_pct + scrub_pct + water_pct; }
    double tree_cover_pct() const { return of_pct + mdf_pct + vdf_pct; }
    friend bool operator==(const CoverSnapshot&, const CoverSnapshot&) = default;
};

struct Terrain {
    double elevation_m = 0.0;
    double slope_deg = 0.0;
    double aspect_deg = 0.0;
    friend bool operator==(const Terrain&, const Terrain&) = default;
};

/// Carbon values are in the same abstract units the rubric thresholds use.
struct Soil {
    double depth_cm = 0.0;
    double org_c = 0.0;
    double inorg_c = 0.0;
    friend bool operator==(const Soil&, const Soil&) = default;
};

enum class LanduseFlag : std::uint8_t { grassland, alpine_pasture, trans_himalayan, snow, agriculture, road };
inline constexpr std::size_t kLanduseFlagCount = 6;
inline constexpr std::array<LanduseFlag, kLanduseFlagCount> kAllLanduseFlags{
    LanduseFlag::grassland, LanduseFlag::alpine_pasture, LanduseFlag::trans_himalayan,
    LanduseFlag::snow,      LanduseFlag::agriculture,    LanduseFlag::road};

std::string_view to_string(LanduseFlag flag);
std::optional<LanduseFlag> parse_landuse_flag(std::string_view name);

class LanduseFlags {
public:
    LanduseFlags() = default;

    bool has(LanduseFlag f) const { return (bits_ & bit(f)) != 0; }
    void set(LanduseFlag f) { bits_ = static_cast<std::uint8_t>(bits_ | bit(f)); }
    void clear(LanduseFlag f) { bits_ = static_cast<std::uint8_t>(bits_ & ~bit(f)); }
    bool empty() const { return bits_ == 0; }

    /// `|`-joined names in declaration order; empty string for no flags.
    std::string to_string() const;
    static LanduseFlags parse(std::string_view text);

    friend bool operator==(const LanduseFlags&, const LanduseFlags&) = default;

private:
    static std::uint8_t bit(LanduseFlag f) { return static_cast<std::uint8_t>(1u << static_cast<unsigned>(f)); }
    std::uint8_t bits_ = 0;
};

inline constexpr double kDefaultCellSizeM = 265.0;

/// One square tile of the landscape. Covers are indexed like kSnapshotYears.
struct GridCell {
    GridId grid_id = 0;
    Point origin;
    double size_m = kDefaultCellSizeM;
    std::array<CoverSnapshot, kSnapshotCount> covers{};
    Terrain terrain;
    Soil soil;
    double village_dist_km = 0.0;  // +inf when no village exists
    int villages_within_1km = 0;
    LanduseFlags landuse_flags;
    std::optional<CompartmentId> compartment_id;

    Point center() const { return {origin.x + size_m / 2.0, origin.y + size_m / 2.0}; }
    bool contains(Point p) const
    {
        return p.x >= origin.x && p.x < origin.x + size_m && p.y >= origin.y && p.y < origin.y + size_m;
    }
    const CoverSnapshot& cover(int year) const;
    const CoverSnapshot& latest() const { return covers.back(); }

    friend bool operator==(const GridCell&, const GridCell&) = default;
};

struct Village {
    std::int64_t village_id = 0;
    Point location;
    friend bool operator==(const Village&, const Village&) = default;
};

inline constexpr std::size_t kFeatureCount = 31;

/// Predictor names in canonical order.
extern const std::array<std::string_view, kFeatureCount> kFeatureNames;

std::optional<std::size_t> feature_index(std::string_view name);

enum class Feature : std::size_t {
    households, population, farmers, sc_population, literates, marginal_workers, nightlights,
    road_density, small_holdings, grazing_density, area_ha, crop_area_ha, grass_area_ha,
    bare_area_ha, soil_depth_cm, awc_code, topsoil_c, subsoil_c, topsoil_oc, subsoil_oc,
    ph_topsoil, bulk_density, cec_topsoil, cec_subsoil, elevation_m, slope_deg, fc_2003_ha,
    fire_count, temperature_c, precipitation_mm, lst_k
};

/// The compartment predictor vector, addressable by Feature or by name.
struct CompartmentFeatures {
    std::array<double, kFeatureCount> values{};

    double operator[](Feature f) const { return values[static_cast<std::size_t>(f)]; }
    double& operator[](Feature f) { return values[static_cast<std::size_t>(f)]; }

    friend bool operator==(const CompartmentFeatures&, const CompartmentFeatures&) = default;
};

struct Compartment {
    CompartmentId compartment_id = 0;
    std::vector<Point> polygon;
    CompartmentFeatures features;
    std::optional<int> label;
    /// Forest cover in 2015, carried next to the predictors to derive the loss label.
    std::optional<double> fc_2015_ha;

    friend bool operator==(const Compartment&, const Compartment&) = default;
};

/// Shoelace area; positive for counter-clockwise rings.
double signed_area(const std::vector<Point>& polygon);

/// Even-odd ray casting test.
bool point_in_polygon(Point p, const std::vector<Point>& polygon);

struct Landscape {
    Region region;
    double cell_size_m = kDefaultCellSizeM;
    std::vector<GridCell> cells;
    std::vector<Compartment> compartments;
    std::vector<Village> villages;

    friend bool operator==(const Landscape&, const Landscape&) = default;
};

// Validation. Each throws ValidationError with a message naming the offending item.
void validate(const CoverSnapshot& snapshot);
void validate(const GridCell& cell);
void validate(const Compartment& compartment);

enum class Profile { uniform, himalayan_gradient, separable_loss };

std::string_view to_string(Profile profile);
/// Accepts "uniform", "himalayan-gradient", "separable-loss".
Profile parse_profile(std::string_view name);

struct SynthesisRequest {
    std::uint64_t seed = 1;
    Region region;
    std::size_t n_compartments = 1;
    std::size_t n_villages = 0;
    Profile profile = Profile::uniform;
    double cell_size_m = kDefaultCellSizeM;
};

/// Deterministic synthetic landscape. Throws ValidationError for a region that
/// holds no cell or a request for zero compartments.
Landscape synthesize_landscape(const SynthesisRequest& request);

/// Loss rule used by the separable-loss profile: loss iff grazing density
/// exceeds 50 and at least 8 fires were recorded.
inline constexpr double kSeparableGrazingThreshold = 50.0;
inline constexpr double kSeparableFireThreshold = 8.0;
bool separable_loss_rule(const CompartmentFeatures& features);

// File formats: grids.csv, compartments.json, villages.csv.
inline constexpr std::string_view kGridsFile = "grids.csv";
inline constexpr std::string_view kCompartmentsFile = "compartments.json";
inline constexpr std::string_view kVillagesFile = "villages.csv";

/// Serialized stand-in for an absent nearest village.
inline constexpr double kNoVillageDistanceKm = 9999.0;

std::string write_grids_csv(const std::vector<GridCell>& cells);
std::string write_compartments_json(const std::vector<Compartment>& compartments);
std::string write_villages_csv(const std::vector<Village>& villages);

std::vector<GridCell> parse_grids_csv(std::string_view text, double cell_size_m = kDefaultCellSizeM);
std::vector<Compartment> parse_compartments_json(std::string_view text);
std::vector<Village> parse_villages_csv(std::string_view text);

/// Reads the three files, validates them and joins cells to compartments.
Landscape load_landscape(const std::filesystem::path& grid_file, const std::filesystem::path& compartment_file,
                         const std::filesystem::path& village_file, double cell_size_m = kDefaultCellSizeM);
Landscape load_landscape(const std::filesystem::path& directory, double cell_size_m = kDefaultCellSizeM);

void save_landscape(const Landscape& landscape, const std::filesystem::path& directory);

}  // namespace plantsite
