#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <nlohmann/json.hpp>

#include "plantsite/gridgen.hpp"
#include "plantsite/io_util.hpp"
#include "plantsite/landscape.hpp"

namespace plantsite {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 12> kGridBaseColumns{
    "grid_id",       "x_min",  "y_min",   "elevation_m",         "slope_deg",       "aspect_deg",
    "soil_depth_cm", "org_c",  "inorg_c", "villages_within_1km", "village_dist_km", "flags"};

constexpr std::array<std::string_view, 6> kCoverPrefixes{"of", "mdf", "vdf", "nf", "scrub", "water"};

std::string cover_column(std::string_view prefix, int year) { return std::string(prefix) + "_" + std::to_string(year); }

// Returns the year of a `<class>_<year>` column, or nullopt for other columns.
std::optional<int> cover_column_year(std::string_view column)
{
    for (auto prefix : kCoverPrefixes) {
        if (column.size() > prefix.size() + 1 && column.substr(0, prefix.size()) == prefix && column[prefix.size()] == '_') {
            auto rest = column.substr(prefix.size() + 1);
            if (std::all_of(rest.begin(), rest.end(), [](char c) { return c >= '0' && c <= '9'; }))
                return static_cast<int>(parse_integer(rest));
        }
    }
    return std::nullopt;
}

std::string row_prefix(std::string_view file, std::size_t row) { return std::string(file) + " row " + std::to_string(row); }

double decode_distance(double km) { return km >= kNoVillageDistanceKm ? std::numeric_limits<double>::infinity() : km; }
double encode_distance(double km) { return std::isinf(km) ? kNoVillageDistanceKm : km; }

}  // namespace

std::string write_grids_csv(const std::vector<GridCell>& cells)
{
    std::string out;
    for (std::size_t i = 0; i < kGridBaseColumns.size(); ++i) {
        if (i) out += ',';
        out += kGridBaseColumns[i];
    }
    for (int year : kSnapshotYears)
        for (auto prefix : kCoverPrefixes) out += "," + cover_column(prefix, year);
    out += '\n';

    for (const auto& c : cells) {
        out += std::to_string(c.grid_id);
        for (double v : {c.origin.x, c.origin.y, c.terrain.elevation_m, c.terrain.slope_deg, c.terrain.aspect_deg,
                         c.soil.depth_cm, c.soil.org_c, c.soil.inorg_c})
            out += "," + format_number(v);
        out += "," + std::to_string(c.villages_within_1km);
        out += "," + format_number(encode_distance(c.village_dist_km));
        out += "," + c.landuse_flags.to_string();
        for (const auto& s : c.covers)
            for (double v : {s.of_pct, s.mdf_pct, s.vdf_pct, s.nf_pct, s.scrub_pct, s.water_pct})
                out += "," + format_number(v);
        out += '\n';
    }
    return out;
}

std::vector<GridCell> parse_grids_csv(std::string_view text, double cell_size_m)
{
    const std::string file(kGridsFile);
    CsvTable table(text, file);

    for (const auto& col : table.header()) {
        if (auto year = cover_column_year(col); year && !snapshot_index(*year))
            throw ValidationError(file + ": unexpected snapshot year " + std::to_string(*year) + " (column '" + col + "')");
    }
    for (int year : kSnapshotYears) {
        bool any = false;
        for (auto prefix : kCoverPrefixes) any = any || table.has_column(cover_column(prefix, year));
        if (!any) throw ValidationError(file + ": missing snapshot year " + std::to_string(year));
    }
    std::array<std::size_t, kGridBaseColumns.size()> base{};
    for (std::size_t i = 0; i < base.size(); ++i) base[i] = table.column(kGridBaseColumns[i]);
    std::array<std::array<std::size_t, 6>, kSnapshotCount> cover_cols{};
    for (std::size_t y = 0; y < kSnapshotCount; ++y)
        for (std::size_t k = 0; k < kCoverPrefixes.size(); ++k)
            cover_cols[y][k] = table.column(cover_column(kCoverPrefixes[k], kSnapshotYears[y]));

    std::vector<GridCell> cells;
    cells.reserve(table.rows());
    std::set<GridId> seen;
    for (std::size_t r = 0; r < table.rows(); ++r) {
        GridCell c;
        c.size_m = cell_size_m;
        c.grid_id = table.integer(r, base[0]);
        c.origin = {table.number(r, base[1]), table.number(r, base[2])};
        c.terrain = {table.number(r, base[3]), table.number(r, base[4]), table.number(r, base[5])};
        c.soil = {table.number(r, base[6]), table.number(r, base[7]), table.number(r, base[8])};
        c.villages_within_1km = static_cast<int>(table.integer(r, base[9]));
        c.village_dist_km = decode_distance(table.number(r, base[10]));
        try {
            c.landuse_flags = LanduseFlags::parse(table.cell(r, base[11]));
            for (std::size_t y = 0; y < kSnapshotCount; ++y) {
                auto& s = c.covers[y];
                s.year = kSnapshotYears[y];
                s.of_pct = table.number(r, cover_cols[y][0]);
                s.mdf_pct = table.number(r, cover_cols[y][1]);
                s.vdf_pct = table.number(r, cover_cols[y][2]);
                s.nf_pct = table.number(r, cover_cols[y][3]);
                s.scrub_pct = table.number(r, cover_cols[y][4]);
                s.water_pct = table.number(r, cover_cols[y][5]);
            }
            validate(c);
        } catch (const ValidationError& e) {
            throw ValidationError(row_prefix(file, r + 1) + " (grid_id " + std::to_string(c.grid_id) + "): " + e.what());
        }
        if (!seen.insert(c.grid_id).second)
            throw ValidationError(row_prefix(file, r + 1) + ": duplicate grid_id " + std::to_string(c.grid_id));
        cells.push_back(c);
    }
    return cells;
}

std::string write_compartments_json(const std::vector<Compartment>& compartments)
{
    json arr = json::array();
    for (const auto& c : compartments) {
        json poly = json::array();
        for (auto p : c.polygon) poly.push_back({p.x, p.y});
        json features = json::object();
        for (std::size_t i = 0; i < kFeatureCount; ++i) features[std::string(kFeatureNames[i])] = c.features.values[i];
        json obj{{"compartment_id", c.compartment_id}, {"polygon", std::move(poly)}, {"features", std::move(features)}};
        obj["label"] = c.label ? json(*c.label) : json(nullptr);
        if (c.fc_2015_ha) obj["fc_2015_ha"] = *c.fc_2015_ha;
        arr.push_back(std::move(obj));
    }
    return arr.dump(1) + "\n";
}

std::vector<Compartment> parse_compartments_json(std::string_view text)
{
    const std::string file(kCompartmentsFile);
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(file + ": " + e.what());
    }
    if (!doc.is_array()) throw ValidationError(file + ": top level must be an array");

    std::vector<Compartment> out;
    std::set<CompartmentId> seen;
    for (std::size_t i = 0; i < doc.size(); ++i) {
        const auto& obj = doc[i];
        const std::string where = file + " entry " + std::to_string(i);
        try {
            if (!obj.is_object()) throw ValidationError("not an object");
            Compartment c;
            if (!obj.contains("compartment_id") || !obj["compartment_id"].is_number_integer())
                throw ValidationError("missing integer compartment_id");
            c.compartment_id = obj["compartment_id"].get<CompartmentId>();
            if (!obj.contains("polygon") || !obj["polygon"].is_array()) throw ValidationError("missing polygon");
            for (const auto& v : obj["polygon"]) {
                if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
                    throw ValidationError("malformed polygon vertex");
                c.polygon.push_back({v[0].get<double>(), v[1].get<double>()});
            }
            if (!obj.contains("features") || !obj["features"].is_object()) throw ValidationError("missing features");
            const auto& feats = obj["features"];
            for (std::size_t f = 0; f < kFeatureCount; ++f) {
                const std::string name(kFeatureNames[f]);
                if (!feats.contains(name) || !feats[name].is_number())
                    throw ValidationError("missing feature '" + name + "'");
                c.features.values[f] = feats[name].get<double>();
            }
            if (feats.size() != kFeatureCount) {
                for (const auto& [key, _] : feats.items())
                    if (!feature_index(key)) throw ValidationError("unknown feature '" + key + "'");
            }
            if (obj.contains("label") && !obj["label"].is_null()) {
                if (!obj["label"].is_number_integer()) throw ValidationError("label must be 0, 1 or null");
                c.label = obj["label"].get<int>();
            }
            if (obj.contains("fc_2015_ha") && !obj["fc_2015_ha"].is_null()) {
                if (!obj["fc_2015_ha"].is_number()) throw ValidationError("fc_2015_ha must be a number");
                c.fc_2015_ha = obj["fc_2015_ha"].get<double>();
            }
            validate(c);
            if (!seen.insert(c.compartment_id).second)
                throw ValidationError("duplicate compartment_id " + std::to_string(c.compartment_id));
            out.push_back(std::move(c));
        } catch (const ValidationError& e) {
            throw ValidationError(where + ": " + e.what());
        } catch (const json::exception& e) {
            throw ValidationError(where + ": " + e.what());
        }
    }
    return out;
}

std::string write_villages_csv(const std::vector<Village>& villages)
{
    std::string out = "village_id,x,y\n";
    for (const auto& v : villages)
        out += std::to_string(v.village_id) + "," + format_number(v.location.x) + "," + format_number(v.location.y) + "\n";
    return out;
}

std::vector<Village> parse_villages_csv(std::string_view text)
{
    CsvTable table(text, std::string(kVillagesFile));
    const auto id = table.column("village_id"), x = table.column("x"), y = table.column("y");
    std::vector<Village> out;
    for (std::size_t r = 0; r < table.rows(); ++r) {
        Village v{table.integer(r, id), {table.number(r, x), table.number(r, y)}};
        if (!std::isfinite(v.location.x) || !std::isfinite(v.location.y))
            throw ValidationError(row_prefix(kVillagesFile, r + 1) + ": non-finite coordinates");
        out.push_back(v);
    }
    return out;
}

Landscape load_landscape(const std::filesystem::path& grid_file, const std::filesystem::path& compartment_file,
                         const std::filesystem::path& village_file, double cell_size_m)
{
    Landscape l;
    l.cell_size_m = cell_size_m;
    l.cells = parse_grids_csv(read_file(grid_file), cell_size_m);
    l.compartments = parse_compartments_json(read_file(compartment_file));
    l.villages = parse_villages_csv(read_file(village_file));

    if (!l.cells.empty()) {
        Region r{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                 -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
        for (const auto& c : l.cells) {
            r.x_min = std::min(r.x_min, c.origin.x);
            r.y_min = std::min(r.y_min, c.origin.y);
            r.x_max = std::max(r.x_max, c.origin.x + c.size_m);
            r.y_max = std::max(r.y_max, c.origin.y + c.size_m);
        }
        l.region = r;
    }
    for (auto& c : l.cells) c.compartment_id = assign_compartment(frame_of(c), l.compartments);
    return l;
}

Landscape load_landscape(const std::filesystem::path& directory, double cell_size_m)
{
    return load_landscape(directory / kGridsFile, directory / kCompartmentsFile, directory / kVillagesFile, cell_size_m);
}

void save_landscape(const Landscape& landscape, const std::filesystem::path& directory)
{
    std::error_code ec;
    std::filesystem::create_directories(directory, ec);
    if (ec) throw IoError("cannot create directory " + directory.string());
    write_file_atomic(directory / kGridsFile, write_grids_csv(landscape.cells));
    write_file_atomic(directory / kCompartmentsFile, write_compartments_json(landscape.compartments));
    write_file_atomic(directory / kVillagesFile, write_villages_csv(landscape.villages));
}

}  // namespace plantsite
