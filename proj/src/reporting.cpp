#include "plantsite/reporting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "plantsite/io_util.hpp"

namespace plantsite {

using nlohmann::json;

namespace {

struct Accumulator {
    std::size_t count = 0;
    double of = 0, mdf = 0, vdf = 0, nf = 0, elev = 0;
    std::size_t village = 0;

    void add(const GridCell& c)
    {
        const auto& now = c.latest();
        ++count;
        of += now.of_pct;
        mdf += now.mdf_pct;
        vdf += now.vdf_pct;
        nf += now.nf_pct;
        elev += c.terrain.elevation_m;
        if (c.villages_within_1km >= 1) ++village;
    }

    ClassRow finish() const
    {
        ClassRow r;
        r.count = count;
        r.cells_with_village_within_1km = village;
        if (count > 0) {
            const double n = static_cast<double>(count);
            r.mean_of_pct = of / n;
            r.mean_mdf_pct = mdf / n;
            r.mean_vdf_pct = vdf / n;
            r.mean_nf_pct = nf / n;
            r.mean_elevation_m = elev / n;
        }
        return r;
    }
};

std::unordered_map<GridId, const GridCell*> index_cells(std::span<const GridCell> cells)
{
    std::unordered_map<GridId, const GridCell*> idx;
    idx.reserve(cells.size());
    for (const auto& c : cells) idx.emplace(c.grid_id, &c);
    return idx;
}

// Lattice hash over cell origins; a point's containing cell has its origin
// key at the point's key or one step below on each axis.
class CellLocator {
public:
    explicit CellLocator(std::span<const GridCell> cells) : cells_(cells)
    {
        for (const auto& c : cells) size_ = std::max(size_, c.size_m);
        for (std::size_t i = 0; i < cells.size(); ++i) buckets_[key(cells[i].origin)].push_back(i);
    }

    const GridCell* find(Point p) const
    {
        if (cells_.empty()) return nullptr;
        const auto [kx, ky] = key(p);
        const GridCell* best = nullptr;
        for (std::int64_t dx = -1; dx <= 0; ++dx) {
            for (std::int64_t dy = -1; dy <= 0; ++dy) {
                auto it = buckets_.find({kx + dx, ky + dy});
                if (it == buckets_.end()) continue;
                for (auto i : it->second)
                    if (cells_[i].contains(p) && (!best || cells_[i].grid_id < best->grid_id)) best = &cells_[i];
            }
        }
        return best;
    }

private:
    using Key = std::pair<std::int64_t, std::int64_t>;
    Key key(Point p) const
    {
        return {static_cast<std::int64_t>(std::floor(p.x / size_)), static_cast<std::int64_t>(std::floor(p.y / size_))};
    }

    std::span<const GridCell> cells_;
    double size_ = 0.0;
    std::map<Key, std::vector<std::size_t>> buckets_;
};

std::string opt(const std::optional<double>& v) { return v ? format_number(*v) : ""; }
json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

ClassDescriptives class_descriptives(std::span<const SuitabilityRecord> records, std::span<const GridCell> cells)
{
    const auto idx = index_cells(cells);
    std::vector<const SuitabilityRecord*> ordered;
    ordered.reserve(records.size());
    for (const auto& r : records) ordered.push_back(&r);
    std::sort(ordered.begin(), ordered.end(), [](auto* a, auto* b) { return a->grid_id < b->grid_id; });

    std::array<Accumulator, kClassCount> acc{};
    for (const auto* r : ordered) {
        auto it = idx.find(r->grid_id);
        if (it == idx.end())
            throw ValidationError("score record for grid " + std::to_string(r->grid_id) + " has no matching cell");
        acc[static_cast<std::size_t>(r->cls)].add(*it->second);
    }
    ClassDescriptives d;
    for (std::size_t k = 0; k < kClassCount; ++k) d.rows[k] = acc[k].finish();
    return d;
}

std::vector<Site> parse_sites_csv(std::string_view text)
{
    CsvTable t(text, "sites.csv");
    const auto id = t.column("site_id"), x = t.column("x"), y = t.column("y");
    std::vector<Site> sites;
    for (std::size_t r = 0; r < t.rows(); ++r) sites.push_back({t.integer(r, id), {t.number(r, x), t.number(r, y)}});
    return sites;
}

SiteEvaluation evaluate_proposed_sites(std::span<const Site> sites, std::span<const SuitabilityRecord> records,
                                       std::span<const GridCell> cells)
{
    std::unordered_map<GridId, const SuitabilityRecord*> by_id;
    for (const auto& r : records) by_id.emplace(r.grid_id, &r);
    const CellLocator locator(cells);

    SiteEvaluation e;
    std::array<Accumulator, kClassCount> acc{};
    for (const auto& site : sites) {
        const GridCell* cell = locator.find(site.location);
        const auto rec = cell ? by_id.find(cell->grid_id) : by_id.end();
        if (!cell || rec == by_id.end()) {
            ++e.unmapped;
            continue;
        }
        const auto k = static_cast<std::size_t>(rec->second->cls);
        ++e.counts[k];
        ++e.mapped;
        acc[k].add(*cell);
    }
    for (std::size_t k = 0; k < kClassCount; ++k) {
        e.share_pct[k] = e.mapped ? 100.0 * static_cast<double>(e.counts[k]) / static_cast<double>(e.mapped) : 0.0;
        e.descriptives.rows[k] = acc[k].finish();
    }
    return e;
}

ScoreHistogram score_histogram(std::span<const SuitabilityRecord> records)
{
    ScoreHistogram h;
    for (const auto& r : records) {
        const auto bin = static_cast<std::size_t>(std::clamp(std::floor(r.x / 10.0), 0.0, 9.0));
        ++h.counts[static_cast<std::size_t>(r.cls)][bin];
    }
    return h;
}

std::string descriptives_csv(const ClassDescriptives& d)
{
    std::string out = "class,count,mean_of_pct,mean_mdf_pct,mean_vdf_pct,mean_nf_pct,mean_elevation_m,"
                      "cells_with_village_within_1km\n";
    for (auto c : kAllClasses) {
        const auto& r = d[c];
        out += std::string(to_string(c)) + "," + std::to_string(r.count) + "," + opt(r.mean_of_pct) + "," +
               opt(r.mean_mdf_pct) + "," + opt(r.mean_vdf_pct) + "," + opt(r.mean_nf_pct) + "," +
               opt(r.mean_elevation_m) + "," + std::to_string(r.cells_with_village_within_1km) + "\n";
    }
    return out;
}

std::string site_evaluation_csv(const SiteEvaluation& e)
{
    std::string out = "class,sites,share_pct,mean_of_pct,mean_mdf_pct,mean_vdf_pct,mean_nf_pct,mean_elevation_m,"
                      "cells_with_village_within_1km\n";
    for (auto c : kAllClasses) {
        const auto k = static_cast<std::size_t>(c);
        const auto& r = e.descriptives.rows[k];
        out += std::string(to_string(c)) + "," + std::to_string(e.counts[k]) + "," + format_number(e.share_pct[k]) +
               "," + opt(r.mean_of_pct) + "," + opt(r.mean_mdf_pct) + "," + opt(r.mean_vdf_pct) + "," +
               opt(r.mean_nf_pct) + "," + opt(r.mean_elevation_m) + "," + std::to_string(r.cells_with_village_within_1km) +
               "\n";
    }
    out += "unmapped," + std::to_string(e.unmapped) + ",,,,,,,\n";
    return out;
}

std::string histogram_csv(const ScoreHistogram& h)
{
    std::string out = "class,bin_lo,bin_hi,count\n";
    for (auto c : kAllClasses) {
        for (std::size_t b = 0; b < ScoreHistogram::kBins; ++b) {
            out += std::string(to_string(c)) + "," + std::to_string(b * 10) + "," + std::to_string(b * 10 + 10) + "," +
                   std::to_string(h.counts[static_cast<std::size_t>(c)][b]) + "\n";
        }
    }
    return out;
}

std::string distribution_csv(const ClassDistribution& d)
{
    std::string out = "largely_unsuitable_pct,low_pct,medium_pct,high_pct\n";
    for (std::size_t k = 0; k < kClassCount; ++k) out += (k ? "," : "") + format_number(d.pct[k]);
    return out + "\n";
}

json to_json(const ClassDescriptives& d)
{
    json arr = json::array();
    for (auto c : kAllClasses) {
        const auto& r = d[c];
        arr.push_back({{"class", to_string(c)},
                       {"count", r.count},
                       {"mean_of_pct", opt_json(r.mean_of_pct)},
                       {"mean_mdf_pct", opt_json(r.mean_mdf_pct)},
                       {"mean_vdf_pct", opt_json(r.mean_vdf_pct)},
                       {"mean_nf_pct", opt_json(r.mean_nf_pct)},
                       {"mean_elevation_m", opt_json(r.mean_elevation_m)},
                       {"cells_with_village_within_1km", r.cells_with_village_within_1km}});
    }
    return arr;
}

json to_json(const ClassDistribution& d)
{
    return {{"largely_unsuitable_pct", d.pct[0]}, {"low_pct", d.pct[1]}, {"medium_pct", d.pct[2]}, {"high_pct", d.pct[3]}};
}

json to_json(const SuitabilityRecord& r)
{
    json reasons = json::array();
    for (const auto& reason : r.exclusion.reasons) reasons.push_back(reason.to_string());
    return {{"grid_id", r.grid_id}, {"s", r.s},
            {"m", r.m},             {"x", r.x},
            {"class", to_string(r.cls)}, {"exclusion_reasons", std::move(reasons)},
            {"ml_neutral", r.ml_neutral}};
}

SuitabilityRecord record_from_json(const json& j)
{
    SuitabilityRecord r;
    r.grid_id = j.at("grid_id").get<GridId>();
    r.s = j.at("s").get<double>();
    r.m = j.at("m").get<double>();
    r.x = j.at("x").get<double>();
    r.cls = parse_class(j.at("class").get<std::string>());
    for (const auto& reason : j.at("exclusion_reasons"))
        r.exclusion.reasons.push_back(ExclusionReason::parse(reason.get<std::string>()));
    r.ml_neutral = j.value("ml_neutral", false);
    return r;
}

std::string records_json(std::span<const SuitabilityRecord> records)
{
    json arr = json::array();
    for (const auto& r : records) arr.push_back(to_json(r));
    return arr.dump(1) + "\n";
}

std::vector<SuitabilityRecord> parse_records_json(std::string_view text)
{
    try {
        const json arr = json::parse(text);
        std::vector<SuitabilityRecord> out;
        for (const auto& j : arr) out.push_back(record_from_json(j));
        return out;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("malformed records JSON: ") + e.what());
    }
}

void export_summary(std::span<const SuitabilityRecord> records, const std::filesystem::path& path, ExportFormat format)
{
    write_file_atomic(path, format == ExportFormat::csv ? write_scores_csv(records) : records_json(records));
}

std::string format_report(const ClassDistribution& distribution, const ClassDescriptives& descriptives,
                          const std::optional<SiteEvaluation>& sites)
{
    auto num = [](const std::optional<double>& v, int decimals) {
        if (!v) return std::string("-");
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.*f", decimals, *v);
        return std::string(buf);
    };
    char line[256];
    std::string out = "Class distribution (% of cells)\n";
    for (auto c : kAllClasses) {
        std::snprintf(line, sizeof line, "  %-20s %8.2f\n", std::string(to_string(c)).c_str(), distribution[c]);
        out += line;
    }
    out += "\nClass descriptives (2019 cover)\n";
    std::snprintf(line, sizeof line, "  %-20s %7s %7s %7s %7s %7s %9s %9s\n", "class", "cells", "OF%", "MDF%", "VDF%",
                  "NF%", "elev_m", "vill<=1km");
    out += line;
    for (auto c : kAllClasses) {
        const auto& r = descriptives[c];
        std::snprintf(line, sizeof line, "  %-20s %7zu %7s %7s %7s %7s %7s %9zu\n", std::string(to_string(c)).c_str(),
                      r.count, num(r.mean_of_pct, 2).c_str(), num(r.mean_mdf_pct, 2).c_str(),
                      num(r.mean_vdf_pct, 2).c_str(), num(r.mean_nf_pct, 2).c_str(), num(r.mean_elevation_m, 0).c_str(),
                      r.cells_with_village_within_1km);
        out += line;
    }
    if (sites) {
        out += "\nProposed sites\n";
        for (auto c : kAllClasses) {
            const auto k = static_cast<std::size_t>(c);
            std::snprintf(line, sizeof line, "  %-20s %7zu %7.2f%%\n", std::string(to_string(c)).c_str(),
                          sites->counts[k], sites->share_pct[k]);
            out += line;
        }
        std::snprintf(line, sizeof line, "  mapped %zu, unmapped %zu\n", sites->mapped, sites->unmapped);
        out += line;
    }
    return out;
}

}  // namespace plantsite
