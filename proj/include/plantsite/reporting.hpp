#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "plantsite/fusion.hpp"
#include "plantsite/landscape.hpp"

namespace plantsite {

/// Table-2 style attributes of the cells in one class. Means are over member
/// cells only and empty for an empty class.
struct ClassRow {
    std::size_t count = 0;
    std::optional<double> mean_of_pct;
    std::optional<double> mean_mdf_pct;
    std::optional<double> mean_vdf_pct;
    std::optional<double> mean_nf_pct;
    std::optional<double> mean_elevation_m;
    std::size_t cells_with_village_within_1km = 0;

    friend bool operator==(const ClassRow&, const ClassRow&) = default;
};

struct ClassDescriptives {
    std::array<ClassRow, kClassCount> rows{};

    const ClassRow& operator[](SuitabilityClass c) const { return rows[static_cast<std::size_t>(c)]; }
    friend bool operator==(const ClassDescriptives&, const ClassDescriptives&) = default;
};

/// Cover columns use the 2019 snapshot. Throws ValidationError when a record's
/// grid_id has no cell.
ClassDescriptives class_descriptives(std::span<const SuitabilityRecord> records, std::span<const GridCell> cells);

struct Site {
    std::int64_t site_id = 0;
    Point location;
};

std::vector<Site> parse_sites_csv(std::string_view text);

struct SiteEvaluation {
    std::array<std::size_t, kClassCount> counts{};
    std::array<double, kClassCount> share_pct{};  // of mapped sites
    std::size_t mapped = 0;
    std::size_t unmapped = 0;
    /// Table-3 columns; a cell hosting several sites is counted once per site.
    ClassDescriptives descriptives;
};

/// Maps each site to the cell containing it and buckets by that cell's class.
SiteEvaluation evaluate_proposed_sites(std::span<const Site> sites, std::span<const SuitabilityRecord> records,
                                       std::span<const GridCell> cells);

/// Published monsoon-2020 site shares by class, for reference only.
inline constexpr std::array<double, kClassCount> kReferenceSiteSharesPct{25.4, 40.6, 33.2, 0.9};

/// Per-class histogram of fused scores in 10-point bins; the last bin is closed.
struct ScoreHistogram {
    static constexpr std::size_t kBins = 10;
    std::array<std::array<std::size_t, kBins>, kClassCount> counts{};
};

ScoreHistogram score_histogram(std::span<const SuitabilityRecord> records);

std::string descriptives_csv(const ClassDescriptives& d);
std::string site_evaluation_csv(const SiteEvaluation& e);
std::string histogram_csv(const ScoreHistogram& h);
std::string distribution_csv(const ClassDistribution& d);

nlohmann::json to_json(const ClassDescriptives& d);
nlohmann::json to_json(const ClassDistribution& d);
nlohmann::json to_json(const SuitabilityRecord& r);
SuitabilityRecord record_from_json(const nlohmann::json& j);

enum class ExportFormat { csv, json };

/// Writes every record (atomically) with a stable column order. CSV is the
/// scores.csv schema; JSON is an array of {grid_id, s, m, x, class, exclusion_reasons, ml_neutral}.
void export_summary(std::span<const SuitabilityRecord> records, const std::filesystem::path& path, ExportFormat format);
std::string records_json(std::span<const SuitabilityRecord> records);
std::vector<SuitabilityRecord> parse_records_json(std::string_view text);

/// Plain-text tables for terminals.
std::string format_report(const ClassDistribution& distribution, const ClassDescriptives& descriptives,
                          const std::optional<SiteEvaluation>& sites);

}  // namespace plantsite
