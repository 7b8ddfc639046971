#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "plantsite/config.hpp"
#include "plantsite/exclusion.hpp"
#include "plantsite/landscape.hpp"
#include "plantsite/loss_model.hpp"

namespace plantsite {

enum class SuitabilityClass : std::uint8_t { largely_unsuitable, low, medium, high };
inline constexpr std::size_t kClassCount = 4;
inline constexpr std::array<SuitabilityClass, kClassCount> kAllClasses{
    SuitabilityClass::largely_unsuitable, SuitabilityClass::low, SuitabilityClass::medium, SuitabilityClass::high};

std::string_view to_string(SuitabilityClass c);
SuitabilityClass parse_class(std::string_view name);

inline constexpr double kHighAbove = 70.0;
inline constexpr double kMediumAbove = 40.0;

class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// x = alpha * s + (1 - alpha) * m. Throws DomainError when s, m are outside
/// [0,100] or alpha outside [0,1].
double fuse(double s, double m, double alpha);

/// >70 high, (40,70] medium, (0,40] low, 0 (or excluded) largely unsuitable.
SuitabilityClass classify(double x, bool excluded);

struct SuitabilityRecord {
    GridId grid_id = 0;
    double s = 0.0;
    double m = 0.0;
    double x = 0.0;
    SuitabilityClass cls = SuitabilityClass::largely_unsuitable;
    ExclusionResult exclusion;
    bool ml_neutral = false;  // cell had no compartment; m is the neutral 50

    bool excluded() const { return exclusion.excluded(); }
};

/// Fused score and class for a record's cached (s, m) at a given alpha.
std::pair<double, SuitabilityClass> refuse(const SuitabilityRecord& record, double alpha);

/// Exclusions, expert score, ML score, fusion and class for every cell.
/// Output order matches `cells`; identical for any thread count.
std::vector<SuitabilityRecord> score_all(std::span<const GridCell> cells, const GbdtModel& model,
                                         std::span<const Compartment> compartments, const RunConfig& config,
                                         unsigned threads = 1);

/// Share of each class in percent, indexed by SuitabilityClass.
struct ClassDistribution {
    std::array<double, kClassCount> pct{};

    double operator[](SuitabilityClass c) const { return pct[static_cast<std::size_t>(c)]; }
    double l1_distance(const ClassDistribution& other) const;
    friend bool operator==(const ClassDistribution&, const ClassDistribution&) = default;
};

/// Count-weighted shares, or weight-proportional when `weights` is non-empty
/// (e.g. cell areas). All zeros for an empty input.
ClassDistribution class_distribution(std::span<const SuitabilityClass> classes, std::span<const double> weights = {});
ClassDistribution class_distribution(std::span<const SuitabilityRecord> records);

struct SweepRow {
    double alpha = 0.0;
    ClassDistribution distribution;
};

/// 1.0, 0.9, ..., 0.0
std::vector<double> default_alphas();

/// Reclassifies cached (s, m) per alpha. Shares are over all records, excluded included.
std::vector<SweepRow> sweep_weights(std::span<const SuitabilityRecord> records, std::span<const double> alphas,
                                    std::span<const double> weights = {});
std::vector<SweepRow> sweep_weights(std::span<const GridCell> cells, const GbdtModel& model,
                                    std::span<const Compartment> compartments, const RunConfig& config,
                                    std::span<const double> alphas, unsigned threads = 1);

/// Row minimizing the L1 distance to `reference`; ties (within 1e-9) go to the larger alpha.
double tune_weight(std::span<const SweepRow> sweep, const ClassDistribution& reference);

/// Published class shares per expert weight, from the real-data sweep. A
/// documented reference only; synthetic landscapes are not expected to match.
const std::vector<SweepRow>& reference_sweep_table();

// scores.csv: grid_id,s,m,x,class,exclusion_reasons
std::string write_scores_csv(std::span<const SuitabilityRecord> records);
std::vector<SuitabilityRecord> parse_scores_csv(std::string_view text);

// sweep.csv: alpha,largely_unsuitable_pct,low_pct,medium_pct,high_pct
std::string write_sweep_csv(std::span<const SweepRow> rows);
std::vector<SweepRow> parse_sweep_csv(std::string_view text);

}  // namespace plantsite
