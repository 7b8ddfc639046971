#include "plantsite/fusion.hpp"

#include <cmath>
#include <limits>

#include "plantsite/io_util.hpp"
#include "plantsite/parallel.hpp"
#include "plantsite/rubric.hpp"

namespace plantsite {

std::string_view to_string(SuitabilityClass c)
{
    switch (c) {
    case SuitabilityClass::largely_unsuitable: return "largely_unsuitable";
    case SuitabilityClass::low: return "low";
    case SuitabilityClass::medium: return "medium";
    case SuitabilityClass::high: return "high";
    }
    return "?";
}

SuitabilityClass parse_class(std::string_view name)
{
    for (auto c : kAllClasses)
        if (to_string(c) == name) return c;
    throw ValidationError("unknown suitability class '" + std::string(name) + "'");
}

double fuse(double s, double m, double alpha)
{
    if (!(s >= 0.0 && s <= 100.0)) throw DomainError("expert score " + format_number(s) + " outside [0,100]");
    if (!(m >= 0.0 && m <= 100.0)) throw DomainError("ML score " + format_number(m) + " outside [0,100]");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("alpha " + format_number(alpha) + " outside [0,1]");
    return alpha * s + (1.0 - alpha) * m;
}

SuitabilityClass classify(double x, bool excluded)
{
    if (excluded) return SuitabilityClass::largely_unsuitable;
    if (x > kHighAbove) return SuitabilityClass::high;
    if (x > kMediumAbove) return SuitabilityClass::medium;
    if (x > 0.0) return SuitabilityClass::low;
    return SuitabilityClass::largely_unsuitable;
}

std::pair<double, SuitabilityClass> refuse(const SuitabilityRecord& record, double alpha)
{
    if (record.excluded()) return {0.0, SuitabilityClass::largely_unsuitable};
    const double x = fuse(record.s, record.m, alpha);
    return {x, classify(x, false)};
}

std::vector<SuitabilityRecord> score_all(std::span<const GridCell> cells, const GbdtModel& model,
                                         std::span<const Compartment> compartments, const RunConfig& config,
                                         unsigned threads)
{
    config.validate();
    const CompartmentRisk risk(model, compartments);
    std::vector<SuitabilityRecord> out(cells.size());
    parallel_for(cells.size(), threads, [&](std::size_t i) {
        const auto& cell = cells[i];
        auto& r = out[i];
        r.grid_id = cell.grid_id;
        r.exclusion = apply_exclusions(cell, config.exclusion);
        r.s = expert_score(cell).s;
        const auto ml = grid_ml_score(cell, risk);
        r.m = ml.m;
        r.ml_neutral = ml.neutral;
        std::tie(r.x, r.cls) = refuse(r, config.alpha);
    });
    return out;
}

double ClassDistribution::l1_distance(const ClassDistribution& other) const
{
    double d = 0.0;
    for (std::size_t k = 0; k < kClassCount; ++k) d += std::abs(pct[k] - other.pct[k]);
    return d;
}

ClassDistribution class_distribution(std::span<const SuitabilityClass> classes, std::span<const double> weights)
{
    if (!weights.empty() && weights.size() != classes.size())
        throw std::invalid_argument("weights must match the number of classified cells");
    std::array<double, kClassCount> mass{};
    double total = 0.0;
    for (std::size_t i = 0; i < classes.size(); ++i) {
        const double w = weights.empty() ? 1.0 : weights[i];
        mass[static_cast<std::size_t>(classes[i])] += w;
        total += w;
    }
    ClassDistribution d;
    if (total > 0.0)
        for (std::size_t k = 0; k < kClassCount; ++k) d.pct[k] = 100.0 * mass[k] / total;
    return d;
}

ClassDistribution class_distribution(std::span<const SuitabilityRecord> records)
{
    std::vector<SuitabilityClass> classes;
    classes.reserve(records.size());
    for (const auto& r : records) classes.push_back(r.cls);
    return class_distribution(classes);
}

std::vector<double> default_alphas()
{
    std::vector<double> a;
    for (int k = 10; k >= 0; --k) a.push_back(k / 10.0);
    return a;
}

std::vector<SweepRow> sweep_weights(std::span<const SuitabilityRecord> records, std::span<const double> alphas,
                                    std::span<const double> weights)
{
    std::vector<SweepRow> rows;
    std::vector<SuitabilityClass> classes(records.size());
    for (double alpha : alphas) {
        if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("alpha " + format_number(alpha) + " outside [0,1]");
        for (std::size_t i = 0; i < records.size(); ++i) classes[i] = refuse(records[i], alpha).second;
        rows.push_back({alpha, class_distribution(classes, weights)});
    }
    return rows;
}

std::vector<SweepRow> sweep_weights(std::span<const GridCell> cells, const GbdtModel& model,
                                    std::span<const Compartment> compartments, const RunConfig& config,
                                    std::span<const double> alphas, unsigned threads)
{
    const auto records = score_all(cells, model, compartments, config, threads);
    return sweep_weights(records, alphas);
}

double tune_weight(std::span<const SweepRow> sweep, const ClassDistribution& reference)
{
    if (sweep.empty()) throw std::invalid_argument("cannot tune on an empty sweep");
    constexpr double kTieTolerance = 1e-9;
    double best_alpha = sweep.front().alpha;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& row : sweep) {
        const double d = row.distribution.l1_distance(reference);
        if (d < best - kTieTolerance || (std::abs(d - best) <= kTieTolerance && row.alpha > best_alpha)) {
            best = std::min(best, d);
            best_alpha = row.alpha;
        }
    }
    return best_alpha;
}

const std::vector<SweepRow>& reference_sweep_table()
{
    static const std::vector<SweepRow> table{
        {1.0, {{68.22, 18.48, 11.92, 1.37}}}, {0.9, {{68.46, 15.71, 14.15, 1.68}}},
        {0.8, {{68.46, 14.31, 16.75, 0.48}}}, {0.7, {{68.46, 13.06, 18.29, 0.19}}},
        {0.6, {{68.46, 11.48, 19.97, 0.15}}}, {0.5, {{68.46, 9.37, 22.05, 0.12}}},
        {0.4, {{68.46, 6.06, 25.36, 0.12}}},  {0.3, {{68.46, 3.57, 27.85, 0.12}}},
        {0.2, {{68.46, 3.57, 27.85, 0.12}}},  {0.1, {{68.46, 3.57, 27.86, 0.11}}},
        {0.0, {{68.46, 3.57, 27.57, 0.40}}},
    };
    return table;
}

std::string write_scores_csv(std::span<const SuitabilityRecord> records)
{
    std::string out = "grid_id,s,m,x,class,exclusion_reasons\n";
    for (const auto& r : records) {
        out += std::to_string(r.grid_id) + "," + format_number(r.s) + "," + format_number(r.m) + "," +
               format_number(r.x) + "," + std::string(to_string(r.cls)) + "," + r.exclusion.joined() + "\n";
    }
    return out;
}

std::vector<SuitabilityRecord> parse_scores_csv(std::string_view text)
{
    CsvTable t(text, "scores.csv");
    const auto id = t.column("grid_id"), s = t.column("s"), m = t.column("m"), x = t.column("x"),
               cls = t.column("class"), reasons = t.column("exclusion_reasons");
    std::vector<SuitabilityRecord> out;
    out.reserve(t.rows());
    for (std::size_t r = 0; r < t.rows(); ++r) {
        SuitabilityRecord rec;
        rec.grid_id = t.integer(r, id);
        rec.s = t.number(r, s);
        rec.m = t.number(r, m);
        rec.x = t.number(r, x);
        try {
            rec.cls = parse_class(trim(t.cell(r, cls)));
            rec.exclusion = ExclusionResult::parse(t.cell(r, reasons));
        } catch (const ValidationError& e) {
            throw ValidationError("scores.csv row " + std::to_string(r + 1) + ": " + e.what());
        }
        out.push_back(std::move(rec));
    }
    return out;
}

std::string write_sweep_csv(std::span<const SweepRow> rows)
{
    std::string out = "alpha,largely_unsuitable_pct,low_pct,medium_pct,high_pct\n";
    for (const auto& row : rows) {
        out += format_number(row.alpha);
        for (double p : row.distribution.pct) out += "," + format_number(p);
        out += "\n";
    }
    return out;
}

std::vector<SweepRow> parse_sweep_csv(std::string_view text)
{
    CsvTable t(text, "sweep.csv");
    const std::array<std::size_t, 5> cols{t.column("alpha"), t.column("largely_unsuitable_pct"), t.column("low_pct"),
                                          t.column("medium_pct"), t.column("high_pct")};
    std::vector<SweepRow> rows;
    for (std::size_t r = 0; r < t.rows(); ++r) {
        SweepRow row;
        row.alpha = t.number(r, cols[0]);
        for (std::size_t k = 0; k < kClassCount; ++k) row.distribution.pct[k] = t.number(r, cols[k + 1]);
        rows.push_back(row);
    }
    return rows;
}

}  // namespace plantsite
