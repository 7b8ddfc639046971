#include "plantsite/config.hpp"

#include <cmath>

#include "plantsite/io_util.hpp"

namespace plantsite {

namespace {

double number_value(std::string_view key, std::string_view value)
{
    try {
        return parse_number(value);
    } catch (const std::invalid_argument&) {
        throw ConfigError("config key '" + std::string(key) + "': not a number: '" + std::string(value) + "'");
    }
}

std::int64_t integer_value(std::string_view key, std::string_view value)
{
    try {
        return parse_integer(value);
    } catch (const std::invalid_argument&) {
        throw ConfigError("config key '" + std::string(key) + "': not an integer: '" + std::string(value) + "'");
    }
}

}  // namespace

const std::vector<std::string_view>& RunConfig::keys()
{
    static const std::vector<std::string_view> k{
        "alpha",    "treeline_m", "blank_threshold_pct", "vdf_threshold",  "scrub_threshold",  "resource_threshold",
        "seed",     "n_rounds",   "max_depth",           "learning_rate", "min_leaf",         "feature_subsample",
        "cell_size_m"};
    return k;
}

void RunConfig::set(std::string_view key, std::string_view value)
{
    key = trim(key);
    value = trim(value);
    if (key == "alpha") alpha = number_value(key, value);
    else if (key == "treeline_m") exclusion.treeline_m = number_value(key, value);
    else if (key == "blank_threshold_pct") exclusion.blank_threshold_pct = number_value(key, value);
    else if (key == "vdf_threshold") exclusion.vdf_threshold = number_value(key, value);
    else if (key == "scrub_threshold") exclusion.scrub_threshold = number_value(key, value);
    else if (key == "resource_threshold") exclusion.resource_threshold = static_cast<int>(integer_value(key, value));
    else if (key == "seed") {
        const auto s = integer_value(key, value);
        if (s < 0) throw ConfigError("config key 'seed' must be non-negative");
        seed = static_cast<std::uint64_t>(s);
    }
    else if (key == "n_rounds") gbdt.n_rounds = static_cast<int>(integer_value(key, value));
    else if (key == "max_depth") gbdt.max_depth = static_cast<int>(integer_value(key, value));
    else if (key == "learning_rate") gbdt.learning_rate = number_value(key, value);
    else if (key == "min_leaf") gbdt.min_leaf = static_cast<int>(integer_value(key, value));
    else if (key == "feature_subsample") gbdt.feature_subsample = number_value(key, value);
    else if (key == "cell_size_m") cell_size_m = number_value(key, value);
    else throw ConfigError("unknown config key '" + std::string(key) + "'");
}

void RunConfig::validate() const
{
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0,1]");
    if (!(cell_size_m > 0.0)) throw ConfigError("cell_size_m must be positive");
    if (gbdt.n_rounds < 0) throw ConfigError("n_rounds must be non-negative");
    if (gbdt.max_depth < 0) throw ConfigError("max_depth must be non-negative");
    if (gbdt.min_leaf < 1) throw ConfigError("min_leaf must be at least 1");
    if (!(gbdt.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
    if (!(gbdt.feature_subsample > 0.0 && gbdt.feature_subsample <= 1.0))
        throw ConfigError("feature_subsample must lie in (0,1]");
    for (double v : {exclusion.treeline_m, exclusion.blank_threshold_pct, exclusion.vdf_threshold,
                     exclusion.scrub_threshold})
        if (!std::isfinite(v)) throw ConfigError("exclusion thresholds must be finite");
}

std::string RunConfig::to_text() const
{
    std::string out;
    auto line = [&](std::string_view k, const std::string& v) { out += std::string(k) + " = " + v + "\n"; };
    line("alpha", format_number(alpha));
    line("treeline_m", format_number(exclusion.treeline_m));
    line("blank_threshold_pct", format_number(exclusion.blank_threshold_pct));
    line("vdf_threshold", format_number(exclusion.vdf_threshold));
    line("scrub_threshold", format_number(exclusion.scrub_threshold));
    line("resource_threshold", std::to_string(exclusion.resource_threshold));
    line("seed", std::to_string(seed));
    line("n_rounds", std::to_string(gbdt.n_rounds));
    line("max_depth", std::to_string(gbdt.max_depth));
    line("learning_rate", format_number(gbdt.learning_rate));
    line("min_leaf", std::to_string(gbdt.min_leaf));
    line("feature_subsample", format_number(gbdt.feature_subsample));
    line("cell_size_m", format_number(cell_size_m));
    return out;
}

RunConfig RunConfig::parse(std::string_view text)
{
    RunConfig cfg;
    std::size_t lineno = 0;
    for (auto raw : split_lines(text)) {
        ++lineno;
        auto line = raw;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
        try {
            cfg.set(line.substr(0, eq), line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError("config line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    cfg.validate();
    return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) { return parse(read_file(path)); }

}  // namespace plantsite
