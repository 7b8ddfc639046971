#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "plantsite/exclusion.hpp"
#include "plantsite/loss_model.hpp"

namespace plantsite {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kDefaultAlpha = 0.9;

/// Everything a reproducible run needs. Serialized as `key = value` lines.
struct RunConfig {
    double alpha = kDefaultAlpha;
    ExclusionPolicy exclusion;
    std::uint64_t seed = 42;
    GbdtConfig gbdt;
    double cell_size_m = kDefaultCellSizeM;

    /// Applies one key; throws ConfigError for unknown keys or bad values.
    void set(std::string_view key, std::string_view value);
    void validate() const;

    std::string to_text() const;
    static RunConfig parse(std::string_view text);
    static RunConfig load(const std::filesystem::path& path);

    static const std::vector<std::string_view>& keys();

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

}  // namespace plantsite
