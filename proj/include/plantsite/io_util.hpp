#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace plantsite {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shortest decimal text that parses back to the same double.
std::string format_number(double value);

/// Strict parse of the whole field. Throws std::invalid_argument.
double parse_number(std::string_view text);
std::int64_t parse_integer(std::string_view text);

std::vector<std::string_view> split(std::string_view line, char sep);
std::string_view trim(std::string_view text);

/// Splits on LF, dropping a trailing empty line and any CR before the LF.
std::vector<std::string_view> split_lines(std::string_view text);

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

/// Header-indexed view over one CSV table. Row numbers are 1-based data rows.
class CsvTable {
public:
    CsvTable(std::string_view text, std::string name);

    const std::vector<std::string>& header() const { return header_; }
    std::size_t rows() const { return rows_.size(); }
    bool has_column(std::string_view column) const;
    std::size_t column(std::string_view column) const;  // throws IoError naming the missing column
    std::string_view cell(std::size_t row, std::size_t column) const { return rows_[row][column]; }

    double number(std::size_t row, std::size_t column) const;
    std::int64_t integer(std::size_t row, std::size_t column) const;

    const std::string& name() const { return name_; }

private:
    std::string name_;
    std::vector<std::string> header_;
    std::map<std::string, std::size_t, std::less<>> index_;
    std::vector<std::vector<std::string_view>> rows_;
};

/// splitmix-seeded 64-bit generator with platform-stable derived distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next();
    double uniform();                        // [0, 1)
    double uniform(double lo, double hi);    // [lo, hi)
    std::uint64_t below(std::uint64_t n);    // [0, n)
    double normal();

private:
    std::uint64_t state_[4];
};

}  // namespace plantsite
