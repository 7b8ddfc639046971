#include "plantsite/io_util.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <system_error>

#include <unistd.h>

namespace plantsite {

std::string format_number(double value)
{
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    if (std::isnan(value)) return "nan";
    if (value == 0.0) return "0";  // folds -0
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
    return std::string(buf, end);
}

double parse_number(std::string_view text)
{
    text = trim(text);
    if (text.empty()) throw std::invalid_argument("empty numeric field");
    if (text.front() == '+') text.remove_prefix(1);
    double value = 0.0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || end != text.data() + text.size())
        throw std::invalid_argument("not a number: '" + std::string(text) + "'");
    return value;
}

std::int64_t parse_integer(std::string_view text)
{
    text = trim(text);
    if (text.empty()) throw std::invalid_argument("empty integer field");
    if (text.front() == '+') text.remove_prefix(1);
    std::int64_t value = 0;
    auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || end != text.data() + text.size())
        throw std::invalid_argument("not an integer: '" + std::string(text) + "'");
    return value;
}

std::vector<std::string_view> split(std::string_view line, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

std::string_view trim(std::string_view text)
{
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t' || text.front() == '\r')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
    return text;
}

std::vector<std::string_view> split_lines(std::string_view text)
{
    auto lines = split(text, '\n');
    if (!lines.empty() && lines.back().empty()) lines.pop_back();
    for (auto& l : lines)
        if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
    return lines;
}

std::string read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content)
{
    auto tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw IoError("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot rename onto " + path.string());
    }
}

CsvTable::CsvTable(std::string_view text, std::string name) : name_(std::move(name))
{
    auto lines = split_lines(text);
    if (lines.empty()) throw IoError(name_ + ": missing header");
    for (auto field : split(lines.front(), ',')) {
        std::string col(trim(field));
        if (index_.contains(col)) throw IoError(name_ + ": duplicate column '" + col + "'");
        index_.emplace(col, header_.size());
        header_.push_back(std::move(col));
    }
    for (std::size_t i = 1; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) continue;
        auto fields = split(lines[i], ',');
        if (fields.size() != header_.size())
            throw IoError(name_ + " row " + std::to_string(rows_.size() + 1) + ": expected " +
                          std::to_string(header_.size()) + " fields, found " + std::to_string(fields.size()));
        rows_.push_back(std::move(fields));
    }
}

bool CsvTable::has_column(std::string_view column) const { return index_.find(column) != index_.end(); }

std::size_t CsvTable::column(std::string_view column) const
{
    auto it = index_.find(column);
    if (it == index_.end()) throw IoError(name_ + ": missing column '" + std::string(column) + "'");
    return it->second;
}

double CsvTable::number(std::size_t row, std::size_t column) const
{
    try {
        return parse_number(rows_[row][column]);
    } catch (const std::invalid_argument& e) {
        throw IoError(name_ + " row " + std::to_string(row + 1) + " column '" + header_[column] + "': " + e.what());
    }
}

std::int64_t CsvTable::integer(std::size_t row, std::size_t column) const
{
    try {
        return parse_integer(rows_[row][column]);
    } catch (const std::invalid_argument& e) {
        throw IoError(name_ + " row " + std::to_string(row + 1) + " column '" + header_[column] + "': " + e.what());
    }
}

namespace {

std::uint64_t splitmix(std::uint64_t& x)
{
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

// xoshiro256**
Rng::Rng(std::uint64_t seed)
{
    for (auto& s : state_) s = splitmix(seed);
}

std::uint64_t Rng::next()
{
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::uint64_t Rng::below(std::uint64_t n)
{
    if (n == 0) return 0;
    // Lemire's multiply-shift with rejection keeps this unbiased and portable.
    while (true) {
        const unsigned __int128 m = static_cast<unsigned __int128>(next()) * n;
        const auto low = static_cast<std::uint64_t>(m);
        if (low >= n || low >= (0 - n) % n) return static_cast<std::uint64_t>(m >> 64);
    }
}

double Rng::normal()
{
    // Box-Muller, one draw per call.
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace plantsite
