#include "plantsite/gridgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace plantsite {

namespace {

// Number of tiles along one axis whose center falls before `extent`.
std::int64_t tiles_along(double min, double max, double size)
{
    if (!(max > min) || !(size > 0.0)) return 0;
    auto n = static_cast<std::int64_t>(std::ceil((max - min) / size - 0.5));
    n = std::max<std::int64_t>(n, 0);
    // Settle rounding at the boundary with the same arithmetic CellFrame::center() uses.
    auto center = [&](std::int64_t i) { return (min + static_cast<double>(i) * size) + size / 2.0; };
    while (n > 0 && !(center(n - 1) < max)) --n;
    while (center(n) < max) ++n;
    return n;
}

struct Bounds {
    double x_min, y_min, x_max, y_max;
};

Bounds bounds_of(const std::vector<Point>& polygon)
{
    Bounds b{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
             -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (auto p : polygon) {
        b.x_min = std::min(b.x_min, p.x);
        b.y_min = std::min(b.y_min, p.y);
        b.x_max = std::max(b.x_max, p.x);
        b.y_max = std::max(b.y_max, p.y);
    }
    return b;
}

}  // namespace

std::vector<CellFrame> generate_grids(const Region& region, const GridSpec& spec)
{
    const double s = spec.cell_size_m;
    const auto nx = tiles_along(region.x_min, region.x_max, s);
    const auto ny = tiles_along(region.y_min, region.y_max, s);
    std::vector<CellFrame> frames;
    frames.reserve(static_cast<std::size_t>(nx * ny));
    for (std::int64_t row = 0; row < ny; ++row) {
        for (std::int64_t col = 0; col < nx; ++col) {
            frames.push_back({row * nx + col,
                              {region.x_min + static_cast<double>(col) * s, region.y_min + static_cast<double>(row) * s},
                              s});
        }
    }
    return frames;
}

std::optional<CompartmentId> assign_compartment(const CellFrame& cell, std::span<const Compartment> compartments)
{
    const double step = cell.size_m / kOverlapLattice;
    const double cx0 = cell.origin.x, cy0 = cell.origin.y;
    const double cx1 = cx0 + cell.size_m, cy1 = cy0 + cell.size_m;

    std::map<CompartmentId, int> hits;
    for (const auto& comp : compartments) {
        const auto b = bounds_of(comp.polygon);
        if (b.x_max < cx0 || b.x_min > cx1 || b.y_max < cy0 || b.y_min > cy1) continue;
        int count = 0;
        for (int j = 0; j < kOverlapLattice; ++j) {
            for (int i = 0; i < kOverlapLattice; ++i) {
                const Point p{cx0 + (i + 0.5) * step, cy0 + (j + 0.5) * step};
                if (point_in_polygon(p, comp.polygon)) ++count;
            }
        }
        if (count > 0) hits[comp.compartment_id] += count;
    }

    std::optional<CompartmentId> best;
    int best_count = 0;
    for (auto [id, count] : hits) {  // ascending id, so strict > keeps the lowest on ties
        if (count > best_count) {
            best = id;
            best_count = count;
        }
    }
    return best;
}

VillageFeatures village_features(const CellFrame& cell, std::span<const Village> villages)
{
    VillageFeatures out{std::numeric_limits<double>::infinity(), 0};
    const Point c = cell.center();
    double best_m = std::numeric_limits<double>::infinity();
    for (const auto& v : villages) {
        const double d = std::hypot(v.location.x - c.x, v.location.y - c.y);
        best_m = std::min(best_m, d);
        if (d <= 1000.0) ++out.villages_within_1km;
    }
    if (!villages.empty()) out.village_dist_km = best_m / 1000.0;
    return out;
}

}  // namespace plantsite
