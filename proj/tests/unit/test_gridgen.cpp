#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "plantsite/gridgen.hpp"
#include "plantsite/io_util.hpp"
#include "test_support.hpp"

using namespace plantsite;
using plantsite::testing::rectangle;

namespace {

// Enumerate every candidate tile from the min corner and keep those whose center is inside.
std::vector<CellFrame> brute_force_grid(const Region& r, double size)
{
    std::vector<CellFrame> out;
    if (!r.valid()) return out;
    const int nx = static_cast<int>(std::ceil(r.width() / size)) + 2;
    const int ny = static_cast<int>(std::ceil(r.height() / size)) + 2;
    GridId id = 0;
    for (int j = 0; j < ny; ++j) {
        std::vector<CellFrame> row;
        for (int i = 0; i < nx; ++i) {
            CellFrame f{0, {r.x_min + i * size, r.y_min + j * size}, size};
            if (r.contains(f.center())) row.push_back(f);
        }
        for (auto& f : row) {
            f.grid_id = id++;
            out.push_back(f);
        }
    }
    return out;
}

double overlap_area(const CellFrame& cell, const Compartment& rect)
{
    double x0 = rect.polygon[0].x, y0 = rect.polygon[0].y, x1 = x0, y1 = y0;
    for (auto p : rect.polygon) {
        x0 = std::min(x0, p.x);
        y0 = std::min(y0, p.y);
        x1 = std::max(x1, p.x);
        y1 = std::max(y1, p.y);
    }
    const double w = std::min(x1, cell.origin.x + cell.size_m) - std::max(x0, cell.origin.x);
    const double h = std::min(y1, cell.origin.y + cell.size_m) - std::max(y0, cell.origin.y);
    return std::max(0.0, w) * std::max(0.0, h);
}

// Dominant rectangle by exact clipped area, lowest id on ties.
std::optional<CompartmentId> clipping_oracle(const CellFrame& cell, const std::vector<Compartment>& rects)
{
    std::optional<CompartmentId> best;
    double best_area = 0.0;
    for (const auto& r : rects) {
        const double a = overlap_area(cell, r);
        if (a <= 0.0) continue;
        if (a > best_area || (a == best_area && r.compartment_id < *best)) {
            best_area = a;
            best = r.compartment_id;
        }
    }
    return best;
}

}  // namespace

TEST(GenerateGrids, DocumentedExamples)
{
    EXPECT_EQ(generate_grids({0, 0, 1060, 530}, {}).size(), 8u);
    EXPECT_EQ(generate_grids({0, 0, 265, 265}, {}).size(), 1u);
    const auto nine = generate_grids({0, 0, 800, 800}, {});
    ASSERT_EQ(nine.size(), 9u);
    std::vector<double> xs;
    for (const auto& f : nine) xs.push_back(f.center().x);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    EXPECT_EQ(xs, (std::vector<double>{132.5, 397.5, 662.5}));
}

TEST(GenerateGrids, RowMajorIdsFromMinCorner)
{
    const auto g = generate_grids({100, 200, 100 + 3 * 265, 200 + 2 * 265}, {});
    ASSERT_EQ(g.size(), 6u);
    for (std::size_t k = 0; k < g.size(); ++k) {
        EXPECT_EQ(g[k].grid_id, static_cast<GridId>(k));
        EXPECT_DOUBLE_EQ(g[k].origin.x, 100 + 265.0 * (k % 3));
        EXPECT_DOUBLE_EQ(g[k].origin.y, 200 + 265.0 * (k / 3));
    }
}

TEST(GenerateGrids, EmptyAndDegenerateRegions)
{
    EXPECT_TRUE(generate_grids({0, 0, 0, 500}, {}).empty());
    EXPECT_TRUE(generate_grids({0, 0, 132.5, 1000}, {}).empty());  // center exactly on the max edge
    EXPECT_EQ(generate_grids({0, 0, 132.5001, 265}, {}).size(), 1u);
    EXPECT_TRUE(generate_grids({10, 10, 5, 5}, {}).empty());
}

TEST(GenerateGrids, MatchesBruteForceOnRandomRegions)
{
    Rng rng(2024);
    for (int trial = 0; trial < 300; ++trial) {
        const double size = trial % 3 == 0 ? 265.0 : rng.uniform(10.0, 400.0);
        const double x0 = rng.uniform(-1e5, 1e5), y0 = rng.uniform(-1e5, 1e5);
        Region r{x0, y0, x0 + rng.uniform(0.0, 4000.0), y0 + rng.uniform(0.0, 4000.0)};
        if (trial % 7 == 0) r.x_max = x0 + size * std::floor(rng.uniform(1, 12)) + size / 2;  // center on the edge
        const auto got = generate_grids(r, {size});
        const auto want = brute_force_grid(r, size);
        ASSERT_EQ(got, want) << "trial " << trial;
    }
}

TEST(AssignCompartment, SixtyFortySplitPicksTheLarger)
{
    const CellFrame cell{0, {0, 0}, 265};
    const double cut = 265.0 * 5.0 / 8.0;  // on a lattice boundary: 40 of 64 samples vs 24
    std::vector<Compartment> comps{rectangle(1, 0, 0, cut, 265), rectangle(2, cut, 0, 265, 265)};
    EXPECT_EQ(assign_compartment(cell, comps), 1);
}

TEST(AssignCompartment, OutsideEverythingIsNone)
{
    const CellFrame cell{0, {0, 0}, 265};
    std::vector<Compartment> comps{rectangle(1, 1000, 1000, 2000, 2000)};
    EXPECT_FALSE(assign_compartment(cell, comps).has_value());
    EXPECT_FALSE(assign_compartment(cell, {}).has_value());
}

TEST(AssignCompartment, EvenSplitGoesToLowestId)
{
    const CellFrame cell{0, {0, 0}, 265};
    std::vector<Compartment> comps{rectangle(5, 0, 0, 132.5, 265), rectangle(2, 132.5, 0, 265, 265)};
    EXPECT_EQ(assign_compartment(cell, comps), 2);
    std::reverse(comps.begin(), comps.end());
    EXPECT_EQ(assign_compartment(cell, comps), 2);
}

TEST(AssignCompartment, AgreesWithRectangleClippingOracle)
{
    Rng rng(77);
    const double size = 265.0, step = size / 8.0;
    for (int trial = 0; trial < 400; ++trial) {
        const CellFrame cell{0, {step * static_cast<double>(rng.below(40)), step * static_cast<double>(rng.below(40))},
                             size};
        std::vector<Compartment> rects;
        const auto n = 1 + rng.below(5);
        for (std::uint64_t k = 0; k < n; ++k) {
            // edges on the sample lattice's cell boundaries, so sample counts equal areas exactly
            const double x0 = cell.origin.x + step * (static_cast<double>(rng.below(14)) - 3.0);
            const double y0 = cell.origin.y + step * (static_cast<double>(rng.below(14)) - 3.0);
            const double x1 = x0 + step * static_cast<double>(1 + rng.below(10));
            const double y1 = y0 + step * static_cast<double>(1 + rng.below(10));
            rects.push_back(rectangle(static_cast<CompartmentId>(1 + rng.below(50)) * 10 + k, x0, y0, x1, y1));
        }
        EXPECT_EQ(assign_compartment(cell, rects), clipping_oracle(cell, rects)) << "trial " << trial;
        auto shuffled = rects;
        std::reverse(shuffled.begin(), shuffled.end());
        EXPECT_EQ(assign_compartment(cell, shuffled), assign_compartment(cell, rects));
    }
}

TEST(VillageFeatures, DocumentedExamples)
{
    const CellFrame cell{0, {0, 0}, 265};
    const Point c = cell.center();
    {
        std::vector<Village> v{{1, c}};
        const auto f = village_features(cell, v);
        EXPECT_EQ(f.village_dist_km, 0.0);
        EXPECT_EQ(f.villages_within_1km, 1);
    }
    {
        std::vector<Village> v{{1, {c.x + 9000, c.y}}};
        const auto f = village_features(cell, v);
        EXPECT_DOUBLE_EQ(f.village_dist_km, 9.0);
        EXPECT_EQ(f.villages_within_1km, 0);
    }
    {
        std::vector<Village> v{{1, {c.x, c.y + 1100}}, {2, {c.x - 900, c.y}}, {3, {c.x + 300, c.y + 400}}};
        const auto f = village_features(cell, v);
        EXPECT_DOUBLE_EQ(f.village_dist_km, 0.5);
        EXPECT_EQ(f.villages_within_1km, 2);
    }
    {
        std::vector<Village> v{{1, {c.x + 1000, c.y}}};
        EXPECT_EQ(village_features(cell, v).villages_within_1km, 1);  // exactly 1 km counts
    }
    const auto none = village_features(cell, {});
    EXPECT_TRUE(std::isinf(none.village_dist_km));
    EXPECT_EQ(none.villages_within_1km, 0);
}

TEST(VillageFeatures, MatchesBruteForce)
{
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const CellFrame cell{0, {rng.uniform(-5000, 5000), rng.uniform(-5000, 5000)}, 265};
        std::vector<Village> v;
        const auto n = rng.below(12);
        for (std::uint64_t k = 0; k < n; ++k)
            v.push_back({static_cast<std::int64_t>(k), {cell.center().x + rng.uniform(-3000, 3000),
                                                        cell.center().y + rng.uniform(-3000, 3000)}});
        double best = std::numeric_limits<double>::infinity();
        int near = 0;
        for (const auto& village : v) {
            const double d = std::hypot(village.location.x - cell.center().x, village.location.y - cell.center().y);
            best = std::min(best, d / 1000.0);
            near += d <= 1000.0;
        }
        const auto f = village_features(cell, v);
        EXPECT_DOUBLE_EQ(f.village_dist_km, best);
        EXPECT_EQ(f.villages_within_1km, near);
    }
}
