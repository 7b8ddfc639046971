#pragma once

#include <optional>
#include <span>
#include <vector>

#include "plantsite/landscape.hpp"

namespace plantsite {

struct GridSpec {
    double cell_size_m = kDefaultCellSizeM;
};

/// Placement of one tile before any attributes are attached.
struct CellFrame {
    GridId grid_id = 0;
    Point origin;
    double size_m = kDefaultCellSizeM;

    Point center() const { return {origin.x + size_m / 2.0, origin.y + size_m / 2.0}; }
    friend bool operator==(const CellFrame&, const CellFrame&) = default;
};

inline CellFrame frame_of(const GridCell& cell) { return {cell.grid_id, cell.origin, cell.size_m}; }

/// Tiles `region` from its min corner. A tile is kept iff its center lies in
/// [x_min, x_max) x [y_min, y_max). Ids are row-major starting at 0.
std::vector<CellFrame> generate_grids(const Region& region, const GridSpec& spec);

inline constexpr int kOverlapLattice = 8;

/// Dominant compartment by an 8x8 lattice of sample points at sub-cell centers.
/// Ties go to the lowest compartment id; nullopt when no sample is covered.
std::optional<CompartmentId> assign_compartment(const CellFrame& cell, std::span<const Compartment> compartments);

struct VillageFeatures {
    double village_dist_km = 0.0;
    int villages_within_1km = 0;
};

/// Distances are measured from the cell center. With no villages the distance is +inf.
VillageFeatures village_features(const CellFrame& cell, std::span<const Village> villages);

}  // namespace plantsite
