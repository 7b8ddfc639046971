#include <algorithm>
#include <cmath>
#include <limits>

#include "plantsite/gridgen.hpp"
#include "plantsite/io_util.hpp"
#include "plantsite/landscape.hpp"

namespace plantsite {

namespace {

// Rounds to `per_unit` steps by dividing, so the result is the double nearest the decimal.
double round_to(double v, double per_unit) { return std::round(v * per_unit) / per_unit; }
double r3(double v) { return round_to(v, 1000.0); }

// Independent streams so that changing one section never perturbs another.
enum class Stream : std::uint64_t { compartments = 1, villages = 2, cells = 3 };

Rng stream(std::uint64_t seed, Stream s) { return Rng(seed * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(s)); }

// cols * rows == n, with tile aspect closest to square.
std::pair<std::size_t, std::size_t> factor_lattice(std::size_t n, const Region& region)
{
    std::pair<std::size_t, std::size_t> best{n, 1};
    double best_err = std::numeric_limits<double>::infinity();
    for (std::size_t cols = 1; cols <= n; ++cols) {
        if (n % cols) continue;
        const std::size_t rows = n / cols;
        const double err = std::abs(std::log((region.width() / cols) / (region.height() / rows)));
        if (err < best_err) {
            best_err = err;
            best = {cols, rows};
        }
    }
    return best;
}

double elevation_at(const Region& region, Point p, Profile profile, Rng& rng)
{
    if (profile == Profile::himalayan_gradient) {
        const double frac = (p.y - region.y_min) / region.height();
        return std::max(0.0, 300.0 + 4200.0 * frac + 150.0 * rng.normal());
    }
    return rng.uniform(300.0, 4200.0);
}

std::vector<Compartment> make_compartments(const SynthesisRequest& req, Rng& rng)
{
    const Region& region = req.region;
    const auto [cols, rows] = factor_lattice(req.n_compartments, region);
    const double dx = region.width() / static_cast<double>(cols);
    const double dy = region.height() / static_cast<double>(rows);

    std::vector<Point> lattice((cols + 1) * (rows + 1));
    auto at = [&](std::size_t i, std::size_t j) -> Point& { return lattice[j * (cols + 1) + i]; };
    for (std::size_t j = 0; j <= rows; ++j) {
        for (std::size_t i = 0; i <= cols; ++i) {
            Point p{region.x_min + static_cast<double>(i) * dx, region.y_min + static_cast<double>(j) * dy};
            if (i > 0 && i < cols) p.x += rng.uniform(-0.2, 0.2) * dx;
            if (j > 0 && j < rows) p.y += rng.uniform(-0.2, 0.2) * dy;
            at(i, j) = {r3(p.x), r3(p.y)};
        }
    }

    std::vector<Compartment> out;
    out.reserve(req.n_compartments);
    for (std::size_t j = 0; j < rows; ++j) {
        for (std::size_t i = 0; i < cols; ++i) {
            Compartment c;
            c.compartment_id = static_cast<CompartmentId>(out.size() + 1);
            c.polygon = {at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)};

            Point centroid{};
            for (auto p : c.polygon) centroid = {centroid.x + p.x / 4.0, centroid.y + p.y / 4.0};
            const double area_ha = std::abs(signed_area(c.polygon)) / 10000.0;

            auto& f = c.features;
            f[Feature::households] = std::round(rng.uniform(50.0, 2000.0));
            f[Feature::population] = std::round(f[Feature::households] * rng.uniform(4.0, 6.0));
            f[Feature::farmers] = std::round(f[Feature::population] * rng.uniform(0.2, 0.6));
            f[Feature::sc_population] = std::round(f[Feature::population] * rng.uniform(0.1, 0.35));
            f[Feature::literates] = std::round(f[Feature::population] * rng.uniform(0.5, 0.85));
            f[Feature::marginal_workers] = std::round(f[Feature::population] * rng.uniform(0.05, 0.2));
            f[Feature::nightlights] = static_cast<double>(rng.below(64));
            f[Feature::road_density] = r3(rng.uniform(0.0, 5.0));
            f[Feature::small_holdings] = static_cast<double>(rng.below(500));
            f[Feature::grazing_density] = r3(rng.uniform(0.0, 100.0));
            f[Feature::area_ha] = r3(area_ha);
            f[Feature::crop_area_ha] = r3(area_ha * rng.uniform(0.0, 0.3));
            f[Feature::grass_area_ha] = r3(area_ha * rng.uniform(0.0, 0.2));
            f[Feature::bare_area_ha] = r3(area_ha * rng.uniform(0.0, 0.15));
            f[Feature::soil_depth_cm] = r3(rng.uniform(20.0, 150.0));
            f[Feature::awc_code] = static_cast<double>(1 + rng.below(7));
            f[Feature::topsoil_c] = r3(rng.uniform(0.5, 6.0));
            f[Feature::subsoil_c] = r3(rng.uniform(0.2, 4.0));
            f[Feature::topsoil_oc] = r3(rng.uniform(0.3, 5.0));
            f[Feature::subsoil_oc] = r3(rng.uniform(0.1, 3.0));
            f[Feature::ph_topsoil] = r3(rng.uniform(4.5, 8.0));
            f[Feature::bulk_density] = r3(rng.uniform(1.0, 1.7));
            f[Feature::cec_topsoil] = r3(rng.uniform(5.0, 40.0));
            f[Feature::cec_subsoil] = r3(rng.uniform(3.0, 30.0));
            f[Feature::elevation_m] = r3(elevation_at(region, centroid, req.profile, rng));
            f[Feature::slope_deg] = r3(rng.uniform(0.0, 60.0));
            f[Feature::fc_2003_ha] = r3(area_ha * rng.uniform(0.2, 0.9));
            f[Feature::fire_count] = static_cast<double>(rng.below(21));
            f[Feature::temperature_c] = r3(25.0 - 0.0065 * f[Feature::elevation_m] + rng.normal());
            f[Feature::precipitation_mm] = r3(rng.uniform(500.0, 3000.0));
            f[Feature::lst_k] = r3(f[Feature::temperature_c] + 273.15 + rng.uniform(-2.0, 2.0));

            bool loss = false;
            if (req.profile == Profile::separable_loss) {
                loss = separable_loss_rule(f);
            } else {
                const double logit = 1.5 * (f[Feature::grazing_density] - 50.0) / 25.0 +
                                     0.8 * (f[Feature::road_density] - 2.5) + 0.1 * (f[Feature::fire_count] - 10.0) -
                                     0.0008 * (f[Feature::elevation_m] - 2000.0) + rng.normal();
                loss = logit > 0.0;
            }
            const double fc = f[Feature::fc_2003_ha];
            c.fc_2015_ha = loss ? r3(fc * (1.0 - rng.uniform(0.01, 0.2)) - 0.001) : r3(fc * (1.0 + rng.uniform(0.0, 0.2)));
            c.label = loss ? 1 : 0;
            out.push_back(std::move(c));
        }
    }
    return out;
}

// Six weights in profile-dependent proportions, rounded to 0.01 and closed to 100.
std::array<double, 6> normalize_cover(std::array<double, 6> w)
{
    double total = 0.0;
    for (double v : w) total += v;
    std::array<double, 6> pct{};
    std::size_t largest = 0;
    for (std::size_t k = 0; k < 6; ++k) {
        pct[k] = round_to(100.0 * w[k] / total, 100.0);
        if (pct[k] > pct[largest]) largest = k;
    }
    double others = 0.0;
    for (std::size_t k = 0; k < 6; ++k)
        if (k != largest) others += pct[k];
    pct[largest] = round_to(100.0 - others, 100.0);
    return pct;
}

std::array<CoverSnapshot, kSnapshotCount> make_covers(const std::array<double, 6>& mean, Rng& rng)
{
    std::array<double, 6> w{};
    for (std::size_t k = 0; k < 6; ++k) {
        double u = rng.uniform();
        while (u <= 0.0) u = rng.uniform();
        w[k] = -std::log(u) * mean[k] + 1e-3;
    }
    std::array<CoverSnapshot, kSnapshotCount> covers{};
    for (std::size_t y = 0; y < kSnapshotCount; ++y) {
        if (y > 0)
            for (auto& v : w) v *= std::exp(0.25 * rng.normal());
        const auto pct = normalize_cover(w);
        covers[y] = {kSnapshotYears[y], pct[0], pct[1], pct[2], pct[3], pct[4], pct[5]};
    }
    return covers;
}

void assign_flags(GridCell& cell, const Region& region, Profile profile, Rng& rng)
{
    if (profile == Profile::himalayan_gradient) {
        const double elev = cell.terrain.elevation_m;
        const double yfrac = (cell.center().y - region.y_min) / region.height();
        if (elev > 3600.0 && rng.uniform() < 0.7) cell.landuse_flags.set(LanduseFlag::snow);
        if (elev > 3000.0 && elev < 3800.0 && rng.uniform() < 0.3) cell.landuse_flags.set(LanduseFlag::alpine_pasture);
        if (yfrac > 0.9 && rng.uniform() < 0.5) cell.landuse_flags.set(LanduseFlag::trans_himalayan);
        if (elev < 1200.0 && rng.uniform() < 0.2) cell.landuse_flags.set(LanduseFlag::agriculture);
        if (rng.uniform() < 0.04) cell.landuse_flags.set(LanduseFlag::grassland);
        if (rng.uniform() < 0.03) cell.landuse_flags.set(LanduseFlag::road);
        return;
    }
    for (auto f : kAllLanduseFlags)
        if (rng.uniform() < 0.03) cell.landuse_flags.set(f);
}

}  // namespace

Landscape synthesize_landscape(const SynthesisRequest& req)
{
    if (!req.region.valid()) throw ValidationError("degenerate region");
    if (!(req.cell_size_m > 0.0)) throw ValidationError("cell size must be positive");
    const auto frames = generate_grids(req.region, GridSpec{req.cell_size_m});
    if (frames.empty()) throw ValidationError("degenerate region: no cell center falls inside it");
    if (req.n_compartments == 0) throw ValidationError("at least one compartment is required");

    Landscape l;
    l.region = req.region;
    l.cell_size_m = req.cell_size_m;

    Rng comp_rng = stream(req.seed, Stream::compartments);
    l.compartments = make_compartments(req, comp_rng);

    Rng village_rng = stream(req.seed, Stream::villages);
    for (std::size_t i = 0; i < req.n_villages; ++i) {
        l.villages.push_back({static_cast<std::int64_t>(i + 1),
                              {r3(village_rng.uniform(req.region.x_min, req.region.x_max)),
                               r3(village_rng.uniform(req.region.y_min, req.region.y_max))}});
    }

    Rng rng = stream(req.seed, Stream::cells);
    l.cells.reserve(frames.size());
    for (const auto& frame : frames) {
        GridCell c;
        c.grid_id = frame.grid_id;
        c.origin = frame.origin;
        c.size_m = frame.size_m;

        c.terrain.elevation_m = r3(elevation_at(req.region, frame.center(), req.profile, rng));
        c.terrain.slope_deg = r3(std::min(90.0, rng.uniform(0.0, 70.0)));
        c.terrain.aspect_deg = r3(rng.uniform(0.0, 359.9));

        const double elev_frac = std::clamp(c.terrain.elevation_m / 4500.0, 0.0, 1.0);
        if (req.profile == Profile::himalayan_gradient) {
            c.soil.depth_cm = r3(std::max(5.0, 160.0 * (1.0 - elev_frac) + 20.0 * rng.normal()));
        } else {
            c.soil.depth_cm = r3(rng.uniform(20.0, 150.0));
        }
        c.soil.org_c = r3(rng.uniform(1.0, 25.0));
        c.soil.inorg_c = r3(rng.uniform(0.5, 7.0));

        std::array<double, 6> mean{3.0, 3.0, 1.0, 2.0, 0.7, 0.3};
        if (req.profile == Profile::himalayan_gradient) {
            const double tree = 1.0 - 0.85 * elev_frac;
            mean = {3.0 * tree, 3.0 * tree, 1.2 * tree, 1.0 + 5.0 * elev_frac, 0.7, 0.3};
        }
        c.covers = make_covers(mean, rng);
        assign_flags(c, req.region, req.profile, rng);

        const auto vf = village_features(frame, l.villages);
        c.village_dist_km = vf.village_dist_km;
        c.villages_within_1km = vf.villages_within_1km;
        c.compartment_id = assign_compartment(frame, l.compartments);
        l.cells.push_back(c);
    }
    return l;
}

}  // namespace plantsite
