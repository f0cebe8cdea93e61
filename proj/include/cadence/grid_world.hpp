#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cadence/rng.hpp"

namespace cadence {

// Continuous position in meters. The cell containing (x, y) is
// (floor(x/s), floor(y/s)); y grows northward, row 0 is the south edge.
struct Pose {
    double x = 0.0;
    double y = 0.0;
};

enum class Material : uint8_t { Ground = 0, House = 1, Tree = 2, Car = 3 };

enum class Region : uint8_t { Training = 0, Holdout = 1 };

struct WorldGenParams {
    int width = 64;   // cells, >= 32
    int height = 64;  // cells, >= 32
    double cell_size = 1.0;
    // Free corridor lines spaced roughly this many cells apart, both axes.
    int road_period = 16;
    double house_density = 0.10;  // target fraction of cells covered by house blocks
    int house_min = 3;            // block side, cells
    int house_max = 7;
    double tree_density = 0.04;  // single-cell obstacles
    double car_density = 0.02;
    double min_free_fraction = 0.25;
    int max_attempts = 100;  // regeneration attempts before giving up
};

// Occupancy and material grid. Border cells are always occupied; the free
// interior is fully connected. The north-west quadrant is held out for
// validation/test episodes, the remaining three quadrants are the training
// region. Immutable after generation and safe to share across threads.
class GridWorld {
public:
    GridWorld() = default;
    GridWorld(int width, int height, double cell_size, uint64_t seed);

    int width() const { return width_; }
    int height() const { return height_; }
    double cell_size() const { return cell_size_; }
    uint64_t seed() const { return seed_; }

    bool in_bounds(int cx, int cy) const {
        return cx >= 0 && cx < width_ && cy >= 0 && cy < height_;
    }
    bool occupied(int cx, int cy) const { return occupancy_[index(cx, cy)] != 0; }
    Material material(int cx, int cy) const {
        return Material(material_[index(cx, cy)]);
    }
    size_t index(int cx, int cy) const { return size_t(cy) * width_ + cx; }

    int cell_x(double x) const { return int(x / cell_size_); }
    int cell_y(double y) const { return int(y / cell_size_); }
    Pose cell_center(int cx, int cy) const {
        return {(cx + 0.5) * cell_size_, (cy + 0.5) * cell_size_};
    }
    bool pose_free(const Pose& p) const {
        const int cx = cell_x(p.x), cy = cell_y(p.y);
        return in_bounds(cx, cy) && !occupied(cx, cy);
    }

    Region region(int cx, int cy) const {
        return (cx < width_ / 2 && cy >= height_ / 2) ? Region::Holdout
                                                      : Region::Training;
    }

    // Free-cell indices per region, in row-major order.
    const std::vector<size_t>& free_cells(Region r) const {
        return r == Region::Holdout ? free_holdout_ : free_training_;
    }
    size_t free_cell_count() const {
        return free_training_.size() + free_holdout_.size();
    }

    void set_cell(int cx, int cy, bool occupied, Material m);
    // Recomputes the per-region free-cell lists; call after set_cell edits.
    void rebuild_free_lists();

    // Text dump, north row first: '.' ground, 'H' house, 'T' tree, 'C' car.
    std::vector<std::string> dump_rows() const;
    static GridWorld from_rows(const std::vector<std::string>& rows,
                               double cell_size, uint64_t seed);

private:
    int width_ = 0, height_ = 0;
    double cell_size_ = 1.0;
    uint64_t seed_ = 0;
    std::vector<uint8_t> occupancy_;
    std::vector<uint8_t> material_;
    std::vector<size_t> free_training_;
    std::vector<size_t> free_holdout_;
};

// Albedo of a material class, used by the appearance model.
double albedo(Material m);

// Deterministic procedural terrain: bordered map with free road corridors,
// rectangular house blocks, and scattered single-cell trees and cars.
// Retries with derived sub-seeds until the free space is connected; throws
// after params.max_attempts failures.
GridWorld generate_world(uint64_t seed, const WorldGenParams& params);

}  // namespace cadence
