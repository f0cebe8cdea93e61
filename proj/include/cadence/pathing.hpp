#pragma once

#include <optional>
#include <vector>

#include "cadence/grid_world.hpp"

namespace cadence {

// Cardinal directions, matching the ray convention: 0=east, 1=north,
// 2=west, 3=south.
enum class Direction : int { East = 0, North = 1, West = 2, South = 3 };

inline int dir_dx(Direction d) {
    switch (d) {
        case Direction::East: return 1;
        case Direction::West: return -1;
        default: return 0;
    }
}
inline int dir_dy(Direction d) {
    switch (d) {
        case Direction::North: return 1;
        case Direction::South: return -1;
        default: return 0;
    }
}

// Discrete motion vocabulary: 4 cardinal directions times a set of
// magnitudes in meters. Magnitudes must be positive multiples of the cell
// size so the action graph is closed over cell centers.
struct MotionSet {
    std::vector<double> magnitudes = {1.0, 2.0, 4.0, 8.0};

    int size() const { return 4 * int(magnitudes.size()); }
    Direction direction(int motion_index) const {
        return Direction(motion_index / int(magnitudes.size()));
    }
    double magnitude(int motion_index) const {
        return magnitudes[motion_index % magnitudes.size()];
    }
    double max_magnitude() const;
    void validate(double cell_size) const;
};

struct MotionResult {
    Pose pose;
    bool truncated = false;
    double moved = 0.0;  // meters actually traveled
};

// Executes a move until the magnitude is consumed or the forward distance
// sensor (range: one cell) detects an occupied cell, stopping flush with the
// last free cell. Truncation is normal behavior, not an error.
MotionResult step_motion(const GridWorld& world, const Pose& pose, Direction dir,
                         double magnitude);

struct PlannedAction {
    Direction dir = Direction::East;
    int magnitude_index = 0;
};

// Minimum-action-count plan from start to target over the same motion set
// the policy uses (truncated moves included as edges). The goal test is
// euclidean distance between cell centers <= goal_radius; radius 0 means the
// exact target cell. Returns nullopt when the target is unreachable.
std::optional<std::vector<PlannedAction>> astar(const GridWorld& world,
                                                const Pose& start,
                                                const Pose& target,
                                                const MotionSet& motions,
                                                double goal_radius = 0.0);

}  // namespace cadence
