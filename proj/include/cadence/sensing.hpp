#pragma once

#include <optional>
#include <vector>

#include "cadence/grid_world.hpp"
#include "cadence/rng.hpp"

namespace cadence {

// Omnidirectional range scan: ranges[k] is the distance along the ray at
// angle 2*pi*k/K to the first occupied cell boundary, clamped to max_range.
// The all-zero scan is reserved for the perception bypass and for queue
// padding.
struct DepthScan {
    std::vector<double> ranges;
    double max_range = 40.0;

    static DepthScan zeros(int k, double max_range) {
        DepthScan s;
        s.ranges.assign(size_t(k), 0.0);
        s.max_range = max_range;
        return s;
    }
    bool is_zero() const {
        for (double r : ranges) {
            if (r != 0.0) return false;
        }
        return true;
    }
};

// Appearance-space counterpart of a DepthScan: per-ray shading intensity and
// a per-cell texture pattern value.
struct CameraScan {
    std::vector<double> intensity;  // [0,1]
    std::vector<double> texture;    // [0,1]
};

struct SensorParams {
    int rays = 32;
    double max_range = 40.0;
    double noise_sigma = 0.02;
};

struct RayHit {
    double distance = 0.0;  // meters, clamped to max_range
    int cell_x = 0;         // hit cell; at max range, the cell containing the endpoint
    int cell_y = 0;
    bool hit = false;  // false when clamped at max_range
};

// Exact grid traversal for one ray.
RayHit trace_ray(const GridWorld& world, const Pose& pose, double dir_x,
                 double dir_y, double max_range);

// All K rays. Throws if the pose is inside an occupied cell.
std::vector<RayHit> raycast_hits(const GridWorld& world, const Pose& pose,
                                 const SensorParams& params);

DepthScan raycast_depth(const GridWorld& world, const Pose& pose,
                        const SensorParams& params);

// Shading law: apex brightness falls off with the square of distance.
inline double shade(double albedo_value, double distance) {
    const double v = albedo_value / ((1.0 + distance) * (1.0 + distance));
    return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
}

// Appearance scan at a pose. Intensity is shaded albedo of each ray's hit
// cell plus Gaussian noise, clamped to [0,1]; texture is a hashed per-cell
// pattern keyed on the world seed. Depth is recoverable only through the
// inverse-square shading.
CameraScan render_camera(const GridWorld& world, const Pose& pose,
                         const SensorParams& params, Rng& rng);

struct Observation {
    DepthScan depth;
    CameraScan camera;
};

// Pose-addressed sensing with noise derived from the world seed and the
// pose's cache cell, so the same location always yields the same scan.
class Sensor {
public:
    Sensor(const GridWorld& world, SensorParams params)
        : world_(&world), params_(params) {}

    Observation sense(const Pose& pose) const;

    const SensorParams& params() const { return params_; }
    const GridWorld& world() const { return *world_; }

private:
    const GridWorld* world_;
    SensorParams params_;
};

// Shared read-only observation cache over a quantized pose grid. A lookup
// quantizes the pose to its cache cell and senses once at a deterministic
// representative point (the cell center, or the first free world cell in the
// block when the center is occupied). Warm it before sharing across threads.
class ObservationCache {
public:
    ObservationCache(const Sensor& sensor, double quantization);

    // Observation for the cache cell containing `pose` (fills on miss).
    const Observation& lookup(const Pose& pose);

    // Precompute entries for every block that contains a free cell.
    void warm();

    bool enabled() const { return true; }
    double quantization() const { return quantization_; }
    size_t entries() const { return filled_; }

    // The representative pose a lookup at `pose` senses at.
    Pose representative(const Pose& pose) const;

private:
    size_t block_index(const Pose& pose) const;
    const Sensor* sensor_;
    double quantization_;
    int blocks_x_ = 0, blocks_y_ = 0;
    std::vector<std::optional<Observation>> cells_;
    size_t filled_ = 0;
};

}  // namespace cadence
