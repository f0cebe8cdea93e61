#include "cadence/sensing.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cadence {

RayHit trace_ray(const GridWorld& world, const Pose& pose, double dir_x,
                 double dir_y, double max_range) {
    const double s = world.cell_size();
    int cx = world.cell_x(pose.x);
    int cy = world.cell_y(pose.y);

    const double inf = std::numeric_limits<double>::infinity();
    const int step_x = dir_x > 0 ? 1 : (dir_x < 0 ? -1 : 0);
    const int step_y = dir_y > 0 ? 1 : (dir_y < 0 ? -1 : 0);
    // Distance along the ray to the next grid line on each axis.
    double t_max_x = inf, t_max_y = inf, t_delta_x = inf, t_delta_y = inf;
    if (step_x != 0) {
        const double next = (step_x > 0 ? (cx + 1) * s : cx * s);
        t_max_x = (next - pose.x) / dir_x;
        t_delta_x = s / std::abs(dir_x);
    }
    if (step_y != 0) {
        const double next = (step_y > 0 ? (cy + 1) * s : cy * s);
        t_max_y = (next - pose.y) / dir_y;
        t_delta_y = s / std::abs(dir_y);
    }

    double t = 0.0;
    while (t <= max_range) {
        if (t_max_x < t_max_y) {
            t = t_max_x;
            t_max_x += t_delta_x;
            cx += step_x;
        } else {
            t = t_max_y;
            t_max_y += t_delta_y;
            cy += step_y;
        }
        if (!world.in_bounds(cx, cy)) break;  // unreachable with a closed border
        if (t > max_range) break;
        if (world.occupied(cx, cy)) {
            return {t, cx, cy, true};
        }
    }
    // Clamped: report the cell containing the endpoint.
    const double ex = pose.x + dir_x * max_range;
    const double ey = pose.y + dir_y * max_range;
    int ecx = world.cell_x(ex), ecy = world.cell_y(ey);
    if (!world.in_bounds(ecx, ecy)) {
        ecx = std::min(std::max(ecx, 0), world.width() - 1);
        ecy = std::min(std::max(ecy, 0), world.height() - 1);
    }
    return {max_range, ecx, ecy, false};
}

std::vector<RayHit> raycast_hits(const GridWorld& world, const Pose& pose,
                                 const SensorParams& params) {
    if (!world.pose_free(pose)) {
        throw std::logic_error("raycast: pose inside an occupied cell");
    }
    const int K = params.rays;
    std::vector<RayHit> hits(size_t(K));
#pragma omp parallel for schedule(static) if (K >= 64)
    for (int k = 0; k < K; ++k) {
        const double angle = 2.0 * M_PI * k / K;
        hits[k] = trace_ray(world, pose, std::cos(angle), std::sin(angle),
                            params.max_range);
    }
    return hits;
}

DepthScan raycast_depth(const GridWorld& world, const Pose& pose,
                        const SensorParams& params) {
    const std::vector<RayHit> hits = raycast_hits(world, pose, params);
    DepthScan scan;
    scan.max_range = params.max_range;
    scan.ranges.resize(hits.size());
    for (size_t k = 0; k < hits.size(); ++k) scan.ranges[k] = hits[k].distance;
    return scan;
}

CameraScan render_camera(const GridWorld& world, const Pose& pose,
                         const SensorParams& params, Rng& rng) {
    const std::vector<RayHit> hits = raycast_hits(world, pose, params);
    CameraScan cam;
    cam.intensity.resize(hits.size());
    cam.texture.resize(hits.size());
    for (size_t k = 0; k < hits.size(); ++k) {
        const RayHit& h = hits[k];
        const Material m = world.material(h.cell_x, h.cell_y);
        double v = shade(albedo(m), h.distance);
        if (params.noise_sigma > 0.0) v += rng.normal(0.0, params.noise_sigma);
        cam.intensity[k] = std::min(1.0, std::max(0.0, v));
        cam.texture[k] = hash01(hash_combine(world.seed(), world.index(h.cell_x, h.cell_y)));
    }
    return cam;
}

Observation Sensor::sense(const Pose& pose) const {
    Observation obs;
    obs.depth = raycast_depth(*world_, pose, params_);
    const size_t cell = world_->index(world_->cell_x(pose.x), world_->cell_y(pose.y));
    Rng noise(hash_combine(hash_combine(world_->seed(), 0x5e5011ULL), cell));
    obs.camera = render_camera(*world_, pose, params_, noise);
    return obs;
}

ObservationCache::ObservationCache(const Sensor& sensor, double quantization)
    : sensor_(&sensor), quantization_(quantization) {
    const GridWorld& w = sensor.world();
    if (quantization_ < w.cell_size()) {
        throw std::invalid_argument("cache quantization below cell size");
    }
    blocks_x_ = int(std::ceil(w.width() * w.cell_size() / quantization_));
    blocks_y_ = int(std::ceil(w.height() * w.cell_size() / quantization_));
    cells_.assign(size_t(blocks_x_) * blocks_y_, std::nullopt);
}

size_t ObservationCache::block_index(const Pose& pose) const {
    const int bx = int(pose.x / quantization_);
    const int by = int(pose.y / quantization_);
    return size_t(by) * blocks_x_ + bx;
}

Pose ObservationCache::representative(const Pose& pose) const {
    const GridWorld& w = sensor_->world();
    const int bx = int(pose.x / quantization_);
    const int by = int(pose.y / quantization_);
    const Pose center{(bx + 0.5) * quantization_, (by + 0.5) * quantization_};
    if (w.pose_free(center)) return center;
    // Occupied block center: fall back to the first free world cell in the
    // block, scanned in row-major order so the choice is query-independent.
    const double s = w.cell_size();
    const int cx0 = int(bx * quantization_ / s);
    const int cy0 = int(by * quantization_ / s);
    const int span = int(std::ceil(quantization_ / s));
    for (int cy = cy0; cy < cy0 + span; ++cy) {
        for (int cx = cx0; cx < cx0 + span; ++cx) {
            if (w.in_bounds(cx, cy) && !w.occupied(cx, cy)) {
                return w.cell_center(cx, cy);
            }
        }
    }
    throw std::logic_error("observation cache: block has no free cell");
}

const Observation& ObservationCache::lookup(const Pose& pose) {
    const size_t idx = block_index(pose);
    std::optional<Observation>& slot = cells_.at(idx);
    if (!slot) {
        slot = sensor_->sense(representative(pose));
        ++filled_;
    }
    return *slot;
}

void ObservationCache::warm() {
    const GridWorld& w = sensor_->world();
    // Collect unfilled blocks that contain at least one free cell.
    std::vector<size_t> todo;
    for (int by = 0; by < blocks_y_; ++by) {
        for (int bx = 0; bx < blocks_x_; ++bx) {
            const size_t idx = size_t(by) * blocks_x_ + bx;
            if (cells_[idx]) continue;
            const double s = w.cell_size();
            const int cx0 = int(bx * quantization_ / s);
            const int cy0 = int(by * quantization_ / s);
            const int span = int(std::ceil(quantization_ / s));
            bool any_free = false;
            for (int cy = cy0; cy < cy0 + span && !any_free; ++cy) {
                for (int cx = cx0; cx < cx0 + span && !any_free; ++cx) {
                    if (w.in_bounds(cx, cy) && !w.occupied(cx, cy)) any_free = true;
                }
            }
            if (any_free) todo.push_back(idx);
        }
    }
#pragma omp parallel for schedule(dynamic, 16)
    for (long i = 0; i < long(todo.size()); ++i) {
        const size_t idx = todo[i];
        const int bx = int(idx % blocks_x_);
        const int by = int(idx / blocks_x_);
        const Pose probe{(bx + 0.5) * quantization_, (by + 0.5) * quantization_};
        cells_[idx] = sensor_->sense(representative(probe));
    }
    filled_ += todo.size();
}

}  // namespace cadence
