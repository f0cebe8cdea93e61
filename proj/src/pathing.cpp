#include "cadence/pathing.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <tuple>

namespace cadence {

double MotionSet::max_magnitude() const {
    double m = 0.0;
    for (double v : magnitudes) m = std::max(m, v);
    return m;
}

void MotionSet::validate(double cell_size) const {
    if (magnitudes.empty()) throw std::invalid_argument("motion set: empty");
    for (double m : magnitudes) {
        if (m <= 0) throw std::invalid_argument("motion set: non-positive magnitude");
        const double cells = m / cell_size;
        if (std::abs(cells - std::round(cells)) > 1e-9) {
            throw std::invalid_argument(
                "motion set: magnitudes must be multiples of the cell size");
        }
    }
}

MotionResult step_motion(const GridWorld& world, const Pose& pose, Direction dir,
                         double magnitude) {
    if (!world.pose_free(pose)) {
        throw std::logic_error("step_motion: pose inside an occupied cell");
    }
    const double s = world.cell_size();
    const int dx = dir_dx(dir), dy = dir_dy(dir);
    int cx = world.cell_x(pose.x);
    int cy = world.cell_y(pose.y);

    // Distance along the axis to the near boundary of the first occupied
    // cell. The closed border guarantees one exists.
    double wall = 0.0;
    for (int step = 1;; ++step) {
        const int nx = cx + dx * step, ny = cy + dy * step;
        if (!world.in_bounds(nx, ny) || world.occupied(nx, ny)) {
            if (dx > 0) wall = nx * s - pose.x;
            else if (dx < 0) wall = pose.x - (nx + 1) * s;
            else if (dy > 0) wall = ny * s - pose.y;
            else wall = pose.y - (ny + 1) * s;
            break;
        }
    }

    // The forward sensor trips one cell ahead of the obstacle.
    const double allowed = std::max(0.0, wall - s);
    const double moved = std::min(magnitude, allowed);
    MotionResult r;
    r.moved = moved;
    r.truncated = allowed < magnitude;
    r.pose = {pose.x + dx * moved, pose.y + dy * moved};
    return r;
}

namespace {

struct OpenNode {
    double f;
    int h;  // tie-break on heuristic, then insertion order
    long order;
    int cell;
    bool operator>(const OpenNode& o) const {
        return std::tie(f, h, order) > std::tie(o.f, o.h, o.order);
    }
};

}  // namespace

std::optional<std::vector<PlannedAction>> astar(const GridWorld& world,
                                                const Pose& start,
                                                const Pose& target,
                                                const MotionSet& motions,
                                                double goal_radius) {
    motions.validate(world.cell_size());
    if (!world.pose_free(start) || !world.pose_free(target)) {
        throw std::logic_error("astar: endpoint inside an occupied cell");
    }
    const int W = world.width();
    const double s = world.cell_size();
    const int sx = world.cell_x(start.x), sy = world.cell_y(start.y);
    const int tx = world.cell_x(target.x), ty = world.cell_y(target.y);
    const int max_mag_cells = int(std::round(motions.max_magnitude() / s));
    const double radius_cells = goal_radius / s;

    auto is_goal = [&](int cx, int cy) {
        if (goal_radius <= 0.0) return cx == tx && cy == ty;
        const double ddx = double(cx - tx), ddy = double(cy - ty);
        return ddx * ddx + ddy * ddy <= radius_cells * radius_cells;
    };
    // Admissible: one action changes at most one axis by max_magnitude, and
    // every goal cell lies within radius (in chebyshev terms too) of target.
    auto heuristic = [&](int cx, int cy) {
        const double cheb = double(std::max(std::abs(cx - tx), std::abs(cy - ty)));
        const double remaining = std::max(0.0, cheb - radius_cells);
        return int(std::ceil(remaining / max_mag_cells - 1e-12));
    };

    const size_t n_cells = size_t(W) * world.height();
    std::vector<int> g(n_cells, -1);
    std::vector<int> parent(n_cells, -1);
    std::vector<int16_t> parent_action(n_cells, -1);

    std::priority_queue<OpenNode, std::vector<OpenNode>, std::greater<OpenNode>> open;
    const int start_idx = int(world.index(sx, sy));
    g[start_idx] = 0;
    long order = 0;
    open.push({double(heuristic(sx, sy)), heuristic(sx, sy), order++, start_idx});

    const int n_actions = motions.size();
    while (!open.empty()) {
        const OpenNode node = open.top();
        open.pop();
        const int cx = node.cell % W;
        const int cy = node.cell / W;
        const int gc = g[node.cell];
        if (node.f > gc + heuristic(cx, cy)) continue;  // stale entry
        if (is_goal(cx, cy)) {
            std::vector<PlannedAction> plan;
            int cur = node.cell;
            while (parent_action[cur] >= 0) {
                const int a = parent_action[cur];
                plan.push_back({motions.direction(a), a % int(motions.magnitudes.size())});
                cur = parent[cur];
            }
            std::reverse(plan.begin(), plan.end());
            return plan;
        }
        const Pose pose = world.cell_center(cx, cy);
        for (int a = 0; a < n_actions; ++a) {
            const MotionResult r =
                step_motion(world, pose, motions.direction(a), motions.magnitude(a));
            if (r.moved == 0.0) continue;
            const int nx = world.cell_x(r.pose.x), ny = world.cell_y(r.pose.y);
            const int nidx = int(world.index(nx, ny));
            const int ng = gc + 1;
            if (g[nidx] < 0 || ng < g[nidx]) {
                g[nidx] = ng;
                parent[nidx] = node.cell;
                parent_action[nidx] = int16_t(a);
                const int h = heuristic(nx, ny);
                open.push({double(ng + h), h, order++, nidx});
            }
        }
    }
    return std::nullopt;
}

}  // namespace cadence
