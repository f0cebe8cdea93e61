#include "cadence/episodes.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace cadence {

namespace {

double dist(const Pose& a, const Pose& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

// One sampling attempt: endpoints at free cell centers of the region.
EpisodeSpec propose(const GridWorld& world, const EpisodeSamplerParams& p,
                    Region region, Rng& rng, bool& viable) {
    const std::vector<size_t>& cells = world.free_cells(region);
    if (cells.size() < 2) throw std::runtime_error("sample_episode: region has no free cells");
    const size_t a = cells[rng.below(cells.size())];
    const size_t b = cells[rng.below(cells.size())];
    EpisodeSpec ep;
    ep.start = world.cell_center(int(a % world.width()), int(a / world.width()));
    ep.target = world.cell_center(int(b % world.width()), int(b / world.width()));
    viable = false;
    if (dist(ep.start, ep.target) <= p.goal_radius) return ep;  // difficulty 0, never bucketed
    auto plan = astar(world, ep.start, ep.target, p.motions, p.goal_radius);
    if (!plan) return ep;
    ep.optimal_path = std::move(*plan);
    ep.difficulty = int(ep.optimal_path.size());
    viable = true;
    return ep;
}

}  // namespace

EpisodeSpec sample_episode(const GridWorld& world, int level,
                           const EpisodeSamplerParams& params, Region region,
                           Rng& rng) {
    if (level < 0 || level >= params.ladder.levels()) {
        throw std::invalid_argument("sample_episode: level outside the ladder");
    }
    for (int attempt = 0; attempt < params.attempt_budget; ++attempt) {
        bool viable = false;
        EpisodeSpec ep = propose(world, params, region, rng, viable);
        if (viable && params.ladder.contains(level, ep.difficulty)) return ep;
    }
    throw std::runtime_error("sample_episode: attempt budget exhausted for level " +
                             std::to_string(level));
}

HoldoutSets build_holdout_sets(const GridWorld& world,
                               const EpisodeSamplerParams& params,
                               int validation_per_bucket, int test_per_bucket,
                               uint64_t seed) {
    Rng rng(hash_combine(seed, 0x401d0ULL));
    HoldoutSets out;
    std::set<std::pair<size_t, size_t>> used;
    auto key = [&](const EpisodeSpec& ep) {
        return std::pair<size_t, size_t>(
            world.index(world.cell_x(ep.start.x), world.cell_y(ep.start.y)),
            world.index(world.cell_x(ep.target.x), world.cell_y(ep.target.y)));
    };
    for (int level = 0; level < params.ladder.levels(); ++level) {
        const int want = validation_per_bucket + test_per_bucket;
        std::vector<EpisodeSpec> bucket;
        int attempts = 0;
        const int budget = params.attempt_budget * want;
        while (int(bucket.size()) < want) {
            if (++attempts > budget) {
                throw std::runtime_error(
                    "build_holdout_sets: insufficient viable pairs in bucket " +
                    std::to_string(level));
            }
            bool viable = false;
            EpisodeSpec ep = propose(world, params, Region::Holdout, rng, viable);
            if (!viable || !params.ladder.contains(level, ep.difficulty)) continue;
            if (!used.insert(key(ep)).second) continue;
            bucket.push_back(std::move(ep));
        }
        for (int i = 0; i < validation_per_bucket; ++i) {
            out.validation.push_back(std::move(bucket[i]));
        }
        for (int i = validation_per_bucket; i < want; ++i) {
            out.test.push_back(std::move(bucket[i]));
        }
    }
    return out;
}

}  // namespace cadence
