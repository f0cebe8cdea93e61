#pragma once

#include <string>
#include <vector>

#include "cadence/pathing.hpp"
#include "cadence/rng.hpp"

namespace cadence {

// One navigation task. Difficulty is the minimum number of actions the
// planner needs to succeed (distance to target within goal_radius).
struct EpisodeSpec {
    Pose start;
    Pose target;
    int difficulty = 0;
    std::vector<PlannedAction> optimal_path;
};

// Inclusive difficulty ranges, one per curriculum level, easiest first.
struct DifficultyLadder {
    struct Bucket {
        int lo = 1;
        int hi = 3;
    };
    std::vector<Bucket> buckets = {{1, 3}, {4, 6}, {7, 10}, {11, 16}};

    int levels() const { return int(buckets.size()); }
    bool contains(int level, int difficulty) const {
        return difficulty >= buckets[level].lo && difficulty <= buckets[level].hi;
    }
};

struct EpisodeSamplerParams {
    DifficultyLadder ladder;
    MotionSet motions;
    double goal_radius = 2.0;
    int attempt_budget = 20000;
};

// Rejection-samples an episode whose endpoints are free cells of the given
// region and whose difficulty falls in the level's bucket. Throws after the
// attempt budget (a mis-specified bucket for this world).
EpisodeSpec sample_episode(const GridWorld& world, int level,
                           const EpisodeSamplerParams& params, Region region,
                           Rng& rng);

struct HoldoutSets {
    std::vector<EpisodeSpec> validation;
    std::vector<EpisodeSpec> test;
};

// Frozen evaluation episodes, drawn exclusively from the holdout region and
// stratified across the ladder's buckets. Validation and test are disjoint
// by (start, target) pair. Deterministic per seed.
HoldoutSets build_holdout_sets(const GridWorld& world,
                               const EpisodeSamplerParams& params,
                               int validation_per_bucket, int test_per_bucket,
                               uint64_t seed);

}  // namespace cadence
