#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cadence/emulator.hpp"
#include "cadence/energy.hpp"
#include "cadence/episodes.hpp"
#include "cadence/qnet.hpp"

namespace cadence {

// Joint (motion, slimming-factor) action vocabulary. Flat index =
// rho_index * m + motion. Gate options are ascending and include the
// rho = 0 bypass; a fixed_rho mask restricts selection to one gate row
// (the navigation-only static baseline).
struct JointActionSpace {
    MotionSet motions;
    std::vector<double> gate_options;  // ascending, gate_options[0] == 0
    std::optional<double> fixed_rho;

    static std::vector<double> gates_from_rho_set(const std::vector<double>& rho_set);

    int m() const { return motions.size(); }
    int n() const { return int(gate_options.size()); }
    int size() const { return n() * m(); }
    int flat(int rho_index, int motion) const { return rho_index * m() + motion; }
    int rho_index_of(int flat_action) const { return flat_action / m(); }
    int motion_of(int flat_action) const { return flat_action % m(); }
    double rho_of(int flat_action) const { return gate_options[rho_index_of(flat_action)]; }

    // Selectable flat indices (all of them, or one gate row under a mask).
    std::vector<int> allowed() const;
    // The fidelity used before the first gate prediction exists.
    double first_rho() const;
    void validate() const;
};

// FIFO of the tau most recent (depth scan, relative pose) observations,
// zero-padded at episode start. Depths are normalized by max_range; the
// relative pose is (dx, dy, distance, unit bearing x, unit bearing y)
// normalized into [-1, 1] by the map scale.
class ObservationQueue {
public:
    static constexpr int kPoseDims = 5;

    ObservationQueue(int tau, int rays, double max_range, double map_scale);

    void reset();
    void push(const DepthScan& scan, const Pose& pose, const Pose& target);

    // Flattened state, oldest entry first: tau * (K + 5) values.
    const std::vector<double>& state() const { return state_; }
    int dim() const { return tau_ * (rays_ + kPoseDims); }

    // Mean of the depth entries currently in the queue, in meters, excluding
    // zero scans (bypass outputs and padding); absent when none qualify.
    std::optional<double> mean_depth() const;

    int entries() const { return filled_; }

private:
    int tau_, rays_;
    double max_range_, map_scale_;
    int filled_ = 0;
    std::vector<double> state_;
    std::vector<uint8_t> nonzero_;  // per slot: scan had a nonzero entry
};

enum class StepOutcome { Step, Goal, Timeout };

// Eq-of-motion reward: fixed terminal constants, otherwise a distance
// penalty, the energy penalty for the width just used, and a constant cost
// per step.
double step_reward(StepOutcome outcome, double distance, double rho,
                   const EnergyProfile& profile, double alpha, double w_dist,
                   double w_energy);

struct StepRecord {
    double x = 0.0, y = 0.0;  // pose at the sensing stage
    int direction = 0;
    int magnitude_index = 0;
    double magnitude = 0.0;
    double moved = 0.0;
    double rho_used = 0.0;  // width of this step's computing stage
    double rho_next = 0.0;  // gate emitted for the next stage
    bool truncated = false;
    double reward = 0.0;
    double dist_before = 0.0;             // to target, at decision time
    std::optional<double> queue_mean;     // non-bypass queue depth mean, meters
};

struct EpisodeResult {
    bool success = false;
    int steps = 0;
    double total_reward = 0.0;
    double final_dist = 0.0;
    double moved_total = 0.0;
    std::vector<StepRecord> trace;
    EpisodeEnergy energy;
    // Realized navigation frequency: meters traveled per acquisition.
    std::optional<double> nu;
};

// Everything an episode needs, shared and immutable during evaluation.
struct PolicyEnv {
    const GridWorld* world = nullptr;
    const Sensor* sensor = nullptr;
    ObservationCache* cache = nullptr;  // optional; bypasses direct sensing
    DepthBackend* backend = nullptr;
    const EnergyProfile* profile = nullptr;
    double alpha = 64.0;
    JointActionSpace actions;
    int tau = 3;
    double success_radius = 2.0;
    double w_dist = 0.1;
    double w_energy = 2.0;
    int step_budget_mult = 4;
    int step_budget_min = 20;

    int step_budget(int difficulty) const {
        const int b = step_budget_mult * difficulty;
        return b < step_budget_min ? step_budget_min : b;
    }
};

using TransitionHook =
    std::function<void(const std::vector<double>& state, int action, double reward,
                       const std::vector<double>& next_state, bool terminal)>;

// One sensing-computing-acting episode. The gate emitted at step t selects
// the width used at step t+1; the first stage runs at the action space's
// first_rho. Bypass steps acquire nothing and cost nothing.
EpisodeResult run_episode(const PolicyEnv& env, const QNet& qnet,
                          const EpisodeSpec& episode, double epsilon, Rng& rng,
                          const TransitionHook& hook = nullptr);

struct PolicyTrainConfig {
    std::vector<int> hidden = {256, 128};
    double gamma = 0.99;
    double lr = 5e-4;
    int batch = 64;
    size_t buffer_capacity = 100000;
    int target_sync = 500;  // updates between target copies
    int update_every = 4;   // environment steps per update
    int warmup = 500;       // stored transitions before learning starts
    double eps_start = 1.0;
    double eps_end = 0.05;
    double eps_fraction = 0.4;  // of episodes spent annealing
    long episodes = 20000;
    int level_up_period = 500;
    int validation_period = 500;
    double top_level_prob = 0.7;
    uint64_t seed = 0;
};

struct LearningCurveRow {
    long episode = 0;
    double validation_accuracy = 0.0;
    double validation_energy_mj = 0.0;
    double epsilon = 0.0;
    int level = 0;
};

struct PolicyTrainResult {
    QNet qnet;  // best-validation snapshot
    std::vector<LearningCurveRow> curve;
    long best_episode = 0;
    double best_accuracy = 0.0;
    double best_energy_mj = 0.0;
};

// Curriculum level and sampling distribution after a number of episodes.
struct CurriculumState {
    int level = 0;
    bool saturated = false;

    static CurriculumState at_episode(long episode, int period, int max_level);
    // Level to draw this episode from.
    int sample_level(Rng& rng, double top_level_prob) const;
};

// Sample -> act -> store -> update loop with curriculum leveling, periodic
// greedy validation, and early stopping on the best validation accuracy
// (ties broken toward lower energy).
PolicyTrainResult train_policy(const PolicyEnv& env,
                               const EpisodeSamplerParams& sampler,
                               const std::vector<EpisodeSpec>& validation,
                               const PolicyTrainConfig& config);

// Greedy accuracy and total depth-network energy over an episode set,
// deterministic per seed. Episodes fan out across threads.
struct GreedyEvalSummary {
    double accuracy = 0.0;
    double total_energy_mj = 0.0;
    std::vector<EpisodeResult> results;
};
GreedyEvalSummary evaluate_greedy(const PolicyEnv& env, const QNet& qnet,
                                  const std::vector<EpisodeSpec>& episodes,
                                  uint64_t seed);

// Versioned policy checkpoint: network, action space, queue geometry, and
// the originating config hash.
struct PolicyCheckpoint {
    QNet qnet;
    JointActionSpace actions;
    int tau = 3;
    int rays = 32;
    double max_range = 40.0;
    double map_scale = 64.0;
    uint64_t config_hash = 0;

    void save(const std::string& path) const;
    static PolicyCheckpoint load(const std::string& path);
};

void save_learning_curve(const std::vector<LearningCurveRow>& curve,
                         const std::string& path, uint64_t config_hash);

}  // namespace cadence
