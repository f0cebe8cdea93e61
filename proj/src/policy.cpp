#include "cadence/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "cadence/io_util.hpp"

namespace cadence {

std::vector<double> JointActionSpace::gates_from_rho_set(
    const std::vector<double>& rho_set) {
    std::vector<double> gates = rho_set;
    gates.push_back(0.0);
    std::sort(gates.begin(), gates.end());
    return gates;
}

std::vector<int> JointActionSpace::allowed() const {
    std::vector<int> out;
    if (fixed_rho) {
        int row = -1;
        for (int i = 0; i < n(); ++i) {
            if (gate_options[i] == *fixed_rho) row = i;
        }
        if (row < 0) throw std::invalid_argument("action space: fixed rho not a gate option");
        for (int a = 0; a < m(); ++a) out.push_back(flat(row, a));
    } else {
        out.resize(size_t(size()));
        for (int i = 0; i < size(); ++i) out[size_t(i)] = i;
    }
    return out;
}

double JointActionSpace::first_rho() const {
    if (fixed_rho) return *fixed_rho;
    return gate_options.back();
}

void JointActionSpace::validate() const {
    if (gate_options.empty() || gate_options.front() != 0.0) {
        throw std::invalid_argument("action space: gate options must start with the bypass");
    }
    for (size_t i = 1; i < gate_options.size(); ++i) {
        if (gate_options[i] <= gate_options[i - 1]) {
            throw std::invalid_argument("action space: gate options must be ascending");
        }
    }
    if (motions.magnitudes.empty()) {
        throw std::invalid_argument("action space: empty motion set");
    }
}

ObservationQueue::ObservationQueue(int tau, int rays, double max_range,
                                   double map_scale)
    : tau_(tau), rays_(rays), max_range_(max_range), map_scale_(map_scale) {
    if (tau < 1) throw std::invalid_argument("observation queue: tau must be >= 1");
    reset();
}

void ObservationQueue::reset() {
    state_.assign(size_t(dim()), 0.0);
    nonzero_.assign(size_t(tau_), 0);
    filled_ = 0;
}

void ObservationQueue::push(const DepthScan& scan, const Pose& pose,
                            const Pose& target) {
    const int entry = rays_ + kPoseDims;
    // Shift older entries toward the front.
    std::copy(state_.begin() + entry, state_.end(), state_.begin());
    std::copy(nonzero_.begin() + 1, nonzero_.end(), nonzero_.begin());
    double* slot = state_.data() + size_t(tau_ - 1) * entry;
    bool any = false;
    for (int k = 0; k < rays_; ++k) {
        slot[k] = scan.ranges[size_t(k)] / max_range_;
        if (scan.ranges[size_t(k)] != 0.0) any = true;
    }
    const double dx = target.x - pose.x;
    const double dy = target.y - pose.y;
    const double dist = std::hypot(dx, dy);
    slot[rays_ + 0] = dx / map_scale_;
    slot[rays_ + 1] = dy / map_scale_;
    slot[rays_ + 2] = dist / (map_scale_ * M_SQRT2);
    slot[rays_ + 3] = dist > 0.0 ? dx / dist : 0.0;
    slot[rays_ + 4] = dist > 0.0 ? dy / dist : 0.0;
    nonzero_[size_t(tau_ - 1)] = any ? 1 : 0;
    if (filled_ < tau_) ++filled_;
}

std::optional<double> ObservationQueue::mean_depth() const {
    const int entry = rays_ + kPoseDims;
    double sum = 0.0;
    long count = 0;
    for (int t = 0; t < tau_; ++t) {
        if (!nonzero_[size_t(t)]) continue;
        const double* slot = state_.data() + size_t(t) * entry;
        for (int k = 0; k < rays_; ++k) sum += slot[k] * max_range_;
        count += rays_;
    }
    if (count == 0) return std::nullopt;
    return sum / double(count);
}

double step_reward(StepOutcome outcome, double distance, double rho,
                   const EnergyProfile& profile, double alpha, double w_dist,
                   double w_energy) {
    switch (outcome) {
        case StepOutcome::Timeout: return -10.0;
        case StepOutcome::Goal: return 40.0;
        case StepOutcome::Step:
            return -w_dist * distance -
                   reward_energy_penalty(profile, alpha, rho, w_energy) - 1.0;
    }
    return 0.0;
}

namespace {

double distance(const Pose& a, const Pose& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

}  // namespace

EpisodeResult run_episode(const PolicyEnv& env, const QNet& qnet,
                          const EpisodeSpec& episode, double epsilon, Rng& rng,
                          const TransitionHook& hook) {
    env.actions.validate();
    EpisodeResult result;
    Pose pose = episode.start;
    result.final_dist = distance(pose, episode.target);
    if (result.final_dist <= env.success_radius) {
        result.success = true;
        result.total_reward = 40.0;
        return result;
    }

    const GridWorld& world = *env.world;
    const double map_scale =
        std::max(world.width(), world.height()) * world.cell_size();
    ObservationQueue queue(env.tau, env.sensor->params().rays,
                           env.sensor->params().max_range, map_scale);
    QNet::Workspace ws = qnet.make_workspace(1);
    const std::vector<int> allowed = env.actions.allowed();
    const int budget = env.step_budget(episode.difficulty);

    double pending_rho = env.actions.first_rho();
    std::vector<double> sizes;
    sizes.reserve(size_t(budget));

    // Transition deferred until the successor state exists.
    bool have_pending = false;
    std::vector<double> pending_state;
    int pending_action = 0;
    double pending_reward = 0.0;

    for (int t = 0; t < budget; ++t) {
        // Sensing + computing stage at the gate chosen in the previous step.
        DepthScan depth;
        if (pending_rho == 0.0) {
            depth = DepthScan::zeros(env.sensor->params().rays,
                                     env.sensor->params().max_range);
        } else if (env.cache) {
            depth = env.backend->predict(env.cache->lookup(pose), pending_rho, rng);
        } else {
            depth = env.backend->predict(env.sensor->sense(pose), pending_rho, rng);
        }
        sizes.push_back(env.alpha * pending_rho);
        queue.push(depth, pose, episode.target);
        const std::vector<double> state = queue.state();

        if (have_pending && hook) {
            hook(pending_state, pending_action, pending_reward, state, false);
        }
        have_pending = false;

        StepRecord rec;
        rec.x = pose.x;
        rec.y = pose.y;
        rec.rho_used = pending_rho;
        rec.dist_before = distance(pose, episode.target);
        rec.queue_mean = queue.mean_depth();

        const int action =
            select_action(qnet, ws, state.data(), allowed, epsilon, rng);
        const int motion = env.actions.motion_of(action);
        const double rho_next = env.actions.rho_of(action);
        const Direction dir = env.actions.motions.direction(motion);
        const double mag = env.actions.motions.magnitude(motion);

        const MotionResult moved = step_motion(world, pose, dir, mag);
        pose = moved.pose;
        result.moved_total += moved.moved;
        const double d = distance(pose, episode.target);

        StepOutcome outcome = StepOutcome::Step;
        if (d <= env.success_radius) {
            outcome = StepOutcome::Goal;
        } else if (t == budget - 1) {
            outcome = StepOutcome::Timeout;
        }
        const double r = step_reward(outcome, d, pending_rho, *env.profile,
                                     env.alpha, env.w_dist, env.w_energy);

        rec.direction = int(dir);
        rec.magnitude_index = motion % int(env.actions.motions.magnitudes.size());
        rec.magnitude = mag;
        rec.moved = moved.moved;
        rec.truncated = moved.truncated;
        rec.rho_next = rho_next;
        rec.reward = r;
        result.trace.push_back(rec);
        result.total_reward += r;
        ++result.steps;

        if (outcome != StepOutcome::Step) {
            if (hook) hook(state, action, r, state, true);
            result.success = outcome == StepOutcome::Goal;
            result.final_dist = d;
            break;
        }
        pending_state = state;
        pending_action = action;
        pending_reward = r;
        have_pending = true;
        pending_rho = rho_next;
        result.final_dist = d;
    }

    result.energy = episode_energy(*env.profile, sizes);
    if (result.energy.acquisitions > 0) {
        result.nu = result.moved_total / double(result.energy.acquisitions);
    }
    return result;
}

CurriculumState CurriculumState::at_episode(long episode, int period,
                                            int max_level) {
    CurriculumState s;
    const long raw = period > 0 ? episode / period : 0;
    s.level = int(std::min<long>(raw, max_level));
    s.saturated = raw >= max_level;
    return s;
}

int CurriculumState::sample_level(Rng& rng, double top_level_prob) const {
    if (saturated) return int(rng.below(uint64_t(level + 1)));
    if (level == 0) return 0;
    if (rng.uniform() < top_level_prob) return level;
    return int(rng.below(uint64_t(level)));
}

GreedyEvalSummary evaluate_greedy(const PolicyEnv& env, const QNet& qnet,
                                  const std::vector<EpisodeSpec>& episodes,
                                  uint64_t seed) {
    GreedyEvalSummary summary;
    summary.results.resize(episodes.size());
    // Fill the shared cache up front so the parallel workers only read it.
    if (env.cache) env.cache->warm();
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < long(episodes.size()); ++i) {
        Rng rng(hash_combine(seed, uint64_t(i)));
        summary.results[size_t(i)] =
            run_episode(env, qnet, episodes[size_t(i)], 0.0, rng);
    }
    long wins = 0;
    for (const EpisodeResult& r : summary.results) {
        if (r.success) ++wins;
        summary.total_energy_mj += r.energy.total_energy_mj;
    }
    summary.accuracy =
        episodes.empty() ? 0.0 : double(wins) / double(episodes.size());
    return summary;
}

PolicyTrainResult train_policy(const PolicyEnv& env,
                               const EpisodeSamplerParams& sampler,
                               const std::vector<EpisodeSpec>& validation,
                               const PolicyTrainConfig& config) {
    env.actions.validate();
    if (validation.empty()) {
        throw std::invalid_argument("train_policy: validation set required");
    }
    const GridWorld& world = *env.world;
    const int state_dim =
        env.tau * (env.sensor->params().rays + ObservationQueue::kPoseDims);

    QNet qnet(state_dim, config.hidden, env.actions.size(),
              hash_combine(config.seed, 0x9e7ULL));
    Adam opt({config.lr, 0.9, 0.999, 1e-8, 0.0});
    std::vector<int> slots;
    QNet::Grads grads = qnet.make_grads();
    qnet.for_each_tensor(grads, [&](std::vector<double>& p, std::vector<double>&,
                                    bool decay) {
        slots.push_back(opt.register_slot(p.size(), decay));
    });
    QNet::Workspace ws_batch = qnet.make_workspace(config.batch);
    QNet::Workspace ws_next = qnet.make_workspace(config.batch);

    ReplayBuffer buffer(config.buffer_capacity);
    Rng rng_sample(hash_combine(config.seed, 0x5a3eULL));
    Rng rng_act(hash_combine(config.seed, 0xac7ULL));
    Rng rng_learn(hash_combine(config.seed, 0x1ea2ULL));

    DqnUpdateSettings update_settings;
    update_settings.gamma = config.gamma;
    update_settings.allowed = env.actions.allowed();

    const int max_level = sampler.ladder.levels() - 1;
    const long anneal = std::max<long>(1, long(config.eps_fraction * config.episodes));

    PolicyTrainResult result;
    result.best_accuracy = -1.0;
    result.qnet = qnet;
    long global_step = 0;
    long updates = 0;

    auto hook = [&](const std::vector<double>& s, int a, double r,
                    const std::vector<double>& s2, bool terminal) {
        buffer.push(Transition{s, a, r, s2, terminal});
        ++global_step;
        if (buffer.size() < size_t(config.warmup)) return;
        if (global_step % config.update_every != 0) return;
        std::vector<const Transition*> batch(size_t(config.batch));
        for (int i = 0; i < config.batch; ++i) batch[size_t(i)] = &buffer.sample(rng_learn);
        double_dqn_update(qnet, opt, slots, grads, ws_batch, ws_next, batch,
                          update_settings);
        ++updates;
        if (updates % config.target_sync == 0) qnet.sync_target();
    };

    auto validate = [&](long episode, double eps, int level) {
        const GreedyEvalSummary val =
            evaluate_greedy(env, qnet, validation, hash_combine(config.seed, 0x7a11daULL));
        LearningCurveRow row;
        row.episode = episode;
        row.validation_accuracy = val.accuracy;
        row.validation_energy_mj = val.total_energy_mj;
        row.epsilon = eps;
        row.level = level;
        result.curve.push_back(row);
        const bool better =
            val.accuracy > result.best_accuracy ||
            (val.accuracy == result.best_accuracy &&
             val.total_energy_mj < result.best_energy_mj);
        if (better) {
            result.best_accuracy = val.accuracy;
            result.best_energy_mj = val.total_energy_mj;
            result.best_episode = episode;
            result.qnet = qnet;
        }
    };

    for (long e = 0; e < config.episodes; ++e) {
        const CurriculumState cur =
            CurriculumState::at_episode(e, config.level_up_period, max_level);
        const int level = cur.sample_level(rng_sample, config.top_level_prob);
        const EpisodeSpec ep =
            sample_episode(world, level, sampler, Region::Training, rng_sample);
        const double frac = std::min(1.0, double(e) / double(anneal));
        const double eps =
            config.eps_start + frac * (config.eps_end - config.eps_start);
        run_episode(env, qnet, ep, eps, rng_act, hook);
        if ((e + 1) % config.validation_period == 0) {
            validate(e + 1, eps, cur.level);
        }
    }
    if (result.curve.empty() || result.curve.back().episode != config.episodes) {
        const CurriculumState cur = CurriculumState::at_episode(
            config.episodes, config.level_up_period, max_level);
        validate(config.episodes, config.eps_end, cur.level);
    }
    return result;
}

void PolicyCheckpoint::save(const std::string& path) const {
    BinWriter w(path);
    w.magic("CADPOL1\n");
    w.u64(1);
    w.u64(config_hash);
    w.i64(tau);
    w.i64(rays);
    w.f64(max_range);
    w.f64(map_scale);
    w.vec(actions.motions.magnitudes);
    w.vec(actions.gate_options);
    w.u64(actions.fixed_rho ? 1 : 0);
    w.f64(actions.fixed_rho ? *actions.fixed_rho : 0.0);
    w.i64(qnet.input_dim());
    w.i64(qnet.n_actions());
    w.u64(qnet.hidden_dims().size());
    for (int h : qnet.hidden_dims()) w.i64(h);
    for (const QNet::Layer& l : qnet.online()) {
        w.vec(l.W);
        w.vec(l.b);
    }
}

PolicyCheckpoint PolicyCheckpoint::load(const std::string& path) {
    BinReader r(path);
    r.expect_magic("CADPOL1\n");
    if (r.u64() != 1) throw std::runtime_error("unsupported policy checkpoint version");
    PolicyCheckpoint cp;
    cp.config_hash = r.u64();
    cp.tau = int(r.i64());
    cp.rays = int(r.i64());
    cp.max_range = r.f64();
    cp.map_scale = r.f64();
    cp.actions.motions.magnitudes = r.vec();
    cp.actions.gate_options = r.vec();
    const bool has_fixed = r.u64() != 0;
    const double fixed = r.f64();
    if (has_fixed) cp.actions.fixed_rho = fixed;
    const int input_dim = int(r.i64());
    const int n_actions = int(r.i64());
    const uint64_t n_hidden = r.u64();
    std::vector<int> hidden(n_hidden);
    for (uint64_t i = 0; i < n_hidden; ++i) hidden[i] = int(r.i64());
    cp.qnet = QNet(input_dim, hidden, n_actions, 0);
    for (QNet::Layer& l : cp.qnet.online()) {
        l.W = r.vec();
        l.b = r.vec();
    }
    cp.qnet.sync_target();
    return cp;
}

void save_learning_curve(const std::vector<LearningCurveRow>& curve,
                         const std::string& path, uint64_t config_hash) {
    std::string body = "# config_hash=" + std::to_string(config_hash) + "\n";
    body += "episode,validation_accuracy,validation_energy_mj,epsilon,level\n";
    char buf[160];
    for (const LearningCurveRow& r : curve) {
        std::snprintf(buf, sizeof buf, "%ld,%.6f,%.6f,%.6f,%d\n", r.episode,
                      r.validation_accuracy, r.validation_energy_mj, r.epsilon,
                      r.level);
        body += buf;
    }
    write_text_file(path, body);
}

}  // namespace cadence
