#pragma once

#include <json.hpp>
#include <optional>
#include <string>

#include "cadence/emulator.hpp"
#include "cadence/episodes.hpp"
#include "cadence/mde.hpp"
#include "cadence/policy.hpp"
#include "cadence/sensing.hpp"

namespace cadence {

struct WorldConfig {
    WorldGenParams gen;
    SensorParams sensor;
    DifficultyLadder ladder;
    MotionSet motions;
    double success_radius = 2.0;
    int sample_attempt_budget = 20000;
    int validation_per_bucket = 10;
    int test_per_bucket = 30;
    double cache_quantization = 1.0;

    EpisodeSamplerParams sampler() const {
        return {ladder, motions, success_radius, sample_attempt_budget};
    }
};

struct PerceptionConfig {
    SlimmableConfig net;
    size_t dataset_pairs = 4000;
    double train_frac = 0.4;
    double val_frac = 0.1;
    MdeTrainConfig train;
    EmulatorParams emulator;
};

struct EnergyConfig {
    std::string profile = "embedded";  // "embedded" or a CSV path
    std::string interpolation = "log2";
    double w_energy = 2.0;

    EnergyProfile load() const;
};

struct PolicyModuleConfig {
    PolicyTrainConfig train;
    double w_dist = 0.1;
    int step_budget_mult = 4;
    int step_budget_min = 20;
    std::string backend = "emulator";  // "emulator" or "net"
    std::optional<double> fixed_rho;   // static navigation-only baseline
};

struct EvalSettings {
    double heatmap_bin = 1.0;
};

// Full experiment settings. Saved configs materialize every field so
// artifacts never depend on implicit defaults; the config hash is embedded
// in everything a command writes.
struct ExperimentConfig {
    uint64_t seed = 7;
    std::string preset = "desk";
    WorldConfig world;
    PerceptionConfig perception;
    EnergyConfig energy;
    PolicyModuleConfig policy;
    EvalSettings eval;

    static ExperimentConfig desk();
    static ExperimentConfig paper_scale();
    static ExperimentConfig from_preset(const std::string& name);

    nlohmann::json to_json() const;
    static ExperimentConfig from_json(const nlohmann::json& j);
    // Preset base (from the file's "preset" key when present) overlaid with
    // the file's explicit keys.
    static ExperimentConfig load_file(const std::string& path);
    void save_file(const std::string& path) const;

    uint64_t hash() const;
};

std::string hash_hex(uint64_t h);

}  // namespace cadence
