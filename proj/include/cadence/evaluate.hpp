#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cadence/policy.hpp"

namespace cadence {

// Hold-out evaluation totals. Totals are sums over the per-episode results
// and independent of episode order.
struct SuiteMetrics {
    double accuracy = 0.0;  // fraction of episodes succeeded
    double total_energy_mj = 0.0;
    std::optional<double> mean_power_mw;    // over acquisitions
    std::optional<double> mean_latency_ms;  // over acquisitions
    long total_acquisitions = 0;
    long episodes = 0;
    long successes = 0;
    long total_steps = 0;
    double total_moved_m = 0.0;
    std::optional<double> mean_nu;  // meters per acquisition
    std::vector<EpisodeResult> results;
};

// Runs every test episode once with greedy action selection; deterministic
// per seed. Static baselines are expressed through the env's action-space
// mask (gate outputs fixed to one width).
SuiteMetrics evaluate_suite(const PolicyEnv& env, const QNet& qnet,
                            const std::vector<EpisodeSpec>& test_set,
                            uint64_t seed);

// Signed efficiency/accuracy deltas of an adaptive run against a static
// baseline. Reductions are positive when the adaptive run uses less.
struct ComparisonDeltas {
    double acquisitions_reduction_pct = 0.0;
    double power_reduction_pct = 0.0;
    double latency_reduction_pct = 0.0;
    double energy_reduction_pct = 0.0;
    double accuracy_gain_pp = 0.0;   // absolute percentage points
    double accuracy_gain_pct = 0.0;  // relative to the baseline
};

ComparisonDeltas compare_suites(const SuiteMetrics& adaptive,
                                const SuiteMetrics& baseline);

// Episodes solved by one policy, labeled by its network size.
struct SuccessSet {
    double size_label = 0.0;
    std::set<int> solved;
};

struct SaturationResult {
    std::vector<int> descending_order;  // indices into the input sets
    std::vector<long> descending_union; // |B| after each addition
    std::vector<int> greedy_order;
    std::vector<long> greedy_union;
    std::vector<long> greedy_marginal;
};

// Union growth of solved-path sets when policies are added (a) in
// descending size order and (b) greedily by marginal gain (ties toward the
// larger size). Requires at least two sets over the same test set.
SaturationResult saturation_analysis(const std::vector<SuccessSet>& sets);

// Mean slimming factor of the computing stages that happened in each
// (x, y) bin; bins nobody visited are absent (count 0).
struct RhoHeatmap {
    int nx = 0, ny = 0;
    double bin = 1.0;
    std::vector<double> mean;  // ny * nx, row cy=0 first
    std::vector<long> count;

    double& at(int bx, int by) { return mean[size_t(by) * nx + bx]; }
};

RhoHeatmap rho_heatmap(const std::vector<EpisodeResult>& traces, double bin,
                       double width_m, double height_m,
                       std::optional<Direction> direction_filter = std::nullopt);

void save_heatmap_csv(const RhoHeatmap& map, const std::string& path);
// Portable graymap: data scaled to 0..254, absent bins rendered 255.
void save_heatmap_pgm(const RhoHeatmap& map, const std::string& path);

// Rank correlation with average ranks for ties; absent when either input is
// constant.
std::optional<double> spearman(const std::vector<double>& x,
                               const std::vector<double>& y);

// Rank correlations between the emitted gate value and its context, plus
// the conditional gate mean after collision truncation. Pure reporting.
struct CorrelationReport {
    long events = 0;
    std::optional<double> rho_vs_queue_mean;
    std::optional<double> rho_vs_distance;
    std::optional<double> rho_persistence;  // against the previous step's gate
    std::optional<double> rho_vs_magnitude;
    std::optional<double> mean_rho_after_truncation;
    std::optional<double> mean_rho_otherwise;
};

CorrelationReport context_correlations(const std::vector<EpisodeResult>& traces,
                                       long min_events = 100);

}  // namespace cadence
