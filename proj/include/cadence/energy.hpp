#pragma once

#include <optional>
#include <string>
#include <vector>

namespace cadence {

// Measured cost of one depth-network inference at a given network size
// (base width alpha times slimming factor rho).
struct EnergyRow {
    double size = 0.0;        // channel scale, alpha * rho
    double power_mw = 0.0;    // board power during inference
    double latency_ms = 0.0;  // single-inference latency
    double energy_mj = 0.0;   // per-inference energy
};

struct InferenceCost {
    double power_mw = 0.0;
    double latency_ms = 0.0;
    double energy_mj = 0.0;
};

enum class InterpScheme { Log2Linear, Linear };

// Size-to-cost table measured on embedded hardware. Rows are stored in
// strictly decreasing size order. Power and latency between rows are
// interpolated (log2-linear by default, since the measured sizes are powers
// of two); energy at interpolated sizes is power * latency.
//
// Non-monotonicity notes: measured latency dips and recovers around the
// small sizes, and measured power peaks at the second-largest size, so
// neither is required to be monotone in size. Energy must be non-decreasing.
class EnergyProfile {
public:
    // The built-in embedded-hardware measurement table.
    static EnergyProfile embedded_default();

    static EnergyProfile from_rows(std::vector<EnergyRow> rows,
                                   InterpScheme scheme = InterpScheme::Log2Linear);
    static EnergyProfile load_csv(const std::string& path,
                                  InterpScheme scheme = InterpScheme::Log2Linear);
    void save_csv(const std::string& path) const;

    // size = 0 is the bypass and costs nothing. Exact table sizes return the
    // table row verbatim. Sizes above the largest row or below zero throw.
    InferenceCost cost(double size) const;

    double max_size() const { return rows_.front().size; }
    double min_size() const { return rows_.back().size; }
    const std::vector<EnergyRow>& rows() const { return rows_; }
    InterpScheme scheme() const { return scheme_; }

private:
    void validate() const;
    std::vector<EnergyRow> rows_;  // decreasing size
    InterpScheme scheme_ = InterpScheme::Log2Linear;
};

// Dimensionless per-step penalty for running the depth network at width
// alpha * rho, normalized so rho=1 costs the full weight and the bypass is
// free.
double reward_energy_penalty(const EnergyProfile& profile, double alpha,
                             double rho, double weight);

// Aggregate cost of one episode's per-step network sizes. Steps with size 0
// acquire nothing and consume nothing; mean power and latency are averaged
// over the remaining steps and absent when there are none.
struct EpisodeEnergy {
    double total_energy_mj = 0.0;
    long acquisitions = 0;
    std::optional<double> mean_power_mw;
    std::optional<double> mean_latency_ms;
};

EpisodeEnergy episode_energy(const EnergyProfile& profile,
                             const std::vector<double>& sizes);

}  // namespace cadence
