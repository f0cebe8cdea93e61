#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cadence/grid_world.hpp"
#include "cadence/optim.hpp"
#include "cadence/sensing.hpp"
#include "cadence/slimmable.hpp"

namespace cadence {

// Paired appearance/range scans for supervised depth training.
struct MdeDataset {
    std::vector<CameraScan> cameras;
    std::vector<DepthScan> depths;
    size_t n_train = 0;
    size_t n_val = 0;  // validation follows the training block, test is the rest
    int rays = 0;
    double max_range = 0.0;

    size_t size() const { return cameras.size(); }
    size_t n_test() const { return size() - n_train - n_val; }
};

enum class Split { Train, Validation, Test };

// Samples pose/scan pairs at uniformly random positions in free space
// (anywhere on the map; the navigation holdout split does not apply to
// perception data). Deterministic per seed.
MdeDataset collect_mde_dataset(const GridWorld& world, const SensorParams& sensor,
                               size_t pairs, double train_frac, double val_frac,
                               uint64_t seed);

void save_mde_dataset(const MdeDataset& ds, const std::string& path);
MdeDataset load_mde_dataset(const std::string& path);

struct MdeTrainConfig {
    double lr = 1e-3;
    double weight_decay = 1e-4;
    int batch = 64;
    int max_epochs = 150;
    int patience = 25;  // epochs without validation improvement
    uint64_t seed = 0;
};

struct MdeEpochStats {
    int epoch = 0;
    double train_loss = 0.0;        // multi-rho L1, normalized domain
    double mean_val_l1 = 0.0;       // averaged over the rho set, meters
    std::vector<double> val_l1;     // per rho, meters
};

struct MdeTrainResult {
    SlimmableNet net;  // best-validation parameters
    std::vector<MdeEpochStats> history;
    int best_epoch = 0;
    double best_val_l1 = 0.0;
};

// Multi-width training: every optimizer step accumulates the L1 depth-loss
// gradient once per slimming factor, and each width's normalization
// statistics are updated only under its own pass. Returns the parameters
// with the best mean validation L1 across the rho set. Throws on non-finite
// loss.
MdeTrainResult train_slimmable(const MdeDataset& ds, const SlimmableConfig& config,
                               const MdeTrainConfig& train);

struct RegressionMetrics {
    double r2 = 0.0;
    double l1 = 0.0;  // meters
    size_t count = 0;
};

// Coefficient of determination pooled over every ray entry of the split,
// using the net's actual (clamped, denormalized) predictions.
RegressionMetrics evaluate_r2(const SlimmableNet& net, const MdeDataset& ds,
                              Split split, double rho);

// Max relative error between analytic parameter gradients of the multi-width
// loss and central finite differences on the given batch.
double gradient_check(SlimmableNet& net, const MdeDataset& ds, size_t batch,
                      double epsilon);

// Shared helpers for the training/evaluation paths.
namespace mde_detail {
// Mean absolute error between ws.out and normalized targets; writes the
// gradient dL/dout into dout when not null.
double l1_loss(const double* out, const double* target, size_t n, double* dout);
}  // namespace mde_detail

}  // namespace cadence
