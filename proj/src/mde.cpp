#include "cadence/mde.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "cadence/io_util.hpp"

namespace cadence {

MdeDataset collect_mde_dataset(const GridWorld& world, const SensorParams& sensor,
                               size_t pairs, double train_frac, double val_frac,
                               uint64_t seed) {
    if (train_frac < 0 || val_frac < 0 || train_frac + val_frac > 1.0) {
        throw std::invalid_argument("collect_mde_dataset: bad split fractions");
    }
    Rng rng(hash_combine(seed, 0xda7aULL));
    // All free cells, both regions.
    std::vector<size_t> cells = world.free_cells(Region::Training);
    const std::vector<size_t>& hold = world.free_cells(Region::Holdout);
    cells.insert(cells.end(), hold.begin(), hold.end());
    std::sort(cells.begin(), cells.end());
    if (cells.empty()) throw std::runtime_error("collect_mde_dataset: no free space");

    MdeDataset ds;
    ds.rays = sensor.rays;
    ds.max_range = sensor.max_range;
    ds.cameras.reserve(pairs);
    ds.depths.reserve(pairs);
    const double s = world.cell_size();
    for (size_t i = 0; i < pairs; ++i) {
        const size_t cell = cells[rng.below(cells.size())];
        const int cx = int(cell % world.width());
        const int cy = int(cell / world.width());
        const Pose pose{(cx + rng.uniform()) * s, (cy + rng.uniform()) * s};
        ds.depths.push_back(raycast_depth(world, pose, sensor));
        ds.cameras.push_back(render_camera(world, pose, sensor, rng));
    }
    ds.n_train = size_t(std::llround(train_frac * double(pairs)));
    ds.n_val = size_t(std::llround(val_frac * double(pairs)));
    return ds;
}

void save_mde_dataset(const MdeDataset& ds, const std::string& path) {
    BinWriter w(path);
    w.magic("CADDATA\n");
    w.u64(1);
    w.u64(ds.size());
    w.u64(ds.n_train);
    w.u64(ds.n_val);
    w.i64(ds.rays);
    w.f64(ds.max_range);
    for (size_t i = 0; i < ds.size(); ++i) {
        w.vec(ds.cameras[i].intensity);
        w.vec(ds.cameras[i].texture);
        w.vec(ds.depths[i].ranges);
    }
}

MdeDataset load_mde_dataset(const std::string& path) {
    BinReader r(path);
    r.expect_magic("CADDATA\n");
    if (r.u64() != 1) throw std::runtime_error("unsupported dataset version");
    MdeDataset ds;
    const size_t n = r.u64();
    ds.n_train = r.u64();
    ds.n_val = r.u64();
    ds.rays = int(r.i64());
    ds.max_range = r.f64();
    ds.cameras.resize(n);
    ds.depths.resize(n);
    for (size_t i = 0; i < n; ++i) {
        ds.cameras[i].intensity = r.vec();
        ds.cameras[i].texture = r.vec();
        ds.depths[i].ranges = r.vec();
        ds.depths[i].max_range = ds.max_range;
    }
    return ds;
}

namespace {

struct SplitRange {
    size_t begin = 0, end = 0;
};

SplitRange split_range(const MdeDataset& ds, Split split) {
    switch (split) {
        case Split::Train: return {0, ds.n_train};
        case Split::Validation: return {ds.n_train, ds.n_train + ds.n_val};
        case Split::Test: return {ds.n_train + ds.n_val, ds.size()};
    }
    return {};
}

// Flattened inputs and normalized targets for a list of sample indices.
void gather(const MdeDataset& ds, const std::vector<size_t>& idx, size_t begin,
            size_t count, std::vector<double>& X, std::vector<double>& T) {
    const int K = ds.rays;
    const int in_dim = 2 * K;
    X.resize(count * in_dim);
    T.resize(count * K);
    for (size_t b = 0; b < count; ++b) {
        const size_t i = idx[begin + b];
        SlimmableNet::flatten(ds.cameras[i], &X[b * in_dim]);
        for (int k = 0; k < K; ++k) {
            T[b * K + k] = ds.depths[i].ranges[k] / ds.max_range;
        }
    }
}

}  // namespace

namespace mde_detail {

double l1_loss(const double* out, const double* target, size_t n, double* dout) {
    double loss = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double d = out[i] - target[i];
        loss += std::abs(d);
        if (dout) dout[i] = (d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0)) / double(n);
    }
    return loss / double(n);
}

}  // namespace mde_detail

namespace {

// Mean validation L1 (meters) across the rho set, inference mode.
std::vector<double> validation_l1(SlimmableNet& net, const MdeDataset& ds,
                                  Split split) {
    const SplitRange r = split_range(ds, split);
    const int K = ds.rays;
    const int in_dim = 2 * K;
    const size_t n = r.end - r.begin;
    if (n == 0) throw std::invalid_argument("validation_l1: empty split");
    const size_t chunk = 256;
    SlimmableNet::Workspace ws = net.make_workspace(int(std::min(chunk, n)));
    std::vector<double> X, T;
    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), r.begin);
    std::vector<double> sums(net.config().rho_set.size(), 0.0);
    for (size_t ri = 0; ri < net.config().rho_set.size(); ++ri) {
        const double rho = net.config().rho_set[ri];
        double abs_sum = 0.0;
        for (size_t at = 0; at < n; at += chunk) {
            const size_t c = std::min(chunk, n - at);
            gather(ds, idx, at, c, X, T);
            net.forward(X.data(), int(c), rho, /*training=*/false,
                        /*update_running=*/false, ws);
            for (size_t i = 0; i < c * size_t(K); ++i) {
                abs_sum += std::abs(ws.out[i] - T[i]);
            }
        }
        sums[ri] = abs_sum / double(n * size_t(K)) * ds.max_range;
    }
    return sums;
}

}  // namespace

MdeTrainResult train_slimmable(const MdeDataset& ds, const SlimmableConfig& config,
                               const MdeTrainConfig& train) {
    if (ds.n_train == 0) throw std::invalid_argument("train_slimmable: empty dataset");
    config.validate();

    SlimmableNet net(config, ds.rays, ds.max_range,
                     hash_combine(train.seed, 0x1417ULL));
    Adam opt({train.lr, 0.9, 0.999, 1e-8, train.weight_decay});
    std::vector<int> slots;
    SlimmableNet::Grads grads = net.make_grads();
    net.for_each_tensor(grads, [&](std::vector<double>& p, std::vector<double>&,
                                   bool decay) {
        slots.push_back(opt.register_slot(p.size(), decay));
    });

    Rng shuffler(hash_combine(train.seed, 0x5f0ffULL));
    std::vector<size_t> order(ds.n_train);
    std::iota(order.begin(), order.end(), size_t(0));

    const int K = ds.rays;
    const int B = train.batch;
    SlimmableNet::Workspace ws = net.make_workspace(B);
    std::vector<double> X, T;
    const size_t n_rho = config.rho_set.size();

    MdeTrainResult result;
    result.net = net;
    result.best_val_l1 = std::numeric_limits<double>::infinity();
    int since_best = 0;

    for (int epoch = 0; epoch < train.max_epochs; ++epoch) {
        shuffler.shuffle(order);
        double epoch_loss = 0.0;
        size_t batches = 0;
        for (size_t at = 0; at + B <= ds.n_train; at += B) {
            gather(ds, order, at, size_t(B), X, T);
            grads.zero();
            double step_loss = 0.0;
            for (size_t ri = 0; ri < n_rho; ++ri) {
                const double rho = config.rho_set[ri];
                net.forward(X.data(), B, rho, /*training=*/true,
                            /*update_running=*/true, ws);
                const double loss = mde_detail::l1_loss(
                    ws.out.data(), T.data(), size_t(B) * K, ws.dout.data());
                step_loss += loss;
                // Average the loss over the rho set.
                for (double& d : ws.dout) d /= double(n_rho);
                net.backward(X.data(), B, rho, ws.dout.data(), ws, grads);
            }
            step_loss /= double(n_rho);
            if (!std::isfinite(step_loss)) {
                throw std::runtime_error(
                    "train_slimmable: non-finite loss at epoch " +
                    std::to_string(epoch) + ", batch " + std::to_string(batches));
            }
            epoch_loss += step_loss;
            ++batches;
            opt.begin_step();
            size_t slot = 0;
            net.for_each_tensor(grads, [&](std::vector<double>& p,
                                           std::vector<double>& g, bool) {
                opt.update(slots[slot++], p.data(), g.data(), p.size());
            });
        }

        MdeEpochStats stats;
        stats.epoch = epoch;
        stats.train_loss = batches ? epoch_loss / double(batches) : 0.0;
        stats.val_l1 = validation_l1(net, ds, Split::Validation);
        stats.mean_val_l1 =
            std::accumulate(stats.val_l1.begin(), stats.val_l1.end(), 0.0) /
            double(stats.val_l1.size());
        result.history.push_back(stats);

        if (stats.mean_val_l1 < result.best_val_l1) {
            result.best_val_l1 = stats.mean_val_l1;
            result.best_epoch = epoch;
            result.net = net;
            since_best = 0;
        } else if (++since_best >= train.patience) {
            break;
        }
    }
    return result;
}

RegressionMetrics evaluate_r2(const SlimmableNet& net, const MdeDataset& ds,
                              Split split, double rho) {
    const SplitRange r = split_range(ds, split);
    if (r.end <= r.begin) throw std::invalid_argument("evaluate_r2: empty split");
    const int K = ds.rays;

    RegressionMetrics m;
    m.count = (r.end - r.begin) * size_t(K);
    double target_sum = 0.0;
    for (size_t i = r.begin; i < r.end; ++i) {
        for (int k = 0; k < K; ++k) target_sum += ds.depths[i].ranges[k];
    }
    const double target_mean = target_sum / double(m.count);

    double ss_res = 0.0, ss_tot = 0.0, abs_sum = 0.0;
    for (size_t i = r.begin; i < r.end; ++i) {
        const DepthScan pred =
            rho == 0.0 ? DepthScan::zeros(K, ds.max_range)
                       : net.predict(&ds.cameras[i], rho);
        for (int k = 0; k < K; ++k) {
            const double t = ds.depths[i].ranges[k];
            const double d = pred.ranges[k] - t;
            ss_res += d * d;
            abs_sum += std::abs(d);
            const double c = t - target_mean;
            ss_tot += c * c;
        }
    }
    m.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
    m.l1 = abs_sum / double(m.count);
    return m;
}

double gradient_check(SlimmableNet& net, const MdeDataset& ds, size_t batch,
                      double epsilon) {
    if (epsilon < 1e-6 || epsilon > 1e-1) {
        throw std::invalid_argument("gradient_check: epsilon out of range");
    }
    const size_t B = std::min(batch, ds.size());
    const int K = ds.rays;
    std::vector<size_t> idx(B);
    std::iota(idx.begin(), idx.end(), size_t(0));
    std::vector<double> X, T;
    gather(ds, idx, 0, B, X, T);

    SlimmableNet::Workspace ws = net.make_workspace(int(B));
    const std::vector<double>& rhos = net.config().rho_set;

    // Multi-rho loss without touching running statistics.
    auto loss_fn = [&]() {
        double total = 0.0;
        for (double rho : rhos) {
            net.forward(X.data(), int(B), rho, /*training=*/true,
                        /*update_running=*/false, ws);
            total += mde_detail::l1_loss(ws.out.data(), T.data(), B * size_t(K),
                                         nullptr);
        }
        return total / double(rhos.size());
    };

    SlimmableNet::Grads grads = net.make_grads();
    for (double rho : rhos) {
        net.forward(X.data(), int(B), rho, true, false, ws);
        mde_detail::l1_loss(ws.out.data(), T.data(), B * size_t(K), ws.dout.data());
        for (double& d : ws.dout) d /= double(rhos.size());
        net.backward(X.data(), int(B), rho, ws.dout.data(), ws, grads);
    }

    double max_rel = 0.0;
    net.for_each_tensor(grads, [&](std::vector<double>& p, std::vector<double>& g,
                                   bool) {
        for (size_t i = 0; i < p.size(); ++i) {
            const double keep = p[i];
            p[i] = keep + epsilon;
            const double up = loss_fn();
            p[i] = keep - epsilon;
            const double down = loss_fn();
            p[i] = keep;
            const double fd = (up - down) / (2.0 * epsilon);
            const double denom = std::max({std::abs(fd), std::abs(g[i]), 1e-8});
            max_rel = std::max(max_rel, std::abs(fd - g[i]) / denom);
        }
    });
    return max_rel;
}

}  // namespace cadence
