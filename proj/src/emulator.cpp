#include "cadence/emulator.hpp"

#include <omp.h>

#include <cmath>

namespace cadence {

DepthScan emulate_depth(const DepthScan& gt, double rho,
                        const EmulatorParams& params, Rng& rng) {
    const int K = int(gt.ranges.size());
    if (rho == 0.0) return DepthScan::zeros(K, gt.max_range);
    if (rho == 1.0) return gt;

    const int w = int(std::llround(params.blur_c * (1.0 / rho - 1.0)));
    const double sigma = params.noise_sigma0 * (1.0 / rho - 1.0);
    DepthScan out;
    out.max_range = gt.max_range;
    out.ranges.resize(size_t(K));
    for (int k = 0; k < K; ++k) {
        double sum = 0.0;
        for (int d = -w; d <= w; ++d) {
            sum += gt.ranges[size_t(((k + d) % K + K) % K)];
        }
        double v = sum / double(2 * w + 1);
        if (sigma > 0.0) v += rng.normal(0.0, sigma);
        out.ranges[size_t(k)] = std::min(gt.max_range, std::max(0.0, v));
    }
    return out;
}

NetBackend::NetBackend(const SlimmableNet& net) : net_(&net) {
    pool_.resize(size_t(omp_get_max_threads()));
    for (Scratch& s : pool_) {
        s.ws = net.make_workspace(1);
        s.input.resize(size_t(net.input_dim()));
    }
}

DepthScan NetBackend::predict(const Observation& obs, double rho, Rng&) {
    Scratch& s = pool_[size_t(omp_get_thread_num()) % pool_.size()];
    SlimmableNet::flatten(obs.camera, s.input.data());
    // Same math as SlimmableNet::predict, with a reused workspace.
    auto& net = const_cast<SlimmableNet&>(*net_);
    net.forward(s.input.data(), 1, rho, /*training=*/false,
                /*update_running=*/false, s.ws);
    DepthScan scan;
    scan.max_range = net_->max_range();
    scan.ranges.resize(size_t(net_->rays()));
    for (int k = 0; k < net_->rays(); ++k) {
        scan.ranges[size_t(k)] =
            std::min(1.0, std::max(0.0, s.ws.out[size_t(k)])) * net_->max_range();
    }
    return scan;
}

}  // namespace cadence
