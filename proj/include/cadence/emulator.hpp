#pragma once

#include <memory>
#include <vector>

#include "cadence/rng.hpp"
#include "cadence/sensing.hpp"
#include "cadence/slimmable.hpp"

namespace cadence {

struct EmulatorParams {
    double blur_c = 1.0;       // blur half-width = round(c * (1/rho - 1)) rays
    double noise_sigma0 = 0.1; // noise sd = sigma0 * (1/rho - 1) meters
};

// Width-dependent fidelity degradation without network inference: a
// circular box blur plus zero-mean noise, both widening as rho shrinks.
// rho = 1 is the identity, rho = 0 the zero-scan bypass.
DepthScan emulate_depth(const DepthScan& gt, double rho,
                        const EmulatorParams& params, Rng& rng);

// Uniform interface over the two perception backends so the policy loop is
// backend-agnostic: the emulator for training throughput, the trained net
// for final evaluation. rho = 0 never reaches a backend (the loop bypasses
// acquisition entirely).
class DepthBackend {
public:
    virtual ~DepthBackend() = default;
    virtual DepthScan predict(const Observation& obs, double rho, Rng& rng) = 0;
};

class EmulatorBackend final : public DepthBackend {
public:
    explicit EmulatorBackend(EmulatorParams params) : params_(params) {}
    DepthScan predict(const Observation& obs, double rho, Rng& rng) override {
        return emulate_depth(obs.depth, rho, params_, rng);
    }

private:
    EmulatorParams params_;
};

// Inference workspaces are kept per thread so evaluation episodes can fan
// out in parallel over one shared backend.
class NetBackend final : public DepthBackend {
public:
    explicit NetBackend(const SlimmableNet& net);

    DepthScan predict(const Observation& obs, double rho, Rng&) override;

private:
    struct Scratch {
        SlimmableNet::Workspace ws;
        std::vector<double> input;
    };
    const SlimmableNet* net_;
    std::vector<Scratch> pool_;
};

}  // namespace cadence
