#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cadence/rng.hpp"
#include "cadence/sensing.hpp"

namespace cadence {

// Architecture of the width-scalable depth regressor. Hidden widths are
// multiples of the base channel count alpha; the selectable slimming
// factors are fractions of active channels per hidden layer, sorted
// descending. rho = 0 is a bypass handled outside the network, not a width.
struct SlimmableConfig {
    int alpha = 64;
    std::vector<double> rho_set = {1.0, 0.5, 0.25, 0.125};
    std::vector<int> hidden_mults = {4, 4, 2};
    double bn_momentum = 0.9;  // running = m*running + (1-m)*batch
    double bn_eps = 1e-5;

    void validate() const;
    int hidden_width(int layer) const { return hidden_mults[layer] * alpha; }
    int layers() const { return int(hidden_mults.size()); }
    // Active units of a hidden layer at a slimming factor.
    static int active(int width, double rho) {
        const int m = int(std::ceil(rho * width - 1e-12));
        return m < 1 ? 1 : (m > width ? width : m);
    }
};

// Per-width normalization statistics: one complete set per slimming factor
// so statistics for different widths never mix.
struct BnSet {
    std::vector<double> gamma, beta, run_mean, run_var;
};

// Fully connected depth regressor whose hidden width is selectable at
// inference. Forward at rho reads the first ceil(rho*n) units of each hidden
// layer; the input (2K appearance channels) and output (K rays) layers stay
// full. Weight matrices are stored at full width and sliced in place.
class SlimmableNet {
public:
    struct HiddenLayer {
        int width = 0;
        int in_dim = 0;              // full input width
        std::vector<double> W;       // width x in_dim, row-major
        std::vector<double> b;       // width
        std::vector<BnSet> bn;       // one per rho in rho_set
    };
    struct OutputLayer {
        int out_dim = 0;
        int in_dim = 0;
        std::vector<double> W;
        std::vector<double> b;
    };

    // Scratch buffers for one forward/backward pass at one width.
    struct Workspace {
        int batch = 0;
        // Per hidden layer, leading dimension = full layer width.
        std::vector<std::vector<double>> z;     // affine output
        std::vector<std::vector<double>> xhat;  // normalized activations
        std::vector<std::vector<double>> act;   // post-relu
        std::vector<std::vector<double>> mean, var;
        std::vector<std::vector<double>> scratch;  // gradient buffers
        std::vector<double> out;                   // batch x K
        std::vector<double> dout;
    };

    // Gradient mirror of the parameters.
    struct Grads {
        std::vector<std::vector<double>> W, b;          // per hidden layer
        std::vector<std::vector<std::vector<double>>> gamma, beta;  // [layer][rho]
        std::vector<double> Wout, bout;
        void zero();
    };

    SlimmableNet() = default;
    SlimmableNet(const SlimmableConfig& config, int rays, double max_range,
                 uint64_t init_seed);

    const SlimmableConfig& config() const { return config_; }
    int rays() const { return rays_; }
    double max_range() const { return max_range_; }
    int input_dim() const { return 2 * rays_; }
    int rho_index(double rho) const;  // throws when rho is not in the set

    Workspace make_workspace(int batch) const;
    Grads make_grads() const;

    // Forward over a batch of flattened camera scans (batch x 2K, normalized
    // target domain). Training mode normalizes with batch statistics and,
    // when update_running is set, folds them into the rho-specific running
    // statistics. Inference mode uses running statistics. Output lands in
    // ws.out (batch x K).
    void forward(const double* X, int batch, double rho, bool training,
                 bool update_running, Workspace& ws);

    // Backward for the most recent training-mode forward at the same rho.
    // dOut is batch x K; gradients accumulate into g.
    void backward(const double* X, int batch, double rho, const double* dOut,
                  Workspace& ws, Grads& g);

    // Depth prediction for one camera scan at rho (or the zero-scan bypass
    // at rho = 0, which needs no image). Output is clamped to [0, max_range].
    DepthScan predict(const CameraScan* image, double rho) const;

    // Flattened input for predict()/training: intensity then texture.
    static void flatten(const CameraScan& cam, double* dst);

    std::vector<HiddenLayer>& hidden() { return hidden_; }
    const std::vector<HiddenLayer>& hidden() const { return hidden_; }
    OutputLayer& output() { return output_; }
    const OutputLayer& output() const { return output_; }

    // Deterministic traversal of all trainable tensors, matching the Grads
    // layout: hidden W, b, per-rho gamma, beta (layer by layer), then output
    // W, b. `decay` marks weight matrices.
    template <class Fn>
    void for_each_tensor(Grads& g, Fn&& fn) {
        for (size_t l = 0; l < hidden_.size(); ++l) {
            HiddenLayer& h = hidden_[l];
            fn(h.W, g.W[l], true);
            fn(h.b, g.b[l], false);
            for (size_t r = 0; r < h.bn.size(); ++r) {
                fn(h.bn[r].gamma, g.gamma[l][r], false);
                fn(h.bn[r].beta, g.beta[l][r], false);
            }
        }
        fn(output_.W, g.Wout, true);
        fn(output_.b, g.bout, false);
    }

    void save(const std::string& path, uint64_t config_hash) const;
    static SlimmableNet load(const std::string& path, uint64_t* config_hash = nullptr);

private:
    SlimmableConfig config_;
    int rays_ = 0;
    double max_range_ = 40.0;
    std::vector<HiddenLayer> hidden_;
    OutputLayer output_;
};

}  // namespace cadence
