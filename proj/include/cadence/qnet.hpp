#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cadence/optim.hpp"
#include "cadence/rng.hpp"

namespace cadence {

// Value network over flattened observation queues: a plain MLP with one
// output node per joint (motion, slimming-factor) action, plus the target
// copy used for bootstrapping. The target network changes only via
// sync_target().
class QNet {
public:
    struct Layer {
        int rows = 0, cols = 0;
        std::vector<double> W, b;
    };

    struct Workspace {
        int batch = 0;
        std::vector<std::vector<double>> act;      // post-relu per hidden layer
        std::vector<std::vector<double>> scratch;  // gradient buffers
        std::vector<double> out;
        std::vector<double> dout;
    };

    struct Grads {
        std::vector<std::vector<double>> W, b;
        void zero();
    };

    QNet() = default;
    QNet(int input_dim, std::vector<int> hidden, int n_actions, uint64_t seed);

    int input_dim() const { return input_dim_; }
    int n_actions() const { return n_actions_; }
    const std::vector<int>& hidden_dims() const { return hidden_dims_; }

    Workspace make_workspace(int batch) const;
    Grads make_grads() const;

    // Online-network forward; Q-values land in ws.out (batch x n_actions).
    void forward(const double* X, int batch, Workspace& ws) const;
    // Target-network forward.
    void forward_target(const double* X, int batch, Workspace& ws) const;

    // Backward through the online network for the latest forward() call.
    void backward(const double* X, int batch, const double* dOut, Workspace& ws,
                  Grads& g) const;

    void sync_target();

    std::vector<Layer>& online() { return online_; }
    const std::vector<Layer>& online() const { return online_; }
    const std::vector<Layer>& target() const { return target_; }

    template <class Fn>
    void for_each_tensor(Grads& g, Fn&& fn) {
        for (size_t l = 0; l < online_.size(); ++l) {
            fn(online_[l].W, g.W[l], true);
            fn(online_[l].b, g.b[l], false);
        }
    }

    void save(const std::string& path) const;
    static QNet load(const std::string& path);

private:
    static void forward_layers(const std::vector<Layer>& layers, const double* X,
                               int batch, Workspace& ws);
    int input_dim_ = 0;
    int n_actions_ = 0;
    std::vector<int> hidden_dims_;
    std::vector<Layer> online_;
    std::vector<Layer> target_;
};

struct Transition {
    std::vector<double> state;
    int action = 0;
    double reward = 0.0;
    std::vector<double> next_state;
    bool terminal = false;
};

// Uniform-sampling replay memory with FIFO eviction at capacity.
class ReplayBuffer {
public:
    explicit ReplayBuffer(size_t capacity) : capacity_(capacity) {}

    void push(Transition t);
    size_t size() const { return data_.size(); }
    size_t capacity() const { return capacity_; }
    const Transition& at(size_t i) const { return data_[i]; }
    const Transition& sample(Rng& rng) const { return data_[rng.below(data_.size())]; }

private:
    size_t capacity_;
    size_t write_ = 0;
    std::vector<Transition> data_;
};

// Epsilon-greedy over the online Q-values, restricted to `allowed` action
// indices (ties resolve to the lowest flat index).
int select_action(const QNet& qnet, QNet::Workspace& ws, const double* state,
                  const std::vector<int>& allowed, double epsilon, Rng& rng);

// Greedy argmax over the allowed set of a precomputed Q row.
int argmax_allowed(const double* q, const std::vector<int>& allowed);

struct DqnUpdateSettings {
    double gamma = 0.99;
    std::vector<int> allowed;  // bootstrap argmax restricted to these actions
};

// One double-DQN step on a minibatch: the online net picks the bootstrap
// action, the target net evaluates it, and a Huber(1) loss on the taken
// action's Q-value is stepped with Adam. Returns the loss; throws if it is
// non-finite.
double double_dqn_update(QNet& qnet, Adam& opt, const std::vector<int>& slots,
                         QNet::Grads& grads, QNet::Workspace& ws_batch,
                         QNet::Workspace& ws_next,
                         const std::vector<const Transition*>& batch,
                         const DqnUpdateSettings& settings);

// Max relative error of analytic Huber-loss gradients vs central finite
// differences on the given batch.
double qnet_gradient_check(QNet& qnet, const std::vector<const Transition*>& batch,
                           const DqnUpdateSettings& settings, double epsilon);

}  // namespace cadence
