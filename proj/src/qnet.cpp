#include "cadence/qnet.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cadence/io_util.hpp"
#include "cadence/kernels.hpp"

namespace cadence {

QNet::QNet(int input_dim, std::vector<int> hidden, int n_actions, uint64_t seed)
    : input_dim_(input_dim), n_actions_(n_actions), hidden_dims_(std::move(hidden)) {
    if (input_dim < 1 || n_actions < 1) throw std::invalid_argument("qnet: bad dims");
    Rng rng(seed);
    int in = input_dim_;
    for (int width : hidden_dims_) {
        Layer l;
        l.rows = width;
        l.cols = in;
        l.W.resize(size_t(width) * in);
        l.b.assign(size_t(width), 0.0);
        const double sd = std::sqrt(2.0 / in);
        for (double& w : l.W) w = rng.normal(0.0, sd);
        online_.push_back(std::move(l));
        in = width;
    }
    Layer head;
    head.rows = n_actions_;
    head.cols = in;
    head.W.resize(size_t(n_actions_) * in);
    head.b.assign(size_t(n_actions_), 0.0);
    const double sd = std::sqrt(2.0 / in);
    for (double& w : head.W) w = rng.normal(0.0, sd);
    online_.push_back(std::move(head));
    target_ = online_;
}

QNet::Workspace QNet::make_workspace(int batch) const {
    Workspace ws;
    ws.batch = batch;
    ws.act.resize(hidden_dims_.size());
    ws.scratch.resize(hidden_dims_.size());
    for (size_t l = 0; l < hidden_dims_.size(); ++l) {
        ws.act[l].assign(size_t(batch) * hidden_dims_[l], 0.0);
        ws.scratch[l].assign(size_t(batch) * hidden_dims_[l], 0.0);
    }
    ws.out.assign(size_t(batch) * n_actions_, 0.0);
    ws.dout.assign(size_t(batch) * n_actions_, 0.0);
    return ws;
}

QNet::Grads QNet::make_grads() const {
    Grads g;
    g.W.resize(online_.size());
    g.b.resize(online_.size());
    for (size_t l = 0; l < online_.size(); ++l) {
        g.W[l].assign(online_[l].W.size(), 0.0);
        g.b[l].assign(online_[l].b.size(), 0.0);
    }
    return g;
}

void QNet::Grads::zero() {
    for (auto& v : W) std::fill(v.begin(), v.end(), 0.0);
    for (auto& v : b) std::fill(v.begin(), v.end(), 0.0);
}

void QNet::forward_layers(const std::vector<Layer>& layers, const double* X,
                          int batch, Workspace& ws) {
    const double* in = X;
    for (size_t l = 0; l + 1 < layers.size(); ++l) {
        const Layer& layer = layers[l];
        kernels::affine_forward(layer.W.data(), layer.cols, layer.b.data(), in,
                                layer.cols, ws.act[l].data(), layer.rows, batch,
                                layer.rows, layer.cols);
        kernels::relu_forward(ws.act[l].data(), layer.rows, ws.act[l].data(),
                              layer.rows, batch, layer.rows);
        in = ws.act[l].data();
    }
    const Layer& head = layers.back();
    kernels::affine_forward(head.W.data(), head.cols, head.b.data(), in, head.cols,
                            ws.out.data(), head.rows, batch, head.rows, head.cols);
}

void QNet::forward(const double* X, int batch, Workspace& ws) const {
    if (batch > ws.batch) throw std::logic_error("qnet forward: workspace too small");
    forward_layers(online_, X, batch, ws);
}

void QNet::forward_target(const double* X, int batch, Workspace& ws) const {
    if (batch > ws.batch) throw std::logic_error("qnet forward: workspace too small");
    forward_layers(target_, X, batch, ws);
}

void QNet::backward(const double* X, int batch, const double* dOut,
                    Workspace& ws, Grads& g) const {
    const size_t L = online_.size();
    const Layer& head = online_.back();
    const double* head_in = L == 1 ? X : ws.act[L - 2].data();
    double* head_dx = L == 1 ? nullptr : ws.scratch[L - 2].data();
    kernels::affine_backward(head.W.data(), head.cols, head_in, head.cols, dOut,
                             head.rows, g.W[L - 1].data(), g.b[L - 1].data(),
                             head_dx, batch, head.rows, head.cols);
    for (int l = int(L) - 2; l >= 0; --l) {
        const Layer& layer = online_[l];
        kernels::relu_backward(ws.act[l].data(), layer.rows, ws.scratch[l].data(),
                               layer.rows, ws.scratch[l].data(), layer.rows, batch,
                               layer.rows);
        const double* in = l == 0 ? X : ws.act[l - 1].data();
        double* dx = l == 0 ? nullptr : ws.scratch[l - 1].data();
        kernels::affine_backward(layer.W.data(), layer.cols, in, layer.cols,
                                 ws.scratch[l].data(), layer.rows, g.W[l].data(),
                                 g.b[l].data(), dx, batch, layer.rows, layer.cols);
    }
}

void QNet::sync_target() { target_ = online_; }

void QNet::save(const std::string& path) const {
    BinWriter w(path);
    w.magic("CADQNET\n");
    w.u64(1);
    w.i64(input_dim_);
    w.i64(n_actions_);
    w.u64(hidden_dims_.size());
    for (int h : hidden_dims_) w.i64(h);
    for (const Layer& l : online_) {
        w.vec(l.W);
        w.vec(l.b);
    }
}

QNet QNet::load(const std::string& path) {
    BinReader r(path);
    r.expect_magic("CADQNET\n");
    if (r.u64() != 1) throw std::runtime_error("unsupported qnet version");
    const int input_dim = int(r.i64());
    const int n_actions = int(r.i64());
    const uint64_t n_hidden = r.u64();
    std::vector<int> hidden(n_hidden);
    for (uint64_t i = 0; i < n_hidden; ++i) hidden[i] = int(r.i64());
    QNet q(input_dim, hidden, n_actions, 0);
    for (Layer& l : q.online_) {
        l.W = r.vec();
        l.b = r.vec();
    }
    q.sync_target();
    return q;
}

void ReplayBuffer::push(Transition t) {
    if (data_.size() < capacity_) {
        data_.push_back(std::move(t));
    } else {
        data_[write_] = std::move(t);
        write_ = (write_ + 1) % capacity_;
    }
}

int argmax_allowed(const double* q, const std::vector<int>& allowed) {
    int best = allowed.front();
    for (int a : allowed) {
        if (q[a] > q[best]) best = a;
    }
    return best;
}

int select_action(const QNet& qnet, QNet::Workspace& ws, const double* state,
                  const std::vector<int>& allowed, double epsilon, Rng& rng) {
    if (allowed.empty()) throw std::invalid_argument("select_action: no actions");
    if (epsilon > 0.0 && rng.uniform() < epsilon) {
        return allowed[rng.below(allowed.size())];
    }
    qnet.forward(state, 1, ws);
    return argmax_allowed(ws.out.data(), allowed);
}

double double_dqn_update(QNet& qnet, Adam& opt, const std::vector<int>& slots,
                         QNet::Grads& grads, QNet::Workspace& ws_batch,
                         QNet::Workspace& ws_next,
                         const std::vector<const Transition*>& batch,
                         const DqnUpdateSettings& settings) {
    const int B = int(batch.size());
    if (B == 0) throw std::invalid_argument("double_dqn_update: empty batch");
    const int n = qnet.n_actions();
    const int in_dim = qnet.input_dim();

    std::vector<double> states(size_t(B) * in_dim);
    std::vector<double> next_states(size_t(B) * in_dim);
    for (int b = 0; b < B; ++b) {
        std::copy(batch[b]->state.begin(), batch[b]->state.end(),
                  states.begin() + size_t(b) * in_dim);
        std::copy(batch[b]->next_state.begin(), batch[b]->next_state.end(),
                  next_states.begin() + size_t(b) * in_dim);
    }

    // Bootstrap targets: online argmax, target evaluation.
    std::vector<double> y(size_t(B));
    qnet.forward(next_states.data(), B, ws_next);
    std::vector<int> pick(size_t(B), 0);
    for (int b = 0; b < B; ++b) {
        pick[b] = argmax_allowed(&ws_next.out[size_t(b) * n], settings.allowed);
    }
    qnet.forward_target(next_states.data(), B, ws_next);
    for (int b = 0; b < B; ++b) {
        y[b] = batch[b]->reward;
        if (!batch[b]->terminal) {
            y[b] += settings.gamma * ws_next.out[size_t(b) * n + pick[b]];
        }
    }

    qnet.forward(states.data(), B, ws_batch);
    std::fill(ws_batch.dout.begin(), ws_batch.dout.end(), 0.0);
    double loss = 0.0;
    for (int b = 0; b < B; ++b) {
        const double err = ws_batch.out[size_t(b) * n + batch[b]->action] - y[b];
        const double a = std::abs(err);
        loss += a <= 1.0 ? 0.5 * err * err : a - 0.5;
        const double d = (err > 1.0 ? 1.0 : (err < -1.0 ? -1.0 : err)) / double(B);
        ws_batch.dout[size_t(b) * n + batch[b]->action] = d;
    }
    loss /= double(B);
    if (!std::isfinite(loss)) {
        throw std::runtime_error("double_dqn_update: non-finite loss");
    }

    grads.zero();
    qnet.backward(states.data(), B, ws_batch.dout.data(), ws_batch, grads);
    opt.begin_step();
    size_t slot = 0;
    qnet.for_each_tensor(grads, [&](std::vector<double>& p, std::vector<double>& g,
                                    bool) {
        opt.update(slots[slot++], p.data(), g.data(), p.size());
    });
    return loss;
}

double qnet_gradient_check(QNet& qnet, const std::vector<const Transition*>& batch,
                           const DqnUpdateSettings& settings, double epsilon) {
    const int B = int(batch.size());
    const int n = qnet.n_actions();
    const int in_dim = qnet.input_dim();
    std::vector<double> states(size_t(B) * in_dim);
    std::vector<double> next_states(size_t(B) * in_dim);
    for (int b = 0; b < B; ++b) {
        std::copy(batch[b]->state.begin(), batch[b]->state.end(),
                  states.begin() + size_t(b) * in_dim);
        std::copy(batch[b]->next_state.begin(), batch[b]->next_state.end(),
                  next_states.begin() + size_t(b) * in_dim);
    }
    QNet::Workspace ws = qnet.make_workspace(B);

    // Fixed targets: as in the update, but frozen while parameters move.
    std::vector<double> y(size_t(B));
    qnet.forward(next_states.data(), B, ws);
    std::vector<int> pick(size_t(B), 0);
    for (int b = 0; b < B; ++b) {
        pick[b] = argmax_allowed(&ws.out[size_t(b) * n], settings.allowed);
    }
    qnet.forward_target(next_states.data(), B, ws);
    for (int b = 0; b < B; ++b) {
        y[b] = batch[b]->reward;
        if (!batch[b]->terminal) {
            y[b] += settings.gamma * ws.out[size_t(b) * n + pick[b]];
        }
    }

    auto loss_fn = [&]() {
        qnet.forward(states.data(), B, ws);
        double loss = 0.0;
        for (int b = 0; b < B; ++b) {
            const double err = ws.out[size_t(b) * n + batch[b]->action] - y[b];
            const double a = std::abs(err);
            loss += a <= 1.0 ? 0.5 * err * err : a - 0.5;
        }
        return loss / double(B);
    };

    QNet::Grads grads = qnet.make_grads();
    qnet.forward(states.data(), B, ws);
    std::fill(ws.dout.begin(), ws.dout.end(), 0.0);
    for (int b = 0; b < B; ++b) {
        const double err = ws.out[size_t(b) * n + batch[b]->action] - y[b];
        ws.dout[size_t(b) * n + batch[b]->action] =
            (err > 1.0 ? 1.0 : (err < -1.0 ? -1.0 : err)) / double(B);
    }
    qnet.backward(states.data(), B, ws.dout.data(), ws, grads);

    double max_rel = 0.0;
    qnet.for_each_tensor(grads, [&](std::vector<double>& p, std::vector<double>& g,
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
