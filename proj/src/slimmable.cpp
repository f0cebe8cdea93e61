#include "cadence/slimmable.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "cadence/io_util.hpp"
#include "cadence/kernels.hpp"

namespace cadence {

void SlimmableConfig::validate() const {
    if (alpha < 1) throw std::invalid_argument("slimmable: alpha must be >= 1");
    if (hidden_mults.empty()) throw std::invalid_argument("slimmable: no hidden layers");
    if (rho_set.empty()) throw std::invalid_argument("slimmable: empty rho set");
    for (size_t i = 0; i < rho_set.size(); ++i) {
        const double r = rho_set[i];
        if (r <= 0.0 || r > 1.0) {
            throw std::invalid_argument("slimmable: rho must lie in (0,1]");
        }
        if (i > 0 && rho_set[i - 1] <= r) {
            throw std::invalid_argument("slimmable: rho set must be strictly descending");
        }
    }
}

SlimmableNet::SlimmableNet(const SlimmableConfig& config, int rays,
                           double max_range, uint64_t init_seed)
    : config_(config), rays_(rays), max_range_(max_range) {
    config_.validate();
    Rng rng(init_seed);
    int in_dim = input_dim();
    for (int l = 0; l < config_.layers(); ++l) {
        HiddenLayer h;
        h.width = config_.hidden_width(l);
        h.in_dim = in_dim;
        h.W.resize(size_t(h.width) * in_dim);
        h.b.assign(size_t(h.width), 0.0);
        const double sd = std::sqrt(2.0 / in_dim);
        for (double& w : h.W) w = rng.normal(0.0, sd);
        h.bn.resize(config_.rho_set.size());
        for (BnSet& s : h.bn) {
            s.gamma.assign(size_t(h.width), 1.0);
            s.beta.assign(size_t(h.width), 0.0);
            s.run_mean.assign(size_t(h.width), 0.0);
            s.run_var.assign(size_t(h.width), 1.0);
        }
        in_dim = h.width;
        hidden_.push_back(std::move(h));
    }
    output_.out_dim = rays_;
    output_.in_dim = in_dim;
    output_.W.resize(size_t(rays_) * in_dim);
    output_.b.assign(size_t(rays_), 0.0);
    const double sd = std::sqrt(2.0 / in_dim);
    for (double& w : output_.W) w = rng.normal(0.0, sd);
}

int SlimmableNet::rho_index(double rho) const {
    for (size_t i = 0; i < config_.rho_set.size(); ++i) {
        if (config_.rho_set[i] == rho) return int(i);
    }
    throw std::invalid_argument("slimmable: rho not in the trained set");
}

SlimmableNet::Workspace SlimmableNet::make_workspace(int batch) const {
    Workspace ws;
    ws.batch = batch;
    const size_t L = hidden_.size();
    ws.z.resize(L);
    ws.xhat.resize(L);
    ws.act.resize(L);
    ws.mean.resize(L);
    ws.var.resize(L);
    ws.scratch.resize(L);
    for (size_t l = 0; l < L; ++l) {
        const size_t n = size_t(batch) * hidden_[l].width;
        ws.z[l].assign(n, 0.0);
        ws.xhat[l].assign(n, 0.0);
        ws.act[l].assign(n, 0.0);
        ws.scratch[l].assign(n, 0.0);
        ws.mean[l].assign(size_t(hidden_[l].width), 0.0);
        ws.var[l].assign(size_t(hidden_[l].width), 0.0);
    }
    ws.out.assign(size_t(batch) * rays_, 0.0);
    ws.dout.assign(size_t(batch) * rays_, 0.0);
    return ws;
}

SlimmableNet::Grads SlimmableNet::make_grads() const {
    Grads g;
    const size_t L = hidden_.size();
    g.W.resize(L);
    g.b.resize(L);
    g.gamma.resize(L);
    g.beta.resize(L);
    for (size_t l = 0; l < L; ++l) {
        g.W[l].assign(hidden_[l].W.size(), 0.0);
        g.b[l].assign(hidden_[l].b.size(), 0.0);
        g.gamma[l].resize(hidden_[l].bn.size());
        g.beta[l].resize(hidden_[l].bn.size());
        for (size_t r = 0; r < hidden_[l].bn.size(); ++r) {
            g.gamma[l][r].assign(size_t(hidden_[l].width), 0.0);
            g.beta[l][r].assign(size_t(hidden_[l].width), 0.0);
        }
    }
    g.Wout.assign(output_.W.size(), 0.0);
    g.bout.assign(output_.b.size(), 0.0);
    return g;
}

void SlimmableNet::Grads::zero() {
    auto clear = [](std::vector<double>& v) { std::fill(v.begin(), v.end(), 0.0); };
    for (auto& v : W) clear(v);
    for (auto& v : b) clear(v);
    for (auto& lr : gamma) {
        for (auto& v : lr) clear(v);
    }
    for (auto& lr : beta) {
        for (auto& v : lr) clear(v);
    }
    clear(Wout);
    clear(bout);
}

void SlimmableNet::forward(const double* X, int batch, double rho, bool training,
                           bool update_running, Workspace& ws) {
    if (batch > ws.batch) throw std::logic_error("slimmable forward: workspace too small");
    const int r_idx = rho_index(rho);
    const double* in = X;
    int in_cols = input_dim();
    int in_ld = input_dim();
    for (size_t l = 0; l < hidden_.size(); ++l) {
        HiddenLayer& h = hidden_[l];
        const int m = SlimmableConfig::active(h.width, rho);
        BnSet& bn = h.bn[r_idx];
        kernels::affine_forward(h.W.data(), h.in_dim, h.b.data(), in, in_ld,
                                ws.z[l].data(), h.width, batch, m, in_cols);
        if (training) {
            kernels::batch_stats(ws.z[l].data(), h.width, batch, m,
                                 ws.mean[l].data(), ws.var[l].data());
            kernels::bn_forward_train(ws.z[l].data(), h.width, ws.mean[l].data(),
                                      ws.var[l].data(), bn.gamma.data(),
                                      bn.beta.data(), config_.bn_eps,
                                      ws.act[l].data(), h.width, ws.xhat[l].data(),
                                      h.width, batch, m);
            if (update_running) {
                const double mom = config_.bn_momentum;
                // Unbiased variance for the running estimate.
                const double unbias = batch > 1 ? double(batch) / (batch - 1) : 1.0;
                for (int c = 0; c < m; ++c) {
                    bn.run_mean[c] = mom * bn.run_mean[c] + (1.0 - mom) * ws.mean[l][c];
                    bn.run_var[c] =
                        mom * bn.run_var[c] + (1.0 - mom) * ws.var[l][c] * unbias;
                }
            }
        } else {
            kernels::bn_forward_infer(ws.z[l].data(), h.width, bn.run_mean.data(),
                                      bn.run_var.data(), bn.gamma.data(),
                                      bn.beta.data(), config_.bn_eps,
                                      ws.act[l].data(), h.width, batch, m);
        }
        // In-place relu over the active slice.
        kernels::relu_forward(ws.act[l].data(), h.width, ws.act[l].data(), h.width,
                              batch, m);
        in = ws.act[l].data();
        in_cols = m;
        in_ld = h.width;
    }
    kernels::affine_forward(output_.W.data(), output_.in_dim, output_.b.data(), in,
                            in_ld, ws.out.data(), rays_, batch, rays_, in_cols);
}

void SlimmableNet::backward(const double* X, int batch, double rho,
                            const double* dOut, Workspace& ws, Grads& g) {
    const int r_idx = rho_index(rho);
    const size_t L = hidden_.size();
    const int m_last = SlimmableConfig::active(hidden_[L - 1].width, rho);

    // Output layer.
    kernels::affine_backward(output_.W.data(), output_.in_dim,
                             ws.act[L - 1].data(), hidden_[L - 1].width, dOut,
                             rays_, g.Wout.data(), g.bout.data(),
                             ws.scratch[L - 1].data(), batch, rays_, m_last);

    for (int l = int(L) - 1; l >= 0; --l) {
        HiddenLayer& h = hidden_[l];
        const int m = SlimmableConfig::active(h.width, rho);
        BnSet& bn = h.bn[r_idx];
        // d(post-relu) currently in ws.scratch[l]; push through relu then BN.
        kernels::relu_backward(ws.act[l].data(), h.width, ws.scratch[l].data(),
                               h.width, ws.scratch[l].data(), h.width, batch, m);
        // BN backward writes d(affine out) into ws.z[l] (reused as scratch).
        kernels::bn_backward(ws.scratch[l].data(), h.width, ws.xhat[l].data(),
                             h.width, bn.gamma.data(), ws.var[l].data(),
                             config_.bn_eps, g.gamma[l][r_idx].data(),
                             g.beta[l][r_idx].data(), ws.z[l].data(), h.width,
                             batch, m);
        const double* in = l == 0 ? X : ws.act[l - 1].data();
        const int in_ld = l == 0 ? input_dim() : hidden_[l - 1].width;
        const int in_cols = l == 0 ? input_dim()
                                   : SlimmableConfig::active(hidden_[l - 1].width, rho);
        double* dX = l == 0 ? nullptr : ws.scratch[l - 1].data();
        kernels::affine_backward(h.W.data(), h.in_dim, in, in_ld, ws.z[l].data(),
                                 h.width, g.W[l].data(), g.b[l].data(), dX, batch,
                                 m, in_cols);
    }
}

DepthScan SlimmableNet::predict(const CameraScan* image, double rho) const {
    if (rho == 0.0) {
        return DepthScan::zeros(rays_, max_range_);
    }
    if (image == nullptr) {
        throw std::invalid_argument("slimmable predict: image required when rho > 0");
    }
    std::vector<double> x(size_t(input_dim()));
    flatten(*image, x.data());
    // const_cast-free inference path: forward does not mutate parameters in
    // inference mode, but reuses the workspace plumbing.
    SlimmableNet& self = const_cast<SlimmableNet&>(*this);
    Workspace ws = make_workspace(1);
    self.forward(x.data(), 1, rho, /*training=*/false, /*update_running=*/false, ws);
    DepthScan scan;
    scan.max_range = max_range_;
    scan.ranges.resize(size_t(rays_));
    for (int k = 0; k < rays_; ++k) {
        const double v = ws.out[k];
        scan.ranges[k] = std::min(1.0, std::max(0.0, v)) * max_range_;
    }
    return scan;
}

void SlimmableNet::flatten(const CameraScan& cam, double* dst) {
    const size_t K = cam.intensity.size();
    std::memcpy(dst, cam.intensity.data(), K * sizeof(double));
    std::memcpy(dst + K, cam.texture.data(), K * sizeof(double));
}

void SlimmableNet::save(const std::string& path, uint64_t config_hash) const {
    BinWriter w(path);
    w.magic("CADMDE1\n");
    w.u64(1);  // format version
    w.u64(config_hash);
    w.i64(config_.alpha);
    w.i64(rays_);
    w.f64(max_range_);
    w.f64(config_.bn_momentum);
    w.f64(config_.bn_eps);
    w.vec(config_.rho_set);
    w.u64(config_.hidden_mults.size());
    for (int m : config_.hidden_mults) w.i64(m);
    for (const HiddenLayer& h : hidden_) {
        w.vec(h.W);
        w.vec(h.b);
        for (const BnSet& s : h.bn) {
            w.vec(s.gamma);
            w.vec(s.beta);
            w.vec(s.run_mean);
            w.vec(s.run_var);
        }
    }
    w.vec(output_.W);
    w.vec(output_.b);
}

SlimmableNet SlimmableNet::load(const std::string& path, uint64_t* config_hash) {
    BinReader r(path);
    r.expect_magic("CADMDE1\n");
    const uint64_t version = r.u64();
    if (version != 1) throw std::runtime_error("unsupported depth checkpoint version");
    const uint64_t hash = r.u64();
    if (config_hash) *config_hash = hash;
    SlimmableConfig cfg;
    cfg.alpha = int(r.i64());
    const int rays = int(r.i64());
    const double max_range = r.f64();
    cfg.bn_momentum = r.f64();
    cfg.bn_eps = r.f64();
    cfg.rho_set = r.vec();
    const uint64_t n_layers = r.u64();
    cfg.hidden_mults.resize(n_layers);
    for (uint64_t i = 0; i < n_layers; ++i) cfg.hidden_mults[i] = int(r.i64());
    SlimmableNet net(cfg, rays, max_range, /*init_seed=*/0);
    for (HiddenLayer& h : net.hidden_) {
        h.W = r.vec();
        h.b = r.vec();
        for (BnSet& s : h.bn) {
            s.gamma = r.vec();
            s.beta = r.vec();
            s.run_mean = r.vec();
            s.run_var = r.vec();
        }
    }
    net.output_.W = r.vec();
    net.output_.b = r.vec();
    return net;
}

}  // namespace cadence
