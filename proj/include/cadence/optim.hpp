#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace cadence {

// Adam with decoupled weight decay. Decay is applied only to slots
// registered with decay=true (weight matrices, not biases or norm
// parameters), and is excluded from the loss so gradient checks compare
// against the bare loss.
class Adam {
public:
    struct Settings {
        double lr = 1e-3;
        double beta1 = 0.9;
        double beta2 = 0.999;
        double eps = 1e-8;
        double weight_decay = 0.0;
    };

    Adam() = default;
    explicit Adam(Settings s) : settings_(s) {}

    Settings& settings() { return settings_; }
    const Settings& settings() const { return settings_; }

    // Returns a slot id for a parameter tensor of the given size.
    int register_slot(size_t n, bool decay) {
        slots_.push_back(Slot{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0), decay});
        return int(slots_.size()) - 1;
    }

    void begin_step() { ++t_; }

    void update(int slot, double* p, const double* g, size_t n) {
        Slot& s = slots_.at(slot);
        if (s.m.size() != n) throw std::logic_error("adam slot size mismatch");
        const double b1 = settings_.beta1, b2 = settings_.beta2;
        const double c1 = 1.0 - std::pow(b1, double(t_));
        const double c2 = 1.0 - std::pow(b2, double(t_));
        const double lr = settings_.lr, eps = settings_.eps;
        const double wd = s.decay ? settings_.weight_decay : 0.0;
        double* m = s.m.data();
        double* v = s.v.data();
#pragma omp parallel for schedule(static) if (n > 16384)
        for (long i = 0; i < long(n); ++i) {
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            const double mhat = m[i] / c1;
            const double vhat = v[i] / c2;
            p[i] -= lr * (mhat / (std::sqrt(vhat) + eps) + wd * p[i]);
        }
    }

    int64_t steps() const { return t_; }

private:
    struct Slot {
        std::vector<double> m, v;
        bool decay = false;
    };
    Settings settings_;
    std::vector<Slot> slots_;
    int64_t t_ = 0;
};

}  // namespace cadence
