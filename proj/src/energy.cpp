#include "cadence/energy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cadence {

EnergyProfile EnergyProfile::embedded_default() {
    return from_rows({
        {256, 17740, 117.1, 2078.1},
        {128, 18351, 30.0, 550.0},
        {64, 17808, 11.0, 196.4},
        {32, 12961, 6.5, 83.9},
        {16, 7375, 7.0, 51.6},
        {8, 6123, 6.7, 41.1},
        {4, 5224, 6.5, 34.1},
        {2, 4968, 6.0, 29.8},
        {1, 4788, 6.0, 28.7},
    });
}

EnergyProfile EnergyProfile::from_rows(std::vector<EnergyRow> rows,
                                       InterpScheme scheme) {
    EnergyProfile p;
    p.rows_ = std::move(rows);
    p.scheme_ = scheme;
    p.validate();
    return p;
}

void EnergyProfile::validate() const {
    if (rows_.empty()) throw std::invalid_argument("energy profile: no rows");
    for (size_t i = 0; i < rows_.size(); ++i) {
        const EnergyRow& r = rows_[i];
        if (r.size <= 0 || r.power_mw <= 0 || r.latency_ms <= 0 || r.energy_mj <= 0) {
            throw std::invalid_argument("energy profile: non-positive entry");
        }
        if (i > 0 && rows_[i - 1].size <= r.size) {
            throw std::invalid_argument("energy profile: sizes must be strictly decreasing");
        }
        const double derived = r.power_mw * r.latency_ms / 1000.0;
        if (std::abs(r.energy_mj - derived) > 0.01 * r.energy_mj) {
            throw std::invalid_argument("energy profile: energy inconsistent with power*latency");
        }
        if (i > 0 && rows_[i - 1].energy_mj < r.energy_mj) {
            throw std::invalid_argument("energy profile: energy must be non-decreasing in size");
        }
    }
}

EnergyProfile EnergyProfile::load_csv(const std::string& path, InterpScheme scheme) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open energy profile: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty energy profile: " + path);
    if (line != "size,power_mw,latency_ms,energy_mj") {
        throw std::runtime_error("bad energy profile header: " + line);
    }
    std::vector<EnergyRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        EnergyRow r;
        char c1, c2, c3;
        if (!(ss >> r.size >> c1 >> r.power_mw >> c2 >> r.latency_ms >> c3 >> r.energy_mj) ||
            c1 != ',' || c2 != ',' || c3 != ',') {
            throw std::runtime_error("bad energy profile row: " + line);
        }
        rows.push_back(r);
    }
    return from_rows(std::move(rows), scheme);
}

void EnergyProfile::save_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write energy profile: " + path);
    out << "size,power_mw,latency_ms,energy_mj\n";
    char buf[128];
    for (const EnergyRow& r : rows_) {
        std::snprintf(buf, sizeof buf, "%g,%g,%g,%g\n", r.size, r.power_mw,
                      r.latency_ms, r.energy_mj);
        out << buf;
    }
}

InferenceCost EnergyProfile::cost(double size) const {
    if (size < 0) throw std::invalid_argument("energy cost: negative size");
    if (size == 0) return {0.0, 0.0, 0.0};
    if (size > rows_.front().size) {
        throw std::invalid_argument("energy cost: size above largest profiled size");
    }
    if (size < rows_.back().size) {
        throw std::invalid_argument("energy cost: size below smallest profiled size");
    }
    // rows_ is small; linear scan, exact rows first.
    for (const EnergyRow& r : rows_) {
        if (r.size == size) return {r.power_mw, r.latency_ms, r.energy_mj};
    }
    size_t hi = 0;
    while (rows_[hi + 1].size > size) ++hi;  // bracket: rows_[hi].size > size > rows_[hi+1].size
    const EnergyRow& a = rows_[hi + 1];      // smaller size
    const EnergyRow& b = rows_[hi];          // larger size
    double t;
    if (scheme_ == InterpScheme::Log2Linear) {
        t = (std::log2(size) - std::log2(a.size)) / (std::log2(b.size) - std::log2(a.size));
    } else {
        t = (size - a.size) / (b.size - a.size);
    }
    InferenceCost c;
    c.power_mw = a.power_mw + t * (b.power_mw - a.power_mw);
    c.latency_ms = a.latency_ms + t * (b.latency_ms - a.latency_ms);
    c.energy_mj = c.power_mw * c.latency_ms / 1000.0;
    return c;
}

double reward_energy_penalty(const EnergyProfile& profile, double alpha,
                             double rho, double weight) {
    if (rho == 0.0) return 0.0;
    const double full = profile.cost(alpha).energy_mj;
    return weight * profile.cost(alpha * rho).energy_mj / full;
}

EpisodeEnergy episode_energy(const EnergyProfile& profile,
                             const std::vector<double>& sizes) {
    EpisodeEnergy e;
    double power_sum = 0.0, latency_sum = 0.0;
    for (double s : sizes) {
        const InferenceCost c = profile.cost(s);
        e.total_energy_mj += c.energy_mj;
        if (s > 0) {
            ++e.acquisitions;
            power_sum += c.power_mw;
            latency_sum += c.latency_ms;
        }
    }
    if (e.acquisitions > 0) {
        e.mean_power_mw = power_sum / double(e.acquisitions);
        e.mean_latency_ms = latency_sum / double(e.acquisitions);
    }
    return e;
}

}  // namespace cadence
