#include "cadence/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "cadence/io_util.hpp"

namespace cadence {

SuiteMetrics evaluate_suite(const PolicyEnv& env, const QNet& qnet,
                            const std::vector<EpisodeSpec>& test_set,
                            uint64_t seed) {
    GreedyEvalSummary g = evaluate_greedy(env, qnet, test_set, seed);
    SuiteMetrics m;
    m.results = std::move(g.results);
    m.episodes = long(test_set.size());
    double power_sum = 0.0, latency_sum = 0.0;
    for (const EpisodeResult& r : m.results) {
        if (r.success) ++m.successes;
        m.total_energy_mj += r.energy.total_energy_mj;
        m.total_acquisitions += r.energy.acquisitions;
        m.total_steps += r.steps;
        m.total_moved_m += r.moved_total;
        for (const StepRecord& s : r.trace) {
            if (s.rho_used > 0.0) {
                const InferenceCost c = env.profile->cost(env.alpha * s.rho_used);
                power_sum += c.power_mw;
                latency_sum += c.latency_ms;
            }
        }
    }
    m.accuracy = m.episodes ? double(m.successes) / double(m.episodes) : 0.0;
    if (m.total_acquisitions > 0) {
        m.mean_power_mw = power_sum / double(m.total_acquisitions);
        m.mean_latency_ms = latency_sum / double(m.total_acquisitions);
        m.mean_nu = m.total_moved_m / double(m.total_acquisitions);
    }
    return m;
}

ComparisonDeltas compare_suites(const SuiteMetrics& adaptive,
                                const SuiteMetrics& baseline) {
    ComparisonDeltas d;
    auto reduction = [](double aders, double base) {
        return base != 0.0 ? (base - aders) / base * 100.0 : 0.0;
    };
    d.acquisitions_reduction_pct =
        reduction(double(adaptive.total_acquisitions), double(baseline.total_acquisitions));
    d.power_reduction_pct = reduction(adaptive.mean_power_mw.value_or(0.0),
                                      baseline.mean_power_mw.value_or(0.0));
    d.latency_reduction_pct = reduction(adaptive.mean_latency_ms.value_or(0.0),
                                        baseline.mean_latency_ms.value_or(0.0));
    d.energy_reduction_pct =
        reduction(adaptive.total_energy_mj, baseline.total_energy_mj);
    d.accuracy_gain_pp = (adaptive.accuracy - baseline.accuracy) * 100.0;
    d.accuracy_gain_pct = baseline.accuracy != 0.0
                              ? (adaptive.accuracy - baseline.accuracy) /
                                    baseline.accuracy * 100.0
                              : 0.0;
    return d;
}

SaturationResult saturation_analysis(const std::vector<SuccessSet>& sets) {
    if (sets.size() < 2) {
        throw std::invalid_argument("saturation_analysis: need at least two policies");
    }
    SaturationResult r;
    const int n = int(sets.size());

    // Descending network size.
    std::vector<int> order(size_t(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return sets[size_t(a)].size_label > sets[size_t(b)].size_label;
    });
    std::set<int> covered;
    for (int idx : order) {
        covered.insert(sets[size_t(idx)].solved.begin(), sets[size_t(idx)].solved.end());
        r.descending_order.push_back(idx);
        r.descending_union.push_back(long(covered.size()));
    }

    // Greedy maximal marginal gain; ties resolve toward the larger size.
    covered.clear();
    std::vector<bool> used(size_t(n), false);
    for (int round = 0; round < n; ++round) {
        int best = -1;
        long best_gain = -1;
        for (int i = 0; i < n; ++i) {
            if (used[size_t(i)]) continue;
            long gain = 0;
            for (int p : sets[size_t(i)].solved) {
                if (!covered.count(p)) ++gain;
            }
            const bool wins =
                gain > best_gain ||
                (gain == best_gain && best >= 0 &&
                 sets[size_t(i)].size_label > sets[size_t(best)].size_label);
            if (best < 0 || wins) {
                best = i;
                best_gain = gain;
            }
        }
        used[size_t(best)] = true;
        covered.insert(sets[size_t(best)].solved.begin(), sets[size_t(best)].solved.end());
        r.greedy_order.push_back(best);
        r.greedy_marginal.push_back(best_gain);
        r.greedy_union.push_back(long(covered.size()));
    }
    return r;
}

RhoHeatmap rho_heatmap(const std::vector<EpisodeResult>& traces, double bin,
                       double width_m, double height_m,
                       std::optional<Direction> direction_filter) {
    if (traces.empty()) throw std::invalid_argument("rho_heatmap: no traces");
    if (bin <= 0.0) throw std::invalid_argument("rho_heatmap: bin must be positive");
    RhoHeatmap map;
    map.bin = bin;
    map.nx = int(std::ceil(width_m / bin));
    map.ny = int(std::ceil(height_m / bin));
    map.mean.assign(size_t(map.nx) * map.ny, 0.0);
    map.count.assign(size_t(map.nx) * map.ny, 0);
    for (const EpisodeResult& ep : traces) {
        for (const StepRecord& s : ep.trace) {
            if (direction_filter && Direction(s.direction) != *direction_filter) {
                continue;
            }
            const int bx = std::min(map.nx - 1, int(s.x / bin));
            const int by = std::min(map.ny - 1, int(s.y / bin));
            const size_t idx = size_t(by) * map.nx + bx;
            map.mean[idx] += s.rho_used;
            ++map.count[idx];
        }
    }
    for (size_t i = 0; i < map.mean.size(); ++i) {
        if (map.count[i] > 0) map.mean[i] /= double(map.count[i]);
    }
    return map;
}

void save_heatmap_csv(const RhoHeatmap& map, const std::string& path) {
    std::string body;
    char buf[64];
    // North row first, matching the world dump orientation.
    for (int by = map.ny - 1; by >= 0; --by) {
        for (int bx = 0; bx < map.nx; ++bx) {
            if (bx) body += ',';
            const size_t idx = size_t(by) * map.nx + bx;
            if (map.count[idx] > 0) {
                std::snprintf(buf, sizeof buf, "%.6f", map.mean[idx]);
                body += buf;
            }
        }
        body += '\n';
    }
    write_text_file(path, body);
}

void save_heatmap_pgm(const RhoHeatmap& map, const std::string& path) {
    std::string body = "P2\n" + std::to_string(map.nx) + " " +
                       std::to_string(map.ny) + "\n255\n";
    for (int by = map.ny - 1; by >= 0; --by) {
        for (int bx = 0; bx < map.nx; ++bx) {
            const size_t idx = size_t(by) * map.nx + bx;
            const int v = map.count[idx] > 0
                              ? int(std::lround(map.mean[idx] * 254.0))
                              : 255;
            body += std::to_string(v);
            body += bx + 1 == map.nx ? '\n' : ' ';
        }
    }
    write_text_file(path, body);
}

std::optional<double> spearman(const std::vector<double>& x,
                               const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) return std::nullopt;
    const size_t n = x.size();
    auto ranks = [n](const std::vector<double>& v) {
        std::vector<size_t> order(n);
        std::iota(order.begin(), order.end(), size_t(0));
        std::stable_sort(order.begin(), order.end(),
                         [&](size_t a, size_t b) { return v[a] < v[b]; });
        std::vector<double> rank(n, 0.0);
        size_t i = 0;
        while (i < n) {
            size_t j = i;
            while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
            const double avg = 0.5 * double(i + j) + 1.0;  // average rank, 1-based
            for (size_t k = i; k <= j; ++k) rank[order[k]] = avg;
            i = j + 1;
        }
        return rank;
    };
    const std::vector<double> rx = ranks(x);
    const std::vector<double> ry = ranks(y);
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < n; ++i) {
        mx += rx[i];
        my += ry[i];
    }
    mx /= double(n);
    my /= double(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double a = rx[i] - mx;
        const double b = ry[i] - my;
        sxy += a * b;
        sxx += a * a;
        syy += b * b;
    }
    if (sxx == 0.0 || syy == 0.0) return std::nullopt;  // constant input
    return sxy / std::sqrt(sxx * syy);
}

CorrelationReport context_correlations(const std::vector<EpisodeResult>& traces,
                                       long min_events) {
    CorrelationReport rep;
    std::vector<double> rho, queue_mean_rho, queue_mean, dist, mag, prev_rho, cur_rho;
    double trunc_sum = 0.0, clear_sum = 0.0;
    long trunc_n = 0, clear_n = 0;
    for (const EpisodeResult& ep : traces) {
        for (size_t t = 0; t < ep.trace.size(); ++t) {
            const StepRecord& s = ep.trace[t];
            rep.events += 1;
            rho.push_back(s.rho_next);
            dist.push_back(s.dist_before);
            mag.push_back(s.magnitude);
            if (s.queue_mean) {
                queue_mean_rho.push_back(s.rho_next);
                queue_mean.push_back(*s.queue_mean);
            }
            if (t > 0) {
                prev_rho.push_back(ep.trace[t - 1].rho_next);
                cur_rho.push_back(s.rho_next);
            }
            if (s.truncated) {
                trunc_sum += s.rho_next;
                ++trunc_n;
            } else {
                clear_sum += s.rho_next;
                ++clear_n;
            }
        }
    }
    if (rep.events < min_events) {
        throw std::invalid_argument("context_correlations: insufficient events");
    }
    rep.rho_vs_queue_mean = spearman(queue_mean_rho, queue_mean);
    rep.rho_vs_distance = spearman(rho, dist);
    rep.rho_persistence = spearman(cur_rho, prev_rho);
    rep.rho_vs_magnitude = spearman(rho, mag);
    if (trunc_n > 0) rep.mean_rho_after_truncation = trunc_sum / double(trunc_n);
    if (clear_n > 0) rep.mean_rho_otherwise = clear_sum / double(clear_n);
    return rep;
}

}  // namespace cadence
