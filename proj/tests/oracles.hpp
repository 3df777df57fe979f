// Test-only reference implementations, kept deliberately independent of the
// library's algorithmic paths: exhaustive Viterbi enumeration, textbook BFS
// over an explicitly built connectivity graph, and Monte-Carlo estimates.
#ifndef CMS_TESTS_ORACLES_HPP
#define CMS_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include "cms/cloud.hpp"
#include "cms/discovery.hpp"
#include "cms/geometry.hpp"
#include "cms/rng.hpp"
#include "cms/world.hpp"

namespace cms::testing {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct BruteForceResult {
    std::vector<int> states; // flat cell indices
    double log_prob = kNegInf;
    bool feasible = false;
};

// Scores one state sequence exactly like the decoder scores a path: the
// same log factors added in the same left-to-right order, so equal-probability
// paths compare bitwise-identically in both routes.
inline double score_sequence(const TransitionMatrix& tm, const CellGrid& grid,
                             const ObservationSequence& seq, const std::vector<double>& initial,
                             const std::vector<int>& states) {
    const auto log_emission = [&](int state, int obs) {
        const double eps = seq.emission_noise;
        if (state == obs) return std::log(1.0 - eps);
        if (eps == 0.0) return kNegInf;
        const auto nbrs = neighbors(grid.unflatten(state), grid);
        for (const auto& nb : nbrs) {
            if (grid.flatten(nb) == obs) {
                return std::log(eps / static_cast<double>(nbrs.size()));
            }
        }
        return kNegInf;
    };
    const double pi = initial[static_cast<std::size_t>(states[0])];
    double s = pi > 0.0 ? std::log(pi) : kNegInf;
    s += log_emission(states[0], grid.flatten(seq.obs[0]));
    for (std::size_t t = 1; t < states.size(); ++t) {
        const double p = tm.at(states[t - 1], states[t]);
        s += p > 0.0 ? std::log(p) : kNegInf;
        s += log_emission(states[t], grid.flatten(seq.obs[t]));
    }
    return s;
}

// True when `a` precedes `b` in colexicographic order (last state compared
// first) — the order in which back-pointer tie-breaking resolves.
inline bool colex_less(const std::vector<int>& a, const std::vector<int>& b) {
    for (std::size_t t = a.size(); t-- > 0;) {
        if (a[t] != b[t]) return a[t] < b[t];
    }
    return false;
}

// Exhaustive argmax over all |cells|^T state sequences.
inline BruteForceResult brute_force_viterbi(const TransitionMatrix& tm, const CellGrid& grid,
                                            const ObservationSequence& seq,
                                            const std::vector<double>& initial) {
    const int n = grid.cell_count();
    const std::size_t steps = seq.obs.size();
    BruteForceResult best;
    std::vector<int> states(steps, 0);
    for (;;) {
        const double s = score_sequence(tm, grid, seq, initial, states);
        if (s > kNegInf) {
            if (!best.feasible || s > best.log_prob ||
                (s == best.log_prob && colex_less(states, best.states))) {
                best.feasible = true;
                best.log_prob = s;
                best.states = states;
            }
        }
        // odometer increment
        std::size_t t = 0;
        for (; t < steps; ++t) {
            if (++states[t] < n) break;
            states[t] = 0;
        }
        if (t == steps) break;
    }
    return best;
}

// Textbook BFS hop counts over an adjacency list; -1 = unreachable.
inline std::vector<int> bfs_hops(const std::vector<std::vector<int>>& adj, int src) {
    std::vector<int> hops(adj.size(), -1);
    hops[static_cast<std::size_t>(src)] = 0;
    std::queue<int> q;
    q.push(src);
    while (!q.empty()) {
        const int cur = q.front();
        q.pop();
        for (const int nb : adj[static_cast<std::size_t>(cur)]) {
            if (hops[static_cast<std::size_t>(nb)] < 0) {
                hops[static_cast<std::size_t>(nb)] = hops[static_cast<std::size_t>(cur)] + 1;
                q.push(nb);
            }
        }
    }
    return hops;
}

// Unit-disk connectivity among Active devices, built straight from the
// stated link rule.
inline std::vector<std::vector<int>> active_adjacency(const World& world) {
    const std::size_t n = world.devices.size();
    std::vector<std::vector<int>> adj(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const Device& a = world.devices[i];
            const Device& b = world.devices[j];
            if (a.state != PowerState::Active || b.state != PowerState::Active) continue;
            if (distance(a.pos, b.pos) <= std::min(a.range, b.range)) {
                adj[i].push_back(static_cast<int>(j));
                adj[j].push_back(static_cast<int>(i));
            }
        }
    }
    return adj;
}

// Monte-Carlo mean of a lognormal(mu, sigma^2) distribution.
inline double lognormal_mean_mc(double mu, double sigma, std::size_t samples, std::uint64_t seed) {
    Rng rng(seed);
    double sum = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
        sum += std::exp(rng.gaussian(mu, sigma));
    }
    return sum / static_cast<double>(samples);
}

// Convenience device factory for hand-built topologies.
inline Device make_device(DeviceId id, double x, double y, double range,
                          PowerState state = PowerState::Active, bool uplink = false) {
    Device d;
    d.id = id;
    d.pos = {x, y, 0.0};
    d.range = range;
    d.state = state;
    d.has_uplink = uplink;
    d.hw_key = "test-" + std::to_string(id);
    return d;
}

} // namespace cms::testing

#endif
