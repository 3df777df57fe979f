#include "cms/discovery.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

#include "cms/errors.hpp"

namespace cms {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_emission(int state, int obs, double eps, const std::vector<std::vector<int>>& nbrs) {
    if (state == obs) return std::log(1.0 - eps);
    if (eps == 0.0) return kNegInf;
    const auto& nb = nbrs[static_cast<std::size_t>(state)];
    if (std::find(nb.begin(), nb.end(), obs) != nb.end()) {
        return std::log(eps / static_cast<double>(nb.size()));
    }
    return kNegInf;
}

std::vector<std::vector<int>> flat_neighbors(const CellGrid& grid) {
    std::vector<std::vector<int>> out(static_cast<std::size_t>(grid.cell_count()));
    for (int s = 0; s < grid.cell_count(); ++s) {
        for (const auto& c : neighbors(grid.unflatten(s), grid)) {
            out[static_cast<std::size_t>(s)].push_back(grid.flatten(c));
        }
    }
    return out;
}

} // namespace

const char* to_string(Strategy s) {
    switch (s) {
    case Strategy::Pbm: return "pbm";
    case Strategy::Hmm: return "hmm";
    case Strategy::Gm: return "gm";
    }
    return "?";
}

Strategy parse_strategy(const std::string& name) {
    if (name == "pbm") return Strategy::Pbm;
    if (name == "hmm") return Strategy::Hmm;
    if (name == "gm") return Strategy::Gm;
    throw ConfigInvalid("discovery.strategy", "expected one of pbm|hmm|gm, got \"" + name + "\"");
}

ViterbiResult viterbi_decode(const TransitionMatrix& tm, const CellGrid& grid,
                             const ObservationSequence& seq, std::span<const double> initial) {
    assert(tm.n == grid.cell_count());
    assert(static_cast<int>(initial.size()) == tm.n);
    if (seq.obs.empty()) throw EmptyInput("observation sequence is empty");

    const int n = tm.n;
    const std::size_t steps = seq.obs.size();
    const double eps = seq.emission_noise;
    const auto nbrs = flat_neighbors(grid);

    // Sparse predecessor lists: only transitions with nonzero probability.
    std::vector<std::vector<int>> preds(static_cast<std::size_t>(n));
    std::vector<double> log_tm(tm.p.size(), kNegInf);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double pij = tm.at(i, j);
            if (pij > 0.0) {
                log_tm[static_cast<std::size_t>(i) * n + j] = std::log(pij);
                preds[static_cast<std::size_t>(j)].push_back(i);
            }
        }
    }

    std::vector<double> score(static_cast<std::size_t>(n), kNegInf);
    std::vector<std::vector<int>> back(steps, std::vector<int>(static_cast<std::size_t>(n), -1));

    const int obs0 = grid.flatten(seq.obs[0]);
    for (int j = 0; j < n; ++j) {
        const double pi = initial[static_cast<std::size_t>(j)];
        double s = pi > 0.0 ? std::log(pi) : kNegInf;
        s += log_emission(j, obs0, eps, nbrs);
        score[static_cast<std::size_t>(j)] = s;
    }

    std::vector<double> next(static_cast<std::size_t>(n), kNegInf);
    for (std::size_t t = 1; t < steps; ++t) {
        const int obs_t = grid.flatten(seq.obs[t]);
        for (int j = 0; j < n; ++j) {
            double best = kNegInf;
            int best_i = -1;
            for (const int i : preds[static_cast<std::size_t>(j)]) {
                const double cand =
                    score[static_cast<std::size_t>(i)] + log_tm[static_cast<std::size_t>(i) * n + j];
                if (cand > best) { // strict: ties keep the lowest predecessor index
                    best = cand;
                    best_i = i;
                }
            }
            next[static_cast<std::size_t>(j)] = best + log_emission(j, obs_t, eps, nbrs);
            back[t][static_cast<std::size_t>(j)] = best_i;
        }
        score.swap(next);
    }

    double best = kNegInf;
    int best_j = -1;
    for (int j = 0; j < n; ++j) {
        if (score[static_cast<std::size_t>(j)] > best) {
            best = score[static_cast<std::size_t>(j)];
            best_j = j;
        }
    }
    if (best_j < 0 || best == kNegInf) {
        throw ImpossibleSequence("every state sequence has probability zero");
    }

    ViterbiResult result;
    result.log_prob = best;
    std::vector<int> states(steps);
    states[steps - 1] = best_j;
    for (std::size_t t = steps - 1; t > 0; --t) {
        states[t - 1] = back[t][static_cast<std::size_t>(states[t])];
    }
    result.path.reserve(steps);
    for (const int s : states) result.path.push_back(grid.unflatten(s));
    return result;
}

double gradient_value(double t, double total, double k) {
    if (t == 0.0) return 1.0;
    if (t > total) return 0.0;
    return std::min(1.0, std::pow(t, -k));
}

namespace {

// Greedy geographic step: among Active in-range neighbors of `cur` strictly
// closer to `target` than cur itself, the closest one (lowest id on ties).
// Returns the device index or npos on a local minimum.
std::size_t greedy_step(const World& world, std::size_t cur, const Position& target) {
    constexpr auto npos = static_cast<std::size_t>(-1);
    const double cur_dist = distance(world.devices[cur].pos, target);
    double best_dist = cur_dist;
    std::size_t best = npos;
    for (const std::size_t j : world.active_neighbors(cur)) {
        const double dj = distance(world.devices[j].pos, target);
        if (dj < best_dist) { // strict: first-found lowest id wins ties
            best_dist = dj;
            best = j;
        }
    }
    return best;
}

CellIndex decoded_cell_of(const World& world, std::size_t dst_idx, const DiscoveryParams& params,
                          DiscoveryCache* cache) {
    const Device& dst = world.devices[dst_idx];
    if (cache) {
        const auto it = cache->decoded.find(dst.id);
        if (it != cache->decoded.end()) return it->second;
    }
    CellIndex decoded;
    const auto& history = world.cell_observations[dst_idx];
    if (history.empty()) {
        decoded = cell_of(dst.pos, world.grid);
    } else {
        const TransitionMatrix* tm = nullptr;
        TransitionMatrix local;
        if (cache) {
            if (!cache->tm_ready) {
                cache->tm = build_transition_matrix(world.grid, params.self_weight);
                cache->tm_ready = true;
            }
            tm = &cache->tm;
        } else {
            local = build_transition_matrix(world.grid, params.self_weight);
            tm = &local;
        }
        ObservationSequence seq;
        seq.obs.assign(history.begin(), history.end());
        seq.emission_noise = params.emission_noise;
        const std::vector<double> uniform(static_cast<std::size_t>(tm->n),
                                          1.0 / static_cast<double>(tm->n));
        try {
            decoded = viterbi_decode(*tm, world.grid, seq, uniform).path.back();
        } catch (const ImpossibleSequence&) {
            decoded = cell_of(dst.pos, world.grid);
        }
    }
    if (cache) cache->decoded.emplace(dst.id, decoded);
    return decoded;
}

} // namespace

DiscoveryResult discover(const World& world, Strategy strategy, DeviceId src, DeviceId dst,
                         int budget, const DiscoveryParams& params, DiscoveryCache* cache) {
    constexpr auto npos = static_cast<std::size_t>(-1);
    const std::size_t src_idx = world.index_of(src);
    const std::size_t dst_idx = world.index_of(dst);

    DiscoveryResult result;
    result.strategy = strategy;

    if (src == dst) {
        result.path = {src};
        result.success = true;
        return result;
    }

    const auto hops_from_src = world.active_hops_from(src);
    result.shortest_hops = std::max(hops_from_src[dst_idx], 0);

    const Device& source = world.devices[src_idx];
    const Device& target = world.devices[dst_idx];
    if (source.state != PowerState::Active || target.state != PowerState::Active) {
        return result;
    }

    std::vector<std::size_t> path_idx{src_idx};
    const auto fail = [&result]() { return result; };
    const auto succeed = [&]() {
        result.path.reserve(path_idx.size());
        for (const std::size_t i : path_idx) result.path.push_back(world.devices[i].id);
        result.hops = static_cast<int>(result.path.size()) - 1;
        result.success = true;
        return result;
    };

    switch (strategy) {
    case Strategy::Pbm: {
        std::size_t cur = src_idx;
        while (static_cast<int>(path_idx.size()) - 1 < budget) {
            if (world.link_active(cur, dst_idx)) { // dst in the neighbor table: hand over
                path_idx.push_back(dst_idx);
                return succeed();
            }
            const std::size_t next = greedy_step(world, cur, target.pos);
            if (next == npos) return fail();
            path_idx.push_back(next);
            cur = next;
        }
        return fail();
    }
    case Strategy::Hmm: {
        // Relays know only dst's decoded cell, not its live position: the
        // message must reach that cell before homing in on dst itself.
        const CellIndex decoded = decoded_cell_of(world, dst_idx, params, cache);
        const Position decoded_center = world.grid.cell_center(decoded);
        std::size_t cur = src_idx;
        while (static_cast<int>(path_idx.size()) - 1 < budget) {
            const bool in_decoded_cell = cell_of(world.devices[cur].pos, world.grid) == decoded;
            if (in_decoded_cell && world.link_active(cur, dst_idx)) {
                path_idx.push_back(dst_idx); // local neighbor discovery inside the cell
                return succeed();
            }
            const Position& goal = in_decoded_cell ? target.pos : decoded_center;
            const std::size_t next = greedy_step(world, cur, goal);
            if (next == npos) return fail();
            path_idx.push_back(next);
            if (next == dst_idx) return succeed();
            cur = next;
        }
        return fail();
    }
    case Strategy::Gm: {
        const CellIndex seed_cell = cell_of(target.pos, world.grid);
        const auto grad = [&](const CellIndex& c) {
            const double t = manhattan(c, seed_cell) * params.gradient_hop_time;
            return gradient_value(t, params.gradient_horizon, params.gradient_k);
        };
        std::size_t cur = src_idx;
        while (static_cast<int>(path_idx.size()) - 1 < budget) {
            if (world.link_active(cur, dst_idx)) {
                path_idx.push_back(dst_idx);
                return succeed();
            }
            const double g_cur = grad(cell_of(world.devices[cur].pos, world.grid));
            std::size_t next = npos;
            for (const std::size_t j : world.active_neighbors(cur)) {
                if (grad(cell_of(world.devices[j].pos, world.grid)) > g_cur) {
                    next = j; // active_neighbors is id-ascending; first match wins
                    break;
                }
            }
            if (next == npos) return fail();
            path_idx.push_back(next);
            cur = next;
        }
        return fail();
    }
    }
    return fail();
}

DiscoveryMetrics compute_metrics(std::span<const DiscoveryResult> results) {
    if (results.empty()) throw EmptyInput("no discovery results to aggregate");
    assert(std::all_of(results.begin(), results.end(),
                       [&](const DiscoveryResult& r) { return r.strategy == results[0].strategy; }));
    DiscoveryMetrics m;
    std::size_t successes = 0;
    double hops_sum = 0.0;
    double stretch_sum = 0.0;
    for (const auto& r : results) {
        if (!r.success) continue;
        ++successes;
        hops_sum += static_cast<double>(r.hops);
        stretch_sum += r.shortest_hops > 0
                           ? static_cast<double>(r.hops) / static_cast<double>(r.shortest_hops)
                           : 1.0; // src == dst trials stretch by definition 1
    }
    m.success_rate = static_cast<double>(successes) / static_cast<double>(results.size());
    if (successes > 0) {
        m.avg_path_length = hops_sum / static_cast<double>(successes);
        m.avg_stretch = stretch_sum / static_cast<double>(successes);
    }
    return m;
}

} // namespace cms
