#include "cms/transport.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <thread>

#include "cms/engine.hpp"
#include "cms/errors.hpp"
#include "cms/rng.hpp"

namespace cms {

MoveDirection dominant_direction(const std::deque<Position>& history, int window) {
    if (history.size() < 2 || window < 1) return MoveDirection::None;
    const std::size_t span = std::min(history.size() - 1, static_cast<std::size_t>(window));
    const Position& from = history[history.size() - 1 - span];
    const Position& to = history.back();
    const double dx = to.x - from.x;
    const double dy = to.y - from.y;
    constexpr double kStill = 1e-9;
    if (std::abs(dx) < kStill && std::abs(dy) < kStill) return MoveDirection::None;
    if (std::abs(dx) >= std::abs(dy)) {
        return dx >= 0.0 ? MoveDirection::Right : MoveDirection::Left;
    }
    return dy >= 0.0 ? MoveDirection::Up : MoveDirection::Down;
}

namespace {

DirectionDistribution normalize_counts(const std::array<double, 4>& counts) {
    const double total = counts[0] + counts[1] + counts[2] + counts[3];
    if (total <= 0.0) return DirectionDistribution{}; // uniform fallback
    return {counts[0] / total, counts[1] / total, counts[2] / total, counts[3] / total};
}

void count_direction(std::array<double, 4>& counts, MoveDirection d) {
    switch (d) {
    case MoveDirection::Up: counts[0] += 1.0; break;
    case MoveDirection::Down: counts[1] += 1.0; break;
    case MoveDirection::Left: counts[2] += 1.0; break;
    case MoveDirection::Right: counts[3] += 1.0; break;
    case MoveDirection::None: break;
    }
}

} // namespace

DirectionDistribution direction_probabilities(const World& world, int window) {
    std::array<double, 4> counts{};
    for (std::size_t i = 0; i < world.devices.size(); ++i) {
        count_direction(counts, dominant_direction(world.position_history[i], window));
    }
    return normalize_counts(counts);
}

double entropy_per_symbol(const DirectionDistribution& d) {
    double h = 0.0;
    for (const double p : {d.up, d.down, d.left, d.right}) {
        if (p > 0.0) h -= p * std::log2(p);
    }
    return h;
}

std::vector<double> compute_velocities(const World& world, double t,
                                       const TransportParams& params) {
    const std::size_t n = world.devices.size();
    if (n == 0) throw EmptyWorld("cannot compute velocities of an empty world");
    std::vector<double> out;
    out.reserve(n);
    // O(n) neighborhood scan inside the per-device loop
    for (std::size_t i = 0; i < n; ++i) {
        const Device& d = world.devices[i];
        std::array<double, 4> counts{};
        for (std::size_t j = 0; j < n; ++j) {
            if (distance(d.pos, world.devices[j].pos) > d.range) continue;
            count_direction(counts, dominant_direction(world.position_history[j], params.window));
        }
        const double h = entropy_per_symbol(normalize_counts(counts));
        const double bits_per_second = params.symbol_rate * h;
        out.push_back(std::min(params.v_max, t * bits_per_second / params.bits_per_meter));
    }
    return out;
}

std::vector<ThroughputSample> measure_throughput(const ScenarioConfig& base,
                                                 std::span<const int> device_counts,
                                                 std::span<const double> speeds,
                                                 std::span<const double> t_grid, int jobs) {
    if (device_counts.empty() || speeds.empty() || t_grid.empty()) {
        throw EmptyInput("throughput grids must be non-empty");
    }
    for (const int c : device_counts) {
        if (c <= 0) throw EmptyScenario("device count must be positive");
    }

    struct Cell {
        int count;
        double speed;
        double t;
    };
    std::vector<Cell> cells;
    for (const double speed : speeds) {
        for (const int count : device_counts) {
            for (const double t : t_grid) cells.push_back({count, speed, t});
        }
    }

    std::vector<ThroughputSample> out(cells.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&]() {
        for (;;) {
            const std::size_t k = next.fetch_add(1);
            if (k >= cells.size()) return;
            const Cell& cell = cells[k];
            ScenarioConfig cfg = base;
            cfg.devices.count = cell.count;
            cfg.mobility.mean_speed = cell.speed;
            cfg.mobility.v_max = cell.speed;
            cfg.traffic.offered_load = cell.t;
            cfg.discovery.trials = 0;
            cfg.sim.seed = derive_seed(base.sim.seed, 0x7ab1e5 + k);
            const SimReport report = run_scenario(cfg);
            out[k] = ThroughputSample{cell.count, cell.speed, cell.t,
                                      report.traffic.throughput_mbps};
        }
    };

    int workers = jobs > 0 ? jobs : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::clamp(workers, 1, static_cast<int>(cells.size()));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    return out;
}

} // namespace cms
