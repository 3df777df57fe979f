#include "cms/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>
#include <numeric>

#include <json.hpp>

#include "cms/errors.hpp"
#include "cms/log.hpp"
#include "cms/mobility.hpp"

namespace cms {

namespace {

// Stable ids for the per-phase rng streams. Appending here never perturbs
// the draws of existing streams.
enum StreamId : std::uint64_t {
    kStreamInit = 1,
    kStreamMobility = 2,
    kStreamObserve = 3,
    kStreamTraffic = 4,
    kStreamTrials = 5,
};

void digest_mix(std::uint64_t& h, std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
}

std::uint64_t double_bits(double v) {
    std::uint64_t out;
    static_assert(sizeof(out) == sizeof(v));
    std::memcpy(&out, &v, sizeof(out));
    return out;
}

} // namespace

SimEngine::SimEngine(ScenarioConfig cfg)
    : cfg_(std::move(cfg)),
      rng_mobility_(derive_seed(cfg_.sim.seed, kStreamMobility)),
      rng_observe_(derive_seed(cfg_.sim.seed, kStreamObserve)),
      rng_traffic_(derive_seed(cfg_.sim.seed, kStreamTraffic)),
      rng_trials_(derive_seed(cfg_.sim.seed, kStreamTrials)) {
    cfg_.validate();

    world_.grid = CellGrid{{cfg_.grid.origin_x, cfg_.grid.origin_y, 0.0},
                           cfg_.grid.cell_size,
                           cfg_.grid.cols,
                           cfg_.grid.rows};

    Rng rng_init(derive_seed(cfg_.sim.seed, kStreamInit));
    const int n = cfg_.devices.count;

    // Deterministic uplink assignment: at least one gateway whenever there
    // are devices at all.
    std::vector<bool> uplinked(static_cast<std::size_t>(n), false);
    if (n > 0) {
        const int want = std::clamp(
            static_cast<int>(std::lround(cfg_.devices.uplink_fraction * n)), 1, n);
        std::vector<int> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), 0);
        for (int i = 0; i < want; ++i) {
            const auto j = i + static_cast<int>(rng_init.below(static_cast<std::uint64_t>(n - i)));
            std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
            uplinked[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = true;
        }
    }

    PowerState initial = PowerState::Active;
    if (cfg_.devices.initial_state == "ready") initial = PowerState::Ready;
    if (cfg_.devices.initial_state == "sleeping") initial = PowerState::Sleeping;

    const CellGrid& g = world_.grid;
    for (int i = 0; i < n; ++i) {
        char key[32];
        std::snprintf(key, sizeof(key), "hw-%06d", i);
        Device d;
        d.id = cloud_.register_device(key, "simulated device");
        d.hw_key = key;
        d.pos = {rng_init.uniform(g.origin.x, g.origin.x + g.width()),
                 rng_init.uniform(g.origin.y, g.origin.y + g.height()), 0.0};
        d.range = cfg_.devices.range;
        d.has_uplink = uplinked[static_cast<std::size_t>(i)];
        d.state = initial;
        const double dir = rng_init.uniform(0.0, 2.0 * std::numbers::pi);
        d.vel = {cfg_.mobility.mean_speed * std::cos(dir),
                 cfg_.mobility.mean_speed * std::sin(dir)};
        world_.add_device(std::move(d));
        gm_direction_.push_back(dir);
        wp_target_.push_back({rng_init.uniform(g.origin.x, g.origin.x + g.width()),
                              rng_init.uniform(g.origin.y, g.origin.y + g.height()), 0.0});
        prev_pos_.push_back(world_.devices.back().pos);
        link_up_since_.push_back(-1.0);
    }

    payload_buf_.assign(static_cast<std::size_t>(cfg_.traffic.payload_bytes), 0xa5);
    initial_digest_ = positions_digest();
    log_info("scenario: " + std::to_string(n) + " devices, " +
             std::to_string(cfg_.sim.duration) + " ticks, seed " + std::to_string(cfg_.sim.seed));
}

std::uint64_t SimEngine::positions_digest() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const Device& d : world_.devices) {
        digest_mix(h, d.id);
        digest_mix(h, double_bits(d.pos.x));
        digest_mix(h, double_bits(d.pos.y));
    }
    return h;
}

std::uint64_t SimEngine::poisson(double lambda) {
    if (lambda <= 0.0) return 0;
    if (lambda > 30.0) {
        // normal approximation; offered load this high saturates anyway
        const double draw = lambda + std::sqrt(lambda) * rng_traffic_.gaussian();
        return draw <= 0.0 ? 0 : static_cast<std::uint64_t>(std::llround(draw));
    }
    const double limit = std::exp(-lambda);
    std::uint64_t k = 0;
    double p = 1.0;
    do {
        ++k;
        p *= rng_traffic_.uniform01();
    } while (p > limit);
    return k - 1;
}

void SimEngine::phase_mobility() {
    const CellGrid& g = world_.grid;
    const double dt = cfg_.sim.dt;
    const bool gauss = cfg_.mobility.model == "gauss-markov";
    for (std::size_t i = 0; i < world_.devices.size(); ++i) {
        Device& d = world_.devices[i];
        const Position before = d.pos;
        if (gauss) {
            GaussMarkovParams p;
            p.alpha = cfg_.mobility.alpha;
            p.mean_speed = cfg_.mobility.mean_speed;
            p.mean_direction = gm_direction_[i];
            p.noise_std = cfg_.mobility.noise_std;
            p.v_max = cfg_.mobility.v_max;
            d.vel = gauss_markov_step(d.vel, p, dt, rng_mobility_);
            d.pos = g.clamp({d.pos.x + d.vel.vx * dt, d.pos.y + d.vel.vy * dt, d.pos.z});
        } else {
            WaypointState w{d.pos, wp_target_[i], cfg_.waypoint_delta_x(),
                            cfg_.waypoint_delta_y()};
            const bool above = above_diagonal(prev_pos_[i], d.pos, wp_target_[i]);
            const Position next = diagonal_waypoint_step(w, above, g, rng_mobility_);
            d.vel = {(next.x - d.pos.x) / dt, (next.y - d.pos.y) / dt};
            d.pos = next;
            if (distance(d.pos, wp_target_[i]) < cfg_.waypoint_retarget_distance()) {
                wp_target_[i] = {rng_mobility_.uniform(g.origin.x, g.origin.x + g.width()),
                                 rng_mobility_.uniform(g.origin.y, g.origin.y + g.height()), 0.0};
            }
        }
        prev_pos_[i] = before;
    }
}

void SimEngine::phase_observe() {
    const CellGrid& g = world_.grid;
    const double eps = cfg_.discovery.emission_noise;
    const auto obs_cap = static_cast<std::size_t>(cfg_.discovery.obs_window);
    const auto pos_cap = static_cast<std::size_t>(cfg_.transport.direction_window) + 1;
    for (std::size_t i = 0; i < world_.devices.size(); ++i) {
        Device& d = world_.devices[i];
        const CellIndex true_cell = cell_of(d.pos, g);
        CellIndex observed = true_cell;
        if (eps > 0.0 && rng_observe_.uniform01() < eps) {
            const auto nbrs = neighbors(true_cell, g);
            if (!nbrs.empty()) observed = nbrs[rng_observe_.below(nbrs.size())];
        }
        auto& obs = world_.cell_observations[i];
        obs.push_back(observed);
        while (obs.size() > obs_cap) obs.pop_front();
        auto& hist = world_.position_history[i];
        hist.push_back(d.pos);
        while (hist.size() > pos_cap) hist.pop_front();
        cloud_.report_neighbors(d.id, observed, world_.now);
    }
    // cells may have changed; decoded results from previous ticks are stale
    cache_.purge();
}

void SimEngine::phase_duty() {
    const std::size_t n = world_.devices.size();
    std::vector<bool> neighbor_present(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        const Device& a = world_.devices[i];
        for (std::size_t j = i + 1; j < n; ++j) {
            const Device& b = world_.devices[j];
            if (!in_range(a, b)) continue;
            // a sleeping radio is off: it neither probes nor responds
            if (b.state != PowerState::Sleeping) neighbor_present[i] = true;
            if (a.state != PowerState::Sleeping) neighbor_present[j] = true;
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        Device& d = world_.devices[i];
        d.state = tick_power_state(d, {cfg_.duty_cycle.sleep_period, cfg_.duty_cycle.probe_window,
                                       cfg_.duty_cycle.idle_timeout},
                                   world_.now, neighbor_present[i]);
    }
}

DeviceId SimEngine::cached_gateway(DeviceId id) const {
    const DeviceId g = tick_gateways_[world_.index_of(id)];
    if (g == kInvalidDevice) {
        throw NoGateway("no uplinked device reachable from device " + std::to_string(id));
    }
    return g;
}

void SimEngine::relay_one(DeviceId src, std::size_t src_idx, std::vector<double>& tokens) {
    const std::size_t n = world_.devices.size();
    std::uint64_t pick = rng_traffic_.below(n - 1);
    if (pick >= src_idx) ++pick;
    const DeviceId dst = world_.devices[pick].id;

    const auto pair_key = std::make_pair(src, dst);
    auto it = session_by_pair_.find(pair_key);
    const SessionParams sparams{cfg_.session.mu_prior, cfg_.session.sigma_prior,
                                cfg_.session.history_window};
    const GatewayResolver resolver = [this](DeviceId id) { return cached_gateway(id); };
    const RelayParams rparams{cfg_.discovery.budget, resolver};

    const auto open_fresh = [&]() -> bool {
        try {
            const Session s = cloud_.open_session(world_, src, dst, sparams, resolver);
            session_by_pair_[pair_key] = s.id;
            return true;
        } catch (const NoGateway&) {
            ++traffic_.no_gateway;
            return false;
        }
    };

    if (it == session_by_pair_.end()) {
        if (!open_fresh()) return;
        it = session_by_pair_.find(pair_key);
    }

    RelayPlan plan;
    for (int attempt = 0;; ++attempt) {
        try {
            plan = cloud_.plan_relay(world_, it->second, rparams);
            break;
        } catch (const SessionExpired&) {
            ++traffic_.expired_sessions;
            if (attempt > 0 || !open_fresh()) return;
            it = session_by_pair_.find(pair_key);
        } catch (const NoRoute&) {
            ++traffic_.no_route;
            return;
        }
    }

    // every radio transmission consumes one capacity slot at its device
    for (const DeviceId id : plan.up_path) {
        if (tokens[world_.index_of(id)] < 1.0) {
            ++traffic_.capacity_drops;
            return;
        }
    }
    for (const DeviceId id : plan.down_path) {
        if (tokens[world_.index_of(id)] < 1.0) {
            ++traffic_.capacity_drops;
            return;
        }
    }
    for (const DeviceId id : plan.up_path) tokens[world_.index_of(id)] -= 1.0;
    for (const DeviceId id : plan.down_path) tokens[world_.index_of(id)] -= 1.0;

    // stamp the payload so every message digest is distinct
    if (payload_buf_.size() >= sizeof(std::uint64_t)) {
        const std::uint64_t stamp = message_counter_;
        std::memcpy(payload_buf_.data(), &stamp, sizeof(stamp));
    }
    ++message_counter_;

    cloud_.commit_relay(plan, payload_buf_, tick_);
    ++traffic_.delivered_messages;
    const std::uint64_t bits = static_cast<std::uint64_t>(payload_buf_.size()) * 8;
    traffic_.delivered_bits += bits;
    tick_delivered_bits_ += bits;

    const double now = world_.now;
    for (const DeviceId id : plan.up_path) world_.device(id).last_traffic = now;
    for (const DeviceId id : plan.down_path) world_.device(id).last_traffic = now;
    world_.device(dst).last_traffic = now; // uplinked dst receives from the cloud directly
}

void SimEngine::phase_traffic() {
    const std::size_t n = world_.devices.size();
    if (n < 2 || cfg_.traffic.rate <= 0.0 || cfg_.traffic.offered_load <= 0.0) return;
    tick_gateways_ = gateway_map(world_);
    std::vector<double> tokens(n, cfg_.traffic.capacity_per_device);
    const double lambda = cfg_.traffic.rate * cfg_.traffic.offered_load * cfg_.sim.dt;
    // a radio can initiate only a bounded number of sends per tick; offered
    // messages beyond that drop without being attempted
    const auto max_attempts =
        static_cast<std::uint64_t>(std::ceil(cfg_.traffic.capacity_per_device)) + 2;
    for (std::size_t i = 0; i < n; ++i) {
        const Device& d = world_.devices[i];
        if (d.state != PowerState::Active) continue;
        const std::uint64_t burst = poisson(lambda);
        traffic_.offered_messages += burst;
        const std::uint64_t attempts = std::min(burst, max_attempts);
        traffic_.capacity_drops += burst - attempts;
        for (std::uint64_t m = 0; m < attempts; ++m) {
            if (tokens[i] < 1.0) {
                // source radio saturated: remaining offered messages drop
                traffic_.capacity_drops += attempts - m;
                break;
            }
            relay_one(d.id, i, tokens);
        }
    }
}

void SimEngine::phase_sample() {
    const std::size_t n = world_.devices.size();
    int links = 0;
    std::vector<bool> connected(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (world_.link_active(i, j)) {
                ++links;
                connected[i] = connected[j] = true;
            }
        }
    }
    const double now = world_.now;
    const auto cap = static_cast<std::size_t>(cfg_.session.history_window);
    for (std::size_t i = 0; i < n; ++i) {
        if (connected[i] && link_up_since_[i] < 0.0) {
            link_up_since_[i] = now;
        } else if (!connected[i] && link_up_since_[i] >= 0.0) {
            const double duration = std::max(now - link_up_since_[i], cfg_.sim.dt);
            auto& hist = world_.link_durations[i];
            hist.push_back(duration);
            if (hist.size() > cap) hist.erase(hist.begin());
            link_up_since_[i] = -1.0;
        }
    }
    samples_.push_back({tick_, positions_digest(), links, tick_delivered_bits_});
}

void SimEngine::step() {
    world_.now = static_cast<double>(tick_) * cfg_.sim.dt;
    tick_delivered_bits_ = 0;
    phase_mobility();
    phase_observe();
    phase_duty();
    phase_traffic();
    phase_sample();
    ++tick_;
}

namespace {

std::vector<StrategyReport> run_trials(const World& world, DiscoveryCache& cache, Rng& rng,
                                       int trials, const DiscoveryConfig& dcfg) {
    const DiscoveryParams params{dcfg.emission_noise, dcfg.self_weight, dcfg.gradient_k,
                                 dcfg.gradient_horizon, dcfg.gradient_hop_time};
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < world.devices.size(); ++i) {
        if (world.devices[i].state == PowerState::Active) active.push_back(i);
    }
    std::vector<StrategyReport> out;
    if (trials <= 0 || active.size() < 2) return out;

    std::vector<std::vector<DiscoveryResult>> results(3);
    for (int trial = 0; trial < trials; ++trial) {
        const std::size_t a_pos = rng.below(active.size());
        std::size_t b_pos = rng.below(active.size() - 1);
        if (b_pos >= a_pos) ++b_pos; // distinct endpoints
        const DeviceId src = world.devices[active[a_pos]].id;
        const DeviceId dst = world.devices[active[b_pos]].id;
        for (const Strategy s : {Strategy::Pbm, Strategy::Hmm, Strategy::Gm}) {
            results[static_cast<std::size_t>(s)].push_back(
                discover(world, s, src, dst, dcfg.budget, params, &cache));
        }
    }
    for (const Strategy s : {Strategy::Pbm, Strategy::Hmm, Strategy::Gm}) {
        StrategyReport r;
        r.strategy = s;
        r.trials = trials;
        r.metrics = compute_metrics(results[static_cast<std::size_t>(s)]);
        out.push_back(r);
    }
    return out;
}

} // namespace

SimReport SimEngine::run() {
    for (int i = 0; i < cfg_.sim.duration; ++i) step();

    SimReport report;
    report.config = cfg_;
    report.seed = cfg_.sim.seed;
    report.initial_digest = initial_digest_;
    report.samples = samples_;
    report.traffic = traffic_;
    const double sim_seconds = cfg_.sim.duration * cfg_.sim.dt;
    report.traffic.throughput_mbps =
        sim_seconds > 0.0 ? static_cast<double>(traffic_.delivered_bits) / sim_seconds / 1e6 : 0.0;
    report.throughput.push_back(ThroughputSample{cfg_.devices.count, cfg_.mobility.mean_speed,
                                                 cfg_.traffic.offered_load,
                                                 report.traffic.throughput_mbps});

    world_.now = static_cast<double>(tick_) * cfg_.sim.dt;
    report.discovery = run_trials(world_, cache_, rng_trials_, cfg_.discovery.trials,
                                  cfg_.discovery);

    report.transport.directions = direction_probabilities(world_, cfg_.transport.direction_window);
    report.transport.entropy_bits = entropy_per_symbol(report.transport.directions);
    if (!world_.devices.empty()) {
        TransportParams tp{cfg_.transport.symbol_rate, cfg_.transport.bits_per_meter,
                           cfg_.mobility.v_max, cfg_.transport.direction_window};
        const auto velocities = compute_velocities(world_, cfg_.traffic.offered_load, tp);
        report.transport.mean_velocity =
            std::accumulate(velocities.begin(), velocities.end(), 0.0) /
            static_cast<double>(velocities.size());
    }
    return report;
}

SimReport run_scenario(const ScenarioConfig& cfg) { return SimEngine(cfg).run(); }

std::vector<StrategyReport> compare_discovery(const ScenarioConfig& cfg, int trials) {
    ScenarioConfig warmup = cfg;
    warmup.discovery.trials = 0;
    SimEngine engine(warmup);
    for (int i = 0; i < warmup.sim.duration; ++i) engine.step();

    // trials run on the final snapshot
    DiscoveryCache cache;
    Rng rng(derive_seed(cfg.sim.seed, kStreamTrials));
    return run_trials(engine.world(), cache, rng, trials, cfg.discovery);
}

namespace {

nlohmann::ordered_json config_json(const ScenarioConfig& c) {
    nlohmann::ordered_json j;
    j["grid"] = {{"origin_x", c.grid.origin_x},
                 {"origin_y", c.grid.origin_y},
                 {"cell_size", c.grid.cell_size},
                 {"cols", c.grid.cols},
                 {"rows", c.grid.rows}};
    j["devices"] = {{"count", c.devices.count},
                    {"range", c.devices.range},
                    {"uplink_fraction", c.devices.uplink_fraction},
                    {"initial_state", c.devices.initial_state}};
    j["mobility"] = {{"model", c.mobility.model},
                     {"alpha", c.mobility.alpha},
                     {"mean_speed", c.mobility.mean_speed},
                     {"noise_std", c.mobility.noise_std},
                     {"v_max", c.mobility.v_max},
                     {"delta_x", c.waypoint_delta_x()},
                     {"delta_y", c.waypoint_delta_y()},
                     {"retarget_distance", c.waypoint_retarget_distance()}};
    j["duty_cycle"] = {{"sleep_period", c.duty_cycle.sleep_period},
                       {"probe_window", c.duty_cycle.probe_window},
                       {"idle_timeout", c.duty_cycle.idle_timeout}};
    j["discovery"] = {{"strategy", c.discovery.strategy},
                      {"emission_noise", c.discovery.emission_noise},
                      {"self_weight", c.discovery.self_weight},
                      {"obs_window", c.discovery.obs_window},
                      {"budget", c.discovery.budget},
                      {"gradient_k", c.discovery.gradient_k},
                      {"gradient_horizon", c.discovery.gradient_horizon},
                      {"gradient_hop_time", c.discovery.gradient_hop_time},
                      {"trials", c.discovery.trials}};
    j["traffic"] = {{"rate", c.traffic.rate},
                    {"payload_bytes", c.traffic.payload_bytes},
                    {"offered_load", c.traffic.offered_load},
                    {"capacity_per_device", c.traffic.capacity_per_device}};
    j["session"] = {{"mu_prior", c.session.mu_prior},
                    {"sigma_prior", c.session.sigma_prior},
                    {"history_window", c.session.history_window}};
    j["transport"] = {{"symbol_rate", c.transport.symbol_rate},
                      {"bits_per_meter", c.transport.bits_per_meter},
                      {"direction_window", c.transport.direction_window}};
    j["sim"] = {{"duration", c.sim.duration}, {"dt", c.sim.dt}, {"seed", c.sim.seed}};
    return j;
}

std::string hex64(std::uint64_t v) {
    char buf[19];
    std::snprintf(buf, sizeof(buf), "0x%016llx", static_cast<unsigned long long>(v));
    return buf;
}

} // namespace

std::string report_to_json(const SimReport& report) {
    nlohmann::ordered_json j;
    j["schema_version"] = report.schema_version;
    j["seed"] = report.seed;
    j["config"] = config_json(report.config);
    j["initial"] = {{"positions_digest", hex64(report.initial_digest)}};
    auto samples = nlohmann::ordered_json::array();
    for (const TickSample& s : report.samples) {
        samples.push_back({{"tick", s.tick},
                           {"positions_digest", hex64(s.positions_digest)},
                           {"active_links", s.active_links},
                           {"delivered_bits", s.delivered_bits}});
    }
    j["samples"] = std::move(samples);
    j["traffic"] = {{"offered_messages", report.traffic.offered_messages},
                    {"delivered_messages", report.traffic.delivered_messages},
                    {"capacity_drops", report.traffic.capacity_drops},
                    {"no_route", report.traffic.no_route},
                    {"no_gateway", report.traffic.no_gateway},
                    {"expired_sessions", report.traffic.expired_sessions},
                    {"delivered_bits", report.traffic.delivered_bits},
                    {"throughput_mbps", report.traffic.throughput_mbps}};
    auto throughput = nlohmann::ordered_json::array();
    for (const ThroughputSample& s : report.throughput) {
        throughput.push_back({{"devices", s.device_count},
                              {"speed", s.speed},
                              {"t", s.t},
                              {"value", s.value}});
    }
    j["throughput"] = std::move(throughput);
    auto discovery = nlohmann::ordered_json::array();
    for (const StrategyReport& r : report.discovery) {
        nlohmann::ordered_json d;
        d["strategy"] = to_string(r.strategy);
        d["trials"] = r.trials;
        d["avg_path_length"] = r.metrics.avg_path_length
                                   ? nlohmann::ordered_json(*r.metrics.avg_path_length)
                                   : nlohmann::ordered_json(nullptr);
        d["avg_stretch"] = r.metrics.avg_stretch ? nlohmann::ordered_json(*r.metrics.avg_stretch)
                                                 : nlohmann::ordered_json(nullptr);
        d["success_rate"] = r.metrics.success_rate;
        discovery.push_back(std::move(d));
    }
    j["discovery"] = std::move(discovery);
    j["transport"] = {{"directions",
                       {{"up", report.transport.directions.up},
                        {"down", report.transport.directions.down},
                        {"left", report.transport.directions.left},
                        {"right", report.transport.directions.right}}},
                      {"entropy_bits", report.transport.entropy_bits},
                      {"mean_velocity", report.transport.mean_velocity}};
    return j.dump(2) + "\n";
}

std::string report_to_csv(const SimReport& report) {
    std::string out = "tick,active_links,delivered_bits\n";
    for (const TickSample& s : report.samples) {
        out += std::to_string(s.tick) + "," + std::to_string(s.active_links) + "," +
               std::to_string(s.delivered_bits) + "\n";
    }
    return out;
}

} // namespace cms
