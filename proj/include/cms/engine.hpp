#ifndef CMS_ENGINE_HPP
#define CMS_ENGINE_HPP

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cms/cloud.hpp"
#include "cms/config.hpp"
#include "cms/discovery.hpp"
#include "cms/rng.hpp"
#include "cms/transport.hpp"
#include "cms/world.hpp"

namespace cms {

struct TickSample {
    std::uint64_t tick = 0;
    std::uint64_t positions_digest = 0;
    int active_links = 0;
    std::uint64_t delivered_bits = 0;
};

struct TrafficSummary {
    std::uint64_t offered_messages = 0;
    std::uint64_t delivered_messages = 0;
    std::uint64_t capacity_drops = 0;
    std::uint64_t no_route = 0;
    std::uint64_t no_gateway = 0;
    std::uint64_t expired_sessions = 0;
    std::uint64_t delivered_bits = 0;
    double throughput_mbps = 0.0;
};

struct StrategyReport {
    Strategy strategy = Strategy::Pbm;
    int trials = 0;
    DiscoveryMetrics metrics;
};

struct TransportSummary {
    DirectionDistribution directions;
    double entropy_bits = 0.0;
    double mean_velocity = 0.0;
};

// Complete outcome of one scenario run. Byte-identical JSON for identical
// (config, seed).
struct SimReport {
    int schema_version = 1;
    ScenarioConfig config;
    std::uint64_t seed = 0;
    std::uint64_t initial_digest = 0;
    std::vector<TickSample> samples; // exactly `duration` entries
    TrafficSummary traffic;
    std::vector<ThroughputSample> throughput; // this run's table row(s)
    std::vector<StrategyReport> discovery;
    TransportSummary transport;
};

std::string report_to_json(const SimReport& report);
std::string report_to_csv(const SimReport& report); // per-tick samples

// Deterministic tick loop. Each step runs the fixed phase order: mobility,
// cell reassignment (with stale decoded-cell purge), duty cycling, traffic
// and sessions, metric sampling. Every phase draws from its own rng stream
// derived from the master seed.
class SimEngine {
public:
    explicit SimEngine(ScenarioConfig cfg); // throws ConfigInvalid

    void step();
    SimReport run(); // steps through cfg.sim.duration ticks and finalizes

    const World& world() const { return world_; }
    const CloudStore& cloud() const { return cloud_; }
    CloudStore& cloud() { return cloud_; }
    const ScenarioConfig& config() const { return cfg_; }
    const TrafficSummary& traffic() const { return traffic_; }
    std::uint64_t tick() const { return tick_; }
    double now() const { return static_cast<double>(tick_) * cfg_.sim.dt; }

private:
    void phase_mobility();
    void phase_observe();
    void phase_duty();
    void phase_traffic();
    void phase_sample();

    void relay_one(DeviceId src, std::size_t src_idx, std::vector<double>& tokens);
    DeviceId cached_gateway(DeviceId id) const; // throws NoGateway
    std::uint64_t poisson(double lambda);
    std::uint64_t positions_digest() const;

    ScenarioConfig cfg_;
    World world_;
    CloudStore cloud_;
    DiscoveryCache cache_;

    Rng rng_mobility_;
    Rng rng_observe_;
    Rng rng_traffic_;
    Rng rng_trials_;

    std::uint64_t tick_ = 0;
    std::vector<TickSample> samples_;
    std::uint64_t initial_digest_ = 0;
    TrafficSummary traffic_;
    std::uint64_t tick_delivered_bits_ = 0;

    // per-device runtime, indexed like world_.devices
    std::vector<Position> prev_pos_;
    std::vector<Position> wp_target_;
    std::vector<double> gm_direction_;
    std::vector<double> link_up_since_; // < 0 when down

    std::map<std::pair<DeviceId, DeviceId>, SessionId> session_by_pair_;
    std::vector<DeviceId> tick_gateways_; // nearest-gateway cache, one tick's worth
    std::vector<std::uint8_t> payload_buf_;
    std::uint64_t message_counter_ = 0;
};

SimReport run_scenario(const ScenarioConfig& cfg);

// Warm-up run followed by `trials` discovery attempts per strategy on the
// final world snapshot; all strategies see the same (src, dst) pairs.
std::vector<StrategyReport> compare_discovery(const ScenarioConfig& cfg, int trials);

} // namespace cms

#endif
