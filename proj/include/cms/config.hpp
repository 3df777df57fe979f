#ifndef CMS_CONFIG_HPP
#define CMS_CONFIG_HPP

#include <cstdint>
#include <string>

namespace cms {

struct GridConfig {
    double origin_x = 0.0;
    double origin_y = 0.0;
    double cell_size = 50.0; // meters
    int cols = 20;
    int rows = 20;
};

struct DevicesConfig {
    int count = 20;
    double range = 180.0;          // radio range, meters
    double uplink_fraction = 0.1;  // share of devices holding an internet uplink
    std::string initial_state = "active"; // active | ready | sleeping
};

struct MobilityConfig {
    std::string model = "gauss-markov"; // gauss-markov | diagonal-waypoint
    // gauss-markov
    double alpha = 0.75;
    double mean_speed = 5.0;
    double noise_std = 1.5;
    double v_max = 20.0;
    // diagonal-waypoint; negative values default to fractions of cell_size
    double delta_x = -1.0;           // default cell_size / 4
    double delta_y = -1.0;           // default cell_size / 4
    double retarget_distance = -1.0; // default cell_size / 2
};

struct DutyConfig {
    double sleep_period = 10.0;
    double probe_window = 1.0;
    double idle_timeout = 5.0;
};

struct DiscoveryConfig {
    std::string strategy = "pbm"; // pbm | hmm | gm
    double emission_noise = 0.1;
    double self_weight = 0.2;
    int obs_window = 8;
    int budget = 64;
    double gradient_k = 1.0;
    double gradient_horizon = 25.0;
    double gradient_hop_time = 1.0;
    int trials = 0; // per-strategy discovery trials appended to the report
};

struct TrafficConfig {
    double rate = 20.0;        // offered messages per Active device per tick at t = 1
    int payload_bytes = 1250;
    double offered_load = 1.0; // the tables' t multiplier
    double capacity_per_device = 2.0; // relay/originate slots per device per tick
};

struct SessionConfig {
    double mu_prior = 2.0;
    double sigma_prior = 0.5;
    int history_window = 32;
};

struct TransportConfig {
    double symbol_rate = 1.0;
    double bits_per_meter = 1.0;
    int direction_window = 4;
};

struct SimConfig {
    int duration = 200; // ticks
    double dt = 1.0;    // seconds per tick
    std::uint64_t seed = 42;
};

struct ScenarioConfig {
    GridConfig grid;
    DevicesConfig devices;
    MobilityConfig mobility;
    DutyConfig duty_cycle;
    DiscoveryConfig discovery;
    TrafficConfig traffic;
    SessionConfig session;
    TransportConfig transport;
    SimConfig sim;

    // Resolved waypoint defaults (negative sentinels -> cell_size fractions).
    double waypoint_delta_x() const;
    double waypoint_delta_y() const;
    double waypoint_retarget_distance() const;

    // Throws ConfigInvalid naming the offending field.
    void validate() const;
};

// Parses the scenario TOML (flat [section] tables of scalars). Unknown keys
// and malformed values raise ConfigInvalid with the dotted field name.
ScenarioConfig load_scenario_config(const std::string& path);
ScenarioConfig parse_scenario_config(const std::string& toml_text);

// Sets one field by dotted key (e.g. "devices.count") from its string form;
// the mechanism behind `sweep --param`.
void apply_override(ScenarioConfig& cfg, const std::string& dotted_key, const std::string& value);

} // namespace cms

#endif
