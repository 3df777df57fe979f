#include "cms/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "cms/errors.hpp"

namespace cms {

double ScenarioConfig::waypoint_delta_x() const {
    return mobility.delta_x >= 0.0 ? mobility.delta_x : grid.cell_size / 4.0;
}

double ScenarioConfig::waypoint_delta_y() const {
    return mobility.delta_y >= 0.0 ? mobility.delta_y : grid.cell_size / 4.0;
}

double ScenarioConfig::waypoint_retarget_distance() const {
    return mobility.retarget_distance >= 0.0 ? mobility.retarget_distance : grid.cell_size / 2.0;
}

void ScenarioConfig::validate() const {
    const auto fail = [](const std::string& field, const std::string& msg) {
        throw ConfigInvalid(field, msg);
    };
    if (!(grid.cell_size > 0.0)) fail("grid.cell_size", "must be > 0");
    if (grid.cols < 1) fail("grid.cols", "must be >= 1");
    if (grid.rows < 1) fail("grid.rows", "must be >= 1");
    if (devices.count < 0) fail("devices.count", "must be >= 0");
    if (!(devices.range > 0.0)) fail("devices.range", "must be > 0");
    if (devices.uplink_fraction < 0.0 || devices.uplink_fraction > 1.0) {
        fail("devices.uplink_fraction", "must be in [0, 1]");
    }
    if (devices.initial_state != "active" && devices.initial_state != "ready" &&
        devices.initial_state != "sleeping") {
        fail("devices.initial_state", "expected active|ready|sleeping, got \"" +
                                          devices.initial_state + "\"");
    }
    if (mobility.model != "gauss-markov" && mobility.model != "diagonal-waypoint") {
        fail("mobility.model",
             "expected gauss-markov|diagonal-waypoint, got \"" + mobility.model + "\"");
    }
    if (mobility.alpha < 0.0 || mobility.alpha > 1.0) fail("mobility.alpha", "must be in [0, 1]");
    if (!(mobility.v_max > 0.0)) fail("mobility.v_max", "must be > 0");
    if (mobility.mean_speed < 0.0) fail("mobility.mean_speed", "must be >= 0");
    if (mobility.noise_std < 0.0) fail("mobility.noise_std", "must be >= 0");
    if (!(duty_cycle.sleep_period > 0.0)) fail("duty_cycle.sleep_period", "must be > 0");
    if (!(duty_cycle.probe_window > 0.0)) fail("duty_cycle.probe_window", "must be > 0");
    if (!(duty_cycle.idle_timeout > 0.0)) fail("duty_cycle.idle_timeout", "must be > 0");
    if (discovery.strategy != "pbm" && discovery.strategy != "hmm" &&
        discovery.strategy != "gm") {
        fail("discovery.strategy", "expected pbm|hmm|gm, got \"" + discovery.strategy + "\"");
    }
    if (discovery.emission_noise < 0.0 || discovery.emission_noise >= 1.0) {
        fail("discovery.emission_noise", "must be in [0, 1)");
    }
    if (discovery.self_weight < 0.0 || discovery.self_weight > 1.0) {
        fail("discovery.self_weight", "must be in [0, 1]");
    }
    if (discovery.obs_window < 1) fail("discovery.obs_window", "must be >= 1");
    if (discovery.budget < 1) fail("discovery.budget", "must be >= 1");
    if (!(discovery.gradient_k > 0.0)) fail("discovery.gradient_k", "must be > 0");
    if (!(discovery.gradient_horizon > 0.0)) fail("discovery.gradient_horizon", "must be > 0");
    if (!(discovery.gradient_hop_time > 0.0)) fail("discovery.gradient_hop_time", "must be > 0");
    if (discovery.trials < 0) fail("discovery.trials", "must be >= 0");
    if (traffic.rate < 0.0) fail("traffic.rate", "must be >= 0");
    if (traffic.payload_bytes < 0) fail("traffic.payload_bytes", "must be >= 0");
    if (traffic.offered_load < 0.0) fail("traffic.offered_load", "must be >= 0");
    if (traffic.capacity_per_device < 0.0) fail("traffic.capacity_per_device", "must be >= 0");
    if (session.sigma_prior < 0.0) fail("session.sigma_prior", "must be >= 0");
    if (session.history_window < 1) fail("session.history_window", "must be >= 1");
    if (!(transport.symbol_rate > 0.0)) fail("transport.symbol_rate", "must be > 0");
    if (!(transport.bits_per_meter > 0.0)) fail("transport.bits_per_meter", "must be > 0");
    if (transport.direction_window < 1) fail("transport.direction_window", "must be >= 1");
    if (sim.duration < 0) fail("sim.duration", "must be >= 0");
    if (!(sim.dt > 0.0)) fail("sim.dt", "must be > 0");
}

namespace {

// Minimal TOML subset: comments, [section] headers, and key = scalar lines.
// Dotted keys, arrays and multi-line values are not part of the config
// schema and are rejected.
std::map<std::string, std::string> parse_toml_scalars(const std::string& text) {
    std::map<std::string, std::string> out;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        // strip comment (respecting quoted strings)
        bool in_string = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') in_string = !in_string;
            if (line[i] == '#' && !in_string) {
                line.erase(i);
                break;
            }
        }
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        const auto last = line.find_last_not_of(" \t\r");
        std::string body = line.substr(first, last - first + 1);
        if (body.front() == '[') {
            if (body.back() != ']') {
                throw ConfigInvalid("line " + std::to_string(line_no), "malformed table header");
            }
            section = body.substr(1, body.size() - 2);
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw ConfigInvalid("line " + std::to_string(line_no), "expected key = value");
        }
        std::string key = body.substr(0, eq);
        std::string value = body.substr(eq + 1);
        const auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t");
            const auto e = s.find_last_not_of(" \t");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        key = trim(key);
        value = trim(value);
        if (key.empty() || value.empty()) {
            throw ConfigInvalid("line " + std::to_string(line_no), "expected key = value");
        }
        const std::string dotted = section.empty() ? key : section + "." + key;
        if (out.count(dotted) > 0) {
            throw ConfigInvalid(dotted, "duplicate key");
        }
        out[dotted] = value;
    }
    return out;
}

class FieldReader {
public:
    explicit FieldReader(std::map<std::string, std::string> raw) : raw_(std::move(raw)) {}

    void read(const std::string& key, double& into) {
        if (const auto* v = take(key)) into = parse_double(key, *v);
    }
    void read(const std::string& key, int& into) {
        if (const auto* v = take(key)) {
            const double d = parse_double(key, *v);
            if (d != std::floor(d)) throw ConfigInvalid(key, "expected an integer");
            into = static_cast<int>(d);
        }
    }
    void read(const std::string& key, std::uint64_t& into) {
        if (const auto* v = take(key)) {
            errno = 0;
            char* end = nullptr;
            const unsigned long long u = std::strtoull(v->c_str(), &end, 10);
            if (errno != 0 || end == v->c_str() || *end != '\0' || v->front() == '-') {
                throw ConfigInvalid(key, "expected an unsigned integer, got \"" + *v + "\"");
            }
            into = u;
        }
    }
    void read(const std::string& key, std::string& into) {
        if (const auto* v = take(key)) {
            if (v->size() < 2 || v->front() != '"' || v->back() != '"') {
                throw ConfigInvalid(key, "expected a quoted string, got " + *v);
            }
            into = v->substr(1, v->size() - 2);
        }
    }

    void finish() const {
        for (const auto& [key, value] : raw_) {
            (void)value;
            if (consumed_.count(key) == 0) throw ConfigInvalid(key, "unknown key");
        }
    }

private:
    const std::string* take(const std::string& key) {
        const auto it = raw_.find(key);
        if (it == raw_.end()) return nullptr;
        consumed_.insert(key);
        return &it->second;
    }

    static double parse_double(const std::string& key, const std::string& v) {
        errno = 0;
        char* end = nullptr;
        const double d = std::strtod(v.c_str(), &end);
        if (errno != 0 || end == v.c_str() || *end != '\0') {
            throw ConfigInvalid(key, "expected a number, got \"" + v + "\"");
        }
        return d;
    }

    std::map<std::string, std::string> raw_;
    std::set<std::string> consumed_;
};

void read_all_fields(FieldReader& r, ScenarioConfig& cfg) {
    r.read("grid.origin_x", cfg.grid.origin_x);
    r.read("grid.origin_y", cfg.grid.origin_y);
    r.read("grid.cell_size", cfg.grid.cell_size);
    r.read("grid.cols", cfg.grid.cols);
    r.read("grid.rows", cfg.grid.rows);
    r.read("devices.count", cfg.devices.count);
    r.read("devices.range", cfg.devices.range);
    r.read("devices.uplink_fraction", cfg.devices.uplink_fraction);
    r.read("devices.initial_state", cfg.devices.initial_state);
    r.read("mobility.model", cfg.mobility.model);
    r.read("mobility.alpha", cfg.mobility.alpha);
    r.read("mobility.mean_speed", cfg.mobility.mean_speed);
    r.read("mobility.noise_std", cfg.mobility.noise_std);
    r.read("mobility.v_max", cfg.mobility.v_max);
    r.read("mobility.delta_x", cfg.mobility.delta_x);
    r.read("mobility.delta_y", cfg.mobility.delta_y);
    r.read("mobility.retarget_distance", cfg.mobility.retarget_distance);
    r.read("duty_cycle.sleep_period", cfg.duty_cycle.sleep_period);
    r.read("duty_cycle.probe_window", cfg.duty_cycle.probe_window);
    r.read("duty_cycle.idle_timeout", cfg.duty_cycle.idle_timeout);
    r.read("discovery.strategy", cfg.discovery.strategy);
    r.read("discovery.emission_noise", cfg.discovery.emission_noise);
    r.read("discovery.self_weight", cfg.discovery.self_weight);
    r.read("discovery.obs_window", cfg.discovery.obs_window);
    r.read("discovery.budget", cfg.discovery.budget);
    r.read("discovery.gradient_k", cfg.discovery.gradient_k);
    r.read("discovery.gradient_horizon", cfg.discovery.gradient_horizon);
    r.read("discovery.gradient_hop_time", cfg.discovery.gradient_hop_time);
    r.read("discovery.trials", cfg.discovery.trials);
    r.read("traffic.rate", cfg.traffic.rate);
    r.read("traffic.payload_bytes", cfg.traffic.payload_bytes);
    r.read("traffic.offered_load", cfg.traffic.offered_load);
    r.read("traffic.capacity_per_device", cfg.traffic.capacity_per_device);
    r.read("session.mu_prior", cfg.session.mu_prior);
    r.read("session.sigma_prior", cfg.session.sigma_prior);
    r.read("session.history_window", cfg.session.history_window);
    r.read("transport.symbol_rate", cfg.transport.symbol_rate);
    r.read("transport.bits_per_meter", cfg.transport.bits_per_meter);
    r.read("transport.direction_window", cfg.transport.direction_window);
    r.read("sim.duration", cfg.sim.duration);
    r.read("sim.dt", cfg.sim.dt);
    r.read("sim.seed", cfg.sim.seed);
}

} // namespace

ScenarioConfig parse_scenario_config(const std::string& toml_text) {
    FieldReader reader(parse_toml_scalars(toml_text));
    ScenarioConfig cfg;
    read_all_fields(reader, cfg);
    reader.finish();
    cfg.validate();
    return cfg;
}

ScenarioConfig load_scenario_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigInvalid("config", "cannot open file \"" + path + "\"");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario_config(buf.str());
}

void apply_override(ScenarioConfig& cfg, const std::string& dotted_key, const std::string& value) {
    // Route through the same reader so types and diagnostics match the file
    // parser. String fields arrive unquoted on the command line.
    std::string v = value;
    const bool is_string_field = dotted_key == "devices.initial_state" ||
                                 dotted_key == "mobility.model" ||
                                 dotted_key == "discovery.strategy";
    if (is_string_field && (v.empty() || v.front() != '"')) v = "\"" + v + "\"";
    std::map<std::string, std::string> raw;
    raw.emplace(dotted_key, v);
    FieldReader reader(std::move(raw));
    read_all_fields(reader, cfg);
    reader.finish();
    cfg.validate();
}

} // namespace cms
