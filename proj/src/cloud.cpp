#include "cms/cloud.hpp"

#include <algorithm>
#include <cmath>

#include "cms/discovery.hpp"
#include "cms/errors.hpp"

namespace cms {

double connection_life(double mu, double sigma) {
    return std::exp(mu + 0.5 * sigma * sigma);
}

DeviceId discover_gateway(const World& world, DeviceId requester) {
    const auto hops = world.active_hops_from(requester);
    int best_hops = -1;
    DeviceId best = kInvalidDevice;
    for (std::size_t i = 0; i < world.devices.size(); ++i) {
        const Device& d = world.devices[i];
        if (!d.has_uplink || d.state != PowerState::Active || hops[i] < 0) continue;
        if (best_hops < 0 || hops[i] < best_hops) { // ids ascend, so ties keep the lowest id
            best_hops = hops[i];
            best = d.id;
        }
    }
    if (best == kInvalidDevice) {
        throw NoGateway("no uplinked device reachable from device " + std::to_string(requester));
    }
    return best;
}

std::vector<DeviceId> gateway_map(const World& world) {
    const std::size_t n = world.devices.size();
    std::vector<DeviceId> nearest(n, kInvalidDevice);
    std::vector<int> best_hops(n, -1);
    // links are symmetric, so hops from each gateway equal hops to it;
    // iterating gateways in ascending id keeps the lowest id on hop ties
    for (const Device& g : world.devices) {
        if (!g.has_uplink || g.state != PowerState::Active) continue;
        const auto hops = world.active_hops_from(g.id);
        for (std::size_t i = 0; i < n; ++i) {
            if (hops[i] < 0) continue;
            if (best_hops[i] < 0 || hops[i] < best_hops[i]) {
                best_hops[i] = hops[i];
                nearest[i] = g.id;
            }
        }
    }
    return nearest;
}

DeviceId CloudStore::register_device(const std::string& hw_key, const std::string& record) {
    const auto it = by_key_.find(hw_key);
    if (it != by_key_.end()) return it->second.id;
    const DeviceId id = next_device_id_++;
    by_key_.emplace(hw_key, Registration{id, record});
    by_id_.emplace(id, hw_key);
    return id;
}

bool CloudStore::is_registered(DeviceId id) const { return by_id_.count(id) > 0; }

namespace {

// Sample mean and (population) standard deviation of the log durations in
// the most recent `window` entries.
std::pair<double, double> log_duration_params(const std::vector<double>& durations, int window,
                                              const SessionParams& params) {
    if (durations.empty() || window <= 0) return {params.mu_prior, params.sigma_prior};
    const std::size_t take = std::min(durations.size(), static_cast<std::size_t>(window));
    const std::size_t first = durations.size() - take;
    double mean = 0.0;
    for (std::size_t i = first; i < durations.size(); ++i) mean += std::log(durations[i]);
    mean /= static_cast<double>(take);
    double var = 0.0;
    for (std::size_t i = first; i < durations.size(); ++i) {
        const double d = std::log(durations[i]) - mean;
        var += d * d;
    }
    var /= static_cast<double>(take);
    return {mean, std::sqrt(var)};
}

} // namespace

Session CloudStore::open_session(const World& world, DeviceId src, DeviceId dst,
                                 const SessionParams& params, const GatewayResolver& gateway_fn) {
    if (!is_registered(src)) {
        throw UnknownDevice("session source " + std::to_string(src) + " is not registered");
    }
    if (!is_registered(dst)) {
        throw UnknownDevice("session destination " + std::to_string(dst) + " is not registered");
    }
    const std::size_t src_idx = world.index_of(src);
    world.index_of(dst); // both endpoints must exist in the world as well

    const DeviceId gateway = gateway_fn ? gateway_fn(src) : discover_gateway(world, src);
    const auto [mu, sigma] = log_duration_params(world.link_durations[src_idx],
                                                 params.history_window, params);
    Session s;
    s.id = next_session_id_++;
    s.src = src;
    s.dst = dst;
    s.gateway = gateway;
    s.mu = mu;
    s.sigma = sigma;
    s.life = connection_life(mu, sigma);
    s.start = world.now;
    s.state = SessionState::Active;
    sessions_.emplace(s.id, s);
    return s;
}

RelayPlan CloudStore::plan_relay(const World& world, SessionId session,
                                 const RelayParams& params) {
    Session* s = find_session(session);
    if (s == nullptr) {
        throw SimError("unknown session id " + std::to_string(session));
    }
    if (s->state == SessionState::Active && s->expired_at(world.now)) {
        s->state = SessionState::Expired;
    }
    if (s->state != SessionState::Active) {
        throw SessionExpired("session " + std::to_string(session) + " is no longer active");
    }

    RelayPlan plan;
    plan.session = s->id;
    plan.src = s->src;
    plan.dst = s->dst;

    const auto up = discover(world, Strategy::Pbm, s->src, s->gateway, params.budget);
    if (!up.success) {
        throw NoRoute("no greedy route from device " + std::to_string(s->src) + " to gateway " +
                      std::to_string(s->gateway));
    }
    plan.up_path = up.path;
    plan.hops_up = up.hops;

    const Device& dst_dev = world.device(s->dst);
    if (dst_dev.has_uplink && dst_dev.state == PowerState::Active) {
        plan.hops_down = 0; // dst receives straight from the cloud
    } else {
        DeviceId dst_gateway = kInvalidDevice;
        try {
            dst_gateway = params.dst_gateway ? params.dst_gateway(s->dst)
                                             : discover_gateway(world, s->dst);
        } catch (const NoGateway&) {
            throw NoRoute("destination " + std::to_string(s->dst) +
                          " is not reachable from any gateway");
        }
        const auto down = discover(world, Strategy::Pbm, dst_gateway, s->dst, params.budget);
        if (!down.success) {
            throw NoRoute("no greedy route from gateway " + std::to_string(dst_gateway) +
                          " to device " + std::to_string(s->dst));
        }
        plan.down_path = down.path;
        plan.hops_down = down.hops;
    }
    plan.total_hops = plan.hops_up + 1 + plan.hops_down;
    return plan;
}

DeliveryReceipt CloudStore::commit_relay(const RelayPlan& plan,
                                         std::span<const std::uint8_t> payload,
                                         std::uint64_t tick) {
    MessageEntry entry;
    entry.session = plan.session;
    entry.payload_digest = fnv1a(payload);
    entry.tick = tick;
    entry.src = plan.src;
    entry.dst = plan.dst;
    entry.bytes = payload.size();
    messages_.push_back(entry);
    return DeliveryReceipt{plan.hops_up, plan.total_hops, tick};
}

DeliveryReceipt CloudStore::relay_message(const World& world, SessionId session,
                                          std::span<const std::uint8_t> payload,
                                          std::uint64_t tick, const RelayParams& params) {
    return commit_relay(plan_relay(world, session, params), payload, tick);
}

void CloudStore::close_session(SessionId session) {
    Session* s = find_session(session);
    if (s != nullptr) s->state = SessionState::Closed;
}

const Session* CloudStore::find_session(SessionId session) const {
    const auto it = sessions_.find(session);
    return it == sessions_.end() ? nullptr : &it->second;
}

Session* CloudStore::find_session(SessionId session) {
    const auto it = sessions_.find(session);
    return it == sessions_.end() ? nullptr : &it->second;
}

void CloudStore::report_neighbors(DeviceId id, const CellIndex& observed, double at) {
    neighbor_reports_[id] = NeighborReport{observed, at};
}

std::string CloudStore::journal_jsonl() const {
    std::string out;
    for (const auto& m : messages_) {
        out += "{\"tick\":" + std::to_string(m.tick) + ",\"session\":" + std::to_string(m.session) +
               ",\"src\":" + std::to_string(m.src) + ",\"dst\":" + std::to_string(m.dst) +
               ",\"bytes\":" + std::to_string(m.bytes) + "}\n";
    }
    return out;
}

std::uint64_t fnv1a(std::span<const std::uint8_t> data) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (const std::uint8_t b : data) {
        hash ^= b;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

} // namespace cms
