#ifndef CMS_CLOUD_HPP
#define CMS_CLOUD_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "cms/device.hpp"
#include "cms/geometry.hpp"
#include "cms/world.hpp"

namespace cms {

using SessionId = std::uint64_t;

enum class SessionState { Active, Expired, Closed };

// A cloud-managed connectivity session between two registered devices.
// `life` is the lognormal-mean estimate exp(mu + sigma^2/2) of the link
// duration; the session counts as Expired once now > start + life.
struct Session {
    SessionId id = 0;
    DeviceId src = kInvalidDevice;
    DeviceId dst = kInvalidDevice;
    DeviceId gateway = kInvalidDevice;
    double mu = 0.0;    // log-seconds
    double sigma = 0.0; // log-seconds, >= 0
    double life = 1.0;  // seconds
    double start = 0.0; // seconds
    SessionState state = SessionState::Active;

    bool expired_at(double now) const { return now > start + life; }
};

struct MessageEntry {
    SessionId session = 0;
    std::uint64_t payload_digest = 0;
    std::uint64_t tick = 0;
    DeviceId src = kInvalidDevice;
    DeviceId dst = kInvalidDevice;
    std::uint64_t bytes = 0;
};

// Latest cell report a device pushed to the cloud.
struct NeighborReport {
    CellIndex observed_cell;
    double at = 0.0;
};

struct SessionParams {
    double mu_prior = 2.0;    // used while a device has no link history
    double sigma_prior = 0.5;
    int history_window = 32;  // most recent link-up intervals considered
};

// Maps a device to its hop-nearest Active uplinked device; must behave like
// discover_gateway (throwing NoGateway when none is reachable). Callers that
// resolve gateways in bulk, like the engine's per-tick cache, pass their own.
using GatewayResolver = std::function<DeviceId(DeviceId)>;

struct RelayParams {
    int budget = 64;             // max radio hops per greedy leg
    GatewayResolver dst_gateway; // optional; defaults to discover_gateway
};

// The radio legs of one cloud relay, resolved and validated but not yet
// committed to the message log.
struct RelayPlan {
    SessionId session = 0;
    DeviceId src = kInvalidDevice;
    DeviceId dst = kInvalidDevice;
    std::vector<DeviceId> up_path;   // src .. gateway
    std::vector<DeviceId> down_path; // dst's gateway .. dst; empty when dst is uplinked
    int hops_up = 0;
    int hops_down = 0;
    int total_hops = 0; // hops_up + 1 cloud hop + hops_down
};

struct DeliveryReceipt {
    int hops_to_gateway = 0;
    int total_hops = 0;
    std::uint64_t tick = 0;
};

// Expected session duration exp(mu + sigma^2/2), the mean of a
// lognormal(mu, sigma^2) link-duration distribution. Strictly increasing in
// both arguments.
double connection_life(double mu, double sigma);

// Hop-nearest Active uplinked device reachable from `requester` over Active
// in-range hops; lowest id on ties. Throws NoGateway when none is reachable,
// UnknownDevice when the requester is not in the world.
DeviceId discover_gateway(const World& world, DeviceId requester);

// Batch form: the nearest gateway of every device (kInvalidDevice when none
// is reachable), computed with one BFS per gateway. Agrees with
// discover_gateway on every device.
std::vector<DeviceId> gateway_map(const World& world);

// In-process replacement for the relational cloud store: device registry,
// session table, append-only message log, and latest neighbor reports.
class CloudStore {
public:
    // Idempotent: a repeated hw_key returns the id assigned on first
    // registration. Fresh keys get ids 1, 2, 3, ...
    DeviceId register_device(const std::string& hw_key, const std::string& record = "");

    bool is_registered(DeviceId id) const;

    // Establishes a session from src to dst: elects src's gateway and
    // estimates (mu, sigma) from the log of src's recent link-up durations
    // (priors when there is no history). Throws UnknownDevice / NoGateway.
    Session open_session(const World& world, DeviceId src, DeviceId dst,
                         const SessionParams& params = {},
                         const GatewayResolver& gateway = {});

    // Resolves the radio legs of a relay without touching the log. Throws
    // SessionExpired (marking the session) and NoRoute.
    RelayPlan plan_relay(const World& world, SessionId session, const RelayParams& params = {});

    // Appends the message to the log and issues the receipt.
    DeliveryReceipt commit_relay(const RelayPlan& plan, std::span<const std::uint8_t> payload,
                                 std::uint64_t tick);

    // plan_relay + commit_relay in one step.
    DeliveryReceipt relay_message(const World& world, SessionId session,
                                  std::span<const std::uint8_t> payload, std::uint64_t tick,
                                  const RelayParams& params = {});

    void close_session(SessionId session);
    const Session* find_session(SessionId session) const;
    Session* find_session(SessionId session);

    void report_neighbors(DeviceId id, const CellIndex& observed, double at);

    const std::vector<MessageEntry>& messages() const { return messages_; }
    const std::map<SessionId, Session>& sessions() const { return sessions_; }
    const std::map<DeviceId, NeighborReport>& neighbor_reports() const {
        return neighbor_reports_;
    }
    std::size_t device_count() const { return by_key_.size(); }

    // Serializes the message log as JSONL, one object per line with fields
    // tick, session, src, dst, bytes.
    std::string journal_jsonl() const;

private:
    struct Registration {
        DeviceId id;
        std::string record;
    };

    std::map<std::string, Registration> by_key_;
    std::map<DeviceId, std::string> by_id_; // id -> hw_key
    std::map<SessionId, Session> sessions_;
    std::vector<MessageEntry> messages_;
    std::map<DeviceId, NeighborReport> neighbor_reports_;
    DeviceId next_device_id_ = 1;
    SessionId next_session_id_ = 1;
};

std::uint64_t fnv1a(std::span<const std::uint8_t> data);

} // namespace cms

#endif
