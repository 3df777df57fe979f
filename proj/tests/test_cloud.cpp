#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "cms/cloud.hpp"
#include "cms/errors.hpp"
#include "cms/rng.hpp"
#include "oracles.hpp"

using namespace cms;
using namespace cms::testing;

namespace {

// chain 1 -- 2 -- 3 -- 4 with 3 holding the uplink
World chain_world() {
    World w;
    w.grid = CellGrid{{0, 0, 0}, 100.0, 4, 1};
    w.add_device(make_device(1, 10, 10, 60));
    w.add_device(make_device(2, 60, 10, 60));
    w.add_device(make_device(3, 110, 10, 60, PowerState::Active, true));
    w.add_device(make_device(4, 160, 10, 60));
    return w;
}

std::vector<std::uint8_t> bytes(std::size_t n, std::uint8_t fill = 0x5a) {
    return std::vector<std::uint8_t>(n, fill);
}

} // namespace

TEST_CASE("register_device: monotone ids, idempotent keys") {
    CloudStore store;
    CHECK(store.register_device("alpha") == 1);
    CHECK(store.register_device("beta") == 2);
    CHECK(store.register_device("alpha") == 1); // repeated key keeps its id
    CHECK(store.register_device("gamma") == 3);
    CHECK(store.device_count() == 3);
    CHECK(store.is_registered(1));
    CHECK_FALSE(store.is_registered(99));
}

TEST_CASE("register_device: distinct keys get distinct ids") {
    CloudStore store;
    std::vector<DeviceId> ids;
    for (int i = 0; i < 50; ++i) ids.push_back(store.register_device("key-" + std::to_string(i)));
    std::sort(ids.begin(), ids.end());
    CHECK(std::adjacent_find(ids.begin(), ids.end()) == ids.end());
}

TEST_CASE("discover_gateway: the single uplinked device wins") {
    const World w = chain_world();
    CHECK(discover_gateway(w, 1) == 3);
    CHECK(discover_gateway(w, 3) == 3); // requester is its own gateway
}

TEST_CASE("discover_gateway: no uplinked device reachable") {
    World w = chain_world();
    w.device(3).has_uplink = false;
    CHECK_THROWS_AS(discover_gateway(w, 1), NoGateway);

    World w2 = chain_world();
    w2.device(3).state = PowerState::Sleeping; // uplink exists but is asleep
    CHECK_THROWS_AS(discover_gateway(w2, 1), NoGateway);
}

TEST_CASE("discover_gateway: nearest of two uplinked devices by hop count") {
    // 1 -- 2(gw) -- 3 -- 4(gw): device 1 sees hop counts 1 and 3
    World w;
    w.grid = CellGrid{{0, 0, 0}, 100.0, 4, 1};
    w.add_device(make_device(1, 10, 10, 60));
    w.add_device(make_device(2, 60, 10, 60, PowerState::Active, true));
    w.add_device(make_device(3, 110, 10, 60));
    w.add_device(make_device(4, 160, 10, 60, PowerState::Active, true));
    CHECK(discover_gateway(w, 1) == 2);
    CHECK(discover_gateway(w, 4) == 4);
    // cross-check the hop counts with the independent BFS
    const auto adj = active_adjacency(w);
    const auto hops = bfs_hops(adj, 0);
    CHECK(hops[1] == 1);
    CHECK(hops[3] == 3);
}

TEST_CASE("discover_gateway: isolated requester has no gateway") {
    World w = chain_world();
    w.device(1).pos = {390, 90, 0}; // far corner, out of everyone's range
    CHECK_THROWS_AS(discover_gateway(w, 1), NoGateway);
}

TEST_CASE("gateway_map agrees with discover_gateway on random worlds") {
    Rng rng(404);
    for (int trial = 0; trial < 20; ++trial) {
        World w;
        w.grid = CellGrid{{0, 0, 0}, 50.0, 8, 8};
        const DeviceId n = 2 + static_cast<DeviceId>(rng.below(20));
        for (DeviceId id = 1; id <= n; ++id) {
            auto d = make_device(id, rng.uniform(0, 400), rng.uniform(0, 400),
                                 rng.uniform(60, 160));
            d.has_uplink = rng.uniform01() < 0.25;
            if (rng.uniform01() < 0.2) d.state = PowerState::Sleeping;
            w.add_device(d);
        }
        const auto map = gateway_map(w);
        for (std::size_t i = 0; i < w.devices.size(); ++i) {
            DeviceId expected = kInvalidDevice;
            try {
                expected = discover_gateway(w, w.devices[i].id);
            } catch (const NoGateway&) {
            }
            CHECK(map[i] == expected);
        }
    }
}

TEST_CASE("connection_life: point values") {
    CHECK(connection_life(0.0, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(connection_life(1.0, 0.0) == doctest::Approx(std::exp(1.0)).epsilon(1e-12));
    CHECK(connection_life(0.5, 1.0) == doctest::Approx(std::exp(1.0)).epsilon(1e-12));
}

TEST_CASE("connection_life: matches the Monte-Carlo lognormal mean") {
    const double mc = lognormal_mean_mc(0.5, 1.0, 1000000, 2718);
    CHECK(connection_life(0.5, 1.0) == doctest::Approx(mc).epsilon(0.02));
}

TEST_CASE("connection_life: monotone in both arguments, >= e^mu") {
    Rng rng(55);
    for (int i = 0; i < 500; ++i) {
        const double mu = rng.uniform(-2.0, 3.0);
        const double sigma = rng.uniform(0.0, 2.0);
        const double base = connection_life(mu, sigma);
        CHECK(base >= std::exp(mu) - 1e-12);
        if (sigma == 0.0) CHECK(base == doctest::Approx(std::exp(mu)));
        CHECK(connection_life(mu + 0.1, sigma) > base);
        CHECK(connection_life(mu, sigma + 0.1) > base);
    }
}

TEST_CASE("open_session: priors give life 1 when both are zero") {
    World w = chain_world();
    w.now = 5.0;
    CloudStore store;
    for (const auto& d : w.devices) store.register_device(d.hw_key);
    const SessionParams params{0.0, 0.0, 8};
    const Session s = store.open_session(w, 1, 4, params);
    CHECK(s.state == SessionState::Active);
    CHECK(s.gateway == 3);
    CHECK(s.life == doctest::Approx(1.0));
    CHECK(s.start == 5.0);
    CHECK(store.sessions().size() == 1);
}

TEST_CASE("open_session: estimates mu/sigma from link history") {
    World w = chain_world();
    CloudStore store;
    for (const auto& d : w.devices) store.register_device(d.hw_key);
    // four identical 10 s intervals: mu = ln 10, sigma = 0
    w.link_durations[w.index_of(1)] = {10.0, 10.0, 10.0, 10.0};
    const Session s = store.open_session(w, 1, 4);
    CHECK(s.mu == doctest::Approx(std::log(10.0)));
    CHECK(s.sigma == doctest::Approx(0.0));
    CHECK(s.life == doctest::Approx(10.0));
}

TEST_CASE("open_session: unregistered endpoints and missing gateway") {
    World w = chain_world();
    CloudStore store;
    store.register_device(w.device(1).hw_key);
    CHECK_THROWS_AS(store.open_session(w, 1, 4), UnknownDevice); // dst unregistered
    CHECK_THROWS_AS(store.open_session(w, 9, 1), UnknownDevice);

    for (const auto& d : w.devices) store.register_device(d.hw_key);
    w.device(3).has_uplink = false;
    CHECK_THROWS_AS(store.open_session(w, 1, 4), NoGateway);
}

TEST_CASE("relay_message: hand-traced receipt on src + uplinked dst") {
    // two devices; dst holds the uplink, so the route is 1 radio + 1 cloud hop
    World w;
    w.grid = CellGrid{{0, 0, 0}, 100.0, 2, 1};
    w.add_device(make_device(1, 10, 10, 60));
    w.add_device(make_device(2, 50, 10, 60, PowerState::Active, true));
    CloudStore store;
    for (const auto& d : w.devices) store.register_device(d.hw_key);
    const Session s = store.open_session(w, 1, 2, {std::log(100.0), 0.0, 8});

    const auto payload = bytes(128);
    const auto receipt = store.relay_message(w, s.id, payload, 3);
    CHECK(receipt.hops_to_gateway == 1);
    CHECK(receipt.total_hops == 2);
    CHECK(receipt.tick == 3);
    REQUIRE(store.messages().size() == 1);
    CHECK(store.messages()[0].bytes == 128);
    CHECK(store.messages()[0].src == 1);
    CHECK(store.messages()[0].dst == 2);
}

TEST_CASE("relay_message: downlink hops counted through the dst gateway") {
    World w = chain_world(); // 1 -- 2 -- 3(gw) -- 4
    CloudStore store;
    for (const auto& d : w.devices) store.register_device(d.hw_key);
    const Session s = store.open_session(w, 1, 4, {std::log(100.0), 0.0, 8});
    CHECK(s.gateway == 3);
    const auto receipt = store.relay_message(w, s.id, bytes(10), 0);
    // up 1->2->3 (2 hops), cloud (1), down 3->4 (1 hop)
    CHECK(receipt.hops_to_gateway == 2);
    CHECK(receipt.total_hops == 4);
}

TEST_CASE("relay_message: expiry is lazy and marks the session") {
    World w = chain_world();
    CloudStore store;
    for (const auto& d : w.devices) store.register_device(d.hw_key);
    const Session s = store.open_session(w, 1, 4, {0.0, 0.0, 8}); // life 1 s at now 0
    w.now = 2.0;
    CHECK_THROWS_AS(store.relay_message(w, s.id, bytes(10), 2), SessionExpired);
    CHECK(store.find_session(s.id)->state == SessionState::Expired);
    CHECK(store.messages().empty()); // no receipt for an expired session
}

TEST_CASE("relay_message: empty payload is deliverable") {
    World w = chain_world();
    CloudStore store;
    for (const auto& d : w.devices) store.register_device(d.hw_key);
    const Session s = store.open_session(w, 1, 4, {std::log(100.0), 0.0, 8});
    const std::vector<std::uint8_t> empty;
    const auto receipt = store.relay_message(w, s.id, empty, 1);
    CHECK(receipt.total_hops == 4);
    CHECK(store.messages().back().bytes == 0);
}

TEST_CASE("relay_message: no route when the relay chain is asleep") {
    World w = chain_world();
    CloudStore store;
    for (const auto& d : w.devices) store.register_device(d.hw_key);
    const Session s = store.open_session(w, 1, 4, {std::log(100.0), 0.0, 8});
    w.device(2).state = PowerState::Sleeping; // cuts 1 off from the gateway
    CHECK_THROWS_AS(store.relay_message(w, s.id, bytes(10), 1), NoRoute);
}

TEST_CASE("close_session: a closed session cannot relay") {
    World w = chain_world();
    CloudStore store;
    for (const auto& d : w.devices) store.register_device(d.hw_key);
    const Session s = store.open_session(w, 1, 4, {std::log(100.0), 0.0, 8});
    store.close_session(s.id);
    CHECK(store.find_session(s.id)->state == SessionState::Closed);
    CHECK_THROWS_AS(store.relay_message(w, s.id, bytes(8), 1), SessionExpired);
}

TEST_CASE("message log length equals successful relays") {
    World w = chain_world();
    CloudStore store;
    for (const auto& d : w.devices) store.register_device(d.hw_key);
    const Session s = store.open_session(w, 1, 4, {std::log(1000.0), 0.0, 8});
    std::size_t delivered = 0;
    Rng rng(8);
    for (int i = 0; i < 50; ++i) {
        w.now = static_cast<double>(i);
        const bool cut = rng.uniform01() < 0.3;
        if (cut) w.device(2).state = PowerState::Sleeping;
        try {
            store.relay_message(w, s.id, bytes(16), static_cast<std::uint64_t>(i));
            ++delivered;
            CHECK_FALSE(cut);
        } catch (const NoRoute&) {
            CHECK(cut);
        }
        w.device(2).state = PowerState::Active;
    }
    CHECK(store.messages().size() == delivered);
}

TEST_CASE("journal lines carry tick, session, src, dst, bytes") {
    World w = chain_world();
    CloudStore store;
    for (const auto& d : w.devices) store.register_device(d.hw_key);
    const Session s = store.open_session(w, 1, 4, {std::log(100.0), 0.0, 8});
    store.relay_message(w, s.id, bytes(32), 7);
    const std::string journal = store.journal_jsonl();
    CHECK(journal ==
          "{\"tick\":7,\"session\":" + std::to_string(s.id) + ",\"src\":1,\"dst\":4,\"bytes\":32}\n");
}
