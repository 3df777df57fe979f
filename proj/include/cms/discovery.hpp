#ifndef CMS_DISCOVERY_HPP
#define CMS_DISCOVERY_HPP

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cms/geometry.hpp"
#include "cms/world.hpp"

namespace cms {

enum class Strategy { Pbm, Hmm, Gm };

const char* to_string(Strategy s);
Strategy parse_strategy(const std::string& name); // throws ConfigInvalid

// Noisy cell reports O_1..O_n for one device, newest last.
struct ObservationSequence {
    std::vector<CellIndex> obs;
    double emission_noise = 0.1; // epsilon, in [0, 1)
};

struct ViterbiResult {
    std::vector<CellIndex> path;
    double log_prob = 0.0;
};

// Maximum-likelihood state sequence for the grid-cell HMM. The emission model
// puts 1-eps on the true cell and splits eps equally among its existing
// neighbors. Log-domain arithmetic; ties resolve toward the lowest flat cell
// index (final state first, then back-pointers). Throws ImpossibleSequence
// when every state sequence has probability zero.
ViterbiResult viterbi_decode(const TransitionMatrix& tm, const CellGrid& grid,
                             const ObservationSequence& seq, std::span<const double> initial);

// Destination-seeded gradient: 1 at t = 0, 0 past `total`, otherwise
// min(1, t^-k). Monotone non-increasing in t.
double gradient_value(double t, double total, double k);

struct DiscoveryParams {
    double emission_noise = 0.1;   // epsilon of the HMM observation channel
    double self_weight = 0.2;      // diagonal mass of the transition matrix
    double gradient_k = 1.0;       // exponent of the gradient decay
    double gradient_horizon = 25.0; // seconds after which the gradient is 0
    double gradient_hop_time = 1.0; // seconds of decay per cell of spreading
};

// Decoded-cell and transition-matrix cache. Valid for a single world
// snapshot; the engine purges it whenever cells are reassigned.
struct DiscoveryCache {
    TransitionMatrix tm;
    bool tm_ready = false;
    std::map<DeviceId, CellIndex> decoded;

    void purge() {
        decoded.clear();
    }
};

struct DiscoveryResult {
    Strategy strategy = Strategy::Pbm;
    std::vector<DeviceId> path; // empty on failure
    int hops = 0;
    int shortest_hops = 0;      // BFS hops over the Active in-range graph; 0 if unreachable
    bool success = false;
};

struct DiscoveryMetrics {
    std::optional<double> avg_path_length; // over successes; absent when none
    std::optional<double> avg_stretch;     // mean hops/shortest over successes
    double success_rate = 0.0;
};

// Runs one route-discovery attempt from src to dst with at most `budget`
// radio hops. Relays must be Active and hop-by-hop in range.
//   PBM: greedy geographic forwarding toward dst's coordinates; fails on a
//        local minimum.
//   HMM: forwards toward the center of the Viterbi-decoded current cell of
//        dst, then greedily toward dst itself once that cell is reached.
//   GM:  forwards along strictly increasing destination-seeded gradient
//        evaluated on cells.
// Throws UnknownDevice for unregistered endpoints.
DiscoveryResult discover(const World& world, Strategy strategy, DeviceId src, DeviceId dst,
                         int budget, const DiscoveryParams& params = {},
                         DiscoveryCache* cache = nullptr);

// Averages of one strategy's trial results. Path length and stretch are
// averaged over successes only and absent when there are none.
// Throws EmptyInput for an empty list.
DiscoveryMetrics compute_metrics(std::span<const DiscoveryResult> results);

} // namespace cms

#endif
